#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

namespace tnsynth {

using IndexId = std::uint32_t;
using NodeId = std::uint32_t;

// Sorted-unique id vectors double as small sets everywhere below.
namespace ids {

inline void sort_unique(std::vector<IndexId>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

inline bool contains(std::span<const IndexId> set, IndexId id) {
    return std::binary_search(set.begin(), set.end(), id);
}

inline bool is_subset(std::span<const IndexId> a, std::span<const IndexId> b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline bool is_disjoint(std::span<const IndexId> a, std::span<const IndexId> b) {
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib)
            ++ia;
        else if (*ib < *ia)
            ++ib;
        else
            return false;
    }
    return true;
}

inline std::vector<IndexId> set_union(std::span<const IndexId> a, std::span<const IndexId> b) {
    std::vector<IndexId> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline std::vector<IndexId> set_intersection(std::span<const IndexId> a, std::span<const IndexId> b) {
    std::vector<IndexId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline std::vector<IndexId> set_difference(std::span<const IndexId> a, std::span<const IndexId> b) {
    std::vector<IndexId> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

}  // namespace ids
}  // namespace tnsynth
