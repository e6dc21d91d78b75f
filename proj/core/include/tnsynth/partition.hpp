#pragma once

//
// Bipartitions of the data tensor's free indices. A partition is stored by
// one block only; the canonical representative is the side NOT containing
// the globally smallest free-index id, so equality and compatibility are
// complement-free.
//

#include <compare>
#include <vector>

#include "tnsynth/ids.hpp"
#include "tnsynth/tensor.hpp"

namespace tnsynth {

class Partition {
public:
    Partition() = default;

    // `block` may be either side of the bipartition; `universe` is the full
    // set of free-index ids (sorted). The block must be a proper nonempty
    // subset of the universe.
    static Partition canonical(std::vector<IndexId> block, std::span<const IndexId> universe);

    const std::vector<IndexId>& block() const { return block_; }
    std::size_t block_size() const { return block_.size(); }

    std::vector<IndexId> complement(std::span<const IndexId> universe) const;

    // The side used for printing: the smaller one, ties broken toward the
    // side containing the smallest id. Both sides parse back to the same
    // canonical partition.
    std::vector<IndexId> display_side(std::span<const IndexId> universe) const;

    friend bool operator==(const Partition& a, const Partition& b) { return a.block_ == b.block_; }

    // Canonical order: by block size, then lexicographically by ids.
    friend bool operator<(const Partition& a, const Partition& b) {
        if (a.block_.size() != b.block_.size()) return a.block_.size() < b.block_.size();
        return a.block_ < b.block_;
    }

private:
    std::vector<IndexId> block_;
};

// Two canonical partitions can coexist as edges of one tree iff their
// stored blocks are nested or disjoint.
bool partitions_compatible(const Partition& a, const Partition& b);

}  // namespace tnsynth
