#include "tnsynth/partition.hpp"

#include <stdexcept>

namespace tnsynth {

Partition Partition::canonical(std::vector<IndexId> block, std::span<const IndexId> universe) {
    if (universe.size() < 2)
        throw std::invalid_argument("partition universe must have at least two ids");
    ids::sort_unique(block);
    if (block.empty() || block.size() >= universe.size())
        throw std::invalid_argument("partition block must be a proper nonempty subset");
    if (!ids::is_subset(block, universe))
        throw std::invalid_argument("partition block contains ids outside the universe");

    Partition p;
    if (ids::contains(block, universe.front()))
        p.block_ = ids::set_difference(universe, block);
    else
        p.block_ = std::move(block);
    return p;
}

std::vector<IndexId> Partition::complement(std::span<const IndexId> universe) const {
    return ids::set_difference(universe, block_);
}

std::vector<IndexId> Partition::display_side(std::span<const IndexId> universe) const {
    auto other = complement(universe);
    if (block_.size() < other.size()) return block_;
    if (other.size() < block_.size()) return other;
    // Equal halves: prefer the side with the smallest id, which is the
    // complement of the canonical block by construction.
    return other;
}

bool partitions_compatible(const Partition& a, const Partition& b) {
    const auto& x = a.block();
    const auto& y = b.block();
    return ids::is_subset(x, y) || ids::is_subset(y, x) || ids::is_disjoint(x, y);
}

}  // namespace tnsynth
