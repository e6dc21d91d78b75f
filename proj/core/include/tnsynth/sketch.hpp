#pragma once

//
// Exhaustive, deterministic enumeration of valid sketches (laminar families
// of partitions with rank holes) up to a split budget, plus the symbolic
// tree a sketch denotes.
//

#include <optional>
#include <vector>

#include "tnsynth/dsl.hpp"
#include "tnsynth/partition.hpp"

namespace tnsynth {

struct SketchSpace {
    std::vector<Index> free_indices;   // d >= 3
    int max_splits = 0;                // clamped to 2d-3
};

// All canonical partitions of the given free indices, in canonical order
// (by block size, then lexicographic). There are 2^(d-1) - 1 of them.
std::vector<Partition> canonical_partitions(const std::vector<Index>& free_indices);

// Maximum number of distinct edge partitions a single tree can realize.
inline int max_realizable_splits(std::size_t order) {
    return static_cast<int>(2 * order) - 3;
}

// Lazily yields every nonempty valid sketch exactly once, in lexicographic
// order over canonically sorted block sequences. Expressions carry fresh
// holes numbered 0,1,... within each sketch.
class SketchEnumerator {
public:
    explicit SketchEnumerator(SketchSpace space);

    std::optional<Sketch> next();

private:
    bool push_from(std::size_t from);
    Sketch current() const;

    std::vector<Partition> parts_;
    std::size_t max_splits_ = 0;
    std::vector<std::size_t> stack_;
    bool fresh_ = true;
    bool done_ = false;
};

std::vector<Sketch> enumerate_sketches(const SketchSpace& space);

// The tree a sketch denotes before any data is touched: one edge per block,
// nodes carrying the uncovered free indices. It matches the topology that
// executing any completion of the sketch produces.
struct AbstractTopology {
    struct Node {
        std::vector<IndexId> free_ids;        // ascending
        std::vector<std::size_t> edge_ixs;    // into edges
    };
    struct Edge {
        std::size_t a = 0;
        std::size_t b = 0;
        Partition partition;
        std::size_t expr_ix = 0;   // position of the block in the sketch
    };
    std::vector<Node> nodes;
    std::vector<Edge> edges;
};

AbstractTopology topology_from_sketch(const Sketch& s, const std::vector<Index>& free_indices);

}  // namespace tnsynth
