#include "tnsynth/sketch.hpp"

#include <algorithm>
#include <stdexcept>

#include "tnsynth/errors.hpp"

namespace tnsynth {

std::vector<Partition> canonical_partitions(const std::vector<Index>& free_indices) {
    if (free_indices.size() < 3)
        throw std::invalid_argument("need at least three free indices");
    std::vector<IndexId> universe;
    for (const auto& ix : free_indices) universe.push_back(ix.id);
    ids::sort_unique(universe);
    if (universe.size() != free_indices.size())
        throw std::invalid_argument("free index ids must be distinct");

    // Canonical blocks are exactly the nonempty subsets of the universe
    // minus its smallest id.
    const std::vector<IndexId> rest(universe.begin() + 1, universe.end());
    const std::size_t n = rest.size();
    std::vector<Partition> parts;
    parts.reserve((std::size_t{1} << n) - 1);
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<IndexId> block;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) block.push_back(rest[i]);
        parts.push_back(Partition::canonical(std::move(block), universe));
    }
    std::sort(parts.begin(), parts.end());
    return parts;
}

SketchEnumerator::SketchEnumerator(SketchSpace space) {
    parts_ = canonical_partitions(space.free_indices);
    const int cap = max_realizable_splits(space.free_indices.size());
    if (space.max_splits < 1)
        throw std::invalid_argument("max_splits must be positive");
    max_splits_ = static_cast<std::size_t>(std::min(space.max_splits, cap));
}

bool SketchEnumerator::push_from(std::size_t from) {
    for (std::size_t j = from; j < parts_.size(); ++j) {
        bool ok = true;
        for (std::size_t i : stack_)
            if (!partitions_compatible(parts_[i], parts_[j])) {
                ok = false;
                break;
            }
        if (ok) {
            stack_.push_back(j);
            return true;
        }
    }
    return false;
}

Sketch SketchEnumerator::current() const {
    Sketch s;
    s.exprs.reserve(stack_.size());
    int hole = 0;
    for (std::size_t i : stack_) s.exprs.push_back(Expr{parts_[i], Hole{hole++}});
    return s;
}

std::optional<Sketch> SketchEnumerator::next() {
    if (done_) return std::nullopt;
    if (fresh_) {
        fresh_ = false;
        if (!push_from(0)) {
            done_ = true;
            return std::nullopt;
        }
        return current();
    }
    // Preorder walk: descend first, otherwise advance the deepest frame.
    if (stack_.size() < max_splits_ && push_from(stack_.back() + 1)) return current();
    while (!stack_.empty()) {
        const std::size_t last = stack_.back();
        stack_.pop_back();
        if (push_from(last + 1)) return current();
    }
    done_ = true;
    return std::nullopt;
}

std::vector<Sketch> enumerate_sketches(const SketchSpace& space) {
    SketchEnumerator en(space);
    std::vector<Sketch> out;
    while (auto s = en.next()) out.push_back(std::move(*s));
    return out;
}

AbstractTopology topology_from_sketch(const Sketch& s, const std::vector<Index>& free_indices) {
    std::vector<IndexId> universe;
    for (const auto& ix : free_indices) universe.push_back(ix.id);
    ids::sort_unique(universe);

    // Reject non-laminar or duplicated blocks up front.
    for (std::size_t i = 0; i < s.exprs.size(); ++i)
        for (std::size_t j = i + 1; j < s.exprs.size(); ++j) {
            if (s.exprs[i].block == s.exprs[j].block)
                throw std::invalid_argument("sketch contains a duplicate partition");
            if (!partitions_compatible(s.exprs[i].block, s.exprs[j].block))
                throw std::invalid_argument("sketch blocks are not laminar");
        }

    // Inclusion forest over canonical blocks, rooted at the full universe.
    const std::size_t n = s.exprs.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.exprs[a].block.block_size() < s.exprs[b].block.block_size();
    });

    constexpr std::size_t kRoot = static_cast<std::size_t>(-1);
    std::vector<std::size_t> parent(n, kRoot);
    for (std::size_t oi = 0; oi < n; ++oi) {
        const std::size_t b = order[oi];
        // Smallest strictly containing block, if any.
        for (std::size_t oj = oi + 1; oj < n; ++oj) {
            const std::size_t c = order[oj];
            if (s.exprs[c].block.block_size() == s.exprs[b].block.block_size()) continue;
            if (ids::is_subset(s.exprs[b].block.block(), s.exprs[c].block.block())) {
                parent[b] = c;
                break;
            }
        }
    }

    AbstractTopology topo;
    topo.nodes.resize(n + 1);   // node i hosts block i; node n is the root
    const std::size_t root_node = n;

    std::vector<std::vector<IndexId>> covered(n + 1);
    for (std::size_t b = 0; b < n; ++b) {
        const std::size_t p = parent[b] == kRoot ? root_node : parent[b];
        covered[p] = ids::set_union(covered[p], s.exprs[b].block.block());
    }
    for (std::size_t b = 0; b < n; ++b)
        topo.nodes[b].free_ids = ids::set_difference(s.exprs[b].block.block(), covered[b]);
    topo.nodes[root_node].free_ids = ids::set_difference(universe, covered[root_node]);

    for (std::size_t b = 0; b < n; ++b) {
        const std::size_t p = parent[b] == kRoot ? root_node : parent[b];
        AbstractTopology::Edge e;
        e.a = b;
        e.b = p;
        e.partition = s.exprs[b].block;
        e.expr_ix = b;
        topo.nodes[b].edge_ixs.push_back(topo.edges.size());
        topo.nodes[p].edge_ixs.push_back(topo.edges.size());
        topo.edges.push_back(std::move(e));
    }
    return topo;
}

}  // namespace tnsynth
