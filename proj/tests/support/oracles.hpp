#pragma once

//
// Test-only oracles, kept independent of the library code paths they check:
// element-wise network contraction, raw-set partition compatibility,
// brute-force sketch counting, exhaustive cost-model enumeration, and a
// literal node-bijection isomorphism test.
//

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "tnsynth/network.hpp"
#include "tnsynth/partition.hpp"
#include "tnsynth/rank_search.hpp"
#include "tnsynth/rng.hpp"
#include "tnsynth/tensor.hpp"

namespace oracles {

using namespace tnsynth;

inline Tensor random_tensor(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    std::vector<Index> indices;
    for (std::size_t i = 0; i < dims.size(); ++i)
        indices.push_back(Index{static_cast<IndexId>(i), "I" + std::to_string(i + 1), dims[i]});
    Tensor t = Tensor::zeros(indices);
    Rng rng(seed);
    for (double& v : t.mutable_data()) v = rng.normal();
    return t;
}

// Element-wise contraction of an arbitrary network: sums the product of all
// node entries over every assignment of the contracted indices. Exponential
// and only fit for tiny networks, which is the point.
inline Tensor brute_force_contract(const TensorNetwork& g) {
    std::vector<Index> free = g.free_indices();
    std::vector<Index> bound;
    for (const auto& e : g.edges()) bound.push_back(e.index);

    Tensor out = Tensor::zeros(free);
    std::vector<std::size_t> fc(free.size(), 0);
    std::vector<std::size_t> bc(bound.size(), 0);

    auto entry = [&](const Tensor& t) {
        std::vector<std::size_t> coords;
        for (const auto& ix : t.indices()) {
            bool found = false;
            for (std::size_t i = 0; i < free.size(); ++i)
                if (free[i].id == ix.id) {
                    coords.push_back(fc[i]);
                    found = true;
                }
            for (std::size_t i = 0; i < bound.size(); ++i)
                if (bound[i].id == ix.id) {
                    coords.push_back(bc[i]);
                    found = true;
                }
            if (!found) throw std::logic_error("index not covered");
        }
        return t.at(coords);
    };

    while (true) {
        double sum = 0.0;
        std::fill(bc.begin(), bc.end(), 0);
        while (true) {
            double prod = 1.0;
            for (const auto& [n, t] : g.nodes()) prod *= entry(t);
            sum += prod;
            std::size_t i = bound.size();
            while (i-- > 0) {
                if (++bc[i] < bound[i].size) break;
                bc[i] = 0;
                if (i == 0) goto bound_done;
            }
            if (bound.empty()) break;
        }
    bound_done:
        out.at(fc) = sum;

        std::size_t i = free.size();
        while (i-- > 0) {
            if (++fc[i] < free[i].size) break;
            fc[i] = 0;
            if (i == 0) return out;
        }
        if (free.empty()) return out;
    }
}

inline double rel_diff(const Tensor& a, const Tensor& b) {
    const Tensor x = sort_indices(a);
    const Tensor y = sort_indices(b);
    if (x.element_count() != y.element_count()) throw std::logic_error("shape mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.data().size(); ++i) {
        const double d = x.data()[i] - y.data()[i];
        num += d * d;
        den += y.data()[i] * y.data()[i];
    }
    return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

// Raw-set compatibility: two bipartitions can coexist in one tree iff one
// of the four pairwise intersections of their sides is empty.
inline bool raw_compatible(const std::vector<IndexId>& a, const std::vector<IndexId>& b,
                           const std::vector<IndexId>& universe) {
    const auto ac = ids::set_difference(universe, a);
    const auto bc = ids::set_difference(universe, b);
    return ids::is_disjoint(a, b) || ids::is_disjoint(a, bc) || ids::is_disjoint(ac, b) ||
           ids::is_disjoint(ac, bc);
}

// All valid sketches by filtering every subset of canonical partitions with
// the raw-set compatibility test.
inline std::size_t brute_force_sketch_count(const std::vector<Index>& free_indices,
                                            int max_splits) {
    std::vector<IndexId> universe;
    for (const auto& ix : free_indices) universe.push_back(ix.id);
    ids::sort_unique(universe);

    const auto parts = canonical_partitions(free_indices);
    const std::size_t n = parts.size();
    std::size_t count = 0;
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<std::size_t> chosen;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) chosen.push_back(i);
        if (chosen.size() > static_cast<std::size_t>(max_splits)) continue;
        bool ok = true;
        for (std::size_t i = 0; i < chosen.size() && ok; ++i)
            for (std::size_t j = i + 1; j < chosen.size() && ok; ++j)
                ok = raw_compatible(parts[chosen[i]].block(), parts[chosen[j]].block(), universe);
        if (ok) ++count;
    }
    return count;
}

// Random synthetic cost model, decoupled from any tensor.
inline CostModel make_random_cost_model(Rng& rng, std::size_t max_holes, std::size_t max_bins) {
    CostModel m;
    const std::size_t holes = 1 + rng.uniform(0, max_holes - 1);
    m.budget_sq = 1.0;
    const std::vector<IndexId> universe{0, 1, 2, 3, 4, 5, 6, 7};
    for (std::size_t h = 0; h < holes; ++h) {
        CostModel::HoleInfo info;
        info.block = Partition::canonical({static_cast<IndexId>(h + 1)}, universe);
        info.spectrum_len = 4 + static_cast<int>(rng.uniform(0, 12));
        info.bins.push_back(BinOption{0, 0.0});
        const std::size_t extra = rng.uniform(0, max_bins - 1);
        int discard = 0;
        double lambda = 0.0;
        for (std::size_t b = 0; b < extra; ++b) {
            discard += 1 + static_cast<int>(rng.uniform(0, 2));
            if (discard >= info.spectrum_len) break;
            lambda += 0.03 + 0.2 * rng.uniform01();
            if (lambda > m.budget_sq) break;
            info.bins.push_back(BinOption{discard, lambda});
        }
        m.holes.push_back(std::move(info));
    }
    m.terms.push_back(SizeTerm{3 + static_cast<long long>(rng.uniform(0, 20)), {}});
    for (std::size_t h = 0; h < holes; ++h)
        m.terms.push_back(
            SizeTerm{1 + static_cast<long long>(rng.uniform(0, 8)), {static_cast<int>(h)}});
    if (holes >= 2)
        for (int extra = 0; extra < 2; ++extra) {
            const int a = static_cast<int>(rng.uniform(0, holes - 1));
            const int b = static_cast<int>(rng.uniform(0, holes - 1));
            if (a == b) continue;
            m.terms.push_back(SizeTerm{1 + static_cast<long long>(rng.uniform(0, 4)),
                                       {std::min(a, b), std::max(a, b)}});
        }
    return m;
}

// Exhaustive enumeration of the cost model's bin choices in lexicographic
// order, keeping the first strict optimum.
inline std::optional<Solution> brute_force_solve(const CostModel& model) {
    std::optional<Solution> best;
    std::vector<int> combo(model.holes.size(), 0);

    auto recurse = [&](auto&& self, std::size_t level, double err) -> void {
        if (level == model.holes.size()) {
            std::vector<int> discards(model.holes.size());
            for (std::size_t i = 0; i < combo.size(); ++i)
                discards[i] = model.holes[i].bins[static_cast<std::size_t>(combo[i])].discard;
            const long long cost = model.evaluate_discards(discards);
            if (model.topk_cut && cost > *model.topk_cut) return;
            if (!best || cost < best->cost) best = Solution{std::move(discards), cost};
            return;
        }
        for (std::size_t b = 0; b < model.holes[level].bins.size(); ++b) {
            const double lambda = model.holes[level].bins[b].lambda;
            if (err + lambda > model.budget_sq) continue;
            combo[level] = static_cast<int>(b);
            self(self, level + 1, err + lambda);
        }
    };
    recurse(recurse, 0, 0.0);
    return best;
}

// Exhaustive evaluation of the explicit 0-1 program: enumerates one-hot
// selections, forces the y variables from their linearization rows, and
// minimizes the objective.
inline std::optional<long long> brute_force_ilp(const ZeroOneProgram& p) {
    std::optional<long long> best;
    std::vector<int> value(static_cast<std::size_t>(p.num_vars), 0);
    std::vector<std::size_t> pick(p.one_hot.size(), 0);

    auto recurse = [&](auto&& self, std::size_t group) -> void {
        if (group == p.one_hot.size()) {
            double lhs = 0.0;
            for (const auto& t : p.budget_row) lhs += t.coeff * value[static_cast<std::size_t>(t.var)];
            if (lhs > p.budget_rhs) return;
            for (const auto& link : p.products) {
                int min_f = 1;
                int sum_f = 0;
                for (int f : link.factors) {
                    min_f = std::min(min_f, value[static_cast<std::size_t>(f)]);
                    sum_f += value[static_cast<std::size_t>(f)];
                }
                const int lo = std::max(0, sum_f - static_cast<int>(link.factors.size()) + 1);
                if (lo > min_f) throw std::logic_error("linearization admits no y value");
                if (lo != min_f) throw std::logic_error("linearization does not force y");
                value[static_cast<std::size_t>(link.y)] = min_f;
            }
            long long obj = p.objective_constant;
            for (const auto& t : p.objective)
                obj += t.coeff * value[static_cast<std::size_t>(t.var)];
            if (p.cut && obj > *p.cut) return;
            if (!best || obj < *best) best = obj;
            return;
        }
        for (std::size_t i = 0; i < p.one_hot[group].size(); ++i) {
            for (std::size_t j = 0; j < p.one_hot[group].size(); ++j)
                value[static_cast<std::size_t>(p.one_hot[group][j])] = i == j ? 1 : 0;
            pick[group] = i;
            self(self, group + 1);
        }
    };
    recurse(recurse, 0);
    return best;
}

// Fingerprint equality implies isomorphism for trees whose edge partitions
// are pairwise distinct.
inline std::multiset<std::vector<IndexId>> edge_partition_set(const TensorNetwork& g) {
    std::multiset<std::vector<IndexId>> out;
    for (const auto& e : g.edges()) out.insert(edge_partition(g, e.index.id).block());
    return out;
}

// Literal graph isomorphism over node bijections; checks adjacency and
// free-index attachment. Only for small networks.
inline bool networks_isomorphic(const TensorNetwork& a, const TensorNetwork& b) {
    if (a.node_count() != b.node_count() || a.edges().size() != b.edges().size()) return false;

    std::vector<NodeId> an, bn;
    for (const auto& [n, t] : a.nodes()) an.push_back(n);
    for (const auto& [n, t] : b.nodes()) bn.push_back(n);

    auto free_ids_of = [](const TensorNetwork& g, NodeId n) {
        std::vector<IndexId> out;
        for (const auto& ix : g.tensor(n).indices())
            if (!g.is_contracted(ix.id)) out.push_back(ix.id);
        ids::sort_unique(out);
        return out;
    };
    auto adjacent = [](const TensorNetwork& g, NodeId x, NodeId y) {
        for (const auto& e : g.edges())
            if (e.touches(x) && e.touches(y)) return true;
        return false;
    };

    std::sort(bn.begin(), bn.end());
    do {
        bool ok = true;
        for (std::size_t i = 0; i < an.size() && ok; ++i)
            ok = free_ids_of(a, an[i]) == free_ids_of(b, bn[i]);
        for (std::size_t i = 0; i < an.size() && ok; ++i)
            for (std::size_t j = i + 1; j < an.size() && ok; ++j)
                ok = adjacent(a, an[i], an[j]) == adjacent(b, bn[i], bn[j]);
        if (ok) return true;
    } while (std::next_permutation(bn.begin(), bn.end()));
    return false;
}

// The four-node network of a three-split program over four modes, with
// explicit factor tensors: A(I1,r1), B(I2,r3), C(r1,r2,r3), D(r2,I3,I4).
struct FourNodeNetwork {
    TensorNetwork network;
    Tensor a, b, c, d;
};

inline FourNodeNetwork make_four_node_network(const std::vector<std::size_t>& dims,
                                              const std::vector<std::size_t>& ranks,
                                              std::uint64_t seed) {
    Rng rng(seed);
    const Index i1{0, "I1", dims[0]}, i2{1, "I2", dims[1]}, i3{2, "I3", dims[2]},
        i4{3, "I4", dims[3]};
    const Index r1{4, "r1", ranks[0]}, r2{5, "r2", ranks[1]}, r3{6, "r3", ranks[2]};

    auto fill = [&](Tensor t) {
        for (double& v : t.mutable_data()) v = rng.normal();
        return t;
    };
    FourNodeNetwork out;
    out.a = fill(Tensor::zeros({i1, r1}));
    out.b = fill(Tensor::zeros({i2, r3}));
    out.c = fill(Tensor::zeros({r1, r2, r3}));
    out.d = fill(Tensor::zeros({r2, i3, i4}));

    TensorNetwork g;
    const NodeId na = g.add_node(out.a);
    const NodeId nb = g.add_node(out.b);
    const NodeId nc = g.add_node(out.c);
    const NodeId nd = g.add_node(out.d);
    g.add_edge(na, nc, r1);
    g.add_edge(nc, nd, r2);
    g.add_edge(nb, nc, r3);
    g.bump_counters();
    out.network = std::move(g);
    return out;
}

}  // namespace oracles
