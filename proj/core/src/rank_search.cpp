#include "tnsynth/rank_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tnsynth/errors.hpp"

namespace tnsynth {

SpectrumTable::SpectrumTable(const Tensor& t) : tensor_(&t) {
    const double norm = frobenius_norm(t);
    norm_sq_ = norm * norm;
}

const SpectrumEntry& SpectrumTable::at(const Partition& block) const {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(block);
        if (it != cache_.end()) return *it->second;
    }

    const MatricizedTensor m = matricize(*tensor_, block.block());
    const Vector sv = singular_values(m.mat);

    auto entry = std::make_unique<SpectrumEntry>();
    entry->sigma.resize(static_cast<std::size_t>(sv.size()));
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        entry->sigma[static_cast<std::size_t>(sv.size() - 1 - i)] = sv[i];
    entry->prefix_sq.resize(entry->sigma.size() + 1, 0.0);
    for (std::size_t i = 0; i < entry->sigma.size(); ++i)
        entry->prefix_sq[i + 1] = entry->prefix_sq[i] + entry->sigma[i] * entry->sigma[i];

    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = cache_.emplace(block, std::move(entry));
    return *it->second;
}

std::size_t SpectrumTable::computed_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.size();
}

std::vector<BinOption> bin_options(const SpectrumEntry& entry, double budget_sq,
                                   double bin_fraction) {
    if (bin_fraction <= 0.0 || bin_fraction > 1.0)
        throw std::invalid_argument("bin fraction must be in (0, 1]");
    if (budget_sq < 0.0)
        throw std::invalid_argument("negative budget");

    const int len = static_cast<int>(entry.length());
    const int max_discard = len - 1;   // ranks stay >= 1

    // Largest feasible discard under the full budget.
    int terminal = 0;
    for (int b = 0; b <= max_discard; ++b)
        if (entry.prefix_sq[static_cast<std::size_t>(b)] <= budget_sq) terminal = b;

    std::vector<BinOption> out;
    out.push_back(BinOption{0, 0.0});

    const int steps = static_cast<int>(std::floor(1.0 / bin_fraction));
    int prev = 0;
    for (int j = 1; j <= steps; ++j) {
        const double target = static_cast<double>(j) * bin_fraction * budget_sq;
        // Largest discard whose error does not exceed the bin's target.
        int b = prev;
        while (b < terminal && entry.prefix_sq[static_cast<std::size_t>(b + 1)] <= target) ++b;
        if (b > prev) {
            out.push_back(BinOption{b, entry.prefix_sq[static_cast<std::size_t>(b)]});
            prev = b;
        }
    }
    if (terminal > prev)
        out.push_back(BinOption{terminal, entry.prefix_sq[static_cast<std::size_t>(terminal)]});
    return out;
}

long long CostModel::evaluate_discards(std::span<const int> discards) const {
    std::vector<int> ranks(holes.size());
    for (std::size_t i = 0; i < holes.size(); ++i)
        ranks[i] = holes[i].spectrum_len - discards[i];
    return evaluate_ranks(ranks);
}

long long CostModel::evaluate_ranks(std::span<const int> ranks) const {
    long long total = 0;
    for (const auto& term : terms) {
        long long v = term.coeff;
        for (int h : term.holes) v *= ranks[static_cast<std::size_t>(h)];
        total += v;
    }
    return total;
}

CostModel build_cost_model(const Sketch& s, const std::vector<Index>& free_indices,
                           const SpectrumTable& table, double eps, double bin_fraction,
                           std::optional<long long> topk_cut) {
    if (eps <= 0.0 || eps >= 1.0)
        throw std::invalid_argument("eps must be in (0, 1)");

    CostModel model;
    model.budget_sq = eps * eps * table.norm_sq();
    model.topk_cut = topk_cut;

    for (const auto& e : s.exprs) {
        const SpectrumEntry& entry = table.at(e.block);
        CostModel::HoleInfo h;
        h.block = e.block;
        h.spectrum_len = static_cast<int>(entry.length());
        h.bins = bin_options(entry, model.budget_sq, bin_fraction);
        model.holes.push_back(std::move(h));
    }

    const AbstractTopology topo = topology_from_sketch(s, free_indices);
    auto size_of = [&](IndexId id) -> long long {
        for (const auto& ix : free_indices)
            if (ix.id == id) return static_cast<long long>(ix.size);
        throw InternalError("topology references an unknown free index");
    };
    for (const auto& node : topo.nodes) {
        SizeTerm term;
        for (IndexId id : node.free_ids) term.coeff *= size_of(id);
        for (std::size_t eix : node.edge_ixs)
            term.holes.push_back(static_cast<int>(topo.edges[eix].expr_ix));
        std::sort(term.holes.begin(), term.holes.end());
        model.terms.push_back(std::move(term));
    }
    return model;
}

namespace {

// Depth-first search over per-hole bin choices in lexicographic discard
// order; prunes on the budget and on a lower bound that fills the remaining
// holes with their largest discards.
struct BranchAndBound {
    const CostModel& model;
    std::vector<int> min_rank;   // per hole, rank at maximal discard
    std::vector<int> chosen;     // discard per hole
    std::vector<int> best_discards;
    long long best_cost = std::numeric_limits<long long>::max();
    bool found = false;

    explicit BranchAndBound(const CostModel& m) : model(m) {
        min_rank.reserve(m.holes.size());
        for (const auto& h : m.holes)
            min_rank.push_back(h.spectrum_len - h.bins.back().discard);
        chosen.resize(m.holes.size(), 0);
    }

    long long lower_bound(std::size_t fixed) const {
        std::vector<int> ranks(model.holes.size());
        for (std::size_t i = 0; i < model.holes.size(); ++i)
            ranks[i] = i < fixed ? model.holes[i].spectrum_len - chosen[i] : min_rank[i];
        return model.evaluate_ranks(ranks);
    }

    void run(std::size_t level, double err) {
        const long long lb = lower_bound(level);
        if (lb >= best_cost && found) return;
        if (model.topk_cut && lb > *model.topk_cut) return;

        if (level == model.holes.size()) {
            const long long cost = model.evaluate_discards(chosen);
            if (model.topk_cut && cost > *model.topk_cut) return;
            if (!found || cost < best_cost) {
                found = true;
                best_cost = cost;
                best_discards = chosen;
            }
            return;
        }
        for (const auto& bin : model.holes[level].bins) {
            if (err + bin.lambda > model.budget_sq) continue;
            chosen[level] = bin.discard;
            run(level + 1, err + bin.lambda);
        }
        chosen[level] = 0;
    }
};

}  // namespace

std::optional<Solution> solve(const CostModel& model) {
    if (model.holes.empty()) {
        // Constant model; only the cut can reject it.
        const long long cost = model.evaluate_discards({});
        if (model.topk_cut && cost > *model.topk_cut) return std::nullopt;
        return Solution{{}, cost};
    }
    BranchAndBound bb(model);
    bb.run(0, 0.0);
    if (!bb.found) return std::nullopt;
    return Solution{std::move(bb.best_discards), bb.best_cost};
}

ZeroOneProgram encode_ilp(const CostModel& model) {
    ZeroOneProgram p;
    p.budget_rhs = model.budget_sq;
    p.cut = model.topk_cut;

    // Selection variables r^s_b, one per (hole, bin).
    std::vector<std::vector<int>> var_of(model.holes.size());
    for (std::size_t s = 0; s < model.holes.size(); ++s) {
        std::vector<int> group;
        for (const auto& bin : model.holes[s].bins) {
            const int v = p.num_vars++;
            var_of[s].push_back(v);
            group.push_back(v);
            if (bin.lambda > 0.0)
                p.budget_row.push_back(ZeroOneProgram::LinTerm{bin.lambda, v});
        }
        p.one_hot.push_back(std::move(group));
    }

    // Objective: expand each size term over the bin combinations of its
    // holes; products of two or more selections become y variables.
    std::map<std::vector<int>, int> y_of;
    auto product_var = [&](std::vector<int> factors) -> int {
        auto it = y_of.find(factors);
        if (it != y_of.end()) return it->second;
        const int y = p.num_vars++;
        y_of.emplace(factors, y);
        p.products.push_back(ZeroOneProgram::ProductLink{y, std::move(factors)});
        return y;
    };

    for (const auto& term : model.terms) {
        if (term.holes.empty()) {
            p.objective_constant += term.coeff;
            continue;
        }
        std::vector<std::size_t> combo(term.holes.size(), 0);
        bool more = true;
        while (more) {
            long long coeff = term.coeff;
            std::vector<int> factors;
            for (std::size_t i = 0; i < term.holes.size(); ++i) {
                const auto& h = model.holes[static_cast<std::size_t>(term.holes[i])];
                coeff *= h.spectrum_len - h.bins[combo[i]].discard;
                factors.push_back(var_of[static_cast<std::size_t>(term.holes[i])][combo[i]]);
            }
            const int v = factors.size() == 1 ? factors.front() : product_var(std::move(factors));
            p.objective.push_back(ZeroOneProgram::ObjTerm{coeff, v});

            more = false;
            for (std::size_t i = term.holes.size(); i-- > 0;) {
                const auto& h = model.holes[static_cast<std::size_t>(term.holes[i])];
                if (++combo[i] < h.bins.size()) {
                    more = true;
                    break;
                }
                combo[i] = 0;
            }
        }
    }
    return p;
}

std::optional<Completion> complete_sketch(const Sketch& s, const std::vector<Index>& free_indices,
                                          const SpectrumTable& table, double eps,
                                          double bin_fraction, std::optional<long long> topk_cut,
                                          RankStrategy strategy) {
    CostModel model = build_cost_model(s, free_indices, table, eps, bin_fraction, topk_cut);

    std::vector<int> discards;
    long long cost = 0;
    if (strategy == RankStrategy::Constraint) {
        auto sol = solve(model);
        if (!sol) return std::nullopt;
        discards = std::move(sol->discards);
        cost = sol->cost;
    } else {
        // Equal error distribution: every split gets budget_sq / n and
        // truncates as far as its share allows, uncapped by bins.
        const double share =
            s.exprs.empty() ? 0.0 : model.budget_sq / static_cast<double>(s.exprs.size());
        for (const auto& e : s.exprs) {
            const SpectrumEntry& entry = table.at(e.block);
            const int max_discard = static_cast<int>(entry.length()) - 1;
            int b = 0;
            while (b < max_discard && entry.prefix_sq[static_cast<std::size_t>(b + 1)] <= share)
                ++b;
            discards.push_back(b);
        }
        cost = model.evaluate_discards(discards);
        if (topk_cut && cost > *topk_cut) return std::nullopt;
    }

    Completion out;
    out.predicted_cost = cost;
    std::map<int, int> assignment;
    for (std::size_t i = 0; i < s.exprs.size(); ++i) {
        const int rank = model.holes[i].spectrum_len - discards[i];
        out.ranks.push_back(rank);
        if (is_hole(s.exprs[i].rank)) assignment[std::get<Hole>(s.exprs[i].rank).id] = rank;
    }
    out.program = fill(s, assignment);
    return out;
}

}  // namespace tnsynth
