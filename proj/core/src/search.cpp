#include "tnsynth/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <queue>
#include <set>
#include <stdexcept>
#include <thread>

#include "tnsynth/errors.hpp"
#include "tnsynth/rng.hpp"

namespace tnsynth {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_order(const Tensor& t) {
    if (t.order() < 3)
        throw UnsupportedError("structure search needs an order-3 or higher tensor; order-2 "
                               "inputs are a single truncated SVD");
}

void check_config(const SearchConfig& cfg) {
    if (cfg.eps <= 0.0 || cfg.eps >= 1.0)
        throw std::invalid_argument("eps must be in (0, 1)");
    if (cfg.topk < 1)
        throw std::invalid_argument("topk must be at least 1");
    if (cfg.threads < 1)
        throw std::invalid_argument("threads must be at least 1");
}

int effective_max_splits(const Tensor& t, const SearchConfig& cfg) {
    const int cap = max_realizable_splits(t.order());
    if (cfg.max_splits <= 0) return std::min(cap, 6);
    return std::min(cfg.max_splits, cap);
}

struct CompletionRecord {
    std::size_t ordinal = 0;
    std::size_t splits = 0;
    long long cost = 0;
    Program program;
};

// Running k-th-best predicted cost; stale reads only weaken pruning.
class TopKCut {
public:
    explicit TopKCut(std::size_t k) : k_(k) {}

    std::optional<long long> current() const {
        std::lock_guard<std::mutex> lock(mutex_);
        if (heap_.size() < k_) return std::nullopt;
        return heap_.top();
    }

    void offer(long long cost) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (heap_.size() < k_) {
            heap_.push(cost);
        } else if (cost < heap_.top()) {
            heap_.pop();
            heap_.push(cost);
        }
    }

private:
    std::size_t k_;
    mutable std::mutex mutex_;
    mutable std::priority_queue<long long> heap_;
};

double measured_relative_error(const Tensor& data, const TensorNetwork& g, double norm) {
    const Tensor n = contract_all(g);
    const Tensor d = sort_indices(data);
    if (n.element_count() != d.element_count())
        throw InternalError("network does not match the data tensor's shape");
    double sum = 0.0;
    const auto a = n.data();
    const auto b = d.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return norm == 0.0 ? 0.0 : std::sqrt(sum) / norm;
}

}  // namespace

std::vector<Candidate> synth(const Tensor& t, double eps, int k, const SearchConfig& cfg,
                             SynthStats* stats) {
    check_order(t);
    if (eps <= 0.0 || eps >= 1.0)
        throw std::invalid_argument("eps must be in (0, 1)");
    if (k < 1)
        throw std::invalid_argument("k must be at least 1");

    const auto total_start = Clock::now();
    SynthStats local;
    const std::vector<Index> free = t.indices();

    SpectrumTable table(t);
    {
        const auto start = Clock::now();
        for (const auto& part : canonical_partitions(free)) table.at(part);
        local.timings.spectra_s = seconds_since(start);
    }

    SketchSpace space{free, effective_max_splits(t, cfg)};
    SketchEnumerator enumerator(space);
    std::mutex enum_mutex;
    std::size_t next_ordinal = 0;
    double enum_seconds = 0.0;

    TopKCut cut(static_cast<std::size_t>(k));
    std::mutex results_mutex;
    std::vector<CompletionRecord> completed;

    const auto completion_start = Clock::now();
    auto worker = [&]() {
        while (true) {
            std::optional<Sketch> sketch;
            std::size_t ordinal = 0;
            {
                std::lock_guard<std::mutex> lock(enum_mutex);
                const auto t0 = Clock::now();
                sketch = enumerator.next();
                enum_seconds += seconds_since(t0);
                if (!sketch) return;
                ordinal = next_ordinal++;
            }
            auto completion = complete_sketch(*sketch, free, table, eps, cfg.bin_fraction,
                                              cut.current(), cfg.rank_strategy);
            if (!completion) continue;
            cut.offer(completion->predicted_cost);
            std::lock_guard<std::mutex> lock(results_mutex);
            completed.push_back(CompletionRecord{ordinal, sketch->size(),
                                                 completion->predicted_cost,
                                                 std::move(completion->program)});
        }
    };

    if (cfg.threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < cfg.threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    local.timings.completion_s = seconds_since(completion_start) - enum_seconds;
    local.timings.enumeration_s = enum_seconds;
    local.sketch_count = next_ordinal;
    local.completed = completed.size();

    // Deterministic top-k: cost, then fewer splits, then enumeration order.
    std::sort(completed.begin(), completed.end(),
              [](const CompletionRecord& a, const CompletionRecord& b) {
                  if (a.cost != b.cost) return a.cost < b.cost;
                  if (a.splits != b.splits) return a.splits < b.splits;
                  return a.ordinal < b.ordinal;
              });
    if (completed.size() > static_cast<std::size_t>(k)) completed.resize(static_cast<std::size_t>(k));

    std::vector<Candidate> out;
    const auto exec_start = Clock::now();
    for (const auto& rec : completed) {
        ProgramResult res = exec_program(rec.program, ExecState::initial(t, eps));
        ++local.executed;
        if (!res.ok()) continue;   // excluded by the cost-bound guarantee; skip defensively
        Candidate c;
        c.network = std::move(res.state->network);
        c.remaining_budget_sq = res.state->budget_sq;
        c.program = rec.program;
        c.predicted_cost = rec.cost;
        out.push_back(std::move(c));
    }
    local.timings.execution_s = seconds_since(exec_start);
    local.timings.total_s = seconds_since(total_start);

    if (stats) *stats = local;
    return out;
}

namespace {

SearchResult assemble_result(const Tensor& t, TensorNetwork network, Program program,
                             long long predicted, PhaseTimings timings, std::size_t sketch_count,
                             std::size_t executed, double eps) {
    const double norm = frobenius_norm(t);
    SearchResult r;
    r.achieved_rel_error = measured_relative_error(t, network, norm);
    r.compression_ratio = static_cast<double>(t.element_count()) /
                          static_cast<double>(network_size(network));
    r.network = std::move(network);
    r.program = std::move(program);
    r.predicted_cost = predicted;
    r.timings = timings;
    r.sketch_count = sketch_count;
    r.executed_candidates = executed;
    if (r.achieved_rel_error > eps + 1e-9)
        throw InternalError("result violates the error bound");
    if (network_size(r.network) > t.element_count())
        throw InternalError("result is larger than the input tensor");
    return r;
}

}  // namespace

SearchResult search_structure(const Tensor& t, const SearchConfig& cfg) {
    check_order(t);
    check_config(cfg);

    const auto total_start = Clock::now();
    const double norm = frobenius_norm(t);

    SynthStats stats;
    std::vector<Candidate> candidates = synth(t, cfg.eps, cfg.topk, cfg, &stats);

    // The single-node network is the fallback when nothing smaller exists.
    TensorNetwork best = TensorNetwork::single_node(t);
    Program best_program;
    long long best_predicted = static_cast<long long>(t.element_count());
    unsigned long long best_size = network_size(best);

    const auto round_start = Clock::now();
    for (auto& cand : candidates) {
        TensorNetwork rounded = round_network(cand.network, cand.remaining_budget_sq, norm);
        const unsigned long long size = network_size(rounded);
        if (size < best_size) {
            best = std::move(rounded);
            best_program = std::move(cand.program);
            best_predicted = cand.predicted_cost;
            best_size = size;
        }
    }
    stats.timings.rounding_s = seconds_since(round_start);
    stats.timings.total_s = seconds_since(total_start);

    return assemble_result(t, std::move(best), std::move(best_program), best_predicted,
                           stats.timings, stats.sketch_count, stats.executed, cfg.eps);
}

SearchResult decompose_with_topology(const Tensor& t, const Sketch& s, double eps,
                                     const SearchConfig& cfg) {
    check_order(t);
    if (eps <= 0.0 || eps >= 1.0)
        throw std::invalid_argument("eps must be in (0, 1)");

    const auto total_start = Clock::now();
    const std::vector<Index> free = t.indices();
    const auto universe = t.index_ids();

    // Re-anchor the sketch's blocks against this tensor; rejects unknown ids
    // and non-laminar families.
    Sketch anchored;
    int hole = 0;
    for (const auto& e : s.exprs) {
        Partition p = Partition::canonical(e.block.block(), universe);
        if (!valid_extension(anchored, p))
            throw std::invalid_argument("sketch is not a valid laminar family for this tensor");
        anchored.exprs.push_back(Expr{std::move(p), Hole{hole++}});
    }
    std::sort(anchored.exprs.begin(), anchored.exprs.end(),
              [](const Expr& a, const Expr& b) { return a.block < b.block; });

    PhaseTimings timings;
    SpectrumTable table(t);
    {
        const auto start = Clock::now();
        for (const auto& e : anchored.exprs) table.at(e.block);
        timings.spectra_s = seconds_since(start);
    }

    const auto completion_start = Clock::now();
    auto completion = complete_sketch(anchored, free, table, eps, cfg.bin_fraction, std::nullopt,
                                      cfg.rank_strategy);
    if (!completion)
        throw InternalError("uncut sketch completion cannot fail");
    timings.completion_s = seconds_since(completion_start);

    const auto exec_start = Clock::now();
    ProgramResult res = exec_program(completion->program, ExecState::initial(t, eps));
    if (!res.ok())
        throw InternalError("completion execution failed at expression " +
                            std::to_string(res.failed_index));
    timings.execution_s = seconds_since(exec_start);

    const auto round_start = Clock::now();
    TensorNetwork rounded =
        round_network(res.state->network, res.state->budget_sq, frobenius_norm(t));
    timings.rounding_s = seconds_since(round_start);
    timings.total_s = seconds_since(total_start);

    // Incompressible inputs can make a fixed topology larger than the data;
    // the single-node network is the fallback, as in the full search.
    if (network_size(rounded) > t.element_count()) {
        return assemble_result(t, TensorNetwork::single_node(t), Program{},
                               static_cast<long long>(t.element_count()), timings, 1, 1, eps);
    }
    return assemble_result(t, std::move(rounded), std::move(completion->program),
                           completion->predicted_cost, timings, 1, 1, eps);
}

Sketch tt_sketch(const std::vector<Index>& free_indices) {
    std::vector<IndexId> universe;
    for (const auto& ix : free_indices) universe.push_back(ix.id);
    ids::sort_unique(universe);

    Sketch s;
    std::vector<IndexId> prefix;
    int hole = 0;
    for (std::size_t i = 0; i + 1 < free_indices.size(); ++i) {
        prefix.push_back(free_indices[i].id);
        s.exprs.push_back(Expr{Partition::canonical(prefix, universe), Hole{hole++}});
    }
    return s;
}

Sketch ht_sketch(const std::vector<Index>& free_indices) {
    std::vector<IndexId> universe;
    for (const auto& ix : free_indices) universe.push_back(ix.id);
    ids::sort_unique(universe);

    std::set<Partition> blocks;
    // Recursive bisection of the index positions; every proper subrange of
    // length >= 1 below the root becomes a block.
    auto bisect = [&](auto&& self, std::size_t lo, std::size_t hi) -> void {
        if (hi - lo < free_indices.size()) {
            std::vector<IndexId> block;
            for (std::size_t i = lo; i < hi; ++i) block.push_back(free_indices[i].id);
            blocks.insert(Partition::canonical(std::move(block), universe));
        }
        if (hi - lo < 2) return;
        const std::size_t mid = lo + (hi - lo + 1) / 2;
        self(self, lo, mid);
        self(self, mid, hi);
    };
    bisect(bisect, 0, free_indices.size());

    Sketch s;
    int hole = 0;
    for (const auto& p : blocks) s.exprs.push_back(Expr{p, Hole{hole++}});
    return s;
}

namespace {

SearchResult run_baseline(const Tensor& t, double eps, const Sketch& sketch) {
    SearchConfig cfg;
    cfg.eps = eps;
    cfg.rank_strategy = RankStrategy::Equal;
    return decompose_with_topology(t, sketch, eps, cfg);
}

}  // namespace

SearchResult tt_baseline(const Tensor& t, double eps) {
    check_order(t);
    return run_baseline(t, eps, tt_sketch(t.indices()));
}

SearchResult ht_baseline(const Tensor& t, double eps) {
    check_order(t);
    return run_baseline(t, eps, ht_sketch(t.indices()));
}

// --- synthetic instances ---

SyntheticStructure sample_synthetic_structure(const std::vector<std::size_t>& dims, int rank_min,
                                              int rank_max, std::uint64_t seed) {
    if (dims.size() < 3)
        throw std::invalid_argument("synthetic instances need order >= 3");
    if (rank_min < 1 || rank_max < rank_min)
        throw std::invalid_argument("invalid rank range");

    SyntheticStructure out;
    for (std::size_t i = 0; i < dims.size(); ++i)
        out.free_indices.push_back(
            Index{static_cast<IndexId>(i), "I" + std::to_string(i + 1), dims[i]});

    Rng rng(seed);
    const auto parts = canonical_partitions(out.free_indices);
    const int cap = max_realizable_splits(dims.size());
    const std::size_t target = 1 + static_cast<std::size_t>(rng.uniform(0, cap - 1));

    std::vector<Partition> family;
    while (family.size() < target) {
        std::vector<const Partition*> candidates;
        for (const auto& p : parts) {
            bool ok = std::find(family.begin(), family.end(), p) == family.end();
            for (const auto& q : family)
                if (!partitions_compatible(p, q)) ok = false;
            if (ok) candidates.push_back(&p);
        }
        if (candidates.empty()) break;
        family.push_back(*candidates[rng.uniform(0, candidates.size() - 1)]);
    }
    std::sort(family.begin(), family.end());

    std::vector<IndexId> universe;
    for (const auto& ix : out.free_indices) universe.push_back(ix.id);
    int hole = 0;
    for (auto& p : family) {
        unsigned long long side = 1, other = 1;
        for (IndexId id : p.block()) side *= dims[id];
        for (IndexId id : p.complement(universe)) other *= dims[id];
        const unsigned long long cap_rank = std::min(side, other);
        int rank = rank_min + static_cast<int>(rng.uniform(0, rank_max - rank_min));
        rank = static_cast<int>(std::min<unsigned long long>(rank, cap_rank));
        out.ranks.push_back(rank);
        out.sketch.exprs.push_back(Expr{std::move(p), Hole{hole++}});
    }
    return out;
}

SyntheticInstance realize_synthetic(const SyntheticStructure& structure,
                                    std::uint64_t value_seed) {
    const AbstractTopology topo =
        topology_from_sketch(structure.sketch, structure.free_indices);
    Rng rng(value_seed);

    const std::size_t d = structure.free_indices.size();
    std::vector<Index> edge_index(topo.edges.size());
    for (std::size_t i = 0; i < topo.edges.size(); ++i) {
        const std::size_t eix = topo.edges[i].expr_ix;
        edge_index[i] = Index{static_cast<IndexId>(d + eix), "r" + std::to_string(eix + 1),
                              static_cast<std::size_t>(structure.ranks[eix])};
    }

    TensorNetwork g;
    std::vector<NodeId> node_of(topo.nodes.size());
    for (std::size_t i = 0; i < topo.nodes.size(); ++i) {
        std::vector<Index> indices;
        for (IndexId id : topo.nodes[i].free_ids) {
            for (const auto& ix : structure.free_indices)
                if (ix.id == id) indices.push_back(ix);
        }
        for (std::size_t eix : topo.nodes[i].edge_ixs) indices.push_back(edge_index[eix]);
        std::sort(indices.begin(), indices.end(),
                  [](const Index& a, const Index& b) { return a.id < b.id; });

        Tensor t = Tensor::zeros(indices);
        for (double& v : t.mutable_data()) v = rng.normal();
        node_of[i] = g.add_node(std::move(t));
    }
    for (std::size_t i = 0; i < topo.edges.size(); ++i)
        g.add_edge(node_of[topo.edges[i].a], node_of[topo.edges[i].b], edge_index[i]);
    g.bump_counters();

    SyntheticInstance out;
    out.tensor = contract_all(g);
    out.ground_truth_ratio = static_cast<double>(out.tensor.element_count()) /
                             static_cast<double>(network_size(g));
    out.ground_truth = std::move(g);
    out.structure = structure;
    return out;
}

SyntheticInstance generate_synthetic(const std::vector<std::size_t>& dims, int rank_min,
                                     int rank_max, std::uint64_t seed) {
    const SyntheticStructure structure =
        sample_synthetic_structure(dims, rank_min, rank_max, seed);
    // Distinct value stream derived from the same seed.
    return realize_synthetic(structure, seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
}

}  // namespace tnsynth
