#pragma once

//
// End-to-end structure search: enumerate sketches, complete them against
// the spectra under a shared top-k cut, execute only the surviving
// candidates, round, and keep the smallest network. Also hosts the TT and
// binary-HT baselines, topology reuse, and the synthetic ground-truth
// generator.
//

#include <cstdint>
#include <optional>
#include <vector>

#include "tnsynth/dsl.hpp"
#include "tnsynth/network.hpp"
#include "tnsynth/rank_search.hpp"
#include "tnsynth/sketch.hpp"

namespace tnsynth {

struct SearchConfig {
    double eps = 0.1;              // relative error bound, in (0, 1)
    int topk = 1;                  // candidates to actually execute
    int max_splits = 0;            // 0 -> min(2d-3, 6)
    double bin_fraction = 0.1;
    std::uint64_t seed = 0;
    int threads = 1;
    RankStrategy rank_strategy = RankStrategy::Constraint;
};

struct PhaseTimings {
    double spectra_s = 0.0;
    double enumeration_s = 0.0;
    double completion_s = 0.0;
    double execution_s = 0.0;
    double rounding_s = 0.0;
    double total_s = 0.0;
};

struct SearchResult {
    TensorNetwork network;
    Program program;
    double achieved_rel_error = 0.0;
    double compression_ratio = 1.0;
    long long predicted_cost = 0;
    PhaseTimings timings;
    std::size_t sketch_count = 0;
    std::size_t executed_candidates = 0;
};

struct Candidate {
    TensorNetwork network;
    double remaining_budget_sq = 0.0;
    Program program;
    long long predicted_cost = 0;
};

struct SynthStats {
    std::size_t sketch_count = 0;
    std::size_t completed = 0;
    std::size_t executed = 0;
    PhaseTimings timings;
};

// Synthesis with deferred fitting: completes every sketch symbolically,
// keeps the top-k by predicted cost (ties: fewer splits, then enumeration
// order), and executes only those. Results are ordered by predicted cost
// ascending and independent of the worker count.
std::vector<Candidate> synth(const Tensor& t, double eps, int k, const SearchConfig& cfg,
                             SynthStats* stats = nullptr);

// Full search: synth, round each candidate with its leftover budget, return
// the smallest network (the single-node network is the fallback). The result
// always satisfies |N(G) - T| <= eps * |T| and size(G) <= size(T).
SearchResult search_structure(const Tensor& t, const SearchConfig& cfg);

// Reuses a known topology: completes, executes and rounds just this sketch.
SearchResult decompose_with_topology(const Tensor& t, const Sketch& s, double eps,
                                     const SearchConfig& cfg);

// Tensor-train along the given index order: chain splits with the squared
// budget divided equally, then rounding.
SearchResult tt_baseline(const Tensor& t, double eps);

// Balanced binary hierarchical Tucker over the given index order, same
// budget policy.
SearchResult ht_baseline(const Tensor& t, double eps);

// The blocks the baselines use, exposed for tests.
Sketch tt_sketch(const std::vector<Index>& free_indices);
Sketch ht_sketch(const std::vector<Index>& free_indices);

// --- synthetic ground-truth instances ---

struct SyntheticStructure {
    std::vector<Index> free_indices;
    Sketch sketch;              // blocks only, ranks are holes
    std::vector<int> ranks;     // per sketch expression
};

struct SyntheticInstance {
    Tensor tensor;
    TensorNetwork ground_truth;
    SyntheticStructure structure;
    double ground_truth_ratio = 1.0;
};

// Samples a random laminar family (random size in [1, 2d-3]) and random
// edge ranks in [rank_min, rank_max], clamped to what the bipartition
// admits. Deterministic per seed.
SyntheticStructure sample_synthetic_structure(const std::vector<std::size_t>& dims, int rank_min,
                                              int rank_max, std::uint64_t seed);

// Fills the structure's factors with i.i.d. standard normal entries and
// contracts them into the data tensor.
SyntheticInstance realize_synthetic(const SyntheticStructure& structure,
                                    std::uint64_t value_seed);

// sample + realize with seeds derived from one seed.
SyntheticInstance generate_synthetic(const std::vector<std::size_t>& dims, int rank_min,
                                     int rank_max, std::uint64_t seed);

}  // namespace tnsynth
