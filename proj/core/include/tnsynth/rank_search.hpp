#pragma once

//
// Constraint-based sketch completion. Spectra of the data tensor's
// matricizations bound the truncation error of every split, truncation
// options are binned, and a 0-1 cost model over one-hot bin choices is
// solved exactly for the smallest symbolic network size within the error
// budget.
//

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "tnsynth/dsl.hpp"
#include "tnsynth/partition.hpp"
#include "tnsynth/sketch.hpp"
#include "tnsynth/tensor.hpp"

namespace tnsynth {

struct SpectrumEntry {
    std::vector<double> sigma;       // ascending, matching the budget indexing
    std::vector<double> prefix_sq;   // prefix_sq[i] = sum of the i smallest squares
    std::size_t length() const { return sigma.size(); }
};

// Per-bipartition singular spectra of one data tensor, computed on demand
// and cached by canonical partition. The table holds a reference to the
// tensor; keep it alive for the table's lifetime. Thread-safe.
class SpectrumTable {
public:
    explicit SpectrumTable(const Tensor& t);

    const SpectrumEntry& at(const Partition& block) const;
    double norm_sq() const { return norm_sq_; }
    std::size_t computed_count() const;

private:
    const Tensor* tensor_;
    double norm_sq_;
    mutable std::mutex mutex_;
    mutable std::map<Partition, std::unique_ptr<SpectrumEntry>> cache_;
};

// One truncation option: discard the `discard` smallest singular values at
// the cost of `lambda` squared error.
struct BinOption {
    int discard = 0;
    double lambda = 0.0;
};

// Subsampled truncation options for one spectrum under the given squared
// budget: the zero-discard option, one option per bin target spaced by
// bin_fraction * budget, and the largest feasible discard. Discards never
// reach the full spectrum, so ranks stay positive.
std::vector<BinOption> bin_options(const SpectrumEntry& entry, double budget_sq,
                                   double bin_fraction);

// Objective summand: coeff * prod of the ranks chosen for `holes`.
struct SizeTerm {
    long long coeff = 1;
    std::vector<int> holes;
};

struct CostModel {
    struct HoleInfo {
        Partition block;
        int spectrum_len = 0;
        std::vector<BinOption> bins;   // ascending discard; bins[0] is (0, 0)
    };

    std::vector<HoleInfo> holes;
    double budget_sq = 0.0;
    std::optional<long long> topk_cut;
    std::vector<SizeTerm> terms;

    long long evaluate_discards(std::span<const int> discards) const;
    long long evaluate_ranks(std::span<const int> ranks) const;
};

CostModel build_cost_model(const Sketch& s, const std::vector<Index>& free_indices,
                           const SpectrumTable& table, double eps, double bin_fraction,
                           std::optional<long long> topk_cut);

struct Solution {
    std::vector<int> discards;   // one per hole
    long long cost = 0;
};

// Exact optimum of the model, or nullopt when the top-k cut makes it
// infeasible. Ties break toward the lexicographically smallest discard
// vector.
std::optional<Solution> solve(const CostModel& model);

// Explicit 0-1 integer program equivalent to the model: one-hot groups per
// hole, a budget row, linearized rank products, and the optional cost cut.
// Serves as the reference semantics the specialized solver is tested
// against.
struct ZeroOneProgram {
    struct LinTerm {
        double coeff = 0.0;
        int var = 0;
    };
    struct ProductLink {
        int y = 0;
        std::vector<int> factors;   // y <= f_k for all k, y >= sum f_k - (n-1)
    };
    struct ObjTerm {
        long long coeff = 0;
        int var = 0;
    };

    int num_vars = 0;                            // selection vars first, then y vars
    std::vector<std::vector<int>> one_hot;       // each group sums to exactly 1
    std::vector<LinTerm> budget_row;
    double budget_rhs = 0.0;
    std::vector<ProductLink> products;
    long long objective_constant = 0;
    std::vector<ObjTerm> objective;
    std::optional<long long> cut;
};

ZeroOneProgram encode_ilp(const CostModel& model);

enum class RankStrategy { Constraint, Equal };

struct Completion {
    Program program;
    long long predicted_cost = 0;
    std::vector<int> ranks;   // per hole, in sketch order
};

// Fills the sketch's holes. The constraint strategy solves the cost model;
// the equal strategy gives every split budget_sq / n and truncates as far
// as its share allows. Returns nullopt only when a top-k cut excludes every
// completion.
std::optional<Completion> complete_sketch(const Sketch& s, const std::vector<Index>& free_indices,
                                          const SpectrumTable& table, double eps,
                                          double bin_fraction, std::optional<long long> topk_cut,
                                          RankStrategy strategy);

}  // namespace tnsynth
