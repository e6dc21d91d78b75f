#pragma once

//
// The transformation language: sequences of output-directed splits. A rank
// may be a hole, in which case the program is a sketch awaiting completion.
// Execution threads a (network, remaining squared error budget) state and
// propagates failure.
//

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tnsynth/network.hpp"
#include "tnsynth/partition.hpp"

namespace tnsynth {

struct Hole {
    int id = 0;
    friend bool operator==(const Hole& a, const Hole& b) { return a.id == b.id; }
};

using RankSpec = std::variant<Hole, int>;

inline bool is_hole(const RankSpec& r) { return std::holds_alternative<Hole>(r); }
inline int rank_value(const RankSpec& r) { return std::get<int>(r); }

struct Expr {
    Partition block;
    RankSpec rank;
};

// A Program with any hole in it is a sketch.
struct Program {
    std::vector<Expr> exprs;

    bool has_holes() const;
    std::size_t size() const { return exprs.size(); }
};

using Sketch = Program;

struct ExecState {
    TensorNetwork network;
    double budget_sq = 0.0;   // remaining absolute squared error allowance
    double data_norm = 1.0;   // Frobenius norm of the data tensor

    static ExecState initial(Tensor data, double eps);
};

// Splits the node identified by the scan of exec_osplit along the given
// subset of its modes via truncated SVD after orthonormalizing toward it.
// Fails (nullopt) when the requested rank is below the smallest rank whose
// discarded squared tail fits the remaining budget.
std::optional<ExecState> exec_isplit(ExecState st, NodeId node,
                                     const std::vector<IndexId>& isplit_ids, int rank);

// Realizes the free-index partition `block` by scanning nodes in ascending
// id order for one whose neighboring subtrees are each inside or disjoint
// from the block. A partition already realized by an edge is a no-op; an
// incompatible block fails.
std::optional<ExecState> exec_osplit(ExecState st, const Partition& block, int rank);

struct ProgramResult {
    std::optional<ExecState> state;
    std::size_t failed_index = static_cast<std::size_t>(-1);

    bool ok() const { return state.has_value(); }
};

// Applies the expressions left to right; the first failure aborts the rest.
// The program must be complete (no holes).
ProgramResult exec_program(const Program& p, ExecState s0);

// True iff appending an expression with this block keeps the sketch's block
// family laminar and duplicate-free.
bool valid_extension(const Sketch& s, const Partition& block);

// Replaces every hole with its assigned rank. All holes must be covered.
Program fill(const Sketch& s, const std::map<int, int>& assignment);

// Complete programs are equivalent iff their (partition, rank) multisets
// are equal.
bool programs_equivalent(const Program& a, const Program& b);

// --- program text format ---
//
//   # comment
//   osplit {I1,I2} rank=5
//   osplit {I3} rank=?
//
// Blocks use index names of the data tensor; either side of a partition is
// accepted.
Program parse_program(const std::string& text, const std::vector<Index>& free_indices);
std::string print_program(const Program& p, const std::vector<Index>& free_indices);
std::string print_expr(const Expr& e, const std::vector<Index>& free_indices);

}  // namespace tnsynth
