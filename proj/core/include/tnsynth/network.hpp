#pragma once

//
// Tree tensor networks: nodes hold tensors, contracted edges are identified
// by a shared index id in both endpoint tensors, every other index is a
// free edge. Networks are value types; the transformation kernels return
// new networks.
//

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "tnsynth/partition.hpp"
#include "tnsynth/tensor.hpp"

namespace tnsynth {

struct ContractedEdge {
    NodeId a = 0;
    NodeId b = 0;
    Index index;

    NodeId other(NodeId n) const { return n == a ? b : a; }
    bool touches(NodeId n) const { return a == n || b == n; }
};

class TensorNetwork {
public:
    TensorNetwork() = default;

    static TensorNetwork single_node(Tensor t);

    const std::map<NodeId, Tensor>& nodes() const { return nodes_; }
    const std::vector<ContractedEdge>& edges() const { return edges_; }
    std::size_t node_count() const { return nodes_.size(); }

    bool has_node(NodeId n) const { return nodes_.count(n) != 0; }
    const Tensor& tensor(NodeId n) const;

    // Free edges: (node, index) pairs for every index not used by a
    // contracted edge, ordered by index id.
    std::vector<std::pair<NodeId, Index>> free_edges() const;
    std::vector<Index> free_indices() const;
    std::vector<IndexId> free_index_ids() const;

    bool is_contracted(IndexId id) const;
    const ContractedEdge& edge_by_index(IndexId id) const;
    std::vector<NodeId> neighbors(NodeId n) const;

    // --- mutation, used by the transformation kernels ---

    // Node ids are assigned monotonically and never reused.
    NodeId add_node(Tensor t);
    void remove_node(NodeId n);
    void replace_tensor(NodeId n, Tensor t);
    void add_edge(NodeId a, NodeId b, Index index);
    void remove_edge(IndexId id);
    // Repoints one endpoint of the edge carrying `id` from `from` to `to`.
    void rewire(IndexId id, NodeId from, NodeId to);
    // Records the new extent of a contracted edge; endpoint tensors must
    // already carry the resized index.
    void set_edge_size(IndexId id, std::size_t size);

    // Fresh contracted-edge index named after the running split counter
    // ("r1", "r2", ...), skipping names already present in the network.
    Index allocate_edge_index(std::size_t size);

    // Continues id allocation above everything currently present. Called by
    // single_node; exposed for deserialization.
    void bump_counters();

private:
    std::map<NodeId, Tensor> nodes_;
    std::vector<ContractedEdge> edges_;
    NodeId next_node_ = 0;
    IndexId next_index_ = 0;
    std::uint32_t split_count_ = 0;
};

// Total element count over all node tensors.
unsigned long long network_size(const TensorNetwork& g);

// Contracts the whole tree into one tensor with indices in ascending-id
// order. The contraction order is greedy by smallest intermediate.
// Disconnected networks are rejected.
Tensor contract_all(const TensorNetwork& g);

// The bipartition of free indices induced by deleting the contracted edge
// carrying `edge_id`.
Partition edge_partition(const TensorNetwork& g, IndexId edge_id);

// Free indices of the subtree hanging off `at` through the mode `via`; for
// a free index this is the index itself.
std::vector<IndexId> subtree_free_ids(const TensorNetwork& g, NodeId at, IndexId via);

// QR sweep from the leaves toward `root`: afterwards every non-root node's
// matricization with the toward-root edge as columns has orthonormal
// columns, and the represented tensor is unchanged. Edge extents may shrink
// when a core has fewer rows than its parent edge.
TensorNetwork orthonormalize(const TensorNetwork& g, NodeId root);

// One re-truncation sweep over all contracted edges in canonical partition
// order. `budget_sq` is the remaining absolute squared error allowance,
// split equally across edges; singular values below 1e-12 * data_norm are
// dropped free of budget. Never grows the network.
TensorNetwork round_network(const TensorNetwork& g, double budget_sq, double data_norm);

// Contracts two adjacent nodes into one (fresh node id).
TensorNetwork merge_nodes(const TensorNetwork& g, NodeId a, NodeId b);

// Throws InternalError if the structural invariants are violated: the graph
// is a connected tree, edge indices exist in both endpoints with matching
// sizes, and every index id appears in exactly one edge record.
void validate_network(const TensorNetwork& g);

}  // namespace tnsynth
