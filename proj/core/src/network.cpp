#include "tnsynth/network.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <limits>
#include <set>
#include <stdexcept>

#include "tnsynth/errors.hpp"

namespace tnsynth {

namespace {

// Indices of `t` restricted to `ids`, in ascending-id order.
std::vector<Index> ordered_indices(const Tensor& t, std::span<const IndexId> ids) {
    std::vector<IndexId> sorted(ids.begin(), ids.end());
    ids::sort_unique(sorted);
    std::vector<Index> out;
    out.reserve(sorted.size());
    for (IndexId id : sorted) out.push_back(t.index_by_id(id));
    return out;
}

std::vector<IndexId> other_ids(const Tensor& t, IndexId excluded) {
    std::vector<IndexId> out;
    for (const auto& ix : t.indices())
        if (ix.id != excluded) out.push_back(ix.id);
    ids::sort_unique(out);
    return out;
}

}  // namespace

TensorNetwork TensorNetwork::single_node(Tensor t) {
    TensorNetwork g;
    g.add_node(std::move(t));
    g.bump_counters();
    return g;
}

const Tensor& TensorNetwork::tensor(NodeId n) const {
    auto it = nodes_.find(n);
    if (it == nodes_.end())
        throw std::invalid_argument("unknown node id");
    return it->second;
}

std::vector<std::pair<NodeId, Index>> TensorNetwork::free_edges() const {
    std::vector<std::pair<NodeId, Index>> out;
    for (const auto& [n, t] : nodes_)
        for (const auto& ix : t.indices())
            if (!is_contracted(ix.id)) out.emplace_back(n, ix);
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.second.id < b.second.id; });
    return out;
}

std::vector<Index> TensorNetwork::free_indices() const {
    std::vector<Index> out;
    for (auto& [n, ix] : free_edges()) out.push_back(ix);
    return out;
}

std::vector<IndexId> TensorNetwork::free_index_ids() const {
    std::vector<IndexId> out;
    for (auto& [n, ix] : free_edges()) out.push_back(ix.id);
    return out;
}

bool TensorNetwork::is_contracted(IndexId id) const {
    for (const auto& e : edges_)
        if (e.index.id == id) return true;
    return false;
}

const ContractedEdge& TensorNetwork::edge_by_index(IndexId id) const {
    for (const auto& e : edges_)
        if (e.index.id == id) return e;
    throw std::invalid_argument("no contracted edge carries this index id");
}

std::vector<NodeId> TensorNetwork::neighbors(NodeId n) const {
    std::vector<NodeId> out;
    for (const auto& e : edges_)
        if (e.touches(n)) out.push_back(e.other(n));
    std::sort(out.begin(), out.end());
    return out;
}

NodeId TensorNetwork::add_node(Tensor t) {
    const NodeId id = next_node_++;
    nodes_.emplace(id, std::move(t));
    return id;
}

void TensorNetwork::remove_node(NodeId n) {
    if (nodes_.erase(n) == 0)
        throw std::invalid_argument("unknown node id");
}

void TensorNetwork::replace_tensor(NodeId n, Tensor t) {
    auto it = nodes_.find(n);
    if (it == nodes_.end())
        throw std::invalid_argument("unknown node id");
    it->second = std::move(t);
}

void TensorNetwork::add_edge(NodeId a, NodeId b, Index index) {
    edges_.push_back(ContractedEdge{a, b, std::move(index)});
}

void TensorNetwork::remove_edge(IndexId id) {
    auto it = std::find_if(edges_.begin(), edges_.end(),
                           [&](const ContractedEdge& e) { return e.index.id == id; });
    if (it == edges_.end())
        throw std::invalid_argument("no contracted edge carries this index id");
    edges_.erase(it);
}

void TensorNetwork::rewire(IndexId id, NodeId from, NodeId to) {
    for (auto& e : edges_) {
        if (e.index.id != id) continue;
        if (e.a == from)
            e.a = to;
        else if (e.b == from)
            e.b = to;
        else
            throw std::invalid_argument("edge does not touch the given node");
        return;
    }
    throw std::invalid_argument("no contracted edge carries this index id");
}

void TensorNetwork::set_edge_size(IndexId id, std::size_t size) {
    for (auto& e : edges_) {
        if (e.index.id != id) continue;
        e.index.size = size;
        return;
    }
    throw std::invalid_argument("no contracted edge carries this index id");
}

Index TensorNetwork::allocate_edge_index(std::size_t size) {
    std::set<std::string> used;
    for (const auto& [n, t] : nodes_)
        for (const auto& ix : t.indices()) used.insert(ix.name);

    std::string name;
    do {
        name = "r" + std::to_string(++split_count_);
    } while (used.count(name) != 0);
    return Index{next_index_++, name, size};
}

void TensorNetwork::bump_counters() {
    for (const auto& [n, t] : nodes_) {
        next_node_ = std::max(next_node_, n + 1);
        for (const auto& ix : t.indices()) {
            next_index_ = std::max(next_index_, ix.id + 1);
            // Keep the split counter clear of existing rNN names.
            if (ix.name.size() > 1 && ix.name[0] == 'r') {
                char* end = nullptr;
                const unsigned long k = std::strtoul(ix.name.c_str() + 1, &end, 10);
                if (end && *end == '\0')
                    split_count_ = std::max<std::uint32_t>(split_count_, static_cast<std::uint32_t>(k));
            }
        }
    }
}

unsigned long long network_size(const TensorNetwork& g) {
    unsigned long long total = 0;
    for (const auto& [n, t] : g.nodes()) total += t.element_count();
    return total;
}

namespace {

void check_connected(const TensorNetwork& g) {
    if (g.nodes().empty())
        throw InvalidStateError("empty network");
    std::set<NodeId> seen;
    std::deque<NodeId> queue{g.nodes().begin()->first};
    seen.insert(queue.front());
    while (!queue.empty()) {
        const NodeId n = queue.front();
        queue.pop_front();
        for (NodeId m : g.neighbors(n))
            if (seen.insert(m).second) queue.push_back(m);
    }
    if (seen.size() != g.nodes().size())
        throw InvalidStateError("network is disconnected");
}

}  // namespace

Tensor contract_all(const TensorNetwork& g) {
    check_connected(g);

    std::vector<Tensor> work;
    work.reserve(g.nodes().size());
    for (const auto& [n, t] : g.nodes()) work.push_back(t);

    while (work.size() > 1) {
        double best_score = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < work.size(); ++i) {
            for (std::size_t j = i + 1; j < work.size(); ++j) {
                const auto shared =
                    ids::set_intersection(work[i].index_ids(), work[j].index_ids());
                if (shared.empty()) continue;
                double score = static_cast<double>(work[i].element_count()) *
                               static_cast<double>(work[j].element_count());
                for (IndexId id : shared) {
                    const double s = static_cast<double>(work[i].index_by_id(id).size);
                    score /= s * s;
                }
                if (score < best_score) {
                    best_score = score;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (!std::isfinite(best_score))
            throw InvalidStateError("network is disconnected");
        Tensor merged = contract(work[bi], work[bj]);
        work[bi] = std::move(merged);
        work.erase(work.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    return sort_indices(work.front());
}

std::vector<IndexId> subtree_free_ids(const TensorNetwork& g, NodeId at, IndexId via) {
    const Tensor& t = g.tensor(at);
    if (!t.has_index(via))
        throw std::invalid_argument("node does not carry this index");
    if (!g.is_contracted(via))
        return {via};

    // Walk the tree away from `at` across the edge carrying `via`.
    const auto& start_edge = g.edge_by_index(via);
    std::set<NodeId> seen{at};
    std::deque<NodeId> queue{start_edge.other(at)};
    seen.insert(start_edge.other(at));
    std::vector<IndexId> free;
    while (!queue.empty()) {
        const NodeId n = queue.front();
        queue.pop_front();
        for (const auto& ix : g.tensor(n).indices()) {
            if (!g.is_contracted(ix.id)) {
                free.push_back(ix.id);
                continue;
            }
            const NodeId m = g.edge_by_index(ix.id).other(n);
            if (seen.insert(m).second) queue.push_back(m);
        }
    }
    ids::sort_unique(free);
    return free;
}

Partition edge_partition(const TensorNetwork& g, IndexId edge_id) {
    if (!g.is_contracted(edge_id))
        throw std::invalid_argument("edge_partition requires a contracted edge");
    const auto& e = g.edge_by_index(edge_id);
    auto side = subtree_free_ids(g, e.b, edge_id);
    return Partition::canonical(std::move(side), g.free_index_ids());
}

namespace {

struct BfsTree {
    std::vector<NodeId> order;                 // BFS order from root
    std::map<NodeId, IndexId> parent_edge;     // toward-root edge per non-root node
    std::map<NodeId, NodeId> parent;
};

BfsTree bfs_from(const TensorNetwork& g, NodeId root) {
    if (!g.has_node(root))
        throw std::invalid_argument("unknown root node");
    BfsTree out;
    std::set<NodeId> seen{root};
    std::deque<NodeId> queue{root};
    while (!queue.empty()) {
        const NodeId n = queue.front();
        queue.pop_front();
        out.order.push_back(n);
        for (const auto& e : g.edges()) {
            if (!e.touches(n)) continue;
            const NodeId m = e.other(n);
            if (!seen.insert(m).second) continue;
            out.parent_edge[m] = e.index.id;
            out.parent[m] = n;
            queue.push_back(m);
        }
    }
    if (out.order.size() != g.nodes().size())
        throw InvalidStateError("network is disconnected");
    return out;
}

}  // namespace

TensorNetwork orthonormalize(const TensorNetwork& g, NodeId root) {
    TensorNetwork out = g;
    const BfsTree tree = bfs_from(out, root);

    // Leaves first: reversed BFS order visits children before parents.
    for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
        const NodeId v = *it;
        if (v == root) continue;
        const IndexId eid = tree.parent_edge.at(v);
        const NodeId parent = tree.parent.at(v);

        const Tensor& tv = out.tensor(v);
        const Index old_edge = tv.index_by_id(eid);
        const auto rest = other_ids(tv, eid);
        const Matrix m = to_matrix(tv, rest, std::vector<IndexId>{eid});
        const QrResult f = qr(m);
        const std::size_t k = static_cast<std::size_t>(f.q.cols());

        Index new_edge = old_edge;
        new_edge.size = k;
        out.replace_tensor(
            v, sort_indices(tensor_from_matrix(f.q, ordered_indices(tv, rest), {new_edge})));

        // Absorb R into the parent along the shared edge.
        const Tensor& tp = out.tensor(parent);
        const auto prest = other_ids(tp, eid);
        const Matrix pm = to_matrix(tp, std::vector<IndexId>{eid}, prest);
        const Matrix merged = f.r * pm;
        out.replace_tensor(
            parent,
            sort_indices(tensor_from_matrix(merged, {new_edge}, ordered_indices(tp, prest))));
        out.set_edge_size(eid, k);
    }
    return out;
}

TensorNetwork round_network(const TensorNetwork& g, double budget_sq, double data_norm) {
    if (g.edges().empty()) return g;
    if (budget_sq < 0.0)
        throw std::invalid_argument("negative error budget");

    // Fixed sweep order: edges sorted by their canonical partition.
    std::vector<std::pair<Partition, IndexId>> sweep;
    for (const auto& e : g.edges()) sweep.emplace_back(edge_partition(g, e.index.id), e.index.id);
    std::sort(sweep.begin(), sweep.end());

    const double allowance = budget_sq / static_cast<double>(sweep.size());
    const double zero_thresh = 1e-12 * data_norm;

    TensorNetwork out = g;
    for (const auto& [part, eid] : sweep) {
        const auto& e = out.edge_by_index(eid);
        const NodeId center = std::min(e.a, e.b);
        const NodeId side = e.other(center);

        out = orthonormalize(out, center);
        const Tensor& tc = out.tensor(center);
        const Index edge_ix = tc.index_by_id(eid);
        const std::size_t r = edge_ix.size;

        const auto rest = other_ids(tc, eid);
        const Matrix m = to_matrix(tc, std::vector<IndexId>{eid}, rest);
        const SvdResult f = svd(m);
        const std::size_t len = static_cast<std::size_t>(f.sigma.size());

        std::size_t k_free = 0;
        for (std::size_t i = 0; i < len; ++i)
            if (f.sigma[static_cast<Eigen::Index>(i)] > zero_thresh) ++k_free;
        k_free = std::max<std::size_t>(k_free, 1);

        std::size_t keep = k_free;
        double spent = 0.0;
        while (keep > 1) {
            const double s = f.sigma[static_cast<Eigen::Index>(keep - 1)];
            if (spent + s * s > allowance) break;
            spent += s * s;
            --keep;
        }
        if (keep >= r) continue;

        Index new_edge = edge_ix;
        new_edge.size = keep;
        const Eigen::Index kk = static_cast<Eigen::Index>(keep);

        const Matrix core = f.sigma.head(kk).asDiagonal() * f.vt.topRows(kk);
        out.replace_tensor(center, sort_indices(tensor_from_matrix(
                                       core, {new_edge}, ordered_indices(tc, rest))));

        const Tensor& ts = out.tensor(side);
        const auto srest = other_ids(ts, eid);
        const Matrix sm = to_matrix(ts, std::vector<IndexId>{eid}, srest);
        const Matrix projected = f.u.leftCols(kk).transpose() * sm;
        out.replace_tensor(side, sort_indices(tensor_from_matrix(
                                     projected, {new_edge}, ordered_indices(ts, srest))));
        out.set_edge_size(eid, keep);
    }
    return out;
}

TensorNetwork merge_nodes(const TensorNetwork& g, NodeId a, NodeId b) {
    if (a == b)
        throw std::invalid_argument("cannot merge a node with itself");
    bool adjacent = false;
    for (const auto& e : g.edges())
        if (e.touches(a) && e.touches(b)) adjacent = true;
    if (!adjacent)
        throw std::invalid_argument("merge_nodes requires adjacent nodes");

    TensorNetwork out = g;
    Tensor merged = contract(out.tensor(a), out.tensor(b));

    std::vector<IndexId> between;
    for (const auto& e : out.edges())
        if (e.touches(a) && e.touches(b)) between.push_back(e.index.id);
    for (IndexId id : between) out.remove_edge(id);

    const NodeId fresh = out.add_node(std::move(merged));
    for (const auto& e : out.edges()) {
        if (e.touches(a)) out.rewire(e.index.id, a, fresh);
        else if (e.touches(b)) out.rewire(e.index.id, b, fresh);
    }
    out.remove_node(a);
    out.remove_node(b);
    return out;
}

void validate_network(const TensorNetwork& g) {
    if (g.nodes().empty())
        throw InternalError("network has no nodes");

    std::map<IndexId, std::vector<NodeId>> occurrences;
    for (const auto& [n, t] : g.nodes())
        for (const auto& ix : t.indices()) occurrences[ix.id].push_back(n);

    std::set<IndexId> edge_ids;
    for (const auto& e : g.edges()) {
        if (!edge_ids.insert(e.index.id).second)
            throw InternalError("index id used by two contracted edges");
        if (!g.has_node(e.a) || !g.has_node(e.b) || e.a == e.b)
            throw InternalError("edge endpoints invalid");
        for (NodeId n : {e.a, e.b}) {
            const Tensor& t = g.tensor(n);
            if (!t.has_index(e.index.id))
                throw InternalError("edge index missing from endpoint tensor");
            if (t.index_by_id(e.index.id).size != e.index.size)
                throw InternalError("edge size disagrees with endpoint tensor");
        }
        const auto& occ = occurrences.at(e.index.id);
        if (occ.size() != 2)
            throw InternalError("contracted index must appear in exactly two nodes");
    }
    for (const auto& [id, occ] : occurrences) {
        if (edge_ids.count(id) == 0 && occ.size() != 1)
            throw InternalError("free index appears in more than one node");
    }

    if (g.edges().size() + 1 != g.nodes().size())
        throw InternalError("edge count does not match a tree");
    try {
        check_connected(g);
    } catch (const InvalidStateError&) {
        throw InternalError("network is disconnected");
    }
}

}  // namespace tnsynth
