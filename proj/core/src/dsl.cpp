#include "tnsynth/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

#include "tnsynth/errors.hpp"

namespace tnsynth {

bool Program::has_holes() const {
    for (const auto& e : exprs)
        if (is_hole(e.rank)) return true;
    return false;
}

ExecState ExecState::initial(Tensor data, double eps) {
    if (eps < 0.0)
        throw std::invalid_argument("negative error bound");
    const double norm = frobenius_norm(data);
    ExecState st;
    st.network = TensorNetwork::single_node(std::move(data));
    st.data_norm = norm;
    st.budget_sq = (eps * norm) * (eps * norm);
    return st;
}

namespace {

// Budget comparisons get a hair of relative slack: executed tails are
// bounded by the precomputed spectra only up to roundoff.
bool fits_budget(double tail_sq, double budget_sq) {
    return tail_sq <= budget_sq * (1.0 + 1e-9) || tail_sq == 0.0;
}

}  // namespace

std::optional<ExecState> exec_isplit(ExecState st, NodeId node,
                                     const std::vector<IndexId>& isplit_ids, int rank) {
    if (rank < 1)
        throw std::invalid_argument("split rank must be positive");
    {
        const Tensor& t = st.network.tensor(node);
        if (isplit_ids.empty() || isplit_ids.size() >= t.order())
            throw std::invalid_argument("isplit index set must be a proper nonempty subset");
        for (IndexId id : isplit_ids)
            if (!t.has_index(id))
                throw std::invalid_argument("isplit index not attached to node");
    }

    TensorNetwork g = orthonormalize(st.network, node);
    const Tensor& t = g.tensor(node);

    std::vector<IndexId> rows(isplit_ids);
    ids::sort_unique(rows);
    const std::vector<IndexId> cols = ids::set_difference(t.index_ids(), rows);

    const Matrix m = to_matrix(t, rows, cols);
    const SvdResult f = svd(m);
    const std::size_t len = static_cast<std::size_t>(f.sigma.size());

    // Suffix sums of squared singular values: tail[k] is the mass discarded
    // when keeping the k largest.
    std::vector<double> tail(len + 1, 0.0);
    for (std::size_t k = len; k-- > 0;)
        tail[k] = tail[k + 1] + f.sigma[static_cast<Eigen::Index>(k)] *
                                    f.sigma[static_cast<Eigen::Index>(k)];

    std::size_t r_min = len;
    for (std::size_t k = 0; k <= len; ++k) {
        if (fits_budget(tail[k], st.budget_sq)) {
            r_min = k;
            break;
        }
    }
    r_min = std::max<std::size_t>(r_min, 1);
    if (r_min > static_cast<std::size_t>(rank)) return std::nullopt;

    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(rank), len);
    const double spent = tail[keep];
    const Eigen::Index kk = static_cast<Eigen::Index>(keep);

    const Index fresh = g.allocate_edge_index(keep);

    std::vector<Index> row_indices, col_indices;
    for (IndexId id : rows) row_indices.push_back(t.index_by_id(id));
    for (IndexId id : cols) col_indices.push_back(t.index_by_id(id));

    Tensor u_node = sort_indices(tensor_from_matrix(f.u.leftCols(kk), row_indices, {fresh}));
    const Matrix sv = f.sigma.head(kk).asDiagonal() * f.vt.topRows(kk);
    Tensor sv_node = sort_indices(tensor_from_matrix(sv, {fresh}, col_indices));

    const NodeId u_id = g.add_node(std::move(u_node));
    const NodeId sv_id = g.add_node(std::move(sv_node));

    for (const auto& e : g.edges()) {
        if (!e.touches(node)) continue;
        const bool to_u = ids::contains(rows, e.index.id);
        g.rewire(e.index.id, node, to_u ? u_id : sv_id);
    }
    g.add_edge(u_id, sv_id, fresh);
    g.remove_node(node);

    ExecState out;
    out.network = std::move(g);
    out.budget_sq = std::max(0.0, st.budget_sq - spent);
    out.data_norm = st.data_norm;
    return out;
}

std::optional<ExecState> exec_osplit(ExecState st, const Partition& block, int rank) {
    // A partition already realized by an edge leaves the state untouched;
    // the requested rank is not reconciled with the existing edge.
    for (const auto& e : st.network.edges())
        if (edge_partition(st.network, e.index.id) == block) return st;

    const auto& target = block.block();
    for (const auto& [node, t] : st.network.nodes()) {
        bool ok = true;
        std::vector<IndexId> gathered;
        for (const auto& ix : t.indices()) {
            const auto sub = subtree_free_ids(st.network, node, ix.id);
            if (ids::is_subset(sub, target))
                gathered.push_back(ix.id);
            else if (!ids::is_disjoint(sub, target)) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        if (gathered.empty() || gathered.size() >= t.order())
            throw InternalError("osplit scan gathered a trivial mode subset");
        return exec_isplit(std::move(st), node, gathered, rank);
    }
    return std::nullopt;
}

ProgramResult exec_program(const Program& p, ExecState s0) {
    if (p.has_holes())
        throw std::invalid_argument("cannot execute a sketch; fill holes first");
    ProgramResult out;
    ExecState st = std::move(s0);
    for (std::size_t i = 0; i < p.exprs.size(); ++i) {
        auto next = exec_osplit(std::move(st), p.exprs[i].block, rank_value(p.exprs[i].rank));
        if (!next) {
            out.failed_index = i;
            return out;
        }
        st = std::move(*next);
    }
    out.state = std::move(st);
    return out;
}

bool valid_extension(const Sketch& s, const Partition& block) {
    for (const auto& e : s.exprs) {
        if (e.block == block) return false;
        if (!partitions_compatible(e.block, block)) return false;
    }
    return true;
}

Program fill(const Sketch& s, const std::map<int, int>& assignment) {
    Program out;
    out.exprs.reserve(s.exprs.size());
    for (const auto& e : s.exprs) {
        if (!is_hole(e.rank)) {
            out.exprs.push_back(e);
            continue;
        }
        const auto it = assignment.find(std::get<Hole>(e.rank).id);
        if (it == assignment.end())
            throw std::invalid_argument("rank assignment does not cover all holes");
        if (it->second < 1)
            throw std::invalid_argument("assigned rank must be positive");
        out.exprs.push_back(Expr{e.block, it->second});
    }
    return out;
}

bool programs_equivalent(const Program& a, const Program& b) {
    if (a.has_holes() || b.has_holes())
        throw std::invalid_argument("programs_equivalent requires complete programs");
    auto key = [](const Program& p) {
        std::vector<std::pair<std::vector<IndexId>, int>> k;
        for (const auto& e : p.exprs) k.emplace_back(e.block.block(), rank_value(e.rank));
        std::sort(k.begin(), k.end());
        return k;
    };
    return key(a) == key(b);
}

// --- program text ---

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

IndexId id_by_name(const std::vector<Index>& indices, const std::string& name,
                   std::size_t line_no) {
    for (const auto& ix : indices)
        if (ix.name == name) return ix.id;
    throw FileFormatError("line " + std::to_string(line_no) + ": unknown index name '" + name +
                          "'");
}

}  // namespace

Program parse_program(const std::string& text, const std::vector<Index>& free_indices) {
    std::vector<IndexId> universe;
    for (const auto& ix : free_indices) universe.push_back(ix.id);
    ids::sort_unique(universe);

    Program out;
    int next_hole = 0;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;

        const std::string kw = "osplit";
        if (line.rfind(kw, 0) != 0)
            throw FileFormatError("line " + std::to_string(line_no) +
                                  ": expected 'osplit {...} rank=...'");
        const auto lb = line.find('{');
        const auto rb = line.find('}');
        if (lb == std::string::npos || rb == std::string::npos || rb < lb)
            throw FileFormatError("line " + std::to_string(line_no) + ": malformed block");

        std::vector<IndexId> block;
        std::string inner = line.substr(lb + 1, rb - lb - 1);
        std::istringstream items(inner);
        std::string item;
        while (std::getline(items, item, ',')) {
            const std::string name = trim(item);
            if (name.empty())
                throw FileFormatError("line " + std::to_string(line_no) + ": empty index name");
            block.push_back(id_by_name(free_indices, name, line_no));
        }
        if (block.empty())
            throw FileFormatError("line " + std::to_string(line_no) + ": empty block");

        std::string tail = trim(line.substr(rb + 1));
        const std::string prefix = "rank=";
        if (tail.rfind(prefix, 0) != 0)
            throw FileFormatError("line " + std::to_string(line_no) + ": expected rank=");
        const std::string rank_str = trim(tail.substr(prefix.size()));

        RankSpec rank;
        if (rank_str == "?") {
            rank = Hole{next_hole++};
        } else {
            try {
                std::size_t used = 0;
                const int r = std::stoi(rank_str, &used);
                if (used != rank_str.size() || r < 1) throw std::invalid_argument("rank");
                rank = r;
            } catch (const std::exception&) {
                throw FileFormatError("line " + std::to_string(line_no) + ": bad rank '" +
                                      rank_str + "'");
            }
        }

        Partition part;
        try {
            part = Partition::canonical(std::move(block), universe);
        } catch (const std::invalid_argument& ex) {
            throw FileFormatError("line " + std::to_string(line_no) + ": " + ex.what());
        }
        out.exprs.push_back(Expr{std::move(part), rank});
    }
    return out;
}

std::string print_expr(const Expr& e, const std::vector<Index>& free_indices) {
    std::vector<IndexId> universe;
    for (const auto& ix : free_indices) universe.push_back(ix.id);
    ids::sort_unique(universe);

    auto name_of = [&](IndexId id) -> const std::string& {
        for (const auto& ix : free_indices)
            if (ix.id == id) return ix.name;
        throw std::invalid_argument("expression references an unknown index id");
    };

    std::ostringstream out;
    out << "osplit {";
    const auto side = e.block.display_side(universe);
    for (std::size_t i = 0; i < side.size(); ++i) {
        if (i) out << ",";
        out << name_of(side[i]);
    }
    out << "} rank=";
    if (is_hole(e.rank))
        out << "?";
    else
        out << rank_value(e.rank);
    return out.str();
}

std::string print_program(const Program& p, const std::vector<Index>& free_indices) {
    std::ostringstream out;
    for (const auto& e : p.exprs) out << print_expr(e, free_indices) << "\n";
    return out.str();
}

}  // namespace tnsynth
