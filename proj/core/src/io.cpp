#include "tnsynth/io.hpp"

#include <bit>
#include <cstring>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tnsynth/errors.hpp"

namespace tnsynth {

namespace {

using nlohmann::json;

void put_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void put_u16(std::ostream& out, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>(v >> 8)};
    put_bytes(out, b, 2);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    put_bytes(out, b, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void get_bytes(std::istream& in, void* p, std::size_t n, const char* what) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw FileFormatError(std::string("truncated tensor file while reading ") + what);
}

std::uint16_t get_u16(std::istream& in, const char* what) {
    unsigned char b[2];
    get_bytes(in, b, 2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint64_t get_u64(std::istream& in, const char* what) {
    unsigned char b[8];
    get_bytes(in, b, 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

double get_f64(std::istream& in, const char* what) {
    return std::bit_cast<double>(get_u64(in, what));
}

}  // namespace

void write_tensor_file(const std::filesystem::path& path, const Tensor& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FileFormatError("cannot open '" + path.string() + "' for writing");

    put_bytes(out, "TNSR", 4);
    put_u16(out, kTensorFileVersion);
    put_u16(out, static_cast<std::uint16_t>(t.order()));
    for (const auto& ix : t.indices()) {
        if (ix.name.size() > 0xffff)
            throw FileFormatError("index name too long");
        put_u16(out, static_cast<std::uint16_t>(ix.name.size()));
        put_bytes(out, ix.name.data(), ix.name.size());
        put_u64(out, ix.size);
    }
    for (double v : t.data()) put_f64(out, v);
    if (!out)
        throw FileFormatError("write failed for '" + path.string() + "'");
}

Tensor read_tensor_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FileFormatError("cannot open '" + path.string() + "'");

    char magic[4];
    get_bytes(in, magic, 4, "magic");
    if (std::memcmp(magic, "TNSR", 4) != 0)
        throw FileFormatError("'" + path.string() + "' is not a tensor file (bad magic)");
    const std::uint16_t version = get_u16(in, "version");
    if (version != kTensorFileVersion)
        throw FileFormatError("unsupported tensor file version " + std::to_string(version));
    const std::uint16_t order = get_u16(in, "order");
    if (order == 0)
        throw FileFormatError("tensor order must be positive");

    std::vector<Index> indices;
    std::set<std::string> names;
    std::uint64_t elements = 1;
    for (std::uint16_t i = 0; i < order; ++i) {
        const std::uint16_t len = get_u16(in, "name length");
        std::string name(len, '\0');
        get_bytes(in, name.data(), len, "name");
        const std::uint64_t size = get_u64(in, "size");
        if (size == 0)
            throw FileFormatError("index '" + name + "' has size 0");
        if (!names.insert(name).second)
            throw FileFormatError("duplicate index name '" + name + "'");
        if (elements > (std::uint64_t{1} << 40) / size)
            throw FileFormatError("tensor payload too large");
        elements *= size;
        indices.push_back(Index{static_cast<IndexId>(i), std::move(name), size});
    }

    std::vector<double> data(elements);
    for (std::uint64_t i = 0; i < elements; ++i) data[i] = get_f64(in, "payload");
    if (in.peek() != std::char_traits<char>::eof())
        throw FileFormatError("trailing bytes after payload in '" + path.string() + "'");
    return Tensor(std::move(indices), std::move(data));
}

namespace {

std::string join_names(const std::vector<std::string>& names) {
    std::string out = "{";
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ",";
        out += names[i];
    }
    return out + "}";
}

std::vector<std::string> partition_display_names(const TensorNetwork& g, IndexId edge_id) {
    const auto universe = g.free_index_ids();
    const auto free = g.free_indices();
    const Partition p = edge_partition(g, edge_id);
    std::vector<std::string> names;
    for (IndexId id : p.display_side(universe)) {
        for (const auto& ix : free)
            if (ix.id == id) names.push_back(ix.name);
    }
    return names;
}

// Deterministic edge order for serialization.
std::vector<IndexId> sorted_edge_ids(const TensorNetwork& g) {
    std::vector<std::pair<Partition, IndexId>> keyed;
    for (const auto& e : g.edges()) keyed.emplace_back(edge_partition(g, e.index.id), e.index.id);
    std::sort(keyed.begin(), keyed.end());
    std::vector<IndexId> out;
    for (auto& [p, id] : keyed) out.push_back(id);
    return out;
}

}  // namespace

std::string topology_text(const TensorNetwork& g) {
    std::ostringstream out;
    for (const auto& [node, ix] : g.free_edges())
        out << "free " << ix.name << " " << ix.size << " @ " << node << "\n";
    for (IndexId id : sorted_edge_ids(g)) {
        const auto& e = g.edge_by_index(id);
        out << "edge " << std::min(e.a, e.b) << "-" << std::max(e.a, e.b) << " rank "
            << e.index.size << " partition " << join_names(partition_display_names(g, id))
            << "\n";
    }
    return out.str();
}

std::string to_dot(const TensorNetwork& g) {
    std::ostringstream out;
    out << "graph tensor_network {\n  node [shape=circle];\n";
    for (const auto& [n, t] : g.nodes()) {
        out << "  n" << n << " [label=\"n" << n;
        for (std::size_t i = 0; i < t.order(); ++i) out << (i ? "x" : "\\n") << t.index_at(i).size;
        out << "\"];\n";
    }
    for (const auto& [n, ix] : g.free_edges()) {
        out << "  f_" << ix.name << " [shape=none,label=\"" << ix.name << "\"];\n";
        out << "  n" << n << " -- f_" << ix.name << " [label=\"" << ix.size << "\"];\n";
    }
    for (const auto& e : g.edges())
        out << "  n" << e.a << " -- n" << e.b << " [label=\"" << e.index.name << ":"
            << e.index.size << "\"];\n";
    out << "}\n";
    return out.str();
}

void save_network(const std::filesystem::path& dir, const TensorNetwork& g, double declared_eps,
                  double achieved_rel_error) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "topology.txt");
        if (!out)
            throw FileFormatError("cannot write topology file in '" + dir.string() + "'");
        out << topology_text(g);
    }
    {
        json meta;
        meta["declared_eps"] = declared_eps;
        meta["achieved_rel_error"] = achieved_rel_error;
        std::ofstream out(dir / "meta.json");
        out << meta.dump(2) << "\n";
    }
    for (const auto& [n, t] : g.nodes())
        write_tensor_file(dir / ("node_" + std::to_string(n) + ".tnsr"), t);
}

namespace {

struct TopologyLine {
    bool is_edge = false;
    std::string name;   // free-edge index name
    std::size_t size = 0;
    NodeId node = 0;
    NodeId a = 0, b = 0;
    std::size_t rank = 0;
};

std::vector<TopologyLine> parse_topology(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw FileFormatError("cannot open '" + path.string() + "'");
    std::vector<TopologyLine> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        TopologyLine tl;
        if (kw == "free") {
            std::string at;
            if (!(ls >> tl.name >> tl.size >> at >> tl.node) || at != "@")
                throw FileFormatError("topology line " + std::to_string(line_no) + " malformed");
        } else if (kw == "edge") {
            tl.is_edge = true;
            std::string pair, rank_kw, part_kw;
            if (!(ls >> pair >> rank_kw >> tl.rank >> part_kw) || rank_kw != "rank" ||
                part_kw != "partition")
                throw FileFormatError("topology line " + std::to_string(line_no) + " malformed");
            const auto dash = pair.find('-');
            if (dash == std::string::npos)
                throw FileFormatError("topology line " + std::to_string(line_no) + " malformed");
            tl.a = static_cast<NodeId>(std::stoul(pair.substr(0, dash)));
            tl.b = static_cast<NodeId>(std::stoul(pair.substr(dash + 1)));
        } else {
            throw FileFormatError("topology line " + std::to_string(line_no) +
                                  ": unknown keyword '" + kw + "'");
        }
        out.push_back(std::move(tl));
    }
    return out;
}

}  // namespace

LoadedNetwork load_network(const std::filesystem::path& dir) {
    const auto lines = parse_topology(dir / "topology.txt");

    std::set<NodeId> node_ids;
    for (const auto& tl : lines) {
        if (tl.is_edge) {
            node_ids.insert(tl.a);
            node_ids.insert(tl.b);
        } else {
            node_ids.insert(tl.node);
        }
    }
    if (node_ids.empty())
        throw FileFormatError("topology file lists no nodes");

    // Assign ids per index name; free edges first, in topology-file order,
    // which reproduces the ids the network was saved with.
    std::map<std::string, IndexId> id_of;
    std::map<std::string, std::size_t> size_of;
    auto intern = [&](const std::string& name, std::size_t size) {
        auto it = id_of.find(name);
        if (it == id_of.end()) {
            const IndexId id = static_cast<IndexId>(id_of.size());
            id_of.emplace(name, id);
            size_of.emplace(name, size);
            return id;
        }
        if (size_of.at(name) != size)
            throw FileFormatError("index '" + name + "' has inconsistent sizes across factors");
        return it->second;
    };
    for (const auto& tl : lines)
        if (!tl.is_edge) intern(tl.name, tl.size);

    TensorNetwork g;
    std::map<NodeId, NodeId> node_map;   // file id -> network id (insertion in sorted order)
    std::map<NodeId, std::vector<Index>> node_indices;
    for (NodeId n : node_ids) {
        Tensor raw = read_tensor_file(dir / ("node_" + std::to_string(n) + ".tnsr"));
        std::vector<Index> indices;
        for (const auto& ix : raw.indices())
            indices.push_back(Index{intern(ix.name, ix.size), ix.name, ix.size});
        Tensor t(indices, std::vector<double>(raw.data().begin(), raw.data().end()));
        node_map[n] = g.add_node(std::move(t));
        node_indices[n] = std::move(indices);
    }

    for (const auto& tl : lines) {
        if (!tl.is_edge) {
            if (size_of.count(tl.name) == 0 || size_of.at(tl.name) != tl.size)
                throw FileFormatError("free edge '" + tl.name +
                                      "' disagrees with the factor tensors");
            continue;
        }
        // The contracted index is the unique name shared by both factors.
        std::set<std::string> a_names, shared;
        for (const auto& ix : node_indices.at(tl.a)) a_names.insert(ix.name);
        for (const auto& ix : node_indices.at(tl.b))
            if (a_names.count(ix.name)) shared.insert(ix.name);
        if (shared.size() != 1)
            throw FileFormatError("edge " + std::to_string(tl.a) + "-" + std::to_string(tl.b) +
                                  " does not correspond to exactly one shared index");
        const std::string& name = *shared.begin();
        if (size_of.at(name) != tl.rank)
            throw FileFormatError("edge rank disagrees with factor tensors for '" + name + "'");
        g.add_edge(node_map.at(tl.a), node_map.at(tl.b),
                   Index{id_of.at(name), name, tl.rank});
    }
    g.bump_counters();
    validate_network(g);

    LoadedNetwork out;
    out.network = std::move(g);

    std::ifstream meta_in(dir / "meta.json");
    if (!meta_in)
        throw FileFormatError("missing meta.json in '" + dir.string() + "'");
    try {
        json meta = json::parse(meta_in);
        out.declared_eps = meta.at("declared_eps").get<double>();
        out.declared_rel_error = meta.at("achieved_rel_error").get<double>();
    } catch (const json::exception& ex) {
        throw FileFormatError(std::string("malformed meta.json: ") + ex.what());
    }
    return out;
}

Report make_report(const std::string& command, const Tensor& input, const SearchResult& result,
                   const SearchConfig& cfg) {
    Report r;
    r.command = command;
    for (const auto& ix : input.indices()) r.input_indices.emplace_back(ix.name, ix.size);
    r.input_elements = input.element_count();
    r.eps = cfg.eps;
    r.topk = cfg.topk;
    r.max_splits = cfg.max_splits;
    r.bin_fraction = cfg.bin_fraction;
    r.seed = cfg.seed;
    r.threads = cfg.threads;
    r.rank_strategy = cfg.rank_strategy == RankStrategy::Constraint ? "constraint" : "equal";

    r.achieved_rel_error = result.achieved_rel_error;
    r.compression_ratio = result.compression_ratio;
    r.network_elements = network_size(result.network);
    r.predicted_cost = result.predicted_cost;
    r.sketch_count = result.sketch_count;
    r.executed_candidates = result.executed_candidates;
    r.timings = result.timings;

    const TensorNetwork& g = result.network;
    for (const auto& [n, t] : g.nodes()) {
        ReportNode node;
        node.id = n;
        for (const auto& ix : t.indices()) node.indices.emplace_back(ix.name, ix.size);
        node.elements = t.element_count();
        r.nodes.push_back(std::move(node));
    }
    for (IndexId id : sorted_edge_ids(g)) {
        const auto& e = g.edge_by_index(id);
        ReportEdge edge;
        edge.a = std::min(e.a, e.b);
        edge.b = std::max(e.a, e.b);
        edge.name = e.index.name;
        edge.rank = e.index.size;
        edge.partition = partition_display_names(g, id);
        r.edges.push_back(std::move(edge));
    }
    for (const auto& [n, ix] : g.free_edges())
        r.free_edges.push_back(ReportFreeEdge{ix.name, ix.size, n});
    for (const auto& e : result.program.exprs)
        r.program.push_back(print_expr(e, input.indices()));
    return r;
}

void write_report(const std::filesystem::path& path, const Report& r) {
    json j;
    j["tool"] = "tnsynth";
    j["version"] = 1;
    j["command"] = r.command;

    json input;
    input["elements"] = r.input_elements;
    input["indices"] = json::array();
    for (const auto& [name, size] : r.input_indices)
        input["indices"].push_back({{"name", name}, {"size", size}});
    j["input"] = std::move(input);

    j["config"] = {{"eps", r.eps},
                   {"topk", r.topk},
                   {"max_splits", r.max_splits},
                   {"bin_fraction", r.bin_fraction},
                   {"seed", r.seed},
                   {"threads", r.threads},
                   {"rank_strategy", r.rank_strategy}};

    json res;
    res["achieved_rel_error"] = r.achieved_rel_error;
    res["compression_ratio"] = r.compression_ratio;
    res["network_elements"] = r.network_elements;
    res["predicted_cost"] = r.predicted_cost;
    res["sketch_count"] = r.sketch_count;
    res["executed_candidates"] = r.executed_candidates;
    res["nodes"] = json::array();
    for (const auto& n : r.nodes) {
        json node;
        node["node"] = n.id;
        node["elements"] = n.elements;
        node["indices"] = json::array();
        for (const auto& [name, size] : n.indices)
            node["indices"].push_back({{"name", name}, {"size", size}});
        res["nodes"].push_back(std::move(node));
    }
    res["edges"] = json::array();
    for (const auto& e : r.edges)
        res["edges"].push_back({{"nodes", {e.a, e.b}},
                                {"name", e.name},
                                {"rank", e.rank},
                                {"partition", e.partition}});
    res["free_edges"] = json::array();
    for (const auto& f : r.free_edges)
        res["free_edges"].push_back({{"name", f.name}, {"size", f.size}, {"node", f.node}});
    res["program"] = r.program;
    res["timings"] = {{"spectra_s", r.timings.spectra_s},
                      {"enumeration_s", r.timings.enumeration_s},
                      {"completion_s", r.timings.completion_s},
                      {"execution_s", r.timings.execution_s},
                      {"rounding_s", r.timings.rounding_s},
                      {"total_s", r.timings.total_s}};
    j["result"] = std::move(res);

    std::ofstream out(path);
    if (!out)
        throw FileFormatError("cannot open '" + path.string() + "' for writing");
    out << j.dump(2) << "\n";
    if (!out)
        throw FileFormatError("write failed for '" + path.string() + "'");
}

Report read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw FileFormatError("cannot open '" + path.string() + "'");
    try {
        const json j = json::parse(in);
        Report r;
        r.command = j.at("command").get<std::string>();
        for (const auto& ix : j.at("input").at("indices"))
            r.input_indices.emplace_back(ix.at("name").get<std::string>(),
                                         ix.at("size").get<std::size_t>());
        r.input_elements = j.at("input").at("elements").get<unsigned long long>();
        const auto& cfg = j.at("config");
        r.eps = cfg.at("eps").get<double>();
        r.topk = cfg.at("topk").get<int>();
        r.max_splits = cfg.at("max_splits").get<int>();
        r.bin_fraction = cfg.at("bin_fraction").get<double>();
        r.seed = cfg.at("seed").get<std::uint64_t>();
        r.threads = cfg.at("threads").get<int>();
        r.rank_strategy = cfg.at("rank_strategy").get<std::string>();
        const auto& res = j.at("result");
        r.achieved_rel_error = res.at("achieved_rel_error").get<double>();
        r.compression_ratio = res.at("compression_ratio").get<double>();
        r.network_elements = res.at("network_elements").get<unsigned long long>();
        r.predicted_cost = res.at("predicted_cost").get<long long>();
        r.sketch_count = res.at("sketch_count").get<std::size_t>();
        r.executed_candidates = res.at("executed_candidates").get<std::size_t>();
        for (const auto& n : res.at("nodes")) {
            ReportNode node;
            node.id = n.at("node").get<NodeId>();
            node.elements = n.at("elements").get<unsigned long long>();
            for (const auto& ix : n.at("indices"))
                node.indices.emplace_back(ix.at("name").get<std::string>(),
                                          ix.at("size").get<std::size_t>());
            r.nodes.push_back(std::move(node));
        }
        for (const auto& e : res.at("edges")) {
            ReportEdge edge;
            edge.a = e.at("nodes").at(0).get<NodeId>();
            edge.b = e.at("nodes").at(1).get<NodeId>();
            edge.name = e.at("name").get<std::string>();
            edge.rank = e.at("rank").get<std::size_t>();
            for (const auto& name : e.at("partition"))
                edge.partition.push_back(name.get<std::string>());
            r.edges.push_back(std::move(edge));
        }
        for (const auto& f : res.at("free_edges"))
            r.free_edges.push_back(ReportFreeEdge{f.at("name").get<std::string>(),
                                                  f.at("size").get<std::size_t>(),
                                                  f.at("node").get<NodeId>()});
        for (const auto& p : res.at("program")) r.program.push_back(p.get<std::string>());
        const auto& tm = res.at("timings");
        r.timings.spectra_s = tm.at("spectra_s").get<double>();
        r.timings.enumeration_s = tm.at("enumeration_s").get<double>();
        r.timings.completion_s = tm.at("completion_s").get<double>();
        r.timings.execution_s = tm.at("execution_s").get<double>();
        r.timings.rounding_s = tm.at("rounding_s").get<double>();
        r.timings.total_s = tm.at("total_s").get<double>();
        return r;
    } catch (const json::exception& ex) {
        throw FileFormatError("malformed report '" + path.string() + "': " + ex.what());
    }
}

Sketch sketch_from_report(const Report& report, const std::vector<Index>& free_indices) {
    std::vector<IndexId> universe;
    for (const auto& ix : free_indices) universe.push_back(ix.id);
    ids::sort_unique(universe);

    auto id_of = [&](const std::string& name) -> IndexId {
        for (const auto& ix : free_indices)
            if (ix.name == name) return ix.id;
        throw FileFormatError("report references unknown index name '" + name + "'");
    };

    Sketch s;
    int hole = 0;
    for (const auto& e : report.edges) {
        std::vector<IndexId> block;
        for (const auto& name : e.partition) block.push_back(id_of(name));
        Partition p = Partition::canonical(std::move(block), universe);
        if (!valid_extension(s, p))
            throw FileFormatError("report edges do not form a laminar partition family");
        s.exprs.push_back(Expr{std::move(p), Hole{hole++}});
    }
    std::sort(s.exprs.begin(), s.exprs.end(),
              [](const Expr& a, const Expr& b) { return a.block < b.block; });
    return s;
}

void check_report_consistency(const Report& report, const Tensor& input) {
    // Input agreement by name and size.
    if (report.input_indices.size() != input.order())
        throw FileFormatError("report input order disagrees with the tensor");
    for (const auto& [name, size] : report.input_indices) {
        bool found = false;
        for (const auto& ix : input.indices())
            if (ix.name == name && ix.size == size) found = true;
        if (!found)
            throw FileFormatError("report input index '" + name + "' does not match the tensor");
    }

    if (report.nodes.empty())
        throw FileFormatError("report lists no nodes");

    // Rebuild the graph from the edge list.
    std::map<NodeId, std::map<std::string, std::size_t>> node_ix;
    for (const auto& n : report.nodes) {
        unsigned long long elems = 1;
        for (const auto& [name, size] : n.indices) {
            node_ix[n.id][name] = size;
            elems *= size;
        }
        if (elems != n.elements)
            throw FileFormatError("node element count is inconsistent");
    }
    unsigned long long total = 0;
    for (const auto& n : report.nodes) total += n.elements;
    if (total != report.network_elements)
        throw FileFormatError("network element total is inconsistent");

    std::map<NodeId, std::vector<std::pair<NodeId, const ReportEdge*>>> adj;
    for (const auto& e : report.edges) {
        if (!node_ix.count(e.a) || !node_ix.count(e.b))
            throw FileFormatError("edge references an unknown node");
        for (NodeId n : {e.a, e.b}) {
            auto it = node_ix[n].find(e.name);
            if (it == node_ix[n].end() || it->second != e.rank)
                throw FileFormatError("edge '" + e.name + "' disagrees with node indices");
        }
        adj[e.a].emplace_back(e.b, &e);
        adj[e.b].emplace_back(e.a, &e);
    }
    if (report.edges.size() + 1 != report.nodes.size())
        throw FileFormatError("edge list does not form a tree");

    // Free names per node = indices minus edge names.
    std::set<std::string> edge_names;
    for (const auto& e : report.edges) edge_names.insert(e.name);

    auto free_id_of = [&](const std::string& name) -> IndexId {
        for (const auto& ix : input.indices())
            if (ix.name == name) return ix.id;
        throw FileFormatError("free index '" + name + "' unknown to the tensor");
    };

    // Connectivity.
    {
        std::set<NodeId> seen{report.nodes.front().id};
        std::deque<NodeId> queue{report.nodes.front().id};
        while (!queue.empty()) {
            const NodeId n = queue.front();
            queue.pop_front();
            for (const auto& [m, ep] : adj[n])
                if (seen.insert(m).second) queue.push_back(m);
        }
        if (seen.size() != report.nodes.size())
            throw FileFormatError("edge list does not connect all nodes");
    }

    // Recompute every edge's partition by walking away from one endpoint.
    const auto universe = input.index_ids();
    for (const auto& e : report.edges) {
        std::set<NodeId> seen{e.a, e.b};
        std::deque<NodeId> queue{e.b};
        std::vector<IndexId> side;
        while (!queue.empty()) {
            const NodeId n = queue.front();
            queue.pop_front();
            for (const auto& [name, size] : node_ix.at(n))
                if (!edge_names.count(name)) side.push_back(free_id_of(name));
            for (const auto& [m, ep] : adj[n]) {
                if (ep == &e) continue;
                if (seen.insert(m).second) queue.push_back(m);
            }
        }
        ids::sort_unique(side);
        std::vector<IndexId> declared;
        for (const auto& name : e.partition) declared.push_back(free_id_of(name));
        if (Partition::canonical(side, universe) != Partition::canonical(declared, universe))
            throw FileFormatError("declared partition for edge '" + e.name +
                                  "' does not match the topology");
    }

    const double expected_ratio = static_cast<double>(report.input_elements) /
                                  static_cast<double>(report.network_elements);
    if (std::abs(expected_ratio - report.compression_ratio) >
        1e-9 * std::max(1.0, expected_ratio))
        throw FileFormatError("declared compression ratio is inconsistent");
}

}  // namespace tnsynth
