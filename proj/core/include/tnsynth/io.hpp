#pragma once

//
// External formats.
//
// Tensor files (binary, little-endian):
//   magic "TNSR" | version u16 | order u16 |
//   per mode: name length u16, UTF-8 name, size u64 |
//   payload: element count * f64, row-major in header order.
//
// Topology files (text): one line per edge,
//   free <index-name> <size> @ <node>
//   edge <node>-<node> rank <r> partition {names}
//
// Reports are JSON; the edge list plus ranks reconstructs the topology
// exactly, which `verify` checks.
//

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tnsynth/dsl.hpp"
#include "tnsynth/network.hpp"
#include "tnsynth/search.hpp"
#include "tnsynth/tensor.hpp"

namespace tnsynth {

inline constexpr std::uint16_t kTensorFileVersion = 1;

void write_tensor_file(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor_file(const std::filesystem::path& path);

std::string topology_text(const TensorNetwork& g);
std::string to_dot(const TensorNetwork& g);

// Factor directory: topology.txt, meta.json, and one node_<id>.tnsr per
// node. `declared_eps` and the achieved error land in meta.json.
void save_network(const std::filesystem::path& dir, const TensorNetwork& g, double declared_eps,
                  double achieved_rel_error);

struct LoadedNetwork {
    TensorNetwork network;
    double declared_eps = 0.0;
    double declared_rel_error = 0.0;
};

LoadedNetwork load_network(const std::filesystem::path& dir);

// --- reports ---

struct ReportEdge {
    NodeId a = 0;
    NodeId b = 0;
    std::string name;
    std::size_t rank = 0;
    std::vector<std::string> partition;   // display-side index names
};

struct ReportNode {
    NodeId id = 0;
    std::vector<std::pair<std::string, std::size_t>> indices;
    unsigned long long elements = 0;
};

struct ReportFreeEdge {
    std::string name;
    std::size_t size = 0;
    NodeId node = 0;
};

struct Report {
    std::string command;
    std::vector<std::pair<std::string, std::size_t>> input_indices;
    unsigned long long input_elements = 0;
    double eps = 0.0;
    // config echo
    int topk = 1;
    int max_splits = 0;
    double bin_fraction = 0.1;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string rank_strategy = "constraint";
    // result
    double achieved_rel_error = 0.0;
    double compression_ratio = 1.0;
    unsigned long long network_elements = 0;
    long long predicted_cost = 0;
    std::size_t sketch_count = 0;
    std::size_t executed_candidates = 0;
    std::vector<ReportNode> nodes;
    std::vector<ReportEdge> edges;
    std::vector<ReportFreeEdge> free_edges;
    std::vector<std::string> program;
    PhaseTimings timings;
};

Report make_report(const std::string& command, const Tensor& input, const SearchResult& result,
                   const SearchConfig& cfg);

void write_report(const std::filesystem::path& path, const Report& report);
Report read_report(const std::filesystem::path& path);

// Rebuilds the sketch (blocks with holes) from a report's edge list, mapped
// onto the given tensor's index names. Unknown names are a format error.
Sketch sketch_from_report(const Report& report, const std::vector<Index>& free_indices);

// Structural consistency of a report against an input tensor: the edge list
// reconstructs a tree whose recomputed partitions, sizes and ratio match
// the declared ones.
void check_report_consistency(const Report& report, const Tensor& input);

}  // namespace tnsynth
