//
// tnsynth — compact tree tensor-network representations of dense tensors
// within a prescribed relative error bound.
//
// Exit codes: 0 success, 1 semantic failure (bound not met, execution
// failed), 2 input error, 3 unsupported input, 4 internal invariant
// violation.
//

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tnsynth/errors.hpp"
#include "tnsynth/io.hpp"
#include "tnsynth/search.hpp"

namespace fs = std::filesystem;
using namespace tnsynth;

namespace {

constexpr const char* kExitCodeHelp =
    "Exit codes: 0 success, 1 semantic failure, 2 input error, 3 unsupported input, "
    "4 internal invariant violation.";

int default_threads() {
    if (const char* env = std::getenv("TNSYNTH_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const FileFormatError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const UnsupportedError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "internal error: " << ex.what() << "\n";
        return 4;
    }
}

struct OutputOptions {
    std::string report_path;
    std::string save_dir;
    std::string dot_path;
};

void add_output_options(CLI::App* cmd, OutputOptions& out) {
    cmd->add_option("--out", out.report_path, "Write the JSON report to this path");
    cmd->add_option("--save-network", out.save_dir,
                    "Write the factor tensors and topology to this directory");
    cmd->add_option("--dot", out.dot_path, "Write a DOT rendering of the result network");
}

void emit_outputs(const std::string& command, const Tensor& input, const SearchResult& result,
                  const SearchConfig& cfg, const OutputOptions& out) {
    if (!out.report_path.empty())
        write_report(out.report_path, make_report(command, input, result, cfg));
    if (!out.save_dir.empty())
        save_network(out.save_dir, result.network, cfg.eps, result.achieved_rel_error);
    if (!out.dot_path.empty()) {
        std::ofstream dot(out.dot_path);
        if (!dot)
            throw FileFormatError("cannot open '" + out.dot_path + "' for writing");
        dot << to_dot(result.network);
    }
    std::cout << command << ": rel_error=" << result.achieved_rel_error
              << " compression_ratio=" << result.compression_ratio
              << " network_elements=" << network_size(result.network)
              << " sketches=" << result.sketch_count << " time_s=" << result.timings.total_s
              << "\n";
}

std::vector<std::size_t> parse_dims(const std::string& csv) {
    std::vector<std::size_t> dims;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            const long v = std::stol(item, &used);
            if (used != item.size() || v < 1) throw std::invalid_argument("dim");
            dims.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad dimension list '" + csv + "'");
        }
    }
    if (dims.empty())
        throw std::invalid_argument("empty dimension list");
    return dims;
}

RankStrategy parse_strategy(const std::string& s) {
    if (s == "constraint") return RankStrategy::Constraint;
    if (s == "equal") return RankStrategy::Equal;
    throw std::invalid_argument("unknown rank strategy '" + s + "' (use constraint or equal)");
}

// Direct truncated SVD for order-2 inputs, behind --matrix-svd.
SearchResult matrix_svd_result(const Tensor& t, double eps) {
    if (t.order() != 2)
        throw UnsupportedError("--matrix-svd applies to order-2 tensors only");
    const double norm = frobenius_norm(t);
    const double budget = (eps * norm) * (eps * norm);

    const auto ids = t.index_ids();
    const std::vector<IndexId> row_ids{ids[0]}, col_ids{ids[1]};
    const Matrix m = to_matrix(t, row_ids, col_ids);
    const SvdResult f = svd(m);
    const std::size_t len = static_cast<std::size_t>(f.sigma.size());

    std::size_t keep = len;
    double tail = 0.0;
    while (keep > 1) {
        const double s = f.sigma[static_cast<Eigen::Index>(keep - 1)];
        if (tail + s * s > budget) break;
        tail += s * s;
        --keep;
    }

    TensorNetwork net = TensorNetwork::single_node(t);
    const std::size_t rows = static_cast<std::size_t>(m.rows());
    const std::size_t cols = static_cast<std::size_t>(m.cols());
    if (keep * (rows + cols) < rows * cols) {
        TensorNetwork two;
        const Index fresh{2, "r1", keep};
        const Eigen::Index kk = static_cast<Eigen::Index>(keep);
        Tensor u = tensor_from_matrix(f.u.leftCols(kk), {t.index_by_id(ids[0])}, {fresh});
        Tensor sv = tensor_from_matrix(f.sigma.head(kk).asDiagonal() * f.vt.topRows(kk), {fresh},
                                       {t.index_by_id(ids[1])});
        const NodeId a = two.add_node(std::move(u));
        const NodeId b = two.add_node(std::move(sv));
        two.add_edge(a, b, fresh);
        two.bump_counters();
        net = std::move(two);
    }

    SearchResult r;
    r.network = std::move(net);
    r.predicted_cost = static_cast<long long>(network_size(r.network));
    r.compression_ratio = static_cast<double>(t.element_count()) /
                          static_cast<double>(network_size(r.network));
    {
        const Tensor back = contract_all(r.network);
        const Tensor ref = sort_indices(t);
        double sum = 0.0;
        const auto x = back.data();
        const auto y = ref.data();
        for (std::size_t i = 0; i < x.size(); ++i) sum += (x[i] - y[i]) * (x[i] - y[i]);
        r.achieved_rel_error = norm == 0.0 ? 0.0 : std::sqrt(sum) / norm;
    }
    r.executed_candidates = 1;
    return r;
}

SearchResult result_from_state(const Tensor& input, const ExecState& st, const Program& program) {
    SearchResult r;
    r.network = st.network;
    r.program = program;
    r.predicted_cost = static_cast<long long>(network_size(st.network));
    r.compression_ratio = static_cast<double>(input.element_count()) /
                          static_cast<double>(network_size(st.network));
    const Tensor back = contract_all(st.network);
    const Tensor ref = sort_indices(input);
    double sum = 0.0;
    for (std::size_t i = 0; i < back.data().size(); ++i) {
        const double d = back.data()[i] - ref.data()[i];
        sum += d * d;
    }
    r.achieved_rel_error = st.data_norm == 0.0 ? 0.0 : std::sqrt(sum) / st.data_norm;
    r.executed_candidates = 1;
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tnsynth: tree tensor-network structure search"};
    app.footer(kExitCodeHelp);
    app.require_subcommand(1);

    // --- search ---
    std::string search_input;
    SearchConfig search_cfg;
    search_cfg.threads = default_threads();
    std::string search_strategy = "constraint";
    bool search_matrix_svd = false;
    OutputOptions search_out;
    auto* cmd_search = app.add_subcommand("search", "Search for a compact network structure");
    cmd_search->add_option("input", search_input, "Input tensor file (.tnsr)")->required();
    cmd_search->add_option("--eps", search_cfg.eps, "Relative error bound in (0,1)")->required();
    cmd_search->add_option("--topk", search_cfg.topk, "Candidates to execute")->capture_default_str();
    cmd_search->add_option("--max-splits", search_cfg.max_splits,
                           "Split cap per sketch (default min(2d-3, 6))");
    cmd_search->add_option("--bin-fraction", search_cfg.bin_fraction,
                           "Truncation-option bin width as a fraction of the budget")->capture_default_str();
    cmd_search->add_option("--seed", search_cfg.seed, "Seed echoed into the report")->capture_default_str();
    cmd_search->add_option("--threads", search_cfg.threads,
                           "Completion workers (TNSYNTH_THREADS fallback)")->capture_default_str();
    cmd_search->add_option("--rank-strategy", search_strategy, "constraint | equal")->capture_default_str();
    cmd_search->add_flag("--matrix-svd", search_matrix_svd,
                         "Order-2 inputs: run one truncated SVD instead of a search");
    add_output_options(cmd_search, search_out);

    // --- generate ---
    std::string gen_dims = "16,18,20,22";
    int gen_rank_min = 2, gen_rank_max = 5;
    std::uint64_t gen_seed = 0;
    std::optional<std::uint64_t> gen_value_seed;
    std::string gen_out, gen_truth;
    auto* cmd_generate =
        app.add_subcommand("generate", "Generate a synthetic ground-truth instance");
    cmd_generate->add_option("--dims", gen_dims, "Comma-separated mode sizes")->capture_default_str();
    cmd_generate->add_option("--rank-min", gen_rank_min, "")->capture_default_str();
    cmd_generate->add_option("--rank-max", gen_rank_max, "")->capture_default_str();
    cmd_generate->add_option("--seed", gen_seed, "Structure and value seed")->capture_default_str();
    cmd_generate->add_option("--value-seed", gen_value_seed,
                             "Separate value seed for sibling batches of one structure");
    cmd_generate->add_option("--out", gen_out, "Output tensor file")->required();
    cmd_generate->add_option("--truth", gen_truth, "Write the ground-truth report here");

    // --- verify ---
    std::string verify_data, verify_artifact;
    auto* cmd_verify =
        app.add_subcommand("verify", "Recontract a saved network (or check a report) against data");
    cmd_verify->add_option("data", verify_data, "Input tensor file")->required();
    cmd_verify->add_option("artifact", verify_artifact, "Network directory or report JSON")
        ->required();

    // --- baseline ---
    std::string base_input, base_method;
    double base_eps = 0.1;
    OutputOptions base_out;
    auto* cmd_baseline = app.add_subcommand("baseline", "Run the TT or binary-HT baseline");
    cmd_baseline->add_option("input", base_input, "Input tensor file")->required();
    cmd_baseline->add_option("--method", base_method, "tt | ht")->required();
    cmd_baseline->add_option("--eps", base_eps, "Relative error bound")->required();
    add_output_options(cmd_baseline, base_out);

    // --- reuse ---
    std::string reuse_input, reuse_from, reuse_strategy = "constraint";
    double reuse_eps = 0.1;
    double reuse_bin_fraction = 0.1;
    OutputOptions reuse_out;
    auto* cmd_reuse =
        app.add_subcommand("reuse", "Rank-search a known topology on a new tensor");
    cmd_reuse->add_option("input", reuse_input, "Input tensor file")->required();
    cmd_reuse->add_option("--sketch-from", reuse_from, "Report whose topology to reuse")
        ->required();
    cmd_reuse->add_option("--eps", reuse_eps, "Relative error bound")->required();
    cmd_reuse->add_option("--bin-fraction", reuse_bin_fraction, "")->capture_default_str();
    cmd_reuse->add_option("--rank-strategy", reuse_strategy, "constraint | equal")->capture_default_str();
    add_output_options(cmd_reuse, reuse_out);

    // --- run-program ---
    std::string prog_input, prog_path;
    double prog_eps = 0.1;
    OutputOptions prog_out;
    auto* cmd_run = app.add_subcommand("run-program", "Execute a split program from a text file");
    cmd_run->add_option("input", prog_input, "Input tensor file")->required();
    cmd_run->add_option("program", prog_path, "Program text file")->required();
    cmd_run->add_option("--eps", prog_eps, "Relative error bound")->required();
    add_output_options(cmd_run, prog_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (cmd_search->parsed()) {
        return guarded([&]() {
            search_cfg.rank_strategy = parse_strategy(search_strategy);
            const Tensor input = read_tensor_file(search_input);
            if (input.order() < 3) {
                if (search_matrix_svd && input.order() == 2) {
                    SearchResult r = matrix_svd_result(input, search_cfg.eps);
                    emit_outputs("search", input, r, search_cfg, search_out);
                    return 0;
                }
                throw UnsupportedError(
                    "order-" + std::to_string(input.order()) +
                    " input: structure search needs order >= 3; for order-2 tensors a single "
                    "truncated SVD is optimal, run with --matrix-svd");
            }
            const SearchResult r = search_structure(input, search_cfg);
            emit_outputs("search", input, r, search_cfg, search_out);
            return 0;
        });
    }

    if (cmd_generate->parsed()) {
        return guarded([&]() {
            const auto dims = parse_dims(gen_dims);
            const SyntheticStructure structure =
                sample_synthetic_structure(dims, gen_rank_min, gen_rank_max, gen_seed);
            const std::uint64_t vseed =
                gen_value_seed ? *gen_value_seed
                               : gen_seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL;
            const SyntheticInstance inst = realize_synthetic(structure, vseed);
            write_tensor_file(gen_out, inst.tensor);
            std::cout << "generate: wrote " << inst.tensor.element_count() << " values to "
                      << gen_out << " (ground-truth ratio " << inst.ground_truth_ratio << ")\n";
            if (!gen_truth.empty()) {
                SearchResult r;
                r.network = inst.ground_truth;
                std::map<int, int> ranks;
                for (std::size_t i = 0; i < structure.ranks.size(); ++i)
                    ranks[static_cast<int>(i)] = structure.ranks[i];
                r.program = fill(structure.sketch, ranks);
                r.compression_ratio = inst.ground_truth_ratio;
                r.predicted_cost = static_cast<long long>(network_size(inst.ground_truth));
                SearchConfig echo;
                echo.eps = 0.0;
                echo.seed = gen_seed;
                Report report = make_report("generate", inst.tensor, r, echo);
                write_report(gen_truth, report);
            }
            return 0;
        });
    }

    if (cmd_verify->parsed()) {
        return guarded([&]() {
            const Tensor data = read_tensor_file(verify_data);
            const double norm = frobenius_norm(data);

            if (fs::is_directory(verify_artifact)) {
                const LoadedNetwork loaded = load_network(verify_artifact);

                // The factor network must expose exactly the data's modes.
                std::map<std::string, std::size_t> want;
                for (const auto& ix : data.indices()) want[ix.name] = ix.size;
                std::map<std::string, std::size_t> have;
                for (const auto& ix : loaded.network.free_indices()) have[ix.name] = ix.size;
                if (want != have)
                    throw FileFormatError("network free edges do not match the data tensor");

                Tensor back = contract_all(loaded.network);
                std::vector<Index> renamed;
                for (const auto& ix : back.indices()) {
                    Index r = ix;
                    for (const auto& dix : data.indices())
                        if (dix.name == ix.name) r.id = dix.id;
                    renamed.push_back(r);
                }
                const Tensor aligned = sort_indices(
                    Tensor(renamed, std::vector<double>(back.data().begin(), back.data().end())));
                const Tensor ref = sort_indices(data);
                double sum = 0.0;
                for (std::size_t i = 0; i < ref.data().size(); ++i) {
                    const double d = aligned.data()[i] - ref.data()[i];
                    sum += d * d;
                }
                const double measured = norm == 0.0 ? 0.0 : std::sqrt(sum) / norm;
                const unsigned long long net_elems = network_size(loaded.network);
                std::cout << "verify: rel_error=" << measured
                          << " declared_eps=" << loaded.declared_eps
                          << " input_elements=" << data.element_count()
                          << " network_elements=" << net_elems << " ratio="
                          << static_cast<double>(data.element_count()) /
                                 static_cast<double>(net_elems)
                          << "\n";
                return measured <= loaded.declared_eps + 1e-9 ? 0 : 1;
            }

            const Report report = read_report(verify_artifact);
            check_report_consistency(report, data);
            std::cout << "verify: report is structurally consistent; declared rel_error="
                      << report.achieved_rel_error << " eps=" << report.eps
                      << " ratio=" << report.compression_ratio << "\n";
            return report.achieved_rel_error <= report.eps + 1e-9 ? 0 : 1;
        });
    }

    if (cmd_baseline->parsed()) {
        return guarded([&]() {
            if (base_method != "tt" && base_method != "ht")
                throw std::invalid_argument("unknown baseline method '" + base_method +
                                            "' (use tt or ht)");
            const Tensor input = read_tensor_file(base_input);
            const SearchResult r =
                base_method == "tt" ? tt_baseline(input, base_eps) : ht_baseline(input, base_eps);
            SearchConfig echo;
            echo.eps = base_eps;
            echo.rank_strategy = RankStrategy::Equal;
            emit_outputs("baseline-" + base_method, input, r, echo, base_out);
            return 0;
        });
    }

    if (cmd_reuse->parsed()) {
        return guarded([&]() {
            const Tensor input = read_tensor_file(reuse_input);
            const Report source = read_report(reuse_from);
            const Sketch sketch = sketch_from_report(source, input.indices());
            SearchConfig cfg;
            cfg.eps = reuse_eps;
            cfg.bin_fraction = reuse_bin_fraction;
            cfg.rank_strategy = parse_strategy(reuse_strategy);
            const SearchResult r = decompose_with_topology(input, sketch, reuse_eps, cfg);
            emit_outputs("reuse", input, r, cfg, reuse_out);
            return 0;
        });
    }

    if (cmd_run->parsed()) {
        return guarded([&]() {
            const Tensor input = read_tensor_file(prog_input);
            std::ifstream in(prog_path);
            if (!in)
                throw FileFormatError("cannot open '" + prog_path + "'");
            std::stringstream buffer;
            buffer << in.rdbuf();
            const Program program = parse_program(buffer.str(), input.indices());
            if (program.has_holes())
                throw FileFormatError(
                    "program contains rank holes; run-program needs complete ranks");

            const ProgramResult res = exec_program(program, ExecState::initial(input, prog_eps));
            if (!res.ok()) {
                std::cerr << "execution failed at expression " << res.failed_index << ": "
                          << print_expr(program.exprs[res.failed_index], input.indices()) << "\n";
                return 1;
            }
            SearchResult r = result_from_state(input, *res.state, program);
            SearchConfig echo;
            echo.eps = prog_eps;
            emit_outputs("run-program", input, r, echo, prog_out);
            return 0;
        });
    }

    return 2;
}
