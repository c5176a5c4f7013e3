// mrs: simulate Poisson SEM data, learn DAGs from count tables, run
// benchmark sweeps and score estimated graphs.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mrs/baselines.hpp"
#include "mrs/bench.hpp"
#include "mrs/count_matrix.hpp"
#include "mrs/error.hpp"
#include "mrs/serialize.hpp"
#include "mrs/simulate.hpp"

namespace fs = std::filesystem;
using namespace mrs;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::size_t default_jobs() {
    if (const char* env = std::getenv("MRS_JOBS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring MRS_JOBS=" << env << " (expected a positive integer)\n";
    }
    return 1;
}

Json read_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    if (path.extension() == ".json") {
        try {
            return Json::parse(buf.str());
        } catch (const Json::parse_error& e) {
            throw InvalidArgument(path.string() + ": " + e.what());
        }
    }
    return toml_to_json(buf.str());
}

void require_file(const fs::path& path, const std::string& what) {
    if (!fs::is_regular_file(path)) throw InvalidArgument(what + " not found: " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
    int p = 0, d = 0, n = 0;
    std::uint64_t seed = 1;
    fs::path out;
    std::string link = "log";
    std::string sign = "mixed";
};

int run_simulate(const SimulateArgs& a) {
    if (a.p < 1) throw InvalidArgument("--p must be positive");
    if (a.d < 0 || a.d >= a.p)
        throw InvalidArgument(fmt::format("--d must satisfy 0 <= d < p (got d={}, p={})", a.d, a.p));
    if (a.n < 1) throw InvalidArgument("--n must be positive");
    const Dag dag = random_dag(a.p, a.d, a.seed);
    SimulationConfig config;
    if (a.link == "identity") {
        config.intercepts = default_identity_intercept_range();
        config.weight_magnitude = default_identity_weight_range();
    } else {
        config.intercepts = default_intercept_range();
        config.weight_magnitude = default_weight_range(a.d);
    }
    config.sign = a.sign == "negative" ? WeightSign::Negative
                  : a.sign == "positive" ? WeightSign::Positive
                                         : WeightSign::Mixed;
    ensure_dir(a.out);
    if (a.link == "identity") {
        const auto sim = simulate_identity_link(dag, a.n, a.seed, config);
        write_count_csv(a.out / "data.csv", sim.data);
        write_json_file(a.out / "params.json", to_json(sim.model, "identity"));
    } else {
        const auto sim = simulate_sem(dag, a.n, a.seed, config);
        write_count_csv(a.out / "data.csv", sim.data);
        write_json_file(a.out / "params.json", to_json(sim.model, "log"));
    }
    write_json_file(a.out / "truth.json", to_json(dag));
    return 0;
}

// --- fit --------------------------------------------------------------------

struct FitArgs {
    fs::path input, out, truth, config;
    std::string folds;
    std::string learner = "mrs";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::optional<int> grid_size;
    std::optional<double> lambda;
    int verbose = 0;
};

void write_edges_csv(const fs::path& path, const std::vector<Edge>& edges, const std::vector<std::string>& labels,
                     bool directed) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << (directed ? "from,to\n" : "node_a,node_b\n");
    for (const Edge& e : edges)
        f << labels[static_cast<std::size_t>(e.from)] << ',' << labels[static_cast<std::size_t>(e.to)] << '\n';
}

int run_fit(const FitArgs& a) {
    require_file(a.input, "input CSV");
    if (a.learner != "mrs" && a.learner != "pmrf" && a.learner != "oracle")
        throw InvalidArgument("--learner must be mrs, pmrf or oracle");
    if (a.learner == "oracle" && a.truth.empty()) throw InvalidArgument("--learner oracle requires --truth");
    if (!a.truth.empty()) require_file(a.truth, "truth graph");

    MrsConfig config;
    if (!a.config.empty()) {
        require_file(a.config, "config file");
        const Json doc = read_config(a.config);
        apply_mrs_config(doc.contains("mrs") ? doc.at("mrs") : doc, config);
    }
    if (!a.folds.empty()) {
        if (a.folds == "loo") {
            config.leave_one_out = true;
        } else {
            try {
                std::size_t used = 0;
                config.folds = std::stoi(a.folds, &used);
                if (used != a.folds.size()) throw std::invalid_argument(a.folds);
            } catch (const std::exception&) {
                throw InvalidArgument("--folds must be an integer or 'loo'");
            }
            config.leave_one_out = false;
        }
    }
    if (a.seed) config.seed = *a.seed;
    config.jobs = a.jobs.value_or(default_jobs());
    if (a.grid_size) config.grid_size = *a.grid_size;
    if (a.lambda) config.fixed_lambda = *a.lambda;

    const CountMatrix data = read_count_csv(a.input);
    config.validate(data.rows(), data.cols());
    if (a.verbose > 0)
        std::cerr << fmt::format("fitting {} on {} rows x {} columns ({} folds)\n", a.learner, data.rows(), data.cols(),
                                 config.leave_one_out ? std::string("leave-one-out") : std::to_string(config.folds));
    auto warn = [&](const std::vector<int>& quarantined) {
        for (int v : quarantined)
            std::cerr << "warning: column " << v + 1 << " (" << data.labels()[static_cast<std::size_t>(v)]
                      << ") is constant or has fewer than two nonzero counts; it is reported as an isolated node\n";
    };

    ensure_dir(a.out);
    std::vector<int> quarantined;
    if (a.learner == "pmrf") {
        const PmrfResult r = pmrf_fit_quarantined(data, config, &quarantined);
        warn(quarantined);
        Json doc = to_json(r.and_graph);
        doc["labels"] = data.labels();
        doc["positive_coefficients"] = r.positive_coefficients;
        write_json_file(a.out / "result.json", doc);
        write_edges_csv(a.out / "edges.csv", r.and_graph.edges, data.labels(), false);
        return 0;
    }
    std::optional<Dag> truth;
    if (!a.truth.empty()) {
        truth = graph_from_json(read_json_file(a.truth)).to_dag();
        if (truth->size() != data.cols())
            throw InvalidArgument(fmt::format("truth graph has {} nodes but the data has {} columns", truth->size(),
                                              data.cols()));
    }
    const MrsResult result = a.learner == "oracle" ? oracle_learn_quarantined(data, *truth, config, &quarantined)
                                                   : mrs_learn_quarantined(data, config, &quarantined);
    warn(quarantined);
    write_json_file(a.out / "result.json", to_json(result));
    write_edges_csv(a.out / "edges.csv", result.graph.edges(), data.labels(), true);
    if (truth && a.learner == "mrs") {
        const auto m = edge_metrics(result.graph, *truth);
        std::cout << fmt::format("precision {:.4f} recall {:.4f}\n", m.precision, m.recall);
    }
    return 0;
}

// --- bench ------------------------------------------------------------------

struct BenchArgs {
    fs::path spec;
    fs::path out;
    bool dry_run = false;
    std::optional<std::size_t> jobs;
};

std::string fmt_mean(const std::optional<MeanSe>& m) {
    if (!m) return "-";
    return m->se ? fmt::format("{:.3f}±{:.3f}", m->mean, *m->se) : fmt::format("{:.3f}", m->mean);
}

int run_bench(const BenchArgs& a) {
    require_file(a.spec, "spec");
    ExperimentSpec spec = load_experiment_spec(a.spec);
    spec.jobs = a.jobs.value_or(spec.jobs > 1 ? spec.jobs : default_jobs());
    spec.validate();
    fs::path out = a.out.empty() ? spec.output_dir : a.out;
    if (out.empty()) out = fs::path("bench_out") / spec.name;
    if (a.dry_run) {
        std::cout << fmt::format("{}: {} trials x {} sample sizes x {} learners = {} planned rows; output {}\n",
                                 spec.name, spec.trials, spec.n_grid.size(), spec.learners.size(), spec.planned_rows(),
                                 out.string());
        return 0;
    }
    const BenchReport report = run_experiment(spec);
    write_report(report, out);
    std::cout << fmt::format("{:<8} {:>6} {:>6} {:>5} {:>14} {:>14} {:>14} {:>14} {:>10}\n", "learner", "n", "trials",
                             "fail", "dag_prec", "dag_recall", "mec_recall", "skel_recall", "seconds");
    for (const auto& s : summarize(report))
        std::cout << fmt::format("{:<8} {:>6} {:>6} {:>5} {:>14} {:>14} {:>14} {:>14} {:>10.3f}\n",
                                 to_string(s.learner), s.n, s.trials, s.failures, fmt_mean(s.dag_precision),
                                 fmt_mean(s.dag_recall), fmt_mean(s.mec_recall),
                                 s.trials ? fmt_mean(s.skeleton_recall) : "-", s.mean_seconds);
    std::cout << "report written to " << out.string() << '\n';
    return 0;
}

// --- eval -------------------------------------------------------------------

Json metrics_json(const StructureMetrics& m) {
    return {{"precision", m.precision},
            {"recall", m.recall},
            {"true_positives", m.true_positives},
            {"estimated", m.estimated},
            {"truth", m.truth}};
}

// Accepts a bare graph document or a fit result carrying one under "graph".
GraphDocument load_graph(const fs::path& path) {
    const Json doc = read_json_file(path);
    return graph_from_json(doc.contains("graph") && doc.at("graph").is_object() ? doc.at("graph") : doc);
}

int run_eval(const fs::path& estimated_path, const fs::path& truth_path) {
    require_file(estimated_path, "estimated graph");
    require_file(truth_path, "truth graph");
    const GraphDocument est = load_graph(estimated_path);
    const GraphDocument truth = load_graph(truth_path);
    if (est.p != truth.p)
        throw InvalidArgument(fmt::format("graphs have different sizes ({} vs {})", est.p, truth.p));
    const Cpdag est_cpdag = est.to_cpdag();
    Json out;
    const bool truth_is_dag = truth.undirected.empty();
    const Cpdag truth_cpdag = truth_is_dag ? cpdag_of(truth.to_dag()) : truth.to_cpdag();
    if (est.undirected.empty() && truth_is_dag) {
        const Dag e = est.to_dag();
        out["dag"] = metrics_json(edge_metrics(e, truth.to_dag()));
        out["mec"] = metrics_json(cpdag_metrics(cpdag_of(e), truth_cpdag));
    } else if (!est.directed.empty() || est.undirected.empty()) {
        out["mec"] = metrics_json(cpdag_metrics(meek_closure(est_cpdag), truth_cpdag));
    }
    out["skeleton"] = metrics_json(skeleton_metrics(skeleton(est_cpdag), skeleton(truth_cpdag)));
    std::cout << out.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Moments-ratio scoring for Poisson DAG models"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Sample a random DAG, SEM parameters and count data");
    simulate->add_option("--p", sim.p, "Number of nodes")->required();
    simulate->add_option("--d", sim.d, "Maximum indegree")->required();
    simulate->add_option("--n", sim.n, "Number of samples")->required();
    simulate->add_option("--seed", sim.seed, "Seed for every random draw")->required();
    simulate->add_option("--out", sim.out, "Output directory")->required();
    simulate->add_option("--link", sim.link, "Link function")->check(CLI::IsMember({"log", "identity"}));
    simulate->add_option("--sign", sim.sign, "Sign of edge weights")->check(CLI::IsMember({"mixed", "negative", "positive"}));

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Learn a graph from a count CSV");
    fit_cmd->add_option("--input", fit.input, "Count CSV with a header row")->required();
    fit_cmd->add_option("--out", fit.out, "Output directory")->required();
    fit_cmd->add_option("--folds", fit.folds, "CV folds (integer or 'loo')");
    fit_cmd->add_option("--learner", fit.learner, "mrs, pmrf or oracle");
    fit_cmd->add_option("--truth", fit.truth, "Truth graph JSON (oracle parents; metrics for mrs)");
    fit_cmd->add_option("--config", fit.config, "TOML or JSON config; flags override it");
    fit_cmd->add_option("--seed", fit.seed, "Seed for fold assignment");
    fit_cmd->add_option("--jobs", fit.jobs, "Worker threads (default: MRS_JOBS or 1)");
    fit_cmd->add_option("--grid-size", fit.grid_size, "Lambda grid size");
    fit_cmd->add_option("--lambda", fit.lambda, "Fixed lambda; disables cross-validation");
    fit_cmd->add_flag("-v,--verbose", fit.verbose, "Progress messages on stderr");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark sweep from a TOML or JSON spec");
    bench_cmd->add_option("spec", bench.spec, "Experiment spec file")->required();
    bench_cmd->add_option("--out", bench.out, "Report directory (overrides output_dir)");
    bench_cmd->add_flag("--dry-run", bench.dry_run, "Validate and print the planned work");
    bench_cmd->add_option("--jobs", bench.jobs, "Concurrent trials (default: MRS_JOBS or 1)");

    fs::path estimated, truth;
    auto* eval = app.add_subcommand("eval", "Compare an estimated graph JSON with a reference");
    eval->add_option("--estimated", estimated, "Estimated graph or fit result JSON")->required();
    eval->add_option("--truth", truth, "Reference graph JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*simulate) return run_simulate(sim);
        if (*fit_cmd) return run_fit(fit);
        if (*bench_cmd) return run_bench(bench);
        if (*eval) return run_eval(estimated, truth);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
