#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrs/graph.hpp"
#include "mrs/mrs.hpp"
#include "mrs/simulate.hpp"

namespace mrs {

enum class ModelFamily { LogLinkSem, IdentityLink };
enum class GraphKind { Random, Star, Chain };
enum class Learner { Mrs, Oracle, Pmrf };

std::string to_string(ModelFamily family);
std::string to_string(GraphKind kind);
std::string to_string(Learner learner);

struct ExperimentSpec {
    std::string name = "experiment";
    ModelFamily family = ModelFamily::LogLinkSem;
    GraphKind graph = GraphKind::Random;
    int p = 20;
    int d = 1;
    std::vector<int> n_grid{250};
    int trials = 20;
    std::uint64_t seed = 1;  // trial t uses seed + t
    std::vector<Learner> learners{Learner::Mrs};

    // Unset ranges fall back to the family defaults for the given d.
    std::optional<ParamRange> intercepts;
    std::optional<ParamRange> weights;
    WeightSign sign = WeightSign::Mixed;
    // Star graphs: hub ~ Poisson(hub_rate), leaf | hub ~ Poisson(exp(star_weight * hub)).
    double hub_rate = 5.0;
    double star_weight = 0.15;
    SampleOptions sampling;
    int retry_budget = 100;

    MrsConfig mrs;
    std::size_t jobs = 1;  // concurrent trials
    std::filesystem::path output_dir;

    // Throws InvalidArgument describing the first problem found.
    void validate() const;
    std::size_t planned_rows() const { return learners.size() * n_grid.size() * static_cast<std::size_t>(trials); }
    SimulationConfig simulation_config() const;
};

ExperimentSpec load_experiment_spec(const std::filesystem::path& path);
// JSON form of a spec document; unknown keys are rejected.
ExperimentSpec experiment_spec_from_json(const nlohmann::json& doc);
// Applies an "mrs" configuration section; unknown keys are rejected.
void apply_mrs_config(const nlohmann::json& section, MrsConfig& config);
// Parses TOML text into the equivalent JSON document.
nlohmann::json toml_to_json(const std::string& text);

struct TrialRow {
    Learner learner = Learner::Mrs;
    int n = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    // Directed learners get DAG and MEC metrics; every learner gets skeleton metrics.
    std::optional<StructureMetrics> dag;
    std::optional<StructureMetrics> mec;
    StructureMetrics skeleton;
    double seconds = 0.0;
};

struct FailureRow {
    Learner learner = Learner::Mrs;
    int n = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    std::string stage;  // "simulate" or "learn"
    std::string message;
};

struct TrialArtifacts {
    int trial = 0;
    std::uint64_t seed = 0;
    nlohmann::json truth;
    // keyed by "n<N>_<learner>"
    std::vector<std::pair<std::string, nlohmann::json>> estimates;
};

struct BenchReport {
    ExperimentSpec spec;
    std::vector<TrialRow> rows;
    std::vector<FailureRow> failures;
    std::vector<TrialArtifacts> artifacts;
};

// Runs every trial; learner and simulation failures are recorded, not thrown.
BenchReport run_experiment(const ExperimentSpec& spec);

struct MeanSe {
    double mean = 0.0;
    std::optional<double> se;  // absent for a single trial
};

struct SummaryRow {
    Learner learner = Learner::Mrs;
    int n = 0;
    std::size_t trials = 0;
    std::size_t failures = 0;
    std::optional<MeanSe> dag_precision, dag_recall, mec_precision, mec_recall;
    MeanSe skeleton_precision, skeleton_recall;
    double mean_seconds = 0.0;
};

// Mean and standard error per (learner, n), in spec order.
std::vector<SummaryRow> summarize(const BenchReport& report);

MeanSe mean_se(const std::vector<double>& values);

// Metric CSVs exclude wall-clock time so reruns are byte-identical;
// timing.csv carries the seconds.
void write_report_csv(std::ostream& out, const BenchReport& report);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary);
void write_timing_csv(std::ostream& out, const BenchReport& report);
void write_failures_csv(std::ostream& out, const BenchReport& report);
// Writes report.csv, summary.csv, timing.csv, failures.csv and artifacts/.
void write_report(const BenchReport& report, const std::filesystem::path& dir);

struct RuntimePoint {
    int p = 0;
    int n = 0;
    double median_seconds = 0.0;
    double mean_seconds = 0.0;
    std::size_t failures = 0;
};

struct RuntimeTable {
    std::vector<RuntimePoint> points;
    std::optional<double> slope;  // least-squares slope of log(median) on log(p)
};

// Times mrs_learn on data simulated per `base` (family, d, ranges, config)
// for each p in `p_grid` at sample size n.
RuntimeTable runtime_scaling(const ExperimentSpec& base, const std::vector<int>& p_grid, int n, int trials);

struct RuntimeDoubling {
    int p = 0;
    int n = 0;
    int columns = 0;                  // columns actually learned (median over trials)
    double median_seconds = 0.0;      // at n
    double median_seconds_2n = 0.0;   // at 2n
    double median_ratio = 0.0;        // median of per-trial 2n / n time ratios
    std::size_t failures = 0;
};

// Times mrs_learn at n and 2n on the same trials and the same column set.
// Each trial samples 2n rows; the n-sample is its top rows. Columns that are
// degenerate at n are dropped from both, so p is held fixed across the pair.
RuntimeDoubling runtime_doubling(const ExperimentSpec& base, int p, int n, int trials);

// Least-squares slope of log(y) on log(x); absent with fewer than two points.
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace mrs
