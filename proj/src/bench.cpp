#include "mrs/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mrs/baselines.hpp"
#include "mrs/error.hpp"
#include "mrs/parallel.hpp"
#include "mrs/rng.hpp"
#include "mrs/serialize.hpp"

namespace mrs {

std::string to_string(ModelFamily family) {
    return family == ModelFamily::LogLinkSem ? "log_sem" : "identity_link";
}

std::string to_string(GraphKind kind) {
    switch (kind) {
    case GraphKind::Random:
        return "random";
    case GraphKind::Star:
        return "star";
    case GraphKind::Chain:
        return "chain";
    }
    return "random";
}

std::string to_string(Learner learner) {
    switch (learner) {
    case Learner::Mrs:
        return "mrs";
    case Learner::Oracle:
        return "oracle";
    case Learner::Pmrf:
        return "pmrf";
    }
    return "mrs";
}

void ExperimentSpec::validate() const {
    if (p < 1) throw InvalidArgument("p must be positive");
    if (graph == GraphKind::Random && (d < 0 || d >= p))
        throw InvalidArgument("d must satisfy 0 <= d < p (got d=" + std::to_string(d) + ", p=" + std::to_string(p) + ")");
    if (graph == GraphKind::Star && p < 2) throw InvalidArgument("a star graph needs p >= 2");
    if (graph == GraphKind::Star && family != ModelFamily::LogLinkSem)
        throw InvalidArgument("star graphs are only defined for the log-link family");
    if (n_grid.empty()) throw InvalidArgument("n grid is empty");
    for (int n : n_grid)
        if (n < 1) throw InvalidArgument("sample sizes must be positive");
    if (trials < 1) throw InvalidArgument("trials must be at least 1");
    if (learners.empty()) throw InvalidArgument("learner list is empty");
    if (jobs < 1) throw InvalidArgument("jobs must be positive");
    if (retry_budget < 0) throw InvalidArgument("retry budget must be non-negative");
    if (graph == GraphKind::Star && (!(hub_rate > 0.0) || star_weight == 0.0))
        throw InvalidArgument("star graphs need hub_rate > 0 and a nonzero star_weight");
    const auto sim = simulation_config();
    if (!(sim.weight_magnitude.lo > 0.0 && sim.weight_magnitude.lo <= sim.weight_magnitude.hi))
        throw InvalidArgument("weight range must satisfy 0 < lo <= hi");
    if (!(sim.intercepts.lo <= sim.intercepts.hi)) throw InvalidArgument("intercept range must satisfy lo <= hi");
    mrs.validate(*std::min_element(n_grid.begin(), n_grid.end()), p);
}

SimulationConfig ExperimentSpec::simulation_config() const {
    SimulationConfig c;
    if (family == ModelFamily::LogLinkSem) {
        c.intercepts = intercepts.value_or(default_intercept_range());
        c.weight_magnitude = weights.value_or(default_weight_range(d));
    } else {
        c.intercepts = intercepts.value_or(default_identity_intercept_range());
        c.weight_magnitude = weights.value_or(default_identity_weight_range());
    }
    c.sign = sign;
    c.retry_budget = retry_budget;
    c.sampling = sampling;
    return c;
}

namespace {

struct TrialData {
    Dag truth;
    CountMatrix data;
};

Dag trial_graph(const ExperimentSpec& spec, std::uint64_t seed) {
    std::vector<Edge> edges;
    switch (spec.graph) {
    case GraphKind::Random:
        return random_dag(spec.p, spec.d, seed);
    case GraphKind::Chain:
        for (int v = 1; v < spec.p; ++v) edges.push_back({v - 1, v});
        return Dag(spec.p, edges);
    case GraphKind::Star: {
        Rng rng(derive_key(seed, "star_hub"));
        const int hub = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.p)));
        for (int v = 0; v < spec.p; ++v)
            if (v != hub) edges.push_back({hub, v});
        return Dag(spec.p, edges);
    }
    }
    throw InvalidArgument("unknown graph kind");
}

TrialData simulate_trial(const ExperimentSpec& spec, std::uint64_t seed, int n) {
    Dag truth = trial_graph(spec, seed);
    const auto sim = spec.simulation_config();
    if (spec.graph == GraphKind::Star) {
        std::vector<double> intercepts(static_cast<std::size_t>(spec.p), 0.0);
        intercepts[static_cast<std::size_t>(truth.edges().front().from)] = std::log(spec.hub_rate);
        const std::vector<double> weights(truth.edge_count(), spec.star_weight);
        if (spec.family == ModelFamily::LogLinkSem) {
            PoissonSem sem(truth, intercepts, weights);
            auto outcome = sample_sem(sem, n, derive_key(seed, "samples"), sim.sampling);
            if (!outcome.data) throw RegenerationError("star SEM overflowed", outcome.offending_node);
            return {std::move(truth), std::move(*outcome.data)};
        }
        throw InvalidArgument("star graphs are only defined for the log-link family");
    }
    if (spec.family == ModelFamily::LogLinkSem) {
        auto sim_result = simulate_sem(truth, n, seed, sim);
        return {std::move(truth), std::move(sim_result.data)};
    }
    auto sim_result = simulate_identity_link(truth, n, seed, sim);
    return {std::move(truth), std::move(sim_result.data)};
}

struct TrialOutput {
    std::vector<TrialRow> rows;
    std::vector<FailureRow> failures;
    TrialArtifacts artifacts;
};

TrialOutput run_trial(const ExperimentSpec& spec, int trial) {
    TrialOutput out;
    const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(trial);
    out.artifacts.trial = trial;
    out.artifacts.seed = seed;
    const int n_max = *std::max_element(spec.n_grid.begin(), spec.n_grid.end());

    TrialData sim;
    try {
        sim = simulate_trial(spec, seed, n_max);
    } catch (const Error& e) {
        for (int n : spec.n_grid)
            for (Learner l : spec.learners) out.failures.push_back({l, n, trial, seed, "simulate", e.what()});
        return out;
    }
    out.artifacts.truth = to_json(sim.truth);
    const Cpdag truth_cpdag = cpdag_of(sim.truth);
    const auto truth_skeleton = skeleton(sim.truth);

    MrsConfig config = spec.mrs;
    config.seed = seed;
    for (int n : spec.n_grid) {
        // Rows are sampled from independent per-row streams, so the first n
        // rows are exactly an n-sample.
        const CountMatrix data = sim.data.top_rows(n);
        // The oracle shares MRS's ordering search, which does not depend on
        // how parents are chosen, so one search serves both learners.
        std::optional<MrsResult> ordered;
        std::vector<int> quarantined;
        double ordering_seconds = 0.0;
        std::optional<std::string> ordering_error;
        for (Learner learner : spec.learners) {
            TrialRow row;
            row.learner = learner;
            row.n = n;
            row.trial = trial;
            row.seed = seed;
            try {
                nlohmann::json estimate;
                if (learner == Learner::Pmrf) {
                    const auto start = std::chrono::steady_clock::now();
                    const UndirectedGraph g = pmrf_fit_quarantined(data, config).and_graph;
                    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                    row.skeleton = skeleton_metrics(g.edges, truth_skeleton);
                    estimate = to_json(g);
                } else {
                    if (ordering_error) throw Error(*ordering_error);
                    if (!ordered) {
                        const auto start = std::chrono::steady_clock::now();
                        try {
                            ordered = mrs_learn_quarantined(data, config, &quarantined);
                        } catch (const Error& e) {
                            ordering_error = e.what();
                            throw;
                        }
                        ordering_seconds =
                            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                    }
                    const auto start = std::chrono::steady_clock::now();
                    const MrsResult r =
                        learner == Learner::Mrs ? *ordered : oracle_from_ordering(*ordered, sim.truth, quarantined);
                    row.seconds = ordering_seconds +
                                  std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                    row.dag = edge_metrics(r.graph, sim.truth);
                    row.mec = cpdag_metrics(cpdag_of(r.graph), truth_cpdag);
                    row.skeleton = skeleton_metrics(skeleton(r.graph), truth_skeleton);
                    estimate = to_json(r.graph);
                }
                out.artifacts.estimates.emplace_back("n" + std::to_string(n) + "_" + to_string(learner), estimate);
                out.rows.push_back(row);
            } catch (const Error& e) {
                out.failures.push_back({learner, n, trial, seed, "learn", e.what()});
            }
        }
    }
    return out;
}

} // namespace

BenchReport run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<TrialOutput> outputs(static_cast<std::size_t>(spec.trials));
    parallel_for(outputs.size(), spec.jobs,
                 [&](std::size_t t) { outputs[t] = run_trial(spec, static_cast<int>(t)); });
    BenchReport report;
    report.spec = spec;
    for (auto& o : outputs) {
        report.rows.insert(report.rows.end(), o.rows.begin(), o.rows.end());
        report.failures.insert(report.failures.end(), o.failures.begin(), o.failures.end());
        report.artifacts.push_back(std::move(o.artifacts));
    }
    return report;
}

MeanSe mean_se(const std::vector<double>& values) {
    if (values.empty()) throw InvalidArgument("mean of an empty sample");
    MeanSe out;
    const double k = static_cast<double>(values.size());
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / k;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.se = std::sqrt(ss / (k - 1.0) / k);
    }
    return out;
}

std::vector<SummaryRow> summarize(const BenchReport& report) {
    if (report.rows.empty() && report.failures.empty()) throw InvalidArgument("cannot summarize an empty report");
    std::vector<SummaryRow> out;
    for (Learner learner : report.spec.learners)
        for (int n : report.spec.n_grid) {
            SummaryRow s;
            s.learner = learner;
            s.n = n;
            std::vector<double> dp, dr, mp, mr, sp, sr, secs;
            for (const auto& row : report.rows) {
                if (row.learner != learner || row.n != n) continue;
                if (row.dag) {
                    dp.push_back(row.dag->precision);
                    dr.push_back(row.dag->recall);
                }
                if (row.mec) {
                    mp.push_back(row.mec->precision);
                    mr.push_back(row.mec->recall);
                }
                sp.push_back(row.skeleton.precision);
                sr.push_back(row.skeleton.recall);
                secs.push_back(row.seconds);
            }
            for (const auto& f : report.failures)
                if (f.learner == learner && f.n == n) ++s.failures;
            s.trials = sp.size();
            if (s.trials == 0) {
                out.push_back(s);
                continue;
            }
            if (!dp.empty()) {
                s.dag_precision = mean_se(dp);
                s.dag_recall = mean_se(dr);
                s.mec_precision = mean_se(mp);
                s.mec_recall = mean_se(mr);
            }
            s.skeleton_precision = mean_se(sp);
            s.skeleton_recall = mean_se(sr);
            s.mean_seconds = mean_se(secs).mean;
            out.push_back(s);
        }
    return out;
}

namespace {

std::string cells(const std::optional<StructureMetrics>& m) {
    if (!m) return ",,,,";
    return fmt::format("{},{},{},{},{}", m->true_positives, m->estimated, m->truth, m->precision, m->recall);
}

std::string cells(const StructureMetrics& m) { return cells(std::optional<StructureMetrics>(m)); }

std::string cells(const std::optional<MeanSe>& m) {
    if (!m) return ",";
    return m->se ? fmt::format("{},{}", m->mean, *m->se) : fmt::format("{},", m->mean);
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

} // namespace

void write_report_csv(std::ostream& out, const BenchReport& report) {
    out << "learner,n,trial,seed,"
           "dag_tp,dag_estimated,dag_true,dag_precision,dag_recall,"
           "mec_tp,mec_estimated,mec_true,mec_precision,mec_recall,"
           "skel_tp,skel_estimated,skel_true,skel_precision,skel_recall\n";
    for (const auto& r : report.rows)
        fmt::print(out, "{},{},{},{},{},{},{}\n", to_string(r.learner), r.n, r.trial, r.seed, cells(r.dag), cells(r.mec),
                   cells(r.skeleton));
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary) {
    out << "learner,n,trials,failures,"
           "dag_precision_mean,dag_precision_se,dag_recall_mean,dag_recall_se,"
           "mec_precision_mean,mec_precision_se,mec_recall_mean,mec_recall_se,"
           "skel_precision_mean,skel_precision_se,skel_recall_mean,skel_recall_se\n";
    for (const auto& s : summary) {
        const bool any = s.trials > 0;
        fmt::print(out, "{},{},{},{},{},{},{},{},{},{}\n", to_string(s.learner), s.n, s.trials, s.failures,
                   cells(s.dag_precision), cells(s.dag_recall), cells(s.mec_precision), cells(s.mec_recall),
                   any ? cells(std::optional<MeanSe>(s.skeleton_precision)) : ",",
                   any ? cells(std::optional<MeanSe>(s.skeleton_recall)) : ",");
    }
}

void write_timing_csv(std::ostream& out, const BenchReport& report) {
    out << "learner,n,trial,seconds\n";
    for (const auto& r : report.rows) fmt::print(out, "{},{},{},{}\n", to_string(r.learner), r.n, r.trial, r.seconds);
}

void write_failures_csv(std::ostream& out, const BenchReport& report) {
    out << "learner,n,trial,seed,stage,message\n";
    for (const auto& f : report.failures)
        fmt::print(out, "{},{},{},{},{},{}\n", to_string(f.learner), f.n, f.trial, f.seed, f.stage, quote(f.message));
}

void write_report(const BenchReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "artifacts", ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    auto open = [&](const std::string& name) {
        std::ofstream f(dir / name);
        if (!f) throw Error("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("report.csv");
        write_report_csv(f, report);
    }
    {
        auto f = open("summary.csv");
        write_summary_csv(f, summarize(report));
    }
    {
        auto f = open("timing.csv");
        write_timing_csv(f, report);
    }
    {
        auto f = open("failures.csv");
        write_failures_csv(f, report);
    }
    for (const auto& a : report.artifacts) {
        const std::string stem = fmt::format("trial_{:04d}", a.trial);
        if (!a.truth.is_null()) write_json_file(dir / "artifacts" / (stem + "_truth.json"), a.truth);
        for (const auto& [key, doc] : a.estimates) write_json_file(dir / "artifacts" / (stem + "_" + key + ".json"), doc);
    }
}

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw InvalidArgument("slope: size mismatch");
    if (x.size() < 2) return std::nullopt;
    const double k = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= k;
    my /= k;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

RuntimeTable runtime_scaling(const ExperimentSpec& base, const std::vector<int>& p_grid, int n, int trials) {
    if (p_grid.empty()) throw InvalidArgument("p grid is empty");
    if (!std::is_sorted(p_grid.begin(), p_grid.end())) throw InvalidArgument("p grid must be ascending");
    if (trials < 1) throw InvalidArgument("trials must be at least 1");
    RuntimeTable table;
    std::vector<double> xs, ys;
    for (int p : p_grid) {
        ExperimentSpec spec = base;
        spec.p = p;
        spec.n_grid = {n};
        spec.trials = trials;
        spec.learners = {Learner::Mrs};
        spec.validate();
        RuntimePoint point;
        point.p = p;
        point.n = n;
        std::vector<double> secs;
        for (int t = 0; t < trials; ++t) {
            const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(t);
            try {
                const TrialData sim = simulate_trial(spec, seed, n);
                MrsConfig config = spec.mrs;
                config.seed = seed;
                const auto start = std::chrono::steady_clock::now();
                (void)mrs_learn_quarantined(sim.data, config);
                secs.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
            } catch (const Error&) {
                ++point.failures;
            }
        }
        if (secs.empty()) throw Error("runtime_scaling: every trial failed at p=" + std::to_string(p));
        std::sort(secs.begin(), secs.end());
        const std::size_t mid = secs.size() / 2;
        point.median_seconds = secs.size() % 2 ? secs[mid] : 0.5 * (secs[mid - 1] + secs[mid]);
        point.mean_seconds = std::accumulate(secs.begin(), secs.end(), 0.0) / static_cast<double>(secs.size());
        table.points.push_back(point);
        xs.push_back(p);
        ys.push_back(point.median_seconds);
    }
    table.slope = loglog_slope(xs, ys);
    return table;
}

RuntimeDoubling runtime_doubling(const ExperimentSpec& base, int p, int n, int trials) {
    if (n < 1) throw InvalidArgument("sample size must be positive");
    if (trials < 1) throw InvalidArgument("trials must be at least 1");
    ExperimentSpec spec = base;
    spec.p = p;
    spec.n_grid = {n, 2 * n};
    spec.trials = trials;
    spec.learners = {Learner::Mrs};
    spec.validate();
    RuntimeDoubling out;
    out.p = p;
    out.n = n;
    std::vector<double> at_n, at_2n, ratios, widths;
    const auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t mid = v.size() / 2;
        return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
    };
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(t);
        try {
            const TrialData sim = simulate_trial(spec, seed, 2 * n);
            MrsConfig config = spec.mrs;
            config.seed = seed;
            const CountMatrix small = sim.data.top_rows(n);
            const auto dropped = degenerate_columns(small, config);
            std::vector<int> keep;
            for (int j = 0; j < p; ++j)
                if (!std::binary_search(dropped.begin(), dropped.end(), j)) keep.push_back(j);
            if (keep.size() < 2) throw DataError("fewer than two usable columns");
            const auto time_fit = [&](const CountMatrix& data) {
                const auto start = std::chrono::steady_clock::now();
                (void)mrs_learn(data, config);
                return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            };
            const double a = time_fit(small.select_columns(keep));
            const double b = time_fit(sim.data.select_columns(keep));
            at_n.push_back(a);
            at_2n.push_back(b);
            ratios.push_back(b / a);
            widths.push_back(static_cast<double>(keep.size()));
        } catch (const Error&) {
            ++out.failures;
        }
    }
    if (ratios.empty()) throw Error("runtime_doubling: every trial failed at p=" + std::to_string(p));
    out.columns = static_cast<int>(median(widths));
    out.median_seconds = median(at_n);
    out.median_seconds_2n = median(at_2n);
    out.median_ratio = median(ratios);
    return out;
}

} // namespace mrs
