#include "mrs/mrs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mrs/error.hpp"
#include "mrs/parallel.hpp"

namespace mrs {

void MrsConfig::validate(Eigen::Index n, Eigen::Index p) const {
    if (p < 1) throw InvalidArgument("need at least one column");
    if (!leave_one_out && folds < 2) throw InvalidArgument("folds must be at least 2");
    if (grid_size < 1) throw InvalidArgument("grid_size must be positive");
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("ratio must lie in (0, 1)");
    if (!(threshold >= 0.0)) throw InvalidArgument("threshold must be non-negative");
    if (jobs < 1) throw InvalidArgument("jobs must be positive");
    if (fixed_lambda && !(*fixed_lambda >= 0.0 && std::isfinite(*fixed_lambda)))
        throw InvalidArgument("fixed lambda must be finite and non-negative");
    if (min_samples < 0) throw InvalidArgument("min_samples must be non-negative");
    const Eigen::Index needed = min_samples > 0 ? min_samples : (leave_one_out ? 2 : 2 * folds);
    if (n < needed)
        throw InvalidArgument("need at least " + std::to_string(needed) + " samples, got " + std::to_string(n));
}

double score_first(const Eigen::VectorXd& column) {
    const double mean = column.mean();
    if (!(mean > 0.0)) throw DataError("moments ratio undefined for an all-zero column");
    return column.squaredNorm() / static_cast<double>(column.size()) / (mean + mean * mean);
}

double score_first(const CountMatrix& data, int node) {
    if (node < 0 || node >= data.cols()) throw InvalidArgument("node index out of range");
    return score_first(Eigen::VectorXd(data.values().col(node).cast<double>()));
}

MomentsRatio moments_ratio(const Eigen::VectorXd& response, const Eigen::MatrixXd& design, const LassoFit& fit) {
    const Eigen::VectorXd eta = (design * fit.coefficients).array() + fit.intercept;
    if (!eta.allFinite()) throw Error("non-finite linear predictor in score computation");
    const double n = static_cast<double>(response.size());
    MomentsRatio r;
    r.numerator = response.squaredNorm() / n;
    r.denominator = (eta.array().exp() + (2.0 * eta.array()).exp()).sum() / n;
    if (!std::isfinite(r.denominator) || !(r.denominator > 0.0))
        throw Error("non-finite conditional moment in score computation");
    return r;
}

double score_step(const CountMatrix& data, int node, const std::vector<int>& prefix, const LassoFit& fit) {
    const Eigen::MatrixXd x = data.to_real();
    Eigen::MatrixXd design(x.rows(), static_cast<Eigen::Index>(prefix.size()));
    for (std::size_t c = 0; c < prefix.size(); ++c) design.col(static_cast<Eigen::Index>(c)) = x.col(prefix[c]);
    if (fit.coefficients.size() != design.cols()) throw InvalidArgument("fit does not match the prefix size");
    return moments_ratio(x.col(node), design, fit).value();
}

std::vector<int> select_parents(const LassoFit& fit, double threshold) {
    std::vector<int> out;
    for (Eigen::Index k = 0; k < fit.coefficients.size(); ++k)
        if (std::abs(fit.coefficients(k)) > threshold) out.push_back(static_cast<int>(k));
    return out;
}

std::size_t rule_index(const CvResult& cv, LambdaRule rule) {
    switch (rule) {
    case LambdaRule::BandMin:
        return cv.index_band_lo;
    case LambdaRule::BandMax:
        return cv.index_band_hi;
    case LambdaRule::CvMin:
        return cv.index_min;
    }
    return cv.index_min;
}

CvOptions cv_options(const MrsConfig& config, Eigen::Index n) {
    CvOptions cv;
    cv.folds = config.effective_folds(n);
    cv.grid_size = config.grid_size;
    cv.ratio = config.ratio;
    cv.seed = config.seed;
    cv.criterion = config.criterion;
    return cv;
}

namespace {

struct Candidate {
    ScoreEntry entry;
    std::optional<LassoFit> parent_fit;
};

Candidate evaluate_candidate(const Eigen::MatrixXd& x, int m, int node, const std::vector<int>& prefix,
                             const MrsConfig& config) {
    Candidate c;
    c.entry.step = m;
    c.entry.node = node;
    if (prefix.empty()) {
        const Eigen::VectorXd col = x.col(node);
        const double mean = col.mean();
        c.entry.score = score_first(col);
        c.entry.numerator = col.squaredNorm() / static_cast<double>(col.size());
        c.entry.denominator = mean + mean * mean;
        c.entry.lambda_score = c.entry.lambda_parent = std::numeric_limits<double>::quiet_NaN();
        return c;
    }
    Eigen::MatrixXd design(x.rows(), static_cast<Eigen::Index>(prefix.size()));
    for (std::size_t k = 0; k < prefix.size(); ++k) design.col(static_cast<Eigen::Index>(k)) = x.col(prefix[k]);
    const Eigen::VectorXd response = x.col(node);
    if (!(response.sum() > 0.0)) throw DataError("column is identically zero");
    const LassoProblem problem(design, response);

    LassoFit score_fit;
    if (config.fixed_lambda) {
        score_fit = fit_poisson_lasso(problem, *config.fixed_lambda, config.solver);
        c.parent_fit = score_fit;
    } else {
        const CvResult table = cv_select(problem, cv_options(config, x.rows()), config.solver);
        score_fit = table.path.fits[rule_index(table, config.score_rule)];
        c.parent_fit = table.path.fits[rule_index(table, config.parent_rule)];
    }
    const MomentsRatio ratio = moments_ratio(response, design, score_fit);
    c.entry.score = ratio.value();
    c.entry.numerator = ratio.numerator;
    c.entry.denominator = ratio.denominator;
    c.entry.lambda_score = score_fit.lambda;
    c.entry.lambda_parent = c.parent_fit->lambda;
    return c;
}

} // namespace

MrsResult learn_with_ordering(const CountMatrix& data, const MrsConfig& config, const ParentChooser& choose_parents) {
    const Eigen::Index p = data.cols();
    config.validate(data.rows(), p);
    const Eigen::MatrixXd x = data.to_real();
    const auto& labels = data.labels();

    MrsResult result;
    result.parent_lambda.assign(static_cast<std::size_t>(p), std::numeric_limits<double>::quiet_NaN());
    std::vector<int> prefix;
    std::vector<int> remaining(static_cast<std::size_t>(p));
    for (int v = 0; v < p; ++v) remaining[static_cast<std::size_t>(v)] = v;
    std::vector<Edge> edges;

    for (int m = 0; m < p; ++m) {
        std::vector<Candidate> candidates(remaining.size());
        parallel_for(remaining.size(), config.jobs, [&](std::size_t i) {
            const int node = remaining[i];
            try {
                candidates[i] = evaluate_candidate(x, m, node, prefix, config);
            } catch (const Error& e) {
                throw Error("step " + std::to_string(m + 1) + ", node " + std::to_string(node + 1) + " (" +
                            labels[static_cast<std::size_t>(node)] + "): " + e.what());
            }
        });
        // remaining is ascending, so the first minimum is the lowest index.
        std::size_t best = 0;
        for (std::size_t i = 1; i < candidates.size(); ++i)
            if (candidates[i].entry.score < candidates[best].entry.score) best = i;
        const int winner = remaining[best];
        for (const auto& c : candidates) result.scores.entries.push_back(c.entry);
        result.scores.winners.push_back(winner);

        const LassoFit* parent_fit = candidates[best].parent_fit ? &*candidates[best].parent_fit : nullptr;
        for (int parent : choose_parents(m, winner, prefix, parent_fit)) edges.push_back({parent, winner});
        if (parent_fit) result.parent_lambda[static_cast<std::size_t>(winner)] = parent_fit->lambda;

        prefix.push_back(winner);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    result.ordering = Ordering(prefix);
    for (const Edge& e : edges)
        if (result.ordering.position(e.from) >= result.ordering.position(e.to))
            throw Error("internal: estimated edge contradicts the estimated ordering");
    result.graph = Dag(static_cast<int>(p), std::move(edges), labels);
    return result;
}

MrsResult mrs_learn(const CountMatrix& data, const MrsConfig& config) {
    const double threshold = config.threshold;
    return learn_with_ordering(data, config,
                               [threshold](int, int, const std::vector<int>& prefix, const LassoFit* fit) {
                                   std::vector<int> parents;
                                   if (!fit) return parents;
                                   for (int k : select_parents(*fit, threshold))
                                       parents.push_back(prefix[static_cast<std::size_t>(k)]);
                                   return parents;
                               });
}

std::vector<int> degenerate_columns(const CountMatrix& data, const MrsConfig& config) {
    std::vector<int> out;
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const auto col = data.values().col(j);
        const bool constant = data.rows() == 0 || (col.array() == col(0)).all();
        const bool sparse = !config.fixed_lambda && (col.array() != 0).count() < 2;
        if (constant || sparse) out.push_back(static_cast<int>(j));
    }
    return out;
}

MrsResult embed_result(const MrsResult& sub, const std::vector<int>& kept, const CountMatrix& full) {
    const int p = static_cast<int>(full.cols());
    if (sub.graph.size() != static_cast<int>(kept.size())) throw InvalidArgument("embed_result: size mismatch");
    auto lift = [&](int v) { return kept[static_cast<std::size_t>(v)]; };
    MrsResult out;
    std::vector<char> used(static_cast<std::size_t>(p), 0);
    std::vector<int> order;
    for (int v : sub.ordering) {
        order.push_back(lift(v));
        used[static_cast<std::size_t>(lift(v))] = 1;
    }
    for (int v = 0; v < p; ++v)
        if (!used[static_cast<std::size_t>(v)]) order.push_back(v);
    out.ordering = Ordering(order);
    std::vector<Edge> edges;
    for (const Edge& e : sub.graph.edges()) edges.push_back({lift(e.from), lift(e.to)});
    out.graph = Dag(p, std::move(edges), full.labels());
    out.scores = sub.scores;
    for (auto& e : out.scores.entries) e.node = lift(e.node);
    for (auto& w : out.scores.winners) w = lift(w);
    out.parent_lambda.assign(static_cast<std::size_t>(p), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t v = 0; v < kept.size(); ++v)
        out.parent_lambda[static_cast<std::size_t>(kept[v])] = sub.parent_lambda[v];
    return out;
}

} // namespace mrs
