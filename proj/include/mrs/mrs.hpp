#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mrs/count_matrix.hpp"
#include "mrs/graph.hpp"
#include "mrs/poisson_lasso.hpp"

namespace mrs {

// Which lambda of a cross-validation table a fit is taken at.
enum class LambdaRule {
    BandMin,  // smallest lambda within min + 2 SE
    BandMax,  // largest lambda within min + 2 SE
    CvMin,    // the CV minimizer
};

struct MrsConfig {
    int folds = 5;
    bool leave_one_out = false;
    int grid_size = 50;
    double ratio = 1e-3;
    CvCriterion criterion = CvCriterion::Deviance;
    LambdaRule score_rule = LambdaRule::BandMin;
    LambdaRule parent_rule = LambdaRule::BandMax;
    // Disables cross-validation; every regression is fitted at this lambda.
    std::optional<double> fixed_lambda;
    double threshold = 1e-8;
    std::size_t jobs = 1;
    std::uint64_t seed = 1;
    // Minimum sample size; 0 means 2 * folds.
    Eigen::Index min_samples = 0;
    SolverOptions solver;

    // Throws InvalidArgument when a field is out of range or the data shape
    // is not supported.
    void validate(Eigen::Index n, Eigen::Index p) const;
    int effective_folds(Eigen::Index n) const { return leave_one_out ? static_cast<int>(n) : folds; }
};

// Index into a CV table selected by `rule`.
std::size_t rule_index(const CvResult& cv, LambdaRule rule);
// Cross-validation settings implied by `config` for n observations.
CvOptions cv_options(const MrsConfig& config, Eigen::Index n);

struct ScoreEntry {
    int step = 0;  // 0-based position in the ordering being decided
    int node = 0;
    double score = 0.0;
    double numerator = 0.0;    // mean of x_j^2
    double denominator = 0.0;  // mean of m_i + m_i^2 with m_i the fitted conditional mean
    double lambda_score = 0.0;
    double lambda_parent = 0.0;
};

struct ScoreTable {
    std::vector<ScoreEntry> entries;  // grouped by step, ascending node within a step
    std::vector<int> winners;         // winners[m] = node placed at position m
};

struct MrsResult {
    Ordering ordering;
    Dag graph;
    ScoreTable scores;
    std::vector<double> parent_lambda;  // per node; NaN for the first node
};

// Moments ratio with a marginal denominator: mean(x^2) / (mean(x) + mean(x)^2).
double score_first(const Eigen::VectorXd& column);
double score_first(const CountMatrix& data, int node);

struct MomentsRatio {
    double numerator = 0.0;
    double denominator = 0.0;
    double value() const { return numerator / denominator; }
};

// Moments ratio with the conditional mean exp(eta_i) of a fitted regression
// of `response` on `design`: mean(x^2) / mean(exp(eta) + exp(2 eta)).
MomentsRatio moments_ratio(const Eigen::VectorXd& response, const Eigen::MatrixXd& design, const LassoFit& fit);
double score_step(const CountMatrix& data, int node, const std::vector<int>& prefix, const LassoFit& fit);

// Indices k with |coefficient_k| > threshold.
std::vector<int> select_parents(const LassoFit& fit, double threshold);

MrsResult mrs_learn(const CountMatrix& data, const MrsConfig& config);

// Ordering search shared by MRS and the oracle. `choose_parents` receives
// the position m, the winner, the current prefix and the winner's fit at the
// parent lambda (nullptr at m == 0) and returns parent nodes.
using ParentChooser = std::function<std::vector<int>(int m, int node, const std::vector<int>& prefix,
                                                     const LassoFit* parent_fit)>;
MrsResult learn_with_ordering(const CountMatrix& data, const MrsConfig& config, const ParentChooser& choose_parents);

// Columns the learners set aside: constant columns (degenerate score) and,
// when lambda is cross-validated, columns with fewer than two nonzero
// entries, for which some training fold is always all zero.
std::vector<int> degenerate_columns(const CountMatrix& data, const MrsConfig& config);

// Lifts a result learned on columns `kept` (ascending) of `full` back to all
// of its columns. Left-out nodes go to the end of the ordering, isolated.
MrsResult embed_result(const MrsResult& sub, const std::vector<int>& kept, const CountMatrix& full);

} // namespace mrs
