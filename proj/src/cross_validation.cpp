#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mrs/poisson_lasso.hpp"
#include "mrs/rng.hpp"

namespace mrs {

std::vector<int> assign_folds(Eigen::Index n, int folds, std::uint64_t seed) {
    if (folds < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
    if (n < folds)
        throw InvalidArgument("cross-validation needs n >= folds (n=" + std::to_string(n) + ", folds=" +
                              std::to_string(folds) + ")");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(derive_key(seed, "cv_folds"));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    std::vector<int> label(static_cast<std::size_t>(n));
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        label[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(folds));
    return label;
}

double holdout_loss(const LassoProblem& test, const LassoFit& fit, CvCriterion criterion) {
    const Eigen::VectorXd eta =
        (test.design() * fit.coefficients).array() + fit.intercept;
    double total = 0.0;
    for (Eigen::Index i = 0; i < test.n(); ++i) {
        const double y = test.response()(i);
        const double mu = std::exp(eta(i));
        if (criterion == CvCriterion::SquaredError) {
            total += (y - mu) * (y - mu);
        } else {
            const double ylogy = y > 0.0 ? y * (std::log(y) - eta(i)) : 0.0;
            total += 2.0 * (ylogy - (y - mu));
        }
    }
    const double loss = total / static_cast<double>(test.n());
    return std::isnan(loss) ? std::numeric_limits<double>::infinity() : loss;
}

CvResult cv_select(const LassoProblem& problem, const CvOptions& cv, const SolverOptions& options) {
    const Eigen::Index n = problem.n();
    if (cv.folds < 2 || n < cv.folds)
        throw InvalidArgument("cv_select requires folds >= 2 and n >= folds (n=" + std::to_string(n) +
                              ", folds=" + std::to_string(cv.folds) + ")");
    const std::vector<double> grid = lambda_grid(lambda_max(problem), cv.grid_size, cv.ratio);

    // A training split whose responses are all zero has no finite intercept;
    // reshuffle until every split is usable.
    std::vector<int> folds;
    bool usable = false;
    for (int attempt = 0; attempt <= cv.max_reshuffles && !usable; ++attempt) {
        folds = assign_folds(n, cv.folds, derive_key(cv.seed, static_cast<std::uint64_t>(attempt)));
        usable = true;
        for (int f = 0; f < cv.folds && usable; ++f) {
            double mass = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                if (folds[static_cast<std::size_t>(i)] != f) mass += problem.response()(i);
            usable = mass > 0.0;
        }
    }
    if (!usable)
        throw Error("cross-validation: some training fold has an all-zero response after " +
                    std::to_string(cv.max_reshuffles) + " reshuffles");

    CvResult result;
    result.path = fit_path(problem, grid, options);
    std::size_t usable_len = result.path.lambdas.size();
    std::vector<std::vector<double>> losses(static_cast<std::size_t>(cv.folds));
    for (int f = 0; f < cv.folds; ++f) {
        std::vector<Eigen::Index> train, test;
        for (Eigen::Index i = 0; i < n; ++i) (folds[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
        const LassoProblem train_problem = problem.subset(train);
        const LassoProblem test_problem = problem.subset(test);
        const std::vector<double> prefix(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(usable_len));
        const LambdaPath fold_path = fit_path(train_problem, prefix, options);
        usable_len = std::min(usable_len, fold_path.fits.size());
        for (std::size_t l = 0; l < fold_path.fits.size(); ++l)
            losses[static_cast<std::size_t>(f)].push_back(holdout_loss(test_problem, fold_path.fits[l], cv.criterion));
    }
    if (usable_len == 0) {
        throw Error("cross-validation: no lambda on the grid could be fitted on every fold" +
                    (result.path.truncated ? ": " + *result.path.truncated : std::string{}));
    }

    result.lambdas.assign(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(usable_len));
    result.path.lambdas.resize(usable_len);
    result.path.fits.resize(usable_len);
    const double k = static_cast<double>(cv.folds);
    for (std::size_t l = 0; l < usable_len; ++l) {
        double mean = 0.0;
        for (const auto& fold : losses) mean += fold[l];
        mean /= k;
        double var = 0.0;
        for (const auto& fold : losses) var += (fold[l] - mean) * (fold[l] - mean);
        var /= (k - 1.0);
        result.cv_mean.push_back(mean);
        result.cv_se.push_back(std::sqrt(var / k));
    }
    result.index_min = static_cast<std::size_t>(
        std::min_element(result.cv_mean.begin(), result.cv_mean.end()) - result.cv_mean.begin());
    const double threshold = result.cv_mean[result.index_min] + 2.0 * result.cv_se[result.index_min];
    result.index_band_hi = result.index_min;
    result.index_band_lo = result.index_min;
    for (std::size_t l = 0; l < usable_len; ++l) {
        if (!(result.cv_mean[l] <= threshold)) continue;
        result.index_band_hi = std::min(result.index_band_hi, l);
        result.index_band_lo = std::max(result.index_band_lo, l);
    }
    return result;
}

} // namespace mrs
