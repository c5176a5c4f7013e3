#include "mrs/poisson_lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/QR>

namespace mrs {

LassoProblem::LassoProblem(Eigen::MatrixXd design, Eigen::VectorXd response, Eigen::VectorXd penalty_factors)
    : design_(std::move(design)), response_(std::move(response)), penalty_(std::move(penalty_factors)) {
    if (response_.size() < 1) throw InvalidArgument("LassoProblem: need at least one observation");
    if (design_.rows() != response_.size())
        throw InvalidArgument("LassoProblem: design has " + std::to_string(design_.rows()) + " rows, response has " +
                              std::to_string(response_.size()));
    if (penalty_.size() == 0) penalty_ = Eigen::VectorXd::Ones(design_.cols());
    if (penalty_.size() != design_.cols()) throw InvalidArgument("LassoProblem: penalty flag count mismatch");
    if (!design_.allFinite() || !response_.allFinite()) throw InvalidArgument("LassoProblem: non-finite entry");
    if (response_.minCoeff() < 0.0) throw InvalidArgument("LassoProblem: negative response");
    if (penalty_.size() > 0 && penalty_.minCoeff() < 0.0) throw InvalidArgument("LassoProblem: negative penalty factor");
    response_mean_ = response_.mean();
}

LassoProblem LassoProblem::subset(const std::vector<Eigen::Index>& rows) const {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), q());
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        x.row(static_cast<Eigen::Index>(r)) = design_.row(rows[r]);
        y(static_cast<Eigen::Index>(r)) = response_(rows[r]);
    }
    return LassoProblem(std::move(x), std::move(y), penalty_);
}

double lambda_max(const LassoProblem& problem) {
    const Eigen::VectorXd centered = problem.response().array() - problem.response_mean();
    double best = 0.0;
    for (Eigen::Index k = 0; k < problem.q(); ++k) {
        if (problem.penalty_factors()(k) == 0.0) continue;
        const double g = std::abs(problem.design().col(k).dot(centered)) / static_cast<double>(problem.n());
        best = std::max(best, g / problem.penalty_factors()(k));
    }
    return best;
}

namespace {

Eigen::VectorXd linear_predictor(const LassoProblem& problem, double intercept, const Eigen::VectorXd& coefficients) {
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(problem.n(), intercept);
    for (Eigen::Index k = 0; k < coefficients.size(); ++k)
        if (coefficients(k) != 0.0) eta.noalias() += coefficients(k) * problem.design().col(k);
    return eta;
}

double smooth_loss(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
    return (eta.array().exp() - y.array() * eta.array()).mean();
}

double penalty(const LassoProblem& problem, const Eigen::VectorXd& coefficients, double lambda) {
    return lambda * (problem.penalty_factors().array() * coefficients.array().abs()).sum();
}

// Exact minimizer over the intercept with the slopes held fixed:
// exp(theta_0) * sum exp(<theta, x_i>) = sum y_i.
double intercept_shift(const LassoProblem& problem, const Eigen::VectorXd& eta) {
    const double top = eta.maxCoeff();
    const double log_sum = top + std::log((eta.array() - top).exp().sum());
    return std::log(problem.response().sum()) - log_sum;
}

struct KktReport {
    double residual = 0.0;  // max absolute violation
    bool within_tolerance = true;
    std::vector<Eigen::Index> violators_outside;  // zero coefficients outside the working set
};

KktReport check_kkt(const LassoProblem& problem, double lambda, const Eigen::VectorXd& coefficients,
                    const Eigen::VectorXd& eta, double tol, const std::vector<char>* working) {
    const Eigen::Index n = problem.n();
    const Eigen::VectorXd mu = eta.array().exp();
    const Eigen::VectorXd diff = mu - problem.response();
    const Eigen::VectorXd mass = mu + problem.response();
    const double eps = std::numeric_limits<double>::epsilon();
    KktReport report;
    {
        const double g0 = diff.mean();
        const double floor = 64.0 * eps * mass.mean();
        report.residual = std::abs(g0);
        if (std::abs(g0) > tol + floor) report.within_tolerance = false;
    }
    for (Eigen::Index k = 0; k < problem.q(); ++k) {
        const auto col = problem.design().col(k);
        const double g = col.dot(diff) / static_cast<double>(n);
        const double bound = lambda * problem.penalty_factors()(k);
        const double b = coefficients(k);
        const double violation = b == 0.0 ? std::max(0.0, std::abs(g) - bound)
                                          : std::abs(g + bound * (b > 0.0 ? 1.0 : -1.0));
        const double floor = 64.0 * eps * col.cwiseAbs().dot(mass) / static_cast<double>(n);
        report.residual = std::max(report.residual, violation);
        if (violation > tol + floor) {
            report.within_tolerance = false;
            if (b == 0.0 && working && !(*working)[static_cast<std::size_t>(k)]) report.violators_outside.push_back(k);
        }
    }
    return report;
}

LassoFit solve(const LassoProblem& problem, double lambda, const SolverOptions& opt, double b0, Eigen::VectorXd b,
               std::vector<char> working) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
    if (problem.response_mean() <= 0.0)
        throw InvalidArgument("response is identically zero; the intercept is unbounded");
    const auto& x = problem.design();
    const auto& y = problem.response();
    const auto& pf = problem.penalty_factors();
    const Eigen::Index n = problem.n();
    const Eigen::Index q = problem.q();
    const double inv_n = 1.0 / static_cast<double>(n);

    // At or above lambda_max the intercept-only model is optimal. Return it
    // in closed form so the zeros are exact rather than up to rounding.
    if ((pf.array() > 0.0).all() && lambda >= lambda_max(problem)) {
        LassoFit fit;
        fit.lambda = lambda;
        fit.intercept = std::log(problem.response_mean());
        fit.coefficients = Eigen::VectorXd::Zero(q);
        const Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, fit.intercept);
        fit.objective = smooth_loss(y, eta);
        if (opt.record_trace) fit.objective_trace.push_back(fit.objective);
        fit.kkt_residual = check_kkt(problem, lambda, fit.coefficients, eta, opt.kkt_tol, nullptr).residual;
        return fit;
    }

    Eigen::VectorXd eta = linear_predictor(problem, b0, b);
    {
        const double shift = intercept_shift(problem, eta);
        b0 += shift;
        eta.array() += shift;
    }
    double objective = smooth_loss(y, eta) + penalty(problem, b, lambda);

    LassoFit fit;
    fit.lambda = lambda;
    if (opt.record_trace) fit.objective_trace.push_back(objective);

    double tol = opt.inner_tol;
    bool converged = false;
    std::vector<Eigen::Index> cols;
    Eigen::VectorXd mu(n);
    Eigen::MatrixXd z, gram;
    Eigen::VectorXd s;
    int outer = 0;
    for (; outer < opt.max_outer && !converged; ++outer) {
        cols.clear();
        for (Eigen::Index k = 0; k < q; ++k)
            if (working[static_cast<std::size_t>(k)]) cols.push_back(k);
        const auto c = static_cast<Eigen::Index>(cols.size());
        // Quadratic model in covariance form: slot 0 is the intercept, slot
        // i > 0 is column cols[i - 1]. gram = X' diag(mu) X / n, s = X'(y - mu) / n
        // and s tracks the model's negative gradient as coordinates move.
        mu = eta.array().min(opt.eta_clamp).exp();
        const Eigen::VectorXd root = mu.cwiseSqrt();
        z.resize(n, c + 1);
        z.col(0) = root;
        for (Eigen::Index i = 0; i < c; ++i) z.col(i + 1) = x.col(cols[static_cast<std::size_t>(i)]).cwiseProduct(root);
        gram.setZero(c + 1, c + 1);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose(), inv_n);
        gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
        // z'((y - mu) / root) without dividing by a vanishing rate.
        s.resize(c + 1);
        s(0) = (y - mu).sum() * inv_n;
        for (Eigen::Index i = 0; i < c; ++i) s(i + 1) = x.col(cols[static_cast<std::size_t>(i)]).dot(y - mu) * inv_n;

        double nb0 = b0;
        Eigen::VectorXd nb = b;
        auto value = [&](Eigen::Index i) -> double& { return i == 0 ? nb0 : nb(cols[static_cast<std::size_t>(i - 1)]); };
        auto update = [&](Eigen::Index i) {
            const double a = gram(i, i);
            if (!(a > 0.0)) return 0.0;
            double& beta = value(i);
            const double zval = s(i) + a * beta;
            const double next = i == 0 ? zval / a
                                       : soft_threshold(zval, lambda * pf(cols[static_cast<std::size_t>(i - 1)])) / a;
            const double delta = next - beta;
            if (delta != 0.0) {
                s.noalias() -= delta * gram.col(i);
                beta = next;
            }
            return std::abs(delta);
        };

        // Active-set acceleration. On the face where the nonzero coordinates
        // keep their signs the model is a plain quadratic, so its minimizer
        // solves a linear system. Moving toward it until the first coordinate
        // reaches zero always lowers the model; reaching it skips the long
        // tail of sweeps on badly conditioned models.
        enum class Face { Failed, Partial, Reached };
        auto solve_face = [&]() {
            std::vector<Eigen::Index> face{0};
            for (Eigen::Index i = 1; i <= c; ++i)
                if (value(i) != 0.0) face.push_back(i);
            const auto f = static_cast<Eigen::Index>(face.size());
            Eigen::MatrixXd g(f, f);
            Eigen::VectorXd rhs(f), sign = Eigen::VectorXd::Zero(f);
            for (Eigen::Index r = 0; r < f; ++r) {
                for (Eigen::Index q2 = 0; q2 < f; ++q2) g(r, q2) = gram(face[r], face[q2]);
                if (r > 0) sign(r) = value(face[r]) > 0.0 ? 1.0 : -1.0;
                const double bound = r > 0 ? lambda * pf(cols[static_cast<std::size_t>(face[r] - 1)]) : 0.0;
                rhs(r) = s(face[r]) - bound * sign(r);
            }
            const Eigen::VectorXd d = g.completeOrthogonalDecomposition().solve(rhs);
            if (!d.allFinite()) return Face::Failed;
            // A singular face with rhs outside the range of g has no minimizer.
            if ((g * d - rhs).norm() > 1e-8 * (rhs.norm() + g.norm() * d.norm())) return Face::Failed;
            double t = 1.0;
            Eigen::Index hit = -1;
            for (Eigen::Index r = 1; r < f; ++r) {
                const double v = value(face[r]);
                if ((v + d(r)) * sign(r) <= 0.0 && -v / d(r) < t) {
                    t = -v / d(r);
                    hit = r;
                }
            }
            for (Eigen::Index r = 0; r < f; ++r) {
                value(face[r]) += t * d(r);
                s.noalias() -= (t * d(r)) * gram.col(face[r]);
            }
            if (hit >= 0) {
                // Land exactly on zero.
                const double rest = value(face[hit]);
                value(face[hit]) = 0.0;
                s.noalias() += rest * gram.col(face[hit]);
                return Face::Partial;
            }
            return Face::Reached;
        };

        int sweeps = 0;
        for (;;) {
            double change = 0.0;
            for (Eigen::Index i = 0; i <= c; ++i) change = std::max(change, update(i));
            ++sweeps;
            if (change < tol || sweeps >= opt.max_sweeps) break;
            for (int round = 1;; ++round) {
                double active_change = update(0);
                for (Eigen::Index i = 1; i <= c; ++i)
                    if (value(i) != 0.0) active_change = std::max(active_change, update(i));
                ++sweeps;
                if (active_change < tol || sweeps >= opt.max_sweeps) break;
                // Back to a full sweep once the face is solved; it either
                // confirms convergence or admits a new coordinate.
                if (round % 4 == 0 && solve_face() == Face::Reached) break;
            }
            if (sweeps >= opt.max_sweeps) break;
        }

        // Backtracking on the true objective. Near the optimum a Newton step
        // can lower the objective by less than its rounding error, so a full
        // step within `slack` of the current value is still taken.
        const Eigen::VectorXd target = linear_predictor(problem, nb0, nb);
        const double slack =
            32.0 * std::numeric_limits<double>::epsilon() *
            ((eta.array().min(opt.eta_clamp).exp() + y.array() * eta.array().abs()).mean() + penalty(problem, b, lambda));
        const bool moved = nb0 != b0 || nb != b;
        bool accepted = false;
        double step = 1.0;
        double reached = objective;
        for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
            const Eigen::VectorXd cand_b = b + step * (nb - b);
            const Eigen::VectorXd cand_eta = eta + step * (target - eta);
            const double cand = smooth_loss(y, cand_eta) + penalty(problem, cand_b, lambda);
            if (cand < objective || (halving == 0 && moved && cand <= objective + slack)) {
                accepted = true;
                b = cand_b;
                b0 += step * (nb0 - b0);
                eta = cand_eta;
                reached = cand;
                break;
            }
            if (cand <= objective) break;
        }
        const double previous = objective;
        if (accepted) {
            const double shift = intercept_shift(problem, eta);
            if (std::isfinite(shift)) {
                b0 += shift;
                eta.array() += shift;
            }
            objective = std::min(reached, smooth_loss(y, eta) + penalty(problem, b, lambda));
            if (opt.record_trace) fit.objective_trace.push_back(objective);
        }
        const double rel = (previous - objective) / std::max(1.0, std::abs(objective));
        if (accepted && rel >= opt.outer_rel_tol) continue;

        const KktReport kkt = check_kkt(problem, lambda, b, eta, opt.kkt_tol, &working);
        if (kkt.within_tolerance) {
            converged = true;
        } else if (!kkt.violators_outside.empty()) {
            for (auto k : kkt.violators_outside) working[static_cast<std::size_t>(k)] = 1;
        } else {
            if (!accepted && tol <= 1e-15) break;
            tol = std::max(tol * 1e-2, 1e-15);
        }
    }

    fit.intercept = b0;
    fit.coefficients = std::move(b);
    fit.iterations = outer;
    fit.objective = objective;
    fit.kkt_residual = check_kkt(problem, lambda, fit.coefficients, eta, opt.kkt_tol, nullptr).residual;

    const bool clamped = (eta.array() > opt.eta_clamp).any() ||
                         ((eta.array() < -opt.eta_clamp) && (y.array() > 0.0)).any();
    if (clamped)
        throw DivergenceError("Poisson lasso diverged at lambda=" + std::to_string(lambda) +
                                  ": linear predictor left [-" + std::to_string(opt.eta_clamp) + ", " +
                                  std::to_string(opt.eta_clamp) + "]",
                              fit);
    if (!converged)
        throw ConvergenceError("Poisson lasso did not converge at lambda=" + std::to_string(lambda) + " after " +
                                   std::to_string(outer) + " Newton steps (KKT residual " +
                                   std::to_string(fit.kkt_residual) + ")",
                               fit);
    return fit;
}

} // namespace

double lasso_objective(const LassoProblem& problem, double intercept, const Eigen::VectorXd& coefficients,
                       double lambda) {
    return smooth_loss(problem.response(), linear_predictor(problem, intercept, coefficients)) +
           penalty(problem, coefficients, lambda);
}

Eigen::VectorXd smooth_gradient(const LassoProblem& problem, double intercept, const Eigen::VectorXd& coefficients) {
    const Eigen::VectorXd diff =
        linear_predictor(problem, intercept, coefficients).array().exp().matrix() - problem.response();
    Eigen::VectorXd g(problem.q() + 1);
    g(0) = diff.mean();
    g.tail(problem.q()) = problem.design().transpose() * diff / static_cast<double>(problem.n());
    return g;
}

double kkt_residual(const LassoProblem& problem, const LassoFit& fit) {
    return check_kkt(problem, fit.lambda, fit.coefficients,
                     linear_predictor(problem, fit.intercept, fit.coefficients), 0.0, nullptr)
        .residual;
}

LassoFit fit_poisson_lasso(const LassoProblem& problem, double lambda, const SolverOptions& options) {
    return solve(problem, lambda, options, 0.0, Eigen::VectorXd::Zero(problem.q()),
                 std::vector<char>(static_cast<std::size_t>(problem.q()), 1));
}

LassoFit fit_poisson_lasso(const LassoProblem& problem, double lambda, const SolverOptions& options,
                           const LassoFit& warm_start) {
    if (warm_start.coefficients.size() != problem.q()) throw InvalidArgument("warm start has the wrong dimension");
    return solve(problem, lambda, options, warm_start.intercept, warm_start.coefficients,
                 std::vector<char>(static_cast<std::size_t>(problem.q()), 1));
}

std::vector<double> lambda_grid(double lmax, int grid_size, double ratio) {
    if (grid_size < 1) throw InvalidArgument("grid size must be positive");
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("lambda ratio must lie in (0, 1)");
    if (!(lmax >= 0.0) || !std::isfinite(lmax)) throw InvalidArgument("lambda_max must be finite and >= 0");
    if (lmax == 0.0 || grid_size == 1) return {lmax};
    std::vector<double> grid(static_cast<std::size_t>(grid_size));
    const double step = std::log(ratio) / static_cast<double>(grid_size - 1);
    for (int i = 0; i < grid_size; ++i) grid[static_cast<std::size_t>(i)] = lmax * std::exp(step * i);
    grid.back() = lmax * ratio;
    return grid;
}

LambdaPath fit_path(const LassoProblem& problem, const std::vector<double>& grid, const SolverOptions& options) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] < grid[i - 1])) throw InvalidArgument("lambda grid must be strictly decreasing");
    LambdaPath path;
    const Eigen::Index q = problem.q();
    double b0 = 0.0;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd gradient = Eigen::VectorXd::Zero(q);
    double previous_lambda = -1.0;
    for (double lambda : grid) {
        // Sequential strong rule; the KKT check restores any wrongly
        // screened coordinate.
        std::vector<char> working(static_cast<std::size_t>(q), 1);
        if (previous_lambda > 0.0) {
            const double cutoff = 2.0 * lambda - previous_lambda;
            for (Eigen::Index k = 0; k < q; ++k)
                working[static_cast<std::size_t>(k)] =
                    b(k) != 0.0 || std::abs(gradient(k)) >= cutoff * problem.penalty_factors()(k);
        }
        try {
            LassoFit fit = solve(problem, lambda, options, b0, b, std::move(working));
            b0 = fit.intercept;
            b = fit.coefficients;
            gradient = smooth_gradient(problem, b0, b).tail(q);
            previous_lambda = lambda;
            path.lambdas.push_back(lambda);
            path.fits.push_back(std::move(fit));
        } catch (const ConvergenceError& e) {
            path.truncated = e.what();
            break;
        }
    }
    return path;
}

LambdaPath lambda_path(const LassoProblem& problem, int grid_size, double ratio, const SolverOptions& options) {
    if (grid_size < 2) throw InvalidArgument("lambda_path needs grid_size >= 2");
    return fit_path(problem, lambda_grid(lambda_max(problem), grid_size, ratio), options);
}

} // namespace mrs
