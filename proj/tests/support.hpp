#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <mrs/count_matrix.hpp>
#include <mrs/graph.hpp>
#include <mrs/simulate.hpp>

namespace oracle {

// Unpenalized Poisson MLE by damped full Newton on (intercept, coefficients).
// Written independently of the library solver.
struct Mle {
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
    bool converged = false;
};
Mle dense_newton_mle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// Poisson regression problem with true intercept in [1, 3] and weights of
// magnitude [0.5, 1.5] and random sign. Predictors are Poisson(1) counts;
// draws whose linear predictor exceeds 8 are redrawn so the MLE stays tame.
struct Problem {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};
Problem random_problem(Eigen::Index n, Eigen::Index q, std::uint64_t seed);

// Largest violation of the lasso subgradient conditions, computed from scratch.
double kkt_violation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double intercept,
                     const Eigen::VectorXd& coefficients, double lambda);

// Essential graph by enumeration: every DAG with the skeleton and
// v-structures of `dag` (Verma and Pearl), an edge kept directed only when
// all of them agree on it.
mrs::Cpdag brute_force_cpdag(const mrs::Dag& dag);

// Every labelled DAG on p nodes (p <= 4 keeps this small).
std::vector<mrs::Dag> all_dags(int p);

// Bivariate log-link fixture X1 -> X2: X1 ~ Poisson(rate1),
// X2 | X1 ~ Poisson(exp(theta20 + theta21 X1)).
mrs::CountMatrix bivariate(double rate1, double theta20, double theta21, Eigen::Index n, std::uint64_t seed);

// Star fixture: hub node 0 ~ Poisson(rate), leaves | hub ~ Poisson(exp(theta hub)).
mrs::CountMatrix star(int p, double rate, double theta, Eigen::Index n, std::uint64_t seed);

// Chain 0 -> 1 -> ... with a common intercept and weight.
mrs::CountMatrix chain(int p, double intercept, double weight, Eigen::Index n, std::uint64_t seed);

// Independent Poisson(rate) columns.
mrs::CountMatrix independent(int p, double rate, Eigen::Index n, std::uint64_t seed);

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

std::string read_file(const std::filesystem::path& path);

}  // namespace oracle
