#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <unistd.h>

#include <Eigen/Cholesky>

#include <mrs/rng.hpp>

namespace oracle {

namespace {

double nll(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = z * beta;
    return (eta.array().exp() - y.array() * eta.array()).mean();
}

}  // namespace

Mle dense_newton_mle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Eigen::Index n = x.rows(), q = x.cols();
    Eigen::MatrixXd z(n, q + 1);
    z.col(0).setOnes();
    z.rightCols(q) = x;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(q + 1);
    beta(0) = std::log(y.mean());
    Mle out;
    for (int it = 0; it < 200; ++it) {
        const Eigen::VectorXd mu = (z * beta).array().exp();
        const Eigen::VectorXd grad = z.transpose() * (mu - y) / static_cast<double>(n);
        if (grad.lpNorm<Eigen::Infinity>() < 1e-13 * std::max(1.0, y.mean())) {
            out.converged = true;
            break;
        }
        const Eigen::MatrixXd hess = z.transpose() * mu.asDiagonal() * z / static_cast<double>(n);
        const Eigen::VectorXd step = hess.ldlt().solve(grad);
        const double f0 = nll(z, y, beta);
        double t = 1.0;
        while (t > 1e-12 && nll(z, y, beta - t * step) > f0 + 1e-15 * std::abs(f0)) t *= 0.5;
        beta -= t * step;
        if (t * step.lpNorm<Eigen::Infinity>() < 1e-15) {
            out.converged = true;
            break;
        }
    }
    out.intercept = beta(0);
    out.coefficients = beta.tail(q);
    return out;
}

double kkt_violation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double intercept,
                     const Eigen::VectorXd& coefficients, double lambda) {
    const auto n = static_cast<double>(x.rows());
    const Eigen::VectorXd mu = ((x * coefficients).array() + intercept).exp();
    const Eigen::VectorXd r = mu - y;
    double worst = std::abs(r.sum() / n);
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
        const double g = x.col(k).dot(r) / n;
        const double b = coefficients(k);
        const double v = b == 0.0 ? std::max(0.0, std::abs(g) - lambda) : std::abs(g + lambda * (b > 0 ? 1.0 : -1.0));
        worst = std::max(worst, v);
    }
    return worst;
}

namespace {

using Pair = std::pair<int, int>;

std::set<Pair> skeleton_of(const mrs::Dag& g) {
    std::set<Pair> s;
    for (const auto& e : g.edges()) s.insert({std::min(e.from, e.to), std::max(e.from, e.to)});
    return s;
}

std::set<std::tuple<int, int, int>> colliders(const mrs::Dag& g) {
    std::set<std::tuple<int, int, int>> out;
    const auto skel = skeleton_of(g);
    for (int c = 0; c < g.size(); ++c) {
        const auto& pa = g.parents(c);
        for (std::size_t i = 0; i < pa.size(); ++i)
            for (std::size_t j = i + 1; j < pa.size(); ++j) {
                const int a = std::min(pa[i], pa[j]), b = std::max(pa[i], pa[j]);
                if (!skel.count({a, b})) out.insert({a, c, b});
            }
    }
    return out;
}

bool acyclic(int p, const std::vector<mrs::Edge>& edges) {
    std::vector<int> indeg(static_cast<std::size_t>(p), 0);
    for (const auto& e : edges) ++indeg[static_cast<std::size_t>(e.to)];
    std::vector<int> stack;
    for (int v = 0; v < p; ++v)
        if (!indeg[static_cast<std::size_t>(v)]) stack.push_back(v);
    int seen = 0;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        ++seen;
        for (const auto& e : edges)
            if (e.from == v && --indeg[static_cast<std::size_t>(e.to)] == 0) stack.push_back(e.to);
    }
    return seen == p;
}

}  // namespace

std::vector<mrs::Dag> all_dags(int p) {
    std::vector<Pair> pairs;
    for (int a = 0; a < p; ++a)
        for (int b = a + 1; b < p; ++b) pairs.push_back({a, b});
    std::size_t total = 1;
    for (std::size_t i = 0; i < pairs.size(); ++i) total *= 3;
    std::vector<mrs::Dag> out;
    for (std::size_t code = 0; code < total; ++code) {
        std::vector<mrs::Edge> edges;
        std::size_t c = code;
        for (const auto& [a, b] : pairs) {
            const std::size_t digit = c % 3;
            c /= 3;
            if (digit == 1) edges.push_back({a, b});
            if (digit == 2) edges.push_back({b, a});
        }
        if (acyclic(p, edges)) out.emplace_back(p, edges);
    }
    return out;
}

mrs::Cpdag brute_force_cpdag(const mrs::Dag& dag) {
    const int p = dag.size();
    const auto skel = skeleton_of(dag);
    const auto vs = colliders(dag);
    std::vector<Pair> pairs(skel.begin(), skel.end());
    // forward[i] / backward[i]: some member orients pairs[i] as a->b / b->a.
    std::vector<bool> forward(pairs.size(), false), backward(pairs.size(), false);
    for (std::size_t code = 0; code < (std::size_t{1} << pairs.size()); ++code) {
        std::vector<mrs::Edge> edges;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto [a, b] = pairs[i];
            edges.push_back((code >> i) & 1 ? mrs::Edge{b, a} : mrs::Edge{a, b});
        }
        if (!acyclic(p, edges)) continue;
        const mrs::Dag member(p, edges);
        if (colliders(member) != vs) continue;
        for (std::size_t i = 0; i < pairs.size(); ++i) ((code >> i) & 1 ? backward : forward)[i] = true;
    }
    mrs::Cpdag out;
    out.p = p;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [a, b] = pairs[i];
        if (forward[i] && backward[i]) out.undirected.push_back({a, b});
        else if (forward[i]) out.directed.push_back({a, b});
        else out.directed.push_back({b, a});
    }
    std::sort(out.directed.begin(), out.directed.end());
    std::sort(out.undirected.begin(), out.undirected.end());
    return out;
}

namespace {

// Knuth's product method; slow but obviously correct, fine for small rates.
std::int64_t knuth_poisson(double rate, mrs::Rng& rng) {
    // exploding fixtures should fail loudly, not spin
    if (!(rate <= 1e6)) throw std::runtime_error("fixture rate out of range");
    if (rate > 50.0) {
        // Split into halves; a sum of independent Poissons is Poisson.
        return knuth_poisson(rate / 2, rng) + knuth_poisson(rate / 2, rng);
    }
    const double limit = std::exp(-rate);
    double prod = rng.uniform();
    std::int64_t k = 0;
    while (prod > limit) {
        prod *= rng.uniform();
        ++k;
    }
    return k;
}

}  // namespace

// The fixtures use their own sampler so that sampler bugs in the library
// cannot hide behind them.
mrs::CountMatrix bivariate(double rate1, double theta20, double theta21, Eigen::Index n, std::uint64_t seed) {
    mrs::Rng rng(mrs::derive_key(seed, "fixture_bivariate"));
    mrs::CountArray v(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i, 0) = knuth_poisson(rate1, rng);
        v(i, 1) = knuth_poisson(std::exp(theta20 + theta21 * static_cast<double>(v(i, 0))), rng);
    }
    return mrs::CountMatrix(v);
}

mrs::CountMatrix star(int p, double rate, double theta, Eigen::Index n, std::uint64_t seed) {
    mrs::Rng rng(mrs::derive_key(seed, "fixture_star"));
    mrs::CountArray v(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i, 0) = knuth_poisson(rate, rng);
        for (int j = 1; j < p; ++j) v(i, j) = knuth_poisson(std::exp(theta * static_cast<double>(v(i, 0))), rng);
    }
    return mrs::CountMatrix(v);
}

mrs::CountMatrix chain(int p, double intercept, double weight, Eigen::Index n, std::uint64_t seed) {
    mrs::Rng rng(mrs::derive_key(seed, "fixture_chain"));
    mrs::CountArray v(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i, 0) = knuth_poisson(std::exp(intercept), rng);
        for (int j = 1; j < p; ++j)
            v(i, j) = knuth_poisson(std::exp(intercept + weight * static_cast<double>(v(i, j - 1))), rng);
    }
    return mrs::CountMatrix(v);
}

mrs::CountMatrix independent(int p, double rate, Eigen::Index n, std::uint64_t seed) {
    mrs::Rng rng(mrs::derive_key(seed, "fixture_independent"));
    mrs::CountArray v(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) v(i, j) = knuth_poisson(rate, rng);
    return mrs::CountMatrix(v);
}

Problem random_problem(Eigen::Index n, Eigen::Index q, std::uint64_t seed) {
    mrs::Rng rng(mrs::derive_key(seed, "fixture_problem"));
    for (;;) {
        const double intercept = 1.0 + 2.0 * rng.uniform();
        Eigen::VectorXd w(q);
        for (Eigen::Index k = 0; k < q; ++k) w(k) = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.5 + rng.uniform());
        Problem out{Eigen::MatrixXd(n, q), Eigen::VectorXd(n)};
        bool tame = true;
        for (Eigen::Index i = 0; i < n && tame; ++i) {
            for (Eigen::Index k = 0; k < q; ++k) out.x(i, k) = static_cast<double>(knuth_poisson(1.0, rng));
            const double eta = intercept + out.x.row(i).dot(w);
            tame = eta <= 8.0;
            if (tame) out.y(i) = static_cast<double>(knuth_poisson(std::exp(eta), rng));
        }
        if (tame) return out;
    }
}

std::filesystem::path scratch_dir(const std::string& tag) {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() /
               ("mrs_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace oracle
