#include "mrs/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "mrs/error.hpp"
#include "mrs/poisson_variate.hpp"
#include "mrs/rng.hpp"

namespace mrs {

DagParameters::DagParameters(Dag dag, std::vector<double> intercepts, std::vector<double> weights)
    : dag_(std::move(dag)), intercepts_(std::move(intercepts)), weights_(std::move(weights)) {
    if (static_cast<int>(intercepts_.size()) != dag_.size())
        throw InvalidArgument("expected " + std::to_string(dag_.size()) + " intercepts, got " +
                              std::to_string(intercepts_.size()));
    if (weights_.size() != dag_.edge_count())
        throw InvalidArgument("expected one weight per edge (" + std::to_string(dag_.edge_count()) + "), got " +
                              std::to_string(weights_.size()));
    for (double t : intercepts_)
        if (!std::isfinite(t)) throw InvalidArgument("non-finite intercept");
    parent_weights_.resize(static_cast<std::size_t>(dag_.size()));
    for (int v = 0; v < dag_.size(); ++v) parent_weights_[static_cast<std::size_t>(v)].resize(dag_.parents(v).size());
    for (std::size_t e = 0; e < weights_.size(); ++e) {
        const Edge& edge = dag_.edges()[e];
        if (weights_[e] == 0.0 || !std::isfinite(weights_[e]))
            throw InvalidArgument("edge " + std::to_string(edge.from + 1) + "->" + std::to_string(edge.to + 1) +
                                  " needs a finite nonzero weight");
        const auto& ps = dag_.parents(edge.to);
        const auto slot = std::lower_bound(ps.begin(), ps.end(), edge.from) - ps.begin();
        parent_weights_[static_cast<std::size_t>(edge.to)][static_cast<std::size_t>(slot)] = weights_[e];
    }
}

double DagParameters::weight(int from, int to) const {
    const auto& edges = dag_.edges();
    const auto it = std::lower_bound(edges.begin(), edges.end(), Edge{from, to});
    if (it == edges.end() || *it != Edge{from, to}) return 0.0;
    return weights_[static_cast<std::size_t>(it - edges.begin())];
}

double DagParameters::linear_predictor(int node, std::span<const std::int64_t> row) const {
    double eta = intercepts_[static_cast<std::size_t>(node)];
    const auto& ps = dag_.parents(node);
    const auto& ws = parent_weights_[static_cast<std::size_t>(node)];
    for (std::size_t k = 0; k < ps.size(); ++k) eta += ws[k] * static_cast<double>(row[static_cast<std::size_t>(ps[k])]);
    return eta;
}

DagParameters DagParameters::permuted_params(std::span<const int> perm) const {
    Dag moved = dag_.permuted(perm);
    std::vector<double> intercepts(intercepts_.size());
    for (std::size_t v = 0; v < intercepts_.size(); ++v)
        intercepts[static_cast<std::size_t>(perm[v])] = intercepts_[v];
    std::vector<double> weights;
    weights.reserve(moved.edge_count());
    for (const Edge& e : moved.edges()) {
        const auto from = std::find(perm.begin(), perm.end(), e.from) - perm.begin();
        const auto to = std::find(perm.begin(), perm.end(), e.to) - perm.begin();
        weights.push_back(weight(static_cast<int>(from), static_cast<int>(to)));
    }
    return DagParameters(std::move(moved), std::move(intercepts), std::move(weights));
}

ParamRange default_intercept_range() { return {1.0, 3.0}; }
ParamRange default_weight_range(int max_indegree) {
    return max_indegree <= 1 ? ParamRange{0.5, 1.5} : ParamRange{0.1, 1.0};
}
ParamRange default_identity_intercept_range() { return {1.0, 10.0}; }
ParamRange default_identity_weight_range() { return {0.5, 1.5}; }

namespace {

struct RawParams {
    std::vector<double> intercepts;
    std::vector<double> weights;
};

RawParams draw_params(const Dag& dag, ParamRange intercepts, ParamRange magnitude, std::uint64_t seed, WeightSign sign) {
    if (!(intercepts.lo <= intercepts.hi) || !std::isfinite(intercepts.lo) || !std::isfinite(intercepts.hi))
        throw InvalidArgument("invalid intercept range");
    if (!(magnitude.lo > 0.0 && magnitude.lo <= magnitude.hi) || !std::isfinite(magnitude.hi))
        throw InvalidArgument("weight magnitude range must satisfy 0 < lo <= hi");
    Rng rng(derive_key(seed, "sem_params"));
    RawParams out;
    for (int v = 0; v < dag.size(); ++v)
        out.intercepts.push_back(intercepts.lo + (intercepts.hi - intercepts.lo) * rng.uniform());
    for (std::size_t e = 0; e < dag.edge_count(); ++e) {
        const double mag = magnitude.lo + (magnitude.hi - magnitude.lo) * rng.uniform();
        const bool negative = rng.uniform() < 0.5;
        double w = mag;
        if (sign == WeightSign::Negative || (sign == WeightSign::Mixed && negative)) w = -mag;
        out.weights.push_back(w);
    }
    return out;
}

enum class Link { Log, Identity };

SampleOutcome ancestral_sample(const DagParameters& model, Link link, Eigen::Index n, std::uint64_t seed,
                               const SampleOptions& options) {
    if (n < 1) throw InvalidArgument("sample size must be at least 1");
    if (options.count_cap <= 0 || !(options.rate_cap > 0.0)) throw InvalidArgument("caps must be positive");
    const Dag& dag = model.dag();
    const int p = dag.size();
    std::vector<std::uint64_t> keys;
    for (const auto& label : dag.labels()) keys.push_back(derive_key(seed, label));

    CountArray values(n, p);
    std::vector<std::int64_t> row(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int v : dag.order()) {
            const double eta = model.linear_predictor(v, row);
            const double rate = link == Link::Log ? std::exp(eta) : eta;
            if (!(rate >= 0.0) || rate > options.rate_cap) return {std::nullopt, v, rate};
            Rng rng(keys[static_cast<std::size_t>(v)], static_cast<std::uint64_t>(i));
            const std::int64_t x = poisson_variate(rate, rng);
            if (x > options.count_cap) return {std::nullopt, v, rate};
            row[static_cast<std::size_t>(v)] = x;
        }
        for (int v = 0; v < p; ++v) values(i, v) = row[static_cast<std::size_t>(v)];
    }
    return {CountMatrix(std::move(values), dag.labels()), -1, 0.0};
}

template <typename Model, typename Make>
Simulated<Model> regenerate_until_valid(const Dag& dag, Eigen::Index n, std::uint64_t seed,
                                        const SimulationConfig& config, Link link, Make make) {
    if (config.retry_budget < 0) throw InvalidArgument("retry budget must be non-negative");
    SampleOutcome last;
    for (int attempt = 0; attempt <= config.retry_budget; ++attempt) {
        const std::uint64_t attempt_seed = derive_key(seed, static_cast<std::uint64_t>(attempt));
        Model model = make(attempt_seed);
        SampleOutcome outcome = ancestral_sample(model, link, n, derive_key(attempt_seed, "samples"), config.sampling);
        if (outcome.data) return {std::move(model), std::move(*outcome.data), attempt};
        last = std::move(outcome);
    }
    const std::string label = dag.labels()[static_cast<std::size_t>(last.offending_node)];
    throw RegenerationError("parameter regeneration failed " + std::to_string(config.retry_budget + 1) +
                                " times; last failure at node " + std::to_string(last.offending_node + 1) + " (" +
                                label + ", rate " + std::to_string(last.offending_rate) + ")",
                            last.offending_node);
}

} // namespace

PoissonSem random_sem_params(const Dag& dag, ParamRange intercepts, ParamRange weight_magnitude, std::uint64_t seed,
                             WeightSign sign) {
    auto raw = draw_params(dag, intercepts, weight_magnitude, seed, sign);
    return PoissonSem(dag, std::move(raw.intercepts), std::move(raw.weights));
}

IdentityLinkDag random_identity_params(const Dag& dag, ParamRange intercepts, ParamRange weight_magnitude,
                                       std::uint64_t seed, WeightSign sign) {
    auto raw = draw_params(dag, intercepts, weight_magnitude, seed, sign);
    return IdentityLinkDag(dag, std::move(raw.intercepts), std::move(raw.weights));
}

SampleOutcome sample_sem(const PoissonSem& sem, Eigen::Index n, std::uint64_t seed, const SampleOptions& options) {
    return ancestral_sample(sem, Link::Log, n, seed, options);
}

SampleOutcome sample_identity_link(const IdentityLinkDag& model, Eigen::Index n, std::uint64_t seed,
                                   const SampleOptions& options) {
    return ancestral_sample(model, Link::Identity, n, seed, options);
}

Simulated<PoissonSem> simulate_sem(const Dag& dag, Eigen::Index n, std::uint64_t seed, const SimulationConfig& config) {
    return regenerate_until_valid<PoissonSem>(dag, n, seed, config, Link::Log, [&](std::uint64_t s) {
        return random_sem_params(dag, config.intercepts, config.weight_magnitude, s, config.sign);
    });
}

Simulated<IdentityLinkDag> simulate_identity_link(const Dag& dag, Eigen::Index n, std::uint64_t seed,
                                                  const SimulationConfig& config) {
    // Negative rates are the norm for mixed-sign weights, so redrawing the
    // whole parameter set almost never succeeds for p around 20. Instead only
    // the offending node's intercept and incoming weights are redrawn, against
    // the parent columns already sampled.
    if (config.retry_budget < 0) throw InvalidArgument("retry budget must be non-negative");
    if (n < 1) throw InvalidArgument("sample size must be at least 1");
    const auto& opt = config.sampling;
    if (opt.count_cap <= 0 || !(opt.rate_cap > 0.0)) throw InvalidArgument("caps must be positive");
    const ParamRange ic = config.intercepts, mag = config.weight_magnitude;
    if (!(ic.lo <= ic.hi) || !std::isfinite(ic.lo) || !std::isfinite(ic.hi))
        throw InvalidArgument("invalid intercept range");
    if (!(mag.lo > 0.0 && mag.lo <= mag.hi) || !std::isfinite(mag.hi))
        throw InvalidArgument("weight magnitude range must satisfy 0 < lo <= hi");

    const int p = dag.size();
    const auto& edges = dag.edges();
    std::vector<double> intercepts(static_cast<std::size_t>(p), 0.0);
    std::vector<double> weights(edges.size(), 0.0);
    CountArray values(n, p);
    const std::uint64_t sample_seed = derive_key(seed, "samples");
    int regenerations = 0;

    for (int v : dag.order()) {
        const std::string& label = dag.labels()[static_cast<std::size_t>(v)];
        std::vector<std::size_t> incoming;
        for (std::size_t e = 0; e < edges.size(); ++e)
            if (edges[e].to == v) incoming.push_back(e);
        const std::uint64_t sample_key = derive_key(sample_seed, label);
        double bad_rate = 0.0;
        bool done = false;
        for (int attempt = 0; attempt <= config.retry_budget && !done; ++attempt) {
            Rng rng(derive_key(derive_key(seed, label), static_cast<std::uint64_t>(attempt)));
            const double b = ic.lo + (ic.hi - ic.lo) * rng.uniform();
            for (std::size_t e : incoming) {
                double w = mag.lo + (mag.hi - mag.lo) * rng.uniform();
                const bool negative = rng.uniform() < 0.5;
                if (config.sign == WeightSign::Negative || (config.sign == WeightSign::Mixed && negative)) w = -w;
                weights[e] = w;
            }
            intercepts[static_cast<std::size_t>(v)] = b;
            done = true;
            for (Eigen::Index i = 0; i < n && done; ++i) {
                double rate = b;
                for (std::size_t e : incoming) rate += weights[e] * static_cast<double>(values(i, edges[e].from));
                if (!(rate >= 0.0) || rate > opt.rate_cap) {
                    bad_rate = rate;
                    done = false;
                    break;
                }
                Rng draw(sample_key, static_cast<std::uint64_t>(i));
                const std::int64_t x = poisson_variate(rate, draw);
                if (x > opt.count_cap) {
                    bad_rate = rate;
                    done = false;
                }
                values(i, v) = x;
            }
            if (!done) ++regenerations;
        }
        if (!done)
            throw RegenerationError("parameter regeneration failed " + std::to_string(config.retry_budget + 1) +
                                        " times at node " + std::to_string(v + 1) + " (" + label + ", rate " +
                                        std::to_string(bad_rate) + ")",
                                    v);
    }
    return {IdentityLinkDag(dag, std::move(intercepts), std::move(weights)), CountMatrix(std::move(values), dag.labels()),
            regenerations};
}

} // namespace mrs
