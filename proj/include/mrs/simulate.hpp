#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrs/count_matrix.hpp"
#include "mrs/graph.hpp"

namespace mrs {

struct ParamRange {
    double lo;
    double hi;
};

enum class WeightSign { Mixed, Negative, Positive };

// Intercepts per node and one nonzero weight per edge of `dag`, aligned with
// dag.edges().
class DagParameters {
public:
    const Dag& dag() const noexcept { return dag_; }
    const std::vector<double>& intercepts() const noexcept { return intercepts_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double weight(int from, int to) const;

    // Linear predictor of `node` for one row of parent values.
    double linear_predictor(int node, std::span<const std::int64_t> row) const;

protected:
    DagParameters(Dag dag, std::vector<double> intercepts, std::vector<double> weights);
    DagParameters permuted_params(std::span<const int> perm) const;

private:
    Dag dag_;
    std::vector<double> intercepts_;
    std::vector<double> weights_;
    // parent_weights_[v] is aligned with dag_.parents(v).
    std::vector<std::vector<double>> parent_weights_;
};

// X_j | Pa(j) ~ Poisson(exp(theta_j + sum_k theta_jk X_k)).
class PoissonSem : public DagParameters {
public:
    PoissonSem(Dag dag, std::vector<double> intercepts, std::vector<double> weights)
        : DagParameters(std::move(dag), std::move(intercepts), std::move(weights)) {}
    PoissonSem permuted(std::span<const int> perm) const { return PoissonSem(permuted_params(perm)); }

private:
    explicit PoissonSem(DagParameters p) : DagParameters(std::move(p)) {}
};

// X_j | Pa(j) ~ Poisson(theta_j + sum_k theta_jk X_k).
class IdentityLinkDag : public DagParameters {
public:
    IdentityLinkDag(Dag dag, std::vector<double> intercepts, std::vector<double> weights)
        : DagParameters(std::move(dag), std::move(intercepts), std::move(weights)) {}
};

// Default parameter ranges.
ParamRange default_intercept_range();
ParamRange default_weight_range(int max_indegree);
ParamRange default_identity_intercept_range();
ParamRange default_identity_weight_range();

PoissonSem random_sem_params(const Dag& dag, ParamRange intercepts, ParamRange weight_magnitude, std::uint64_t seed,
                             WeightSign sign = WeightSign::Mixed);
IdentityLinkDag random_identity_params(const Dag& dag, ParamRange intercepts, ParamRange weight_magnitude,
                                       std::uint64_t seed, WeightSign sign = WeightSign::Mixed);

struct SampleOptions {
    std::int64_t count_cap = 1'000'000'000;
    double rate_cap = 1e8;
};

// Result of one sampling attempt. `data` is empty when the parameter set
// must be regenerated; `offending_node` then names the node that overflowed
// (or produced a negative identity-link rate).
struct SampleOutcome {
    std::optional<CountMatrix> data;
    int offending_node = -1;
    double offending_rate = 0.0;
};

// Ancestral sampling. Each (node label, row) pair owns an independent
// counter-based stream, so results do not depend on evaluation order and
// relabeling nodes permutes the columns.
SampleOutcome sample_sem(const PoissonSem& sem, Eigen::Index n, std::uint64_t seed, const SampleOptions& options = {});
SampleOutcome sample_identity_link(const IdentityLinkDag& model, Eigen::Index n, std::uint64_t seed,
                                   const SampleOptions& options = {});

struct SimulationConfig {
    ParamRange intercepts{1.0, 3.0};
    ParamRange weight_magnitude{0.5, 1.5};
    WeightSign sign = WeightSign::Mixed;
    int retry_budget = 100;
    SampleOptions sampling;
};

template <typename Model>
struct Simulated {
    Model model;
    CountMatrix data;
    int regenerations = 0;
};

// Draws parameters and samples, regenerating parameters whenever sampling
// flags them. Throws RegenerationError after `retry_budget` regenerations.
// The log-link variant redraws the whole set; the identity-link variant
// redraws one node at a time (budget per node).
Simulated<PoissonSem> simulate_sem(const Dag& dag, Eigen::Index n, std::uint64_t seed, const SimulationConfig& config);
Simulated<IdentityLinkDag> simulate_identity_link(const Dag& dag, Eigen::Index n, std::uint64_t seed,
                                                  const SimulationConfig& config);

} // namespace mrs
