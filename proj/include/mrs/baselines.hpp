#pragma once

#include <vector>

#include "mrs/count_matrix.hpp"
#include "mrs/graph.hpp"
#include "mrs/mrs.hpp"

namespace mrs {

struct UndirectedGraph {
    int p = 0;
    std::vector<Edge> edges;  // from < to, sorted, no self-loops

    friend bool operator==(const UndirectedGraph&, const UndirectedGraph&) = default;
};

// Canonicalizes and validates an edge list.
UndirectedGraph make_undirected(int p, std::vector<Edge> edges);

// Ordering estimated exactly as mrs_learn; each node receives the true
// parents that precede it in the estimated ordering.
MrsResult oracle_learn(const CountMatrix& data, const Dag& truth, const MrsConfig& config);

enum class CombineRule { And, Or };

struct PmrfResult {
    UndirectedGraph and_graph;
    UndirectedGraph or_graph;
    // Selected node-wise coefficients that are positive; a normalizable
    // Poisson MRF needs every interaction <= 0.
    std::size_t positive_coefficients = 0;

    const UndirectedGraph& graph(CombineRule rule) const { return rule == CombineRule::And ? and_graph : or_graph; }
};

// Node-wise l1 Poisson regression of each column on all others at the
// parent-rule lambda, symmetrized by both rules.
PmrfResult pmrf_fit(const CountMatrix& data, const MrsConfig& config);
UndirectedGraph pmrf_learn(const CountMatrix& data, const MrsConfig& config, CombineRule rule = CombineRule::And);

// The learners as run by the CLI and the benchmark: degenerate_columns are
// set aside, the rest is learned and the result lifted back to all columns,
// the set-aside nodes isolated. `quarantined` receives their indices.
MrsResult mrs_learn_quarantined(const CountMatrix& data, const MrsConfig& config,
                                std::vector<int>* quarantined = nullptr);
MrsResult oracle_learn_quarantined(const CountMatrix& data, const Dag& truth, const MrsConfig& config,
                                   std::vector<int>* quarantined = nullptr);
PmrfResult pmrf_fit_quarantined(const CountMatrix& data, const MrsConfig& config,
                                std::vector<int>* quarantined = nullptr);

// The oracle built from an already estimated ordering: identical to
// oracle_learn_quarantined when `mrs` came from mrs_learn_quarantined with the
// same data and config and `quarantined` lists its set-aside nodes.
MrsResult oracle_from_ordering(const MrsResult& mrs, const Dag& truth, const std::vector<int>& quarantined);

// Subgraph of `dag` on `nodes` (ascending), reindexed 0..nodes.size()-1.
Dag induced_subgraph(const Dag& dag, const std::vector<int>& nodes);

} // namespace mrs
