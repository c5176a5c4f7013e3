#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mrs {

// Node indices are 0-based in memory; serialized forms are 1-based.
struct Edge {
    int from;
    int to;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

// A permutation of {0..p-1}; position(v) is the inverse permutation.
class Ordering {
public:
    Ordering() = default;
    explicit Ordering(std::vector<int> order);

    std::size_t size() const noexcept { return order_.size(); }
    int operator[](std::size_t m) const { return order_[m]; }
    int position(int node) const { return position_[static_cast<std::size_t>(node)]; }
    const std::vector<int>& nodes() const noexcept { return order_; }

    auto begin() const noexcept { return order_.begin(); }
    auto end() const noexcept { return order_.end(); }

    friend bool operator==(const Ordering& a, const Ordering& b) { return a.order_ == b.order_; }

private:
    std::vector<int> order_;
    std::vector<int> position_;
};

// Kahn's algorithm with lowest-index tie-breaking. Throws InvalidArgument
// naming one edge of a directed cycle when the graph is not acyclic.
Ordering topological_order(int p, std::span<const Edge> edges);

class Dag {
public:
    Dag() = default;
    // Throws InvalidArgument on out-of-range indices, self-loops or cycles.
    // Duplicate edges are collapsed.
    Dag(int p, std::vector<Edge> edges, std::vector<std::string> labels = {});

    int size() const noexcept { return p_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const std::vector<int>& parents(int node) const { return parents_[static_cast<std::size_t>(node)]; }
    bool has_edge(int from, int to) const;
    const Ordering& order() const noexcept { return order_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    // Relabels node v as perm[v]; labels travel with their nodes.
    Dag permuted(std::span<const int> perm) const;

    friend bool operator==(const Dag& a, const Dag& b) { return a.p_ == b.p_ && a.edges_ == b.edges_; }

private:
    int p_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> parents_;
    std::vector<std::string> labels_;
    Ordering order_;
};

inline const Ordering& topological_order(const Dag& dag) { return dag.order(); }

// Default column labels X1..Xp.
std::vector<std::string> default_labels(int p);

// Partially directed graph representing a Markov equivalence class.
// Undirected edges are stored with from < to.
struct Cpdag {
    int p = 0;
    std::vector<Edge> directed;
    std::vector<Edge> undirected;

    friend bool operator==(const Cpdag&, const Cpdag&) = default;
};

// Random ordering, then per node a uniform parent count in
// {0..min(d, #predecessors)} and uniformly chosen predecessors.
Dag random_dag(int p, int d, std::uint64_t seed);

// Essential graph: v-structures plus Meek rules R1-R4 to a fixpoint.
Cpdag cpdag_of(const Dag& dag);

// Re-runs Meek closure on a partially directed graph. Directed edges are
// kept; undirected ones are oriented where forced.
Cpdag meek_closure(const Cpdag& pdag);

struct StructureMetrics {
    double precision = 1.0;
    double recall = 1.0;
    std::size_t true_positives = 0;
    std::size_t estimated = 0;
    std::size_t truth = 0;
};

StructureMetrics make_metrics(std::size_t tp, std::size_t estimated, std::size_t truth);

// Directed edges must match with orientation.
StructureMetrics edge_metrics(const Dag& estimated, const Dag& truth);
// Same type and orientation.
StructureMetrics cpdag_metrics(const Cpdag& estimated, const Cpdag& truth);
// Canonical (min-first) undirected pairs compared as sets.
StructureMetrics skeleton_metrics(std::span<const Edge> estimated, std::span<const Edge> truth);

std::vector<Edge> skeleton(const Dag& dag);
std::vector<Edge> skeleton(const Cpdag& cpdag);

} // namespace mrs
