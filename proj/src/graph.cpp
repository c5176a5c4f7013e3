#include "mrs/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <string>

#include "mrs/error.hpp"
#include "mrs/rng.hpp"

namespace mrs {

namespace {

std::string edge_name(const Edge& e) {
    return std::to_string(e.from + 1) + "->" + std::to_string(e.to + 1);
}

void check_range(int p, const Edge& e) {
    if (e.from < 0 || e.from >= p || e.to < 0 || e.to >= p)
        throw InvalidArgument("edge " + edge_name(e) + " out of range for p=" + std::to_string(p));
    if (e.from == e.to) throw InvalidArgument("self-loop at node " + std::to_string(e.from + 1));
}

} // namespace

Ordering::Ordering(std::vector<int> order) : order_(std::move(order)), position_(order_.size(), -1) {
    const int p = static_cast<int>(order_.size());
    for (int m = 0; m < p; ++m) {
        const int v = order_[static_cast<std::size_t>(m)];
        if (v < 0 || v >= p || position_[static_cast<std::size_t>(v)] != -1)
            throw InvalidArgument("ordering is not a permutation of {1.." + std::to_string(p) + "}");
        position_[static_cast<std::size_t>(v)] = m;
    }
}

Ordering topological_order(int p, std::span<const Edge> edges) {
    if (p < 0) throw InvalidArgument("negative node count");
    std::vector<std::vector<int>> children(static_cast<std::size_t>(p));
    std::vector<int> indegree(static_cast<std::size_t>(p), 0);
    for (const Edge& e : edges) {
        check_range(p, e);
        children[static_cast<std::size_t>(e.from)].push_back(e.to);
        ++indegree[static_cast<std::size_t>(e.to)];
    }
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (int v = 0; v < p; ++v)
        if (indegree[static_cast<std::size_t>(v)] == 0) ready.push(v);
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(p));
    while (!ready.empty()) {
        const int v = ready.top();
        ready.pop();
        order.push_back(v);
        for (int c : children[static_cast<std::size_t>(v)])
            if (--indegree[static_cast<std::size_t>(c)] == 0) ready.push(c);
    }
    if (static_cast<int>(order.size()) != p) {
        // Every unplaced node has an unplaced parent; walking parents must
        // revisit a node, and the edge closing that walk lies on a cycle.
        std::vector<int> parent_of(static_cast<std::size_t>(p), -1);
        for (const Edge& e : edges)
            if (indegree[static_cast<std::size_t>(e.from)] > 0 && indegree[static_cast<std::size_t>(e.to)] > 0)
                parent_of[static_cast<std::size_t>(e.to)] = e.from;
        int v = 0;
        while (indegree[static_cast<std::size_t>(v)] == 0) ++v;
        std::vector<char> seen(static_cast<std::size_t>(p), 0);
        while (!seen[static_cast<std::size_t>(v)]) {
            seen[static_cast<std::size_t>(v)] = 1;
            v = parent_of[static_cast<std::size_t>(v)];
        }
        throw InvalidArgument("graph has a directed cycle through edge " +
                              edge_name({parent_of[static_cast<std::size_t>(v)], v}));
    }
    return Ordering(std::move(order));
}

std::vector<std::string> default_labels(int p) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(p));
    for (int v = 0; v < p; ++v) labels.push_back("X" + std::to_string(v + 1));
    return labels;
}

Dag::Dag(int p, std::vector<Edge> edges, std::vector<std::string> labels)
    : p_(p), edges_(std::move(edges)), parents_(static_cast<std::size_t>(std::max(p, 0))),
      labels_(std::move(labels)) {
    if (p < 1) throw InvalidArgument("a DAG needs at least one node");
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    order_ = topological_order(p, edges_);
    for (const Edge& e : edges_) parents_[static_cast<std::size_t>(e.to)].push_back(e.from);
    for (auto& ps : parents_) std::sort(ps.begin(), ps.end());
    if (labels_.empty()) labels_ = default_labels(p);
    if (static_cast<int>(labels_.size()) != p)
        throw InvalidArgument("label count " + std::to_string(labels_.size()) + " does not match p=" + std::to_string(p));
}

bool Dag::has_edge(int from, int to) const {
    return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
}

Dag Dag::permuted(std::span<const int> perm) const {
    if (static_cast<int>(perm.size()) != p_) throw InvalidArgument("permutation size mismatch");
    Ordering check{std::vector<int>(perm.begin(), perm.end())};
    std::vector<Edge> edges;
    edges.reserve(edges_.size());
    for (const Edge& e : edges_)
        edges.push_back({perm[static_cast<std::size_t>(e.from)], perm[static_cast<std::size_t>(e.to)]});
    std::vector<std::string> labels(static_cast<std::size_t>(p_));
    for (int v = 0; v < p_; ++v)
        labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(v)])] = labels_[static_cast<std::size_t>(v)];
    return Dag(p_, std::move(edges), std::move(labels));
}

Dag random_dag(int p, int d, std::uint64_t seed) {
    if (p < 1 || d < 0 || d >= p)
        throw InvalidArgument("random_dag requires p >= 1 and 0 <= d < p (got p=" + std::to_string(p) +
                              ", d=" + std::to_string(d) + ")");
    Rng rng(derive_key(seed, "random_dag"));
    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    std::vector<Edge> edges;
    std::vector<int> pool;
    for (int m = 1; m < p; ++m) {
        const auto limit = static_cast<std::uint64_t>(std::min(d, m));
        const auto count = static_cast<int>(rng.below(limit + 1));
        pool.assign(order.begin(), order.begin() + m);
        for (int c = 0; c < count; ++c) {
            const auto pick = c + static_cast<int>(rng.below(static_cast<std::uint64_t>(m - c)));
            std::swap(pool[static_cast<std::size_t>(c)], pool[static_cast<std::size_t>(pick)]);
            edges.push_back({pool[static_cast<std::size_t>(c)], order[static_cast<std::size_t>(m)]});
        }
    }
    return Dag(p, std::move(edges));
}

namespace {

// Adjacency marks for a partially directed graph.
class Pdag {
public:
    enum Mark : std::uint8_t { kNone, kDirected, kUndirected };

    explicit Pdag(int p) : p_(p), marks_(static_cast<std::size_t>(p) * static_cast<std::size_t>(p), kNone) {}

    int size() const { return p_; }
    bool adjacent(int a, int b) const { return at(a, b) != kNone || at(b, a) != kNone; }
    bool directed(int a, int b) const { return at(a, b) == kDirected; }
    bool undirected(int a, int b) const { return at(a, b) == kUndirected; }

    void set_directed(int a, int b) {
        at(a, b) = kDirected;
        at(b, a) = kNone;
    }
    void set_undirected(int a, int b) {
        at(a, b) = kUndirected;
        at(b, a) = kUndirected;
    }

    Cpdag to_cpdag() const {
        Cpdag out{p_, {}, {}};
        for (int a = 0; a < p_; ++a)
            for (int b = 0; b < p_; ++b) {
                if (directed(a, b)) out.directed.push_back({a, b});
                if (a < b && undirected(a, b)) out.undirected.push_back({a, b});
            }
        return out;
    }

private:
    Mark& at(int a, int b) { return marks_[static_cast<std::size_t>(a) * static_cast<std::size_t>(p_) + static_cast<std::size_t>(b)]; }
    Mark at(int a, int b) const { return marks_[static_cast<std::size_t>(a) * static_cast<std::size_t>(p_) + static_cast<std::size_t>(b)]; }

    int p_;
    std::vector<Mark> marks_;
};

// (z -> x - y), z and y nonadjacent
bool meek_rule_1(const Pdag& g, int x, int y) {
    for (int z = 0; z < g.size(); ++z)
        if (z != y && g.directed(z, x) && !g.adjacent(z, y)) return true;
    return false;
}

// (x -> z -> y) and (x - y)
bool meek_rule_2(const Pdag& g, int x, int y) {
    for (int z = 0; z < g.size(); ++z)
        if (g.directed(x, z) && g.directed(z, y)) return true;
    return false;
}

// (x - z -> y), (x - w -> y), z and w nonadjacent
bool meek_rule_3(const Pdag& g, int x, int y) {
    for (int z = 0; z < g.size(); ++z) {
        if (!g.undirected(x, z) || !g.directed(z, y)) continue;
        for (int w = z + 1; w < g.size(); ++w)
            if (g.undirected(x, w) && g.directed(w, y) && !g.adjacent(z, w)) return true;
    }
    return false;
}

// (x - w), x adjacent to z, (w -> z -> y), w and y nonadjacent
bool meek_rule_4(const Pdag& g, int x, int y) {
    for (int w = 0; w < g.size(); ++w) {
        if (w == y || !g.undirected(x, w) || g.adjacent(w, y)) continue;
        for (int z = 0; z < g.size(); ++z)
            if (z != x && g.adjacent(x, z) && g.directed(w, z) && g.directed(z, y)) return true;
    }
    return false;
}

void close_under_meek(Pdag& g) {
    for (bool changed = true; changed;) {
        changed = false;
        for (int x = 0; x < g.size(); ++x)
            for (int y = 0; y < g.size(); ++y) {
                if (!g.undirected(x, y)) continue;
                if (meek_rule_1(g, x, y) || meek_rule_2(g, x, y) || meek_rule_3(g, x, y) || meek_rule_4(g, x, y)) {
                    g.set_directed(x, y);
                    changed = true;
                }
            }
    }
}

} // namespace

Cpdag cpdag_of(const Dag& dag) {
    const int p = dag.size();
    Pdag g(p);
    for (const Edge& e : dag.edges()) g.set_undirected(e.from, e.to);
    for (int c = 0; c < p; ++c) {
        const auto& ps = dag.parents(c);
        for (std::size_t i = 0; i < ps.size(); ++i)
            for (std::size_t j = i + 1; j < ps.size(); ++j)
                if (!dag.has_edge(ps[i], ps[j]) && !dag.has_edge(ps[j], ps[i])) {
                    g.set_directed(ps[i], c);
                    g.set_directed(ps[j], c);
                }
    }
    close_under_meek(g);
    return g.to_cpdag();
}

Cpdag meek_closure(const Cpdag& pdag) {
    Pdag g(pdag.p);
    for (const Edge& e : pdag.undirected) g.set_undirected(e.from, e.to);
    for (const Edge& e : pdag.directed) g.set_directed(e.from, e.to);
    close_under_meek(g);
    return g.to_cpdag();
}

StructureMetrics make_metrics(std::size_t tp, std::size_t estimated, std::size_t truth) {
    StructureMetrics m;
    m.true_positives = tp;
    m.estimated = estimated;
    m.truth = truth;
    m.precision = estimated == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(estimated);
    m.recall = truth == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(truth);
    return m;
}

namespace {

std::size_t count_common(std::vector<Edge> a, std::vector<Edge> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<Edge> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    return common.size();
}

void check_same_size(int a, int b) {
    if (a != b)
        throw InvalidArgument("graphs have different node counts (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

std::vector<Edge> canonical(std::span<const Edge> edges) {
    std::vector<Edge> out;
    out.reserve(edges.size());
    for (const Edge& e : edges) out.push_back({std::min(e.from, e.to), std::max(e.from, e.to)});
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

StructureMetrics edge_metrics(const Dag& estimated, const Dag& truth) {
    check_same_size(estimated.size(), truth.size());
    return make_metrics(count_common(estimated.edges(), truth.edges()), estimated.edge_count(), truth.edge_count());
}

StructureMetrics cpdag_metrics(const Cpdag& estimated, const Cpdag& truth) {
    check_same_size(estimated.p, truth.p);
    const std::size_t tp = count_common(estimated.directed, truth.directed) +
                           count_common(canonical(estimated.undirected), canonical(truth.undirected));
    return make_metrics(tp, estimated.directed.size() + estimated.undirected.size(),
                        truth.directed.size() + truth.undirected.size());
}

StructureMetrics skeleton_metrics(std::span<const Edge> estimated, std::span<const Edge> truth) {
    const auto est = canonical(estimated);
    const auto tru = canonical(truth);
    return make_metrics(count_common(est, tru), est.size(), tru.size());
}

std::vector<Edge> skeleton(const Dag& dag) { return canonical(dag.edges()); }

std::vector<Edge> skeleton(const Cpdag& cpdag) {
    std::vector<Edge> all = cpdag.directed;
    all.insert(all.end(), cpdag.undirected.begin(), cpdag.undirected.end());
    return canonical(all);
}

} // namespace mrs
