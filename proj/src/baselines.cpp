#include "mrs/baselines.hpp"

#include <algorithm>

#include "mrs/error.hpp"
#include "mrs/parallel.hpp"

namespace mrs {

UndirectedGraph make_undirected(int p, std::vector<Edge> edges) {
    for (Edge& e : edges) {
        if (e.from == e.to) throw InvalidArgument("undirected graph cannot have self-loops");
        if (e.from < 0 || e.to < 0 || e.from >= p || e.to >= p) throw InvalidArgument("edge out of range");
        if (e.from > e.to) std::swap(e.from, e.to);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return {p, std::move(edges)};
}

MrsResult oracle_learn(const CountMatrix& data, const Dag& truth, const MrsConfig& config) {
    if (truth.size() != data.cols())
        throw InvalidArgument("truth has " + std::to_string(truth.size()) + " nodes, data has " +
                              std::to_string(data.cols()) + " columns");
    return learn_with_ordering(data, config, [&truth](int, int node, const std::vector<int>& prefix, const LassoFit*) {
        std::vector<int> parents;
        for (int k : truth.parents(node))
            if (std::find(prefix.begin(), prefix.end(), k) != prefix.end()) parents.push_back(k);
        return parents;
    });
}

PmrfResult pmrf_fit(const CountMatrix& data, const MrsConfig& config) {
    const Eigen::Index p = data.cols();
    if (p < 2) throw InvalidArgument("PMRF neighbourhood selection needs p >= 2");
    config.validate(data.rows(), p);
    const Eigen::MatrixXd x = data.to_real();

    std::vector<LassoFit> fits(static_cast<std::size_t>(p));
    parallel_for(static_cast<std::size_t>(p), config.jobs, [&](std::size_t j) {
        Eigen::MatrixXd design(x.rows(), p - 1);
        for (Eigen::Index k = 0, c = 0; k < p; ++k)
            if (k != static_cast<Eigen::Index>(j)) design.col(c++) = x.col(k);
        const Eigen::VectorXd response = x.col(static_cast<Eigen::Index>(j));
        try {
            if (!(response.sum() > 0.0)) throw DataError("column is identically zero");
            const LassoProblem problem(std::move(design), response);
            if (config.fixed_lambda) {
                fits[j] = fit_poisson_lasso(problem, *config.fixed_lambda, config.solver);
            } else {
                const CvResult table = cv_select(problem, cv_options(config, x.rows()), config.solver);
                fits[j] = table.path.fits[rule_index(table, config.parent_rule)];
            }
        } catch (const Error& e) {
            throw Error("PMRF node " + std::to_string(j + 1) + " (" + data.labels()[j] + "): " + e.what());
        }
    });

    std::vector<std::vector<char>> selected(static_cast<std::size_t>(p), std::vector<char>(static_cast<std::size_t>(p), 0));
    PmrfResult result;
    for (Eigen::Index j = 0; j < p; ++j) {
        for (int c : select_parents(fits[static_cast<std::size_t>(j)], config.threshold)) {
            const int k = c < j ? c : c + 1;
            selected[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = 1;
            if (fits[static_cast<std::size_t>(j)].coefficients(c) > 0.0) ++result.positive_coefficients;
        }
    }
    std::vector<Edge> both, either;
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k) {
            const bool a = selected[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
            const bool b = selected[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            if (a && b) both.push_back({j, k});
            if (a || b) either.push_back({j, k});
        }
    result.and_graph = make_undirected(static_cast<int>(p), std::move(both));
    result.or_graph = make_undirected(static_cast<int>(p), std::move(either));
    return result;
}

UndirectedGraph pmrf_learn(const CountMatrix& data, const MrsConfig& config, CombineRule rule) {
    return pmrf_fit(data, config).graph(rule);
}

Dag induced_subgraph(const Dag& dag, const std::vector<int>& nodes) {
    std::vector<int> index(static_cast<std::size_t>(dag.size()), -1);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        index[static_cast<std::size_t>(nodes[i])] = static_cast<int>(i);
        labels.push_back(dag.labels()[static_cast<std::size_t>(nodes[i])]);
    }
    std::vector<Edge> edges;
    for (const Edge& e : dag.edges()) {
        const int a = index[static_cast<std::size_t>(e.from)];
        const int b = index[static_cast<std::size_t>(e.to)];
        if (a >= 0 && b >= 0) edges.push_back({a, b});
    }
    return Dag(static_cast<int>(nodes.size()), std::move(edges), std::move(labels));
}

namespace {

std::vector<int> kept_columns(const CountMatrix& data, const MrsConfig& config, std::vector<int>* quarantined) {
    const std::vector<int> dropped = degenerate_columns(data, config);
    if (quarantined) *quarantined = dropped;
    std::vector<int> kept;
    for (int v = 0, d = 0; v < static_cast<int>(data.cols()); ++v) {
        if (d < static_cast<int>(dropped.size()) && dropped[static_cast<std::size_t>(d)] == v)
            ++d;
        else
            kept.push_back(v);
    }
    if (kept.empty()) throw DataError("every column is degenerate (constant or nearly all zero)");
    return kept;
}

} // namespace

MrsResult mrs_learn_quarantined(const CountMatrix& data, const MrsConfig& config, std::vector<int>* quarantined) {
    const std::vector<int> kept = kept_columns(data, config, quarantined);
    if (kept.size() == static_cast<std::size_t>(data.cols())) return mrs_learn(data, config);
    return embed_result(mrs_learn(data.select_columns(kept), config), kept, data);
}

MrsResult oracle_learn_quarantined(const CountMatrix& data, const Dag& truth, const MrsConfig& config,
                                   std::vector<int>* quarantined) {
    if (truth.size() != data.cols())
        throw InvalidArgument("truth has " + std::to_string(truth.size()) + " nodes, data has " +
                              std::to_string(data.cols()) + " columns");
    const std::vector<int> kept = kept_columns(data, config, quarantined);
    if (kept.size() == static_cast<std::size_t>(data.cols())) return oracle_learn(data, truth, config);
    return embed_result(oracle_learn(data.select_columns(kept), induced_subgraph(truth, kept), config), kept, data);
}

PmrfResult pmrf_fit_quarantined(const CountMatrix& data, const MrsConfig& config, std::vector<int>* quarantined) {
    const std::vector<int> kept = kept_columns(data, config, quarantined);
    const int p = static_cast<int>(data.cols());
    if (kept.size() == static_cast<std::size_t>(p)) return pmrf_fit(data, config);
    if (kept.size() < 2) return {make_undirected(p, {}), make_undirected(p, {}), 0};
    const PmrfResult sub = pmrf_fit(data.select_columns(kept), config);
    auto lift = [&](const UndirectedGraph& g) {
        std::vector<Edge> edges;
        for (const Edge& e : g.edges)
            edges.push_back({kept[static_cast<std::size_t>(e.from)], kept[static_cast<std::size_t>(e.to)]});
        return make_undirected(p, std::move(edges));
    };
    return {lift(sub.and_graph), lift(sub.or_graph), sub.positive_coefficients};
}

MrsResult oracle_from_ordering(const MrsResult& mrs, const Dag& truth, const std::vector<int>& quarantined) {
    const int p = truth.size();
    if (mrs.graph.size() != p) throw InvalidArgument("oracle_from_ordering: size mismatch");
    std::vector<char> dropped(static_cast<std::size_t>(p), 0);
    for (int v : quarantined) dropped[static_cast<std::size_t>(v)] = 1;
    std::vector<Edge> edges;
    for (const Edge& e : truth.edges())
        if (!dropped[static_cast<std::size_t>(e.from)] && !dropped[static_cast<std::size_t>(e.to)] &&
            mrs.ordering.position(e.from) < mrs.ordering.position(e.to))
            edges.push_back(e);
    MrsResult out = mrs;
    out.graph = Dag(p, std::move(edges), mrs.graph.labels());
    return out;
}

} // namespace mrs
