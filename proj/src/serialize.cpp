#include "mrs/serialize.hpp"

#include <cmath>
#include <fstream>

#include "mrs/error.hpp"

namespace mrs {

namespace {

Json edge_list(const std::vector<Edge>& edges) {
    Json out = Json::array();
    for (const Edge& e : edges) out.push_back({e.from + 1, e.to + 1});
    return out;
}

std::vector<Edge> parse_edges(const Json& doc, const char* key, int p) {
    std::vector<Edge> out;
    if (!doc.contains(key)) return out;
    for (const auto& pair : doc.at(key)) {
        if (!pair.is_array() || pair.size() != 2) throw DataError(std::string("graph JSON: malformed entry in '") + key + "'");
        const int from = pair[0].get<int>() - 1;
        const int to = pair[1].get<int>() - 1;
        if (from < 0 || to < 0 || from >= p || to >= p)
            throw DataError(std::string("graph JSON: node index out of range in '") + key + "'");
        out.push_back({from, to});
    }
    return out;
}

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

} // namespace

Json to_json(const Dag& dag) {
    return {{"p", dag.size()}, {"edges", edge_list(dag.edges())}, {"undirected", Json::array()}};
}

Json to_json(const Cpdag& cpdag) {
    return {{"p", cpdag.p}, {"edges", edge_list(cpdag.directed)}, {"undirected", edge_list(cpdag.undirected)}};
}

Json to_json(const UndirectedGraph& graph) {
    return {{"p", graph.p}, {"edges", Json::array()}, {"undirected", edge_list(graph.edges)}};
}

Dag GraphDocument::to_dag() const {
    if (!undirected.empty()) throw DataError("graph has undirected edges; a DAG was expected");
    return Dag(p, directed, labels);
}

GraphDocument graph_from_json(const Json& doc) {
    try {
        GraphDocument g;
        g.p = doc.at("p").get<int>();
        if (g.p < 1) throw DataError("graph JSON: p must be positive");
        g.directed = parse_edges(doc, "edges", g.p);
        g.undirected = parse_edges(doc, "undirected", g.p);
        for (Edge& e : g.undirected)
            if (e.from > e.to) std::swap(e.from, e.to);
        if (doc.contains("labels")) g.labels = doc.at("labels").get<std::vector<std::string>>();
        return g;
    } catch (const Json::exception& e) {
        throw DataError(std::string("graph JSON: ") + e.what());
    }
}

Json to_json(const DagParameters& params, std::string_view link) {
    Json weights = Json::array();
    const auto& edges = params.dag().edges();
    for (std::size_t e = 0; e < edges.size(); ++e)
        weights.push_back({edges[e].from + 1, edges[e].to + 1, params.weights()[e]});
    Json dag = to_json(params.dag());
    dag["labels"] = params.dag().labels();
    return {{"dag", dag}, {"theta", params.intercepts()}, {"weights", weights}, {"link", link}};
}

PoissonSem sem_from_json(const Json& doc) {
    try {
        const GraphDocument g = graph_from_json(doc.at("dag"));
        const Dag dag = g.to_dag();
        std::vector<double> weights(dag.edge_count(), 0.0);
        for (const auto& entry : doc.at("weights")) {
            const Edge e{entry.at(0).get<int>() - 1, entry.at(1).get<int>() - 1};
            const auto it = std::lower_bound(dag.edges().begin(), dag.edges().end(), e);
            if (it == dag.edges().end() || *it != e) throw DataError("SEM JSON: weight for a missing edge");
            weights[static_cast<std::size_t>(it - dag.edges().begin())] = entry.at(2).get<double>();
        }
        return PoissonSem(dag, doc.at("theta").get<std::vector<double>>(), std::move(weights));
    } catch (const Json::exception& e) {
        throw DataError(std::string("SEM JSON: ") + e.what());
    }
}

Json to_json(const LassoFit& fit) {
    return {{"intercept", fit.intercept},
            {"coefficients", std::vector<double>(fit.coefficients.data(), fit.coefficients.data() + fit.coefficients.size())},
            {"lambda", fit.lambda},
            {"iterations", fit.iterations},
            {"kkt_residual", fit.kkt_residual},
            {"objective", fit.objective}};
}

Json to_json(const CvResult& cv) {
    Json fits = Json::array();
    for (const auto& f : cv.path.fits) fits.push_back(to_json(f));
    return {{"lambdas", cv.lambdas},     {"cv_mean", cv.cv_mean},
            {"cv_se", cv.cv_se},         {"lambda_min", cv.lambda_min()},
            {"lambda_band_lo", cv.lambda_band_lo()}, {"lambda_band_hi", cv.lambda_band_hi()},
            {"fits", fits}};
}

Json to_json(const MrsResult& result) {
    Json ordering = Json::array();
    for (int v : result.ordering) ordering.push_back(v + 1);
    Json scores = Json::array();
    for (const auto& s : result.scores.entries)
        scores.push_back({{"step", s.step + 1},
                          {"node", s.node + 1},
                          {"score", s.score},
                          {"numerator", s.numerator},
                          {"denominator", s.denominator},
                          {"lambda_score", number_or_null(s.lambda_score)},
                          {"lambda_parent", number_or_null(s.lambda_parent)}});
    Json winners = Json::array();
    for (int w : result.scores.winners) winners.push_back(w + 1);
    Json parent_lambda = Json::array();
    for (double l : result.parent_lambda) parent_lambda.push_back(number_or_null(l));
    return {{"labels", result.graph.labels()}, {"ordering", ordering},     {"graph", to_json(result.graph)},
            {"scores", scores},                {"winners", winners},       {"parent_lambda", parent_lambda}};
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw Error("write failed for " + path.string());
}

} // namespace mrs
