#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mrs/baselines.hpp"
#include "mrs/graph.hpp"
#include "mrs/mrs.hpp"
#include "mrs/poisson_lasso.hpp"
#include "mrs/simulate.hpp"

namespace mrs {

using Json = nlohmann::json;

// Graph documents: {"p": int, "edges": [[j,k],...], "undirected": [[j,k],...]}
// with 1-based node indices.
Json to_json(const Dag& dag);
Json to_json(const Cpdag& cpdag);
Json to_json(const UndirectedGraph& graph);

// Parsed graph document; `directed` and `undirected` are 0-based.
struct GraphDocument {
    int p = 0;
    std::vector<Edge> directed;
    std::vector<Edge> undirected;
    std::vector<std::string> labels;

    // Throws DataError if the document has undirected edges.
    Dag to_dag() const;
    Cpdag to_cpdag() const { return {p, directed, undirected}; }
};
GraphDocument graph_from_json(const Json& doc);

// {"dag": graph, "theta": [...], "weights": [[j,k,w],...], "link": "log"|"identity"}
Json to_json(const DagParameters& params, std::string_view link);
PoissonSem sem_from_json(const Json& doc);

Json to_json(const LassoFit& fit);
Json to_json(const CvResult& cv);
Json to_json(const MrsResult& result);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& doc);

} // namespace mrs
