#include "mrs/count_matrix.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "mrs/error.hpp"
#include "mrs/graph.hpp"

namespace mrs {

CountMatrix::CountMatrix(CountArray values, std::vector<std::string> labels)
    : values_(std::move(values)), labels_(std::move(labels)) {
    if (labels_.empty()) labels_ = default_labels(static_cast<int>(values_.cols()));
    if (static_cast<Eigen::Index>(labels_.size()) != values_.cols())
        throw InvalidArgument("CountMatrix: " + std::to_string(labels_.size()) + " labels for " +
                              std::to_string(values_.cols()) + " columns");
    if (values_.size() > 0 && values_.minCoeff() < 0) throw InvalidArgument("CountMatrix: negative count");
}

CountMatrix CountMatrix::top_rows(Eigen::Index n) const {
    if (n < 0 || n > rows()) throw InvalidArgument("top_rows: requested " + std::to_string(n) + " rows");
    return CountMatrix(values_.topRows(n), labels_);
}

CountMatrix CountMatrix::select_columns(const std::vector<int>& columns) const {
    CountArray out(rows(), static_cast<Eigen::Index>(columns.size()));
    std::vector<std::string> labels;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        out.col(static_cast<Eigen::Index>(c)) = values_.col(columns[c]);
        labels.push_back(labels_[static_cast<std::size_t>(columns[c])]);
    }
    return CountMatrix(std::move(out), std::move(labels));
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\"");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\"");
    return s.substr(first, last - first + 1);
}

} // namespace

CountMatrix read_count_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("CSV is empty: expected a header row");
    std::vector<std::string> labels = split_line(line);
    for (auto& l : labels) l = trim(l);
    const std::size_t p = labels.size();
    if (p == 0 || (p == 1 && labels[0].empty())) throw DataError("CSV header has no columns");

    std::vector<std::int64_t> cells;
    std::size_t line_no = 1;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto row = split_line(line);
        if (row.size() != p)
            throw DataError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(p) +
                            " cells, found " + std::to_string(row.size()));
        for (std::size_t j = 0; j < p; ++j) {
            const std::string cell = trim(row[j]);
            std::int64_t value = 0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || value < 0)
                throw DataError("CSV line " + std::to_string(line_no) + ", column " + std::to_string(j + 1) + " ('" +
                                labels[j] + "'): '" + cell + "' is not a non-negative integer count");
            cells.push_back(value);
        }
        ++n;
    }
    CountArray values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cells[i * p + j];
    return CountMatrix(std::move(values), std::move(labels));
}

CountMatrix read_count_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return read_count_csv(in);
}

void write_count_csv(std::ostream& out, const CountMatrix& data) {
    const auto& labels = data.labels();
    for (std::size_t j = 0; j < labels.size(); ++j) out << (j ? "," : "") << labels[j];
    out << '\n';
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) out << (j ? "," : "") << data(i, j);
        out << '\n';
    }
}

void write_count_csv(const std::filesystem::path& path, const CountMatrix& data) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    write_count_csv(out, data);
    if (!out) throw Error("write failed for " + path.string());
}

} // namespace mrs
