#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mrs {

using CountArray = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// n x p matrix of non-negative integer observations with column labels.
class CountMatrix {
public:
    CountMatrix() = default;
    // Throws InvalidArgument on negative entries or a label-count mismatch.
    explicit CountMatrix(CountArray values, std::vector<std::string> labels = {});

    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index cols() const noexcept { return values_.cols(); }
    std::int64_t operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }
    const CountArray& values() const noexcept { return values_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    Eigen::MatrixXd to_real() const { return values_.cast<double>(); }
    CountMatrix top_rows(Eigen::Index n) const;
    CountMatrix select_columns(const std::vector<int>& columns) const;

    friend bool operator==(const CountMatrix& a, const CountMatrix& b) {
        return a.labels_ == b.labels_ && a.values_ == b.values_;
    }

private:
    CountArray values_;
    std::vector<std::string> labels_;
};

// Header row of labels, then one row of integer cells per observation.
// Cells must be exact non-negative integers; errors name the line and column.
CountMatrix read_count_csv(std::istream& in);
CountMatrix read_count_csv(const std::filesystem::path& path);
void write_count_csv(std::ostream& out, const CountMatrix& data);
void write_count_csv(const std::filesystem::path& path, const CountMatrix& data);

} // namespace mrs
