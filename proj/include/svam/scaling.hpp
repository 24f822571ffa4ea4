#pragma once

#include "svam/harness.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace svam {

// Standard normal CDF.
double norm_cdf(double z);

// Inverse standard normal CDF. Throws std::domain_error unless 0 < p < 1.
double inv_norm_cdf(double p);

// Proportions p(row, col) = fraction of trials of the pair {row, col} in
// which the column texture was judged finer. Diagonal is undefined; missing
// off-diagonal cells are NaN. When built from counts, the integer tallies are
// kept so display rounding is exact.
class PairwiseMatrix {
public:
    PairwiseMatrix(std::vector<int> labels, std::vector<double> p, int n_per_pair = 40);

    static PairwiseMatrix from_counts(std::vector<int> labels, std::vector<int> chosen, std::vector<int> totals);

    std::size_t size() const { return labels_.size(); }
    const std::vector<int>& labels() const { return labels_; }
    int n_per_pair() const { return n_per_pair_; }

    double p(std::size_t row, std::size_t col) const { return p_[row * size() + col]; }
    bool missing(std::size_t row, std::size_t col) const;
    bool complete() const;
    bool has_counts() const { return !totals_.empty(); }
    int chosen(std::size_t row, std::size_t col) const { return chosen_.at(row * size() + col); }
    int total(std::size_t row, std::size_t col) const { return totals_.at(row * size() + col); }

    // max |p(i,j) + p(j,i) - 1| over present off-diagonal pairs.
    double complementarity_error() const;

    // Two-decimal display value (half away from zero).
    double display_value(std::size_t row, std::size_t col) const;

private:
    std::vector<int> labels_;
    std::vector<double> p_;
    int n_per_pair_;
    std::vector<int> chosen_;
    std::vector<int> totals_;
};

// Round half away from zero to two decimals. For exact ratios prefer
// display_proportion, which avoids binary round-off (0.175 is not exact).
double round_2dp(double value);
double display_proportion(int chosen, int total);

struct ScaleValues {
    std::vector<int> labels;
    std::vector<double> values;  // anchored: min = 0
    std::vector<std::string> warnings;

    double at(int label) const;
};

// Column-mean convention for Case V.
//   OffDiagonal: mean of z over the n - 1 other rows. Reproduces the
//     lab 6-texture scale differences; equals n/(n-1) times AllCells.
//   AllCells: mean over all n rows with z = 0 on the diagonal, the
//     least-squares solution. Recovers generating scales exactly (up to the
//     anchor) from a consistent matrix.
enum class CaseVMean { OffDiagonal, AllCells };

// Thurstone Case V: clamp proportions to [1/(2N), 1 - 1/(2N)], z-transform,
// take column means, subtract the minimum.
// Complementarity violations beyond 0.01 are reported as warnings.
ScaleValues thurstone_case_v(const PairwiseMatrix& m, CaseVMean mean = CaseVMean::OffDiagonal);

// Scale tolerance used for complementarity warnings (two-decimal rounding).
inline constexpr double kComplementaritySlack = 0.01;

struct ConsistencyReport {
    double mad = 0.0;         // mean |p - p_hat| over the upper triangle
    double chi_square = 0.0;  // Pearson: sum N (p - p_hat)^2 / (p_hat (1 - p_hat))
    int dof = 0;              // n(n-1)/2 - (n-1)
};

ConsistencyReport consistency_check(const PairwiseMatrix& m, const ScaleValues& s);

// Pools both presentation orders. Labels default to the sorted set of widths
// seen in the records; pairs without trials are left missing.
PairwiseMatrix tally_matrix(std::span<const TrialRecord> records);
PairwiseMatrix tally_matrix(std::span<const TrialRecord> records, std::vector<int> labels);

// label,<l1>,<l2>,... with an empty diagonal.
std::string write_matrix_csv(const PairwiseMatrix& m);
PairwiseMatrix read_matrix_csv(std::string_view text, int n_per_pair = 40);

std::string write_scales_csv(const ScaleValues& s);

// Human-readable table using display rounding.
std::string format_matrix(const PairwiseMatrix& m);

}  // namespace svam
