#include "svam/scaling.hpp"

#include "csv.hpp"
#include "svam/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

namespace svam {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

namespace {

// Acklam's rational approximation for the lower half (p <= 0.5), polished
// with one Halley step against erfc. Relative error of the starting point is
// ~1e-9; after refinement the result is at double precision.
double inv_norm_lower(double p) {
    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                             6.680131188771972e+01, -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                             3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double e = norm_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace

double inv_norm_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inv_norm_cdf: p must be in (0, 1)");
    if (p == 0.5) return 0.0;
    // 1 - p is exact for p >= 0.5, so the upper half reuses the lower branch.
    return p < 0.5 ? inv_norm_lower(p) : -inv_norm_lower(1.0 - p);
}

double round_2dp(double value) {
    const double scaled = std::abs(value) * 100.0;
    const double r = std::floor(scaled + 0.5 + 1e-9) / 100.0;
    return std::copysign(r, value);
}

double display_proportion(int chosen, int total) {
    if (total <= 0 || chosen < 0 || chosen > total) throw std::invalid_argument("display_proportion: bad counts");
    const long hundredths = (200L * chosen + total) / (2L * total);
    return static_cast<double>(hundredths) / 100.0;
}

PairwiseMatrix::PairwiseMatrix(std::vector<int> labels, std::vector<double> p, int n_per_pair)
    : labels_(std::move(labels)), p_(std::move(p)), n_per_pair_(n_per_pair) {
    const auto n = labels_.size();
    if (p_.size() != n * n) throw std::invalid_argument("pairwise matrix: expected n*n entries");
    if (n_per_pair_ < 1) throw std::invalid_argument("pairwise matrix: n_per_pair must be >= 1");
    if (std::set<int>(labels_.begin(), labels_.end()).size() != n)
        throw std::invalid_argument("pairwise matrix: duplicate labels");
    for (std::size_t i = 0; i < n; ++i) {
        p_[i * n + i] = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t j = 0; j < n; ++j) {
            const double v = p_[i * n + j];
            if (i != j && !std::isnan(v) && (v < 0.0 || v > 1.0))
                throw std::invalid_argument("pairwise matrix: proportions must lie in [0, 1]");
        }
    }
}

PairwiseMatrix PairwiseMatrix::from_counts(std::vector<int> labels, std::vector<int> chosen, std::vector<int> totals) {
    const auto n = labels.size();
    if (chosen.size() != n * n || totals.size() != n * n)
        throw std::invalid_argument("pairwise matrix: expected n*n counts");
    std::vector<double> p(n * n, std::numeric_limits<double>::quiet_NaN());
    int n_per_pair = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto k = i * n + j;
            if (chosen[k] < 0 || chosen[k] > totals[k]) throw std::invalid_argument("pairwise matrix: bad counts");
            if (totals[k] > 0) {
                p[k] = static_cast<double>(chosen[k]) / totals[k];
                n_per_pair = std::min(n_per_pair, totals[k]);
            }
        }
    if (n_per_pair == std::numeric_limits<int>::max()) n_per_pair = 1;
    PairwiseMatrix m(std::move(labels), std::move(p), n_per_pair);
    m.chosen_ = std::move(chosen);
    m.totals_ = std::move(totals);
    return m;
}

bool PairwiseMatrix::missing(std::size_t row, std::size_t col) const { return row != col && std::isnan(p(row, col)); }

bool PairwiseMatrix::complete() const {
    for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = 0; j < size(); ++j)
            if (missing(i, j)) return false;
    return true;
}

double PairwiseMatrix::complementarity_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = i + 1; j < size(); ++j)
            if (!missing(i, j) && !missing(j, i)) worst = std::max(worst, std::abs(p(i, j) + p(j, i) - 1.0));
    return worst;
}

double PairwiseMatrix::display_value(std::size_t row, std::size_t col) const {
    if (has_counts() && total(row, col) > 0) return display_proportion(chosen(row, col), total(row, col));
    return round_2dp(p(row, col));
}

double ScaleValues::at(int label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return values[i];
    throw std::out_of_range("scale values: unknown label " + std::to_string(label));
}

ScaleValues thurstone_case_v(const PairwiseMatrix& m, CaseVMean mean) {
    const auto n = m.size();
    if (n < 2) throw std::invalid_argument("thurstone_case_v: need at least two items");
    if (!m.complete()) throw std::invalid_argument("thurstone_case_v: matrix has missing cells");

    const double lo = 1.0 / (2.0 * m.n_per_pair());
    const double hi = 1.0 - lo;
    ScaleValues out{m.labels(), std::vector<double>(n, 0.0), {}};
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == j) continue;
            sum += inv_norm_cdf(std::clamp(m.p(i, j), lo, hi));
        }
        // The diagonal contributes z = 0 to the all-cells mean.
        out.values[j] = sum / static_cast<double>(mean == CaseVMean::OffDiagonal ? n - 1 : n);
    }
    const double min = *std::min_element(out.values.begin(), out.values.end());
    for (auto& v : out.values) v -= min;

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double err = std::abs(m.p(i, j) + m.p(j, i) - 1.0);
            if (err > kComplementaritySlack + 1e-12)
                out.warnings.push_back("complementarity violated for (" + std::to_string(m.labels()[i]) + ", " +
                                       std::to_string(m.labels()[j]) + "): p + p' - 1 = " +
                                       csv::format_double(m.p(i, j) + m.p(j, i) - 1.0));
        }
    return out;
}

ConsistencyReport consistency_check(const PairwiseMatrix& m, const ScaleValues& s) {
    if (s.labels != m.labels() || s.values.size() != m.size())
        throw std::invalid_argument("consistency_check: scale labels do not match the matrix");
    const auto n = m.size();
    ConsistencyReport r;
    int cells = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (m.missing(i, j)) continue;
            const double fitted = norm_cdf(s.values[j] - s.values[i]);
            const double resid = m.p(i, j) - fitted;
            r.mad += std::abs(resid);
            r.chi_square += m.n_per_pair() * resid * resid / (fitted * (1.0 - fitted));
            ++cells;
        }
    if (cells > 0) r.mad /= cells;
    r.dof = static_cast<int>(n * (n - 1) / 2 - (n - 1));
    return r;
}

PairwiseMatrix tally_matrix(std::span<const TrialRecord> records) {
    std::set<int> seen;
    for (const auto& r : records) {
        seen.insert(r.first_px);
        seen.insert(r.second_px);
    }
    return tally_matrix(records, std::vector<int>(seen.begin(), seen.end()));
}

PairwiseMatrix tally_matrix(std::span<const TrialRecord> records, std::vector<int> labels) {
    const auto n = labels.size();
    auto index_of = [&](int w) {
        for (std::size_t i = 0; i < n; ++i)
            if (labels[i] == w) return i;
        throw std::invalid_argument("tally_matrix: texture " + std::to_string(w) + " not in the label set");
    };
    std::vector<int> chosen(n * n, 0), totals(n * n, 0);
    for (const auto& r : records) {
        const auto a = index_of(r.first_px);
        const auto b = index_of(r.second_px);
        if (a == b) throw std::invalid_argument("tally_matrix: trial compares a texture with itself");
        ++totals[a * n + b];
        ++totals[b * n + a];
        const auto winner = index_of(r.chosen_px());
        const auto loser = winner == a ? b : a;
        ++chosen[loser * n + winner];  // row = other texture, col = the one judged finer
    }
    return PairwiseMatrix::from_counts(std::move(labels), std::move(chosen), std::move(totals));
}

std::string write_matrix_csv(const PairwiseMatrix& m) {
    std::string out = "label";
    for (int l : m.labels()) out += "," + std::to_string(l);
    out += "\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
        out += std::to_string(m.labels()[i]);
        for (std::size_t j = 0; j < m.size(); ++j) {
            out += ",";
            if (i != j && !m.missing(i, j)) out += csv::format_double(m.p(i, j));
        }
        out += "\n";
    }
    return out;
}

PairwiseMatrix read_matrix_csv(std::string_view text, int n_per_pair) {
    csv::Reader reader(text);
    std::string_view line;
    if (!reader.next(line)) throw ParseError("matrix csv: empty input", 1);
    const auto head = csv::split(line);
    if (head.empty() || head[0] != "label")
        throw ParseError("matrix csv: header must start with 'label' (line " + std::to_string(reader.line_number()) + ")",
                         reader.line_number());
    std::vector<int> labels;
    for (std::size_t i = 1; i < head.size(); ++i)
        labels.push_back(static_cast<int>(csv::parse_int(head[i], reader.line_number(), "label")));
    const auto n = labels.size();

    std::vector<double> p(n * n, std::numeric_limits<double>::quiet_NaN());
    std::size_t row = 0;
    while (reader.next(line)) {
        const auto ln = reader.line_number();
        const auto f = csv::split(line);
        if (row >= n) throw ParseError("matrix csv: too many rows at line " + std::to_string(ln), ln);
        if (f.size() != n + 1) throw ParseError("matrix csv: wrong field count at line " + std::to_string(ln), ln);
        if (csv::parse_int(f[0], ln, "row label") != labels[row])
            throw ParseError("matrix csv: row label does not match header order at line " + std::to_string(ln), ln);
        for (std::size_t j = 0; j < n; ++j) {
            if (f[j + 1].empty()) continue;
            if (j == row) throw ParseError("matrix csv: diagonal must be empty at line " + std::to_string(ln), ln);
            const double v = csv::parse_double(f[j + 1], ln, "proportion");
            if (v < 0.0 || v > 1.0) throw ParseError("matrix csv: proportion outside [0,1] at line " + std::to_string(ln), ln);
            p[row * n + j] = v;
        }
        ++row;
    }
    if (row != n) throw ParseError("matrix csv: expected " + std::to_string(n) + " rows", reader.line_number());
    return PairwiseMatrix(std::move(labels), std::move(p), n_per_pair);
}

std::string write_scales_csv(const ScaleValues& s) {
    std::string out = "label,scale\n";
    for (std::size_t i = 0; i < s.labels.size(); ++i)
        out += std::to_string(s.labels[i]) + "," + csv::format_double(s.values[i]) + "\n";
    return out;
}

std::string format_matrix(const PairwiseMatrix& m) {
    std::string out;
    char buf[32];
    out += "  row\\col";
    for (int l : m.labels()) {
        std::snprintf(buf, sizeof buf, "%7d", l);
        out += buf;
    }
    out += "\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%9d", m.labels()[i]);
        out += buf;
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (i == j)
                out += "      -";
            else if (m.missing(i, j))
                out += "     NA";
            else {
                std::snprintf(buf, sizeof buf, "%7.2f", m.display_value(i, j));
                out += buf;
            }
        }
        out += "\n";
    }
    return out;
}

}  // namespace svam
