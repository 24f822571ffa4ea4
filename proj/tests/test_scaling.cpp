#include "support.hpp"

#include "reference/inv_norm_points.hpp"
#include "svam/errors.hpp"
#include "svam/harness.hpp"
#include "svam/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace svam;
using svam::test::forall;
using svam::test::uniform_int;
using svam::test::uniform_real;

namespace {

PairwiseMatrix table2() { return read_matrix_csv(svam::test::slurp(SVAM_DATA_DIR "/table2.csv")); }

// p[i][j] = Phi(S_j - S_i): column j judged finer in proportion to how far
// its scale exceeds the row's.
PairwiseMatrix induced(const std::vector<int>& labels, const std::vector<double>& s, int n_per_pair = 40) {
    const auto n = labels.size();
    std::vector<double> p(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) p[i * n + j] = i == j ? 0.0 : norm_cdf(s[j] - s[i]);
    return PairwiseMatrix(labels, p, n_per_pair);
}

std::vector<int> iota_labels(std::size_t n) {
    std::vector<int> l(n);
    std::iota(l.begin(), l.end(), 1);
    return l;
}

std::vector<double> anchored(std::vector<double> s) {
    const double lo = *std::min_element(s.begin(), s.end());
    for (auto& v : s) v -= lo;
    return s;
}

TrialRecord trial(int key, int first, int second, Response r) {
    return TrialRecord{1, 1, key, first, second, r, std::nullopt};
}

}  // namespace

TEST_CASE("inv_norm_cdf: reference points") {
    CHECK(inv_norm_cdf(0.5) == 0.0);
    const std::pair<double, double> pts[] = {{0.13, -1.126391129038800589},
                                             {0.15, -1.036433389493789580},
                                             {0.58, 0.2018934791418508510},
                                             {0.83, 0.9541652531461944092},
                                             {0.975, 1.959963984540054236}};
    for (auto [p, z] : pts) {
        CAPTURE(p);
        CHECK(std::abs(inv_norm_cdf(p) - z) <= 1e-8);
    }
    for (auto [p, z] : svam::reference::kInvNormPoints) {
        CAPTURE(p);
        CHECK(std::abs(inv_norm_cdf(p) - z) <= 1e-8);
    }
}

TEST_CASE("inv_norm_cdf: domain and composition with norm_cdf") {
    for (double p : {0.0, 1.0, -0.1, 1.5, std::nan("")}) CHECK_THROWS_AS(inv_norm_cdf(p), std::domain_error);
    forall(41, 5000, [](auto& rng, int i) {
        const double p = i % 2 ? uniform_real(rng, 1e-6, 1 - 1e-6) : std::pow(10.0, uniform_real(rng, -6, -0.3));
        REQUIRE(std::abs(norm_cdf(inv_norm_cdf(p)) - p) <= 1e-7);
        const double z = uniform_real(rng, -4.7, 4.7);
        REQUIRE(std::abs(inv_norm_cdf(norm_cdf(z)) - z) <= 1e-7);
    });
    CHECK(norm_cdf(0) == 0.5);
    CHECK(norm_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-14));
}

TEST_CASE("display rounding of tallied counts") {
    CHECK(display_proportion(7, 40) == 0.18);
    CHECK(display_proportion(23, 40) == 0.58);
    CHECK(display_proportion(40, 40) == 1.0);
    CHECK(display_proportion(0, 40) == 0.0);
    CHECK(display_proportion(1, 8) == 0.13);
    CHECK(round_2dp(0.125) == 0.13);
    CHECK(round_2dp(-0.125) == -0.13);
    CHECK_THROWS_AS(display_proportion(41, 40), std::invalid_argument);
}

TEST_CASE("tally_matrix: lab counts 7/40 and 23/40") {
    std::vector<TrialRecord> recs;
    int key = 1;
    for (int i = 0; i < 40; ++i) {
        // Alternate presentation order; 7 of 40 choose the 32 px texture.
        const bool chose32 = i < 7;
        if (i % 2)
            recs.push_back(trial(key++, 16, 32, chose32 ? Response::Second : Response::First));
        else
            recs.push_back(trial(key++, 32, 16, chose32 ? Response::First : Response::Second));
    }
    for (int i = 0; i < 40; ++i) recs.push_back(trial(key++, 1, 2, i < 23 ? Response::Second : Response::First));
    const auto m16 = tally_matrix(std::span(recs).first(40));
    REQUIRE(m16.labels() == std::vector<int>{16, 32});
    CHECK(m16.p(0, 1) == 0.175);
    CHECK(m16.display_value(0, 1) == 0.18);
    CHECK(m16.p(1, 0) == 0.825);
    CHECK(m16.chosen(0, 1) == 7);
    CHECK(m16.total(0, 1) == 40);
    const auto m12 = tally_matrix(std::span(recs).last(40));
    CHECK(m12.p(0, 1) == 0.575);
    CHECK(m12.display_value(0, 1) == 0.58);
}

TEST_CASE("tally_matrix: unanimous pair, missing pairs, label checks") {
    std::vector<TrialRecord> recs;
    for (int i = 0; i < 8; ++i) recs.push_back(trial(i + 1, 4, 8, Response::First));
    const auto m = tally_matrix(recs, {4, 8, 16});
    CHECK(m.p(1, 0) == 1.0);
    CHECK(m.p(0, 1) == 0.0);
    CHECK(m.missing(0, 2));
    CHECK_FALSE(m.complete());
    CHECK_THROWS_AS(thurstone_case_v(m), std::invalid_argument);
    CHECK_THROWS_AS(tally_matrix(recs, {4, 16}), std::invalid_argument);
    const auto two = tally_matrix(recs);
    CHECK(two.complete());
    const auto s = thurstone_case_v(two);
    // Clamped to 1 - 1/16 rather than infinite.
    CHECK(s.at(4) == doctest::Approx(inv_norm_cdf(1 - 1.0 / 16) * 2));
}

TEST_CASE("tally_matrix: complementarity is exact") {
    forall(42, 100, [](auto& rng, int) {
        const std::vector<int> labels{1, 2, 4, 8, 16, 32};
        std::vector<TrialRecord> recs;
        const int n = uniform_int(rng, 1, 300);
        for (int k = 0; k < n; ++k) {
            const int a = uniform_int(rng, 0, 5);
            int b = uniform_int(rng, 0, 4);
            if (b >= a) ++b;
            recs.push_back(trial(k + 1, labels[a], labels[b], uniform_int(rng, 0, 1) ? Response::First : Response::Second));
        }
        const auto m = tally_matrix(recs, labels);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j)
                if (i != j && !m.missing(i, j)) REQUIRE(m.p(i, j) + m.p(j, i) == 1.0);
    });
}

TEST_CASE("thurstone_case_v: lab matrix") {
    const auto s = thurstone_case_v(table2());
    CHECK(s.labels == std::vector<int>{1, 2, 4, 8, 16, 32});
    const double expected[] = {1.2883115293328584, 1.382874262022947, 1.3833892472205345,
                               1.2440401741958995, 0.9116152379630894, 0.0};
    for (std::size_t i = 0; i < 6; ++i) {
        CAPTURE(s.labels[i]);
        CHECK(s.values[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
    CHECK(s.at(32) == 0.0);
    CHECK(s.at(4) - s.at(8) == doctest::Approx(0.15).epsilon(0.05 / 0.15));
    CHECK(s.at(8) - s.at(16) == doctest::Approx(0.32).epsilon(0.05 / 0.32));
    CHECK(s.at(16) - s.at(32) == doctest::Approx(0.92).epsilon(0.05 / 0.92));
    CHECK(s.at(4) >= s.at(2));
    CHECK(s.at(2) > s.at(1));
    CHECK(s.at(1) > s.at(8));
    CHECK(s.warnings.empty());
}

TEST_CASE("thurstone_case_v: small cases") {
    const auto s2 = thurstone_case_v(PairwiseMatrix({1, 2}, {0, 0.5, 0.5, 0}));
    CHECK(s2.values == std::vector<double>{0.0, 0.0});
    const auto m3 = induced({1, 2, 3}, {0, 0.5, 1.0});
    const auto s3 = thurstone_case_v(m3, CaseVMean::AllCells);
    CHECK(std::abs(s3.values[0]) <= 1e-9);
    CHECK(std::abs(s3.values[1] - 0.5) <= 1e-9);
    CHECK(std::abs(s3.values[2] - 1.0) <= 1e-9);
    // Off-diagonal means stretch the same scale by n / (n - 1).
    const auto off = thurstone_case_v(m3);
    CHECK(std::abs(off.values[1] - 0.75) <= 1e-9);
    CHECK(std::abs(off.values[2] - 1.5) <= 1e-9);
    CHECK_THROWS_AS(thurstone_case_v(PairwiseMatrix({1}, {0})), std::invalid_argument);
}

TEST_CASE("thurstone_case_v: complementarity violations become warnings") {
    const auto s = thurstone_case_v(PairwiseMatrix({1, 2}, {0, 0.7, 0.5, 0}));
    CHECK(s.warnings.size() == 1);
    const auto ok = thurstone_case_v(PairwiseMatrix({1, 2}, {0, 0.58, 0.43, 0}));
    CHECK(ok.warnings.empty());
}

TEST_CASE("thurstone_case_v: shift recovery and anchoring") {
    forall(43, 300, [](auto& rng, int) {
        const auto n = static_cast<std::size_t>(uniform_int(rng, 2, 8));
        std::vector<double> s(n);
        for (auto& v : s) v = uniform_real(rng, -1.2, 1.2);
        const auto labels = iota_labels(n);
        const auto m = induced(labels, s, 1000000);
        const auto got = thurstone_case_v(m, CaseVMean::AllCells);
        const auto off = thurstone_case_v(m);
        const auto want = anchored(s);
        const double stretch = static_cast<double>(n) / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(std::abs(got.values[i] - want[i]) <= 1e-9);
            REQUIRE(std::abs(off.values[i] - stretch * want[i]) <= 1e-9);
        }
        REQUIRE(*std::min_element(got.values.begin(), got.values.end()) == 0.0);

        auto shifted = s;
        const double c = uniform_real(rng, -5, 5);
        for (auto& v : shifted) v += c;
        const auto again = thurstone_case_v(induced(labels, shifted, 1000000), CaseVMean::AllCells);
        for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(again.values[i] - got.values[i]) <= 1e-9);
    });
}

TEST_CASE("thurstone_case_v: raising a column never lowers its scale") {
    forall(44, 300, [](auto& rng, int) {
        const auto n = static_cast<std::size_t>(uniform_int(rng, 2, 7));
        std::vector<double> p(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                p[i * n + j] = uniform_real(rng, 0.0, 1.0);
                p[j * n + i] = 1.0 - p[i * n + j];
            }
        const auto labels = iota_labels(n);
        const auto base = thurstone_case_v(PairwiseMatrix(labels, p));
        const auto col = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(n) - 1));
        auto q = p;
        for (std::size_t i = 0; i < n; ++i)
            if (i != col) q[i * n + col] = std::min(1.0, q[i * n + col] + uniform_real(rng, 0.0, 0.3));
        const auto raised = thurstone_case_v(PairwiseMatrix(labels, q));
        // Compare raw column means: anchoring may move every value together.
        const double raw_base = base.values[col] - base.values[0];
        const double raw_raised = raised.values[col] - raised.values[0];
        if (col == 0) {
            for (std::size_t k = 1; k < n; ++k) REQUIRE(raised.values[k] - raised.values[0] <= base.values[k] - base.values[0] + 1e-12);
        } else {
            REQUIRE(raw_raised >= raw_base - 1e-12);
        }
    });
}

TEST_CASE("consistency_check: perfect fit, lab matrix, one perturbed cell") {
    const std::vector<double> truth{0, 0.3, 0.45, 0.9, 1.1, 1.6};
    const auto labels = iota_labels(6);
    const auto exact = induced(labels, truth);
    const auto fit = consistency_check(exact, thurstone_case_v(exact, CaseVMean::AllCells));
    CHECK(fit.mad == doctest::Approx(0).scale(1));
    CHECK(fit.chi_square == doctest::Approx(0).scale(1));
    CHECK(fit.dof == 10);

    const auto t2 = table2();
    const auto lab = consistency_check(t2, thurstone_case_v(t2));
    CHECK(lab.mad <= 0.10);
    CHECK(lab.mad == doctest::Approx(0.035449811612757474).epsilon(1e-12));
    CHECK(lab.chi_square == doctest::Approx(10.273655031517018).epsilon(1e-12));

    std::vector<double> p(36);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) p[i * 6 + j] = i == j ? 0.0 : exact.p(i, j);
    p[0 * 6 + 1] += 0.2;
    const PairwiseMatrix bumped(labels, p);
    const auto r = consistency_check(bumped, thurstone_case_v(bumped, CaseVMean::AllCells));
    CHECK(r.mad == doctest::Approx(0.2 / 15).epsilon(0.1));

    ScaleValues wrong{{1, 2, 3, 4, 5, 7}, std::vector<double>(6, 0.0), {}};
    CHECK_THROWS_AS(consistency_check(exact, wrong), std::invalid_argument);
}

TEST_CASE("matrix csv: bundled fixture and round trip") {
    const auto m = table2();
    CHECK(m.size() == 6);
    CHECK(m.p(0, 1) == 0.58);
    CHECK(m.p(5, 4) == 0.83);
    CHECK(m.complementarity_error() <= kComplementaritySlack + 1e-12);
    const auto back = read_matrix_csv(write_matrix_csv(m));
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            if (i != j) CHECK(back.p(i, j) == m.p(i, j));
    CHECK_THROWS_AS(read_matrix_csv("row,1,2\n1,,0.5\n2,0.5,\n"), ParseError);
    CHECK_THROWS_AS(read_matrix_csv("label,1,2\n1,0.1,0.5\n2,0.5,\n"), ParseError);
    CHECK_THROWS_AS(read_matrix_csv("label,1,2\n1,,1.5\n2,0.5,\n"), ParseError);
    CHECK_THROWS_AS(read_matrix_csv("label,1,2\n1,,0.5\n"), ParseError);
    CHECK(write_scales_csv(ScaleValues{{1, 2}, {0.5, 0}, {}}) == "label,scale\n1,0.5\n2,0\n");
}
