#include <doctest.h>

#include <sstream>

#include <kgcl/eval.hpp>

using namespace kgcl;

namespace {

// O(P*N) pairwise AUC oracle with half-credit for ties.
double pairwise_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
    double score = 0.0;
    for (double p : pos) {
        for (double n : neg) {
            if (p > n) score += 1.0;
            else if (p == n) score += 0.5;
        }
    }
    return score / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

}  // namespace

TEST_CASE("accuracy is the fraction of exact label matches") {
    CHECK(eval::accuracy({{"a", "a"}, {"b", "b"}, {"a", "b"}, {"c", "c"}}) == doctest::Approx(0.75));
    CHECK_THROWS_AS(eval::accuracy({}), eval::UndefinedMetricError);
}

TEST_CASE("rank AUC equals the pairwise oracle on random 200-instance sets") {
    Rng rng(4242);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> pos, neg;
        size_t np = 60 + rng.below(140), nn = 60 + rng.below(140);
        for (size_t i = 0; i < np; ++i) {
            // Quantized scores so ties actually occur.
            pos.push_back(0.4 + 0.05 * static_cast<double>(rng.below(12)));
        }
        for (size_t i = 0; i < nn; ++i) {
            neg.push_back(0.05 * static_cast<double>(rng.below(12)));
        }
        double fast = eval::detail::binary_auc(pos, neg);
        double oracle = pairwise_auc(pos, neg);
        CHECK(std::abs(fast - oracle) <= 1e-9);
    }
}

TEST_CASE("AUC handles perfect, inverted, and all-tied separations") {
    CHECK(eval::detail::binary_auc({0.9, 0.8}, {0.1, 0.2}) == doctest::Approx(1.0));
    CHECK(eval::detail::binary_auc({0.1, 0.2}, {0.9, 0.8}) == doctest::Approx(0.0));
    CHECK(eval::detail::binary_auc({0.5, 0.5}, {0.5}) == doctest::Approx(0.5));
}

TEST_CASE("auc_task averages one-vs-rest classes and skips undefined ones") {
    // Three instances over two classes; scores[i] = per-class scores.
    std::vector<std::vector<double>> scores = {{0.9, 0.1}, {0.2, 0.8}, {0.7, 0.3}};
    std::vector<size_t> labels = {0, 1, 0};
    double auc = eval::auc_task(scores, labels, {0, 1});
    // class0: pos {0.9, 0.7} vs neg {0.2} -> 1.0; class1: {0.8} vs {0.1, 0.3} -> 1.0
    CHECK(auc == doctest::Approx(1.0));

    // A class with no negatives is skipped; with no computable class it throws.
    std::vector<std::vector<double>> solo = {{1.0}, {0.5}};
    CHECK_THROWS_AS(eval::auc_task(solo, {0, 0}, {0}), eval::UndefinedMetricError);
}

TEST_CASE("forgetting unit values") {
    eval::EvalMatrix single;
    single.rows.push_back({{0.9}, {1.0}, 0.9, 1.0});
    auto report = eval::forgetting(single, eval::Metric::accuracy);
    REQUIRE(report.per_task.size() == 1);
    CHECK(report.per_task[0] == doctest::Approx(0.0));
    CHECK_FALSE(report.aggregate.has_value());  // needs at least two stages

    eval::EvalMatrix matrix;
    matrix.rows.push_back({{0.9}, {0.0}, 0.9, 0.0});
    matrix.rows.push_back({{0.7, 0.8}, {0.0, 0.0}, 0.75, 0.0});
    auto two = eval::forgetting(matrix, eval::Metric::accuracy);
    REQUIRE(two.per_task.size() == 2);
    CHECK(two.per_task[0] == doctest::Approx(0.2));  // max 0.9 - final 0.7
    REQUIRE(two.aggregate.has_value());
    CHECK(*two.aggregate == doctest::Approx(0.2));  // final task excluded
}

TEST_CASE("forgetting is non-negative when the max precedes the final stage") {
    eval::EvalMatrix matrix;
    matrix.rows.push_back({{0.5}, {0.0}, 0.5, 0.0});
    matrix.rows.push_back({{0.9, 0.8}, {0.0, 0.0}, 0.85, 0.0});  // improved, not forgotten
    auto report = eval::forgetting(matrix, eval::Metric::accuracy);
    CHECK(*report.aggregate == doctest::Approx(0.0));
}

TEST_CASE("matrix CSV export is lower-triangular with stage labels") {
    eval::EvalMatrix matrix;
    matrix.rows.push_back({{0.5}, {0.6}, 0.5, 0.6});
    matrix.rows.push_back({{0.4, 0.9}, {0.5, 0.95}, 0.65, 0.725});
    std::ostringstream out;
    eval::export_matrix_csv(matrix, eval::Metric::accuracy, out);
    std::istringstream lines(out.str());
    std::string header, row0, row1;
    std::getline(lines, header);
    std::getline(lines, row0);
    std::getline(lines, row1);
    CHECK(header == "stage,task0,task1");
    CHECK(row0 == "0,0.5,");
    CHECK(row1 == "1,0.4,0.9");
}
