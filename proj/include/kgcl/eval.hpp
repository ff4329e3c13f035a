#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <kgcl/common.hpp>
#include <kgcl/instance.hpp>
#include <kgcl/learner.hpp>

namespace kgcl::eval {

class UndefinedMetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double accuracy(const std::vector<std::pair<std::string, std::string>>& predictions) {
    if (predictions.empty()) throw UndefinedMetricError("accuracy of an empty prediction list");
    size_t correct = 0;
    for (const auto& [predicted, truth] : predictions) {
        if (predicted == truth) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

namespace detail {

// Mann-Whitney one-vs-rest AUC from scores; ties credited 0.5 per pair.
inline double binary_auc(const std::vector<double>& positives,
                         const std::vector<double>& negatives) {
    std::vector<std::pair<double, int>> all;  // (score, is_positive)
    for (double s : positives) all.emplace_back(s, 1);
    for (double s : negatives) all.emplace_back(s, 0);
    std::sort(all.begin(), all.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double rank_sum = 0.0;
    size_t i = 0;
    while (i < all.size()) {
        size_t j = i;
        while (j < all.size() && all[j].first == all[i].first) ++j;
        double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (size_t k = i; k < j; ++k) {
            if (all[k].second) rank_sum += avg_rank;
        }
        i = j;
    }
    double p = static_cast<double>(positives.size());
    double n = static_cast<double>(negatives.size());
    return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

}  // namespace detail

// Class-wise one-vs-rest AUC within a task's test set, averaged over classes
// that have both a positive and a negative.
inline double auc_task(const std::vector<std::vector<double>>& scores,
                       const std::vector<size_t>& truth_cols,
                       const std::set<size_t>& task_class_cols) {
    double total = 0.0;
    size_t computed = 0;
    for (size_t c : task_class_cols) {
        std::vector<double> positives, negatives;
        for (size_t i = 0; i < scores.size(); ++i) {
            (truth_cols[i] == c ? positives : negatives).push_back(scores[i][c]);
        }
        if (positives.empty() || negatives.empty()) continue;
        total += detail::binary_auc(positives, negatives);
        ++computed;
    }
    if (computed == 0) throw UndefinedMetricError("no class has both positives and negatives");
    return total / static_cast<double>(computed);
}

struct StageRow {
    std::vector<double> task_accuracy;  // index = test task
    std::vector<double> task_auc;
    double average_accuracy = 0.0;
    double average_auc = 0.0;
};

// Lower-triangular grid: row t holds the metrics of test tasks 0..t measured
// after training stage t.
struct EvalMatrix {
    std::vector<StageRow> rows;

    size_t stage_count() const { return rows.size(); }
};

// Predictions use the full softmax over all observed classes; no task oracle.
inline StageRow evaluate_stage(const learner::ClassifierModel& model,
                               const std::vector<std::vector<LabeledInstance>>& test_sets) {
    StageRow row;
    for (const auto& test : test_sets) {
        std::vector<std::pair<std::string, std::string>> predictions;
        std::vector<std::vector<double>> scores;
        std::vector<size_t> truth_cols;
        std::set<size_t> class_cols;
        for (const auto& inst : test) {
            auto [col, probs] = model.predict(inst.text);
            predictions.emplace_back(model.registry().classes()[col].second, inst.label);
            scores.push_back(std::move(probs));
            size_t truth = model.registry().column(inst.label);
            truth_cols.push_back(truth);
            class_cols.insert(truth);
        }
        row.task_accuracy.push_back(accuracy(predictions));
        row.task_auc.push_back(auc_task(scores, truth_cols, class_cols));
    }
    double sum_a = 0.0, sum_auc = 0.0;
    for (double a : row.task_accuracy) sum_a += a;
    for (double a : row.task_auc) sum_auc += a;
    row.average_accuracy = sum_a / static_cast<double>(row.task_accuracy.size());
    row.average_auc = sum_auc / static_cast<double>(row.task_auc.size());
    return row;
}

struct ForgettingReport {
    std::vector<double> per_task;          // F_j for every test task j
    std::optional<double> aggregate;       // mean over j in 0..T-2; unset when T < 2
};

enum class Metric { accuracy, auc };

// F_j = max over stages t >= j of P[t][j], minus P[T][j].
inline ForgettingReport forgetting(const EvalMatrix& matrix, Metric metric) {
    if (matrix.rows.empty()) throw UndefinedMetricError("forgetting of an empty matrix");
    size_t final_stage = matrix.rows.size() - 1;
    auto cell = [&](size_t t, size_t j) {
        return metric == Metric::accuracy ? matrix.rows[t].task_accuracy[j]
                                          : matrix.rows[t].task_auc[j];
    };
    ForgettingReport report;
    for (size_t j = 0; j <= final_stage; ++j) {
        double peak = 0.0;
        for (size_t t = j; t <= final_stage; ++t) peak = std::max(peak, cell(t, j));
        report.per_task.push_back(peak - cell(final_stage, j));
    }
    if (final_stage >= 1) {
        double sum = 0.0;
        for (size_t j = 0; j + 1 <= final_stage; ++j) sum += report.per_task[j];
        report.aggregate = sum / static_cast<double>(final_stage);
    }
    return report;
}

// CSV export: rows = training stage, columns = test task.
inline void export_matrix_csv(const EvalMatrix& matrix, Metric metric, std::ostream& out) {
    size_t tasks = matrix.rows.empty() ? 0 : matrix.rows.back().task_accuracy.size();
    out << "stage";
    for (size_t j = 0; j < tasks; ++j) out << ",task" << j;
    out << '\n';
    for (size_t t = 0; t < matrix.rows.size(); ++t) {
        out << t;
        const auto& vals = metric == Metric::accuracy ? matrix.rows[t].task_accuracy
                                                      : matrix.rows[t].task_auc;
        for (size_t j = 0; j < tasks; ++j) {
            out << ',';
            if (j < vals.size()) out << vals[j];
        }
        out << '\n';
    }
}

}  // namespace kgcl::eval
