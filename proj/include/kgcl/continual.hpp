#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>
#include <kgcl/augment.hpp>
#include <kgcl/common.hpp>
#include <kgcl/data.hpp>
#include <kgcl/eval.hpp>
#include <kgcl/learner.hpp>
#include <kgcl/memory.hpp>

namespace kgcl::continual {

enum class ApproachName { NF, RD, SR, CS, KR_rnd, KR_sem };

enum class ReplayAugmentation { none, random, semantic };

struct Approach {
    ApproachName name = ApproachName::NF;
    std::optional<memory::SelectionStrategy> buffer_strategy;
    ReplayAugmentation replay_augmentation = ReplayAugmentation::none;

    bool has_buffer() const { return buffer_strategy.has_value(); }
};

inline Approach make_approach(ApproachName name) {
    switch (name) {
        case ApproachName::NF: return {name, std::nullopt, ReplayAugmentation::none};
        case ApproachName::RD:
            return {name, memory::SelectionStrategy::random, ReplayAugmentation::none};
        case ApproachName::SR:
            return {name, memory::SelectionStrategy::stratified, ReplayAugmentation::none};
        case ApproachName::CS:
            return {name, memory::SelectionStrategy::cluster, ReplayAugmentation::none};
        case ApproachName::KR_rnd:
            return {name, memory::SelectionStrategy::knowledge, ReplayAugmentation::random};
        case ApproachName::KR_sem:
            return {name, memory::SelectionStrategy::knowledge, ReplayAugmentation::semantic};
    }
    throw ConfigError("unknown approach");
}

inline const char* approach_name(ApproachName name) {
    switch (name) {
        case ApproachName::NF: return "NF";
        case ApproachName::RD: return "RD";
        case ApproachName::SR: return "SR";
        case ApproachName::CS: return "CS";
        case ApproachName::KR_rnd: return "KR_rnd";
        case ApproachName::KR_sem: return "KR_sem";
    }
    return "?";
}

inline ApproachName approach_from_name(const std::string& name) {
    if (name == "NF") return ApproachName::NF;
    if (name == "RD") return ApproachName::RD;
    if (name == "SR") return ApproachName::SR;
    if (name == "CS") return ApproachName::CS;
    if (name == "KR_rnd") return ApproachName::KR_rnd;
    if (name == "KR_sem") return ApproachName::KR_sem;
    throw ConfigError("unknown approach name: " + name);
}

struct RunConfig {
    learner::TrainConfig train;
    memory::BufferConfig buffer;
    augment::AugmentConfig aug;  // strategy field is overridden per approach
    bool pre_selection_augmentation = true;
    bool pre_learning_augmentation = true;
};

struct RunState {
    learner::ClassifierModel model;
    std::optional<memory::MemoryBuffer> buffer;
    std::optional<size_t> stage;  // last trained task
    eval::EvalMatrix history;
    std::vector<learner::TrainReport> reports;

    explicit RunState(std::shared_ptr<const encoder::Encoder> enc) : model(std::move(enc)) {}
};

namespace detail {

inline augment::AugmentConfig replay_aug_config(const RunConfig& config, const Approach& approach,
                                                uint64_t seed) {
    augment::AugmentConfig aug = config.aug;
    aug.strategy = approach.replay_augmentation == ReplayAugmentation::semantic
                       ? augment::Strategy::semantic
                       : augment::Strategy::random;
    aug.seed = seed;
    return aug;
}

}  // namespace detail

// The replay generator g: buffer contents for the plain replay baselines,
// buffer contents plus re-augmented copies for the KR approaches, empty for NF.
inline std::vector<LabeledInstance> build_replay_set(const memory::MemoryBuffer* buffer,
                                                     const kb::KnowledgeGraph& graph,
                                                     const mention::MentionTrie& trie,
                                                     const Approach& approach,
                                                     const RunConfig& config, uint64_t seed) {
    if (!approach.has_buffer() || !buffer) return {};
    std::vector<LabeledInstance> contents = buffer->contents();
    if (approach.replay_augmentation == ReplayAugmentation::none ||
        !config.pre_learning_augmentation) {
        return contents;
    }
    return augment::augment_dataset(contents, graph, trie,
                                    detail::replay_aug_config(config, approach, seed));
}

// One step of the task sequence: extend the head, build the replay set, train
// jointly, update the buffer, evaluate over all observed test sets. Failures
// leave the input state untouched; the returned state is a new value.
inline RunState observe_task(const RunState& state, const data::TaskBundle& task,
                             const std::vector<data::TaskBundle>& observed_tasks,
                             const Approach& approach, const RunConfig& config,
                             const kb::KnowledgeGraph& graph, const mention::MentionTrie& trie,
                             uint64_t run_seed) {
    RunState next = state;
    size_t stage = next.stage ? *next.stage + 1 : 0;

    std::vector<std::pair<std::string, std::string>> new_classes;
    for (const std::string& cls : task.classes) new_classes.emplace_back(task.name, cls);
    next.model.extend_classes(new_classes);

    uint64_t stage_seed = mix64(run_seed, stage);
    std::vector<LabeledInstance> replay;
    if (stage > 0) {
        replay = build_replay_set(next.buffer ? &*next.buffer : nullptr, graph, trie, approach,
                                  config, mix64(stage_seed, 0x7265706cull));
    }

    learner::TrainConfig train_config = config.train;
    train_config.seed = mix64(stage_seed, config.train.seed);
    auto [model, report] =
        learner::train_task(next.model, task.train, replay, task.valid, train_config);
    next.model = std::move(model);
    next.reports.push_back(std::move(report));

    if (approach.has_buffer()) {
        if (!next.buffer) {
            memory::BufferConfig buffer_config = config.buffer;
            buffer_config.strategy = *approach.buffer_strategy;
            buffer_config.seed = mix64(run_seed, config.buffer.seed);
            next.buffer.emplace(buffer_config);
        }
        memory::Embedder embedder = [&model = next.model](const std::string& text) {
            return model.embed(text);
        };
        augment::AugmentConfig pre_selection =
            detail::replay_aug_config(config, approach, mix64(stage_seed, 0x73656c65ull));
        bool augment_pool = approach.replay_augmentation != ReplayAugmentation::none &&
                            config.pre_selection_augmentation;
        next.buffer->update(task.name, task.train, embedder, augment_pool ? &graph : nullptr,
                            augment_pool ? &trie : nullptr,
                            augment_pool ? &pre_selection : nullptr);
    }

    std::vector<std::vector<LabeledInstance>> test_sets;
    for (const auto& observed : observed_tasks) test_sets.push_back(observed.test);
    test_sets.push_back(task.test);
    next.history.rows.push_back(eval::evaluate_stage(next.model, test_sets));
    next.stage = stage;
    return next;
}

struct SeedResult {
    uint64_t seed = 0;
    eval::EvalMatrix matrix;
    double final_accuracy = 0.0;
    double final_auc = 0.0;
    double forgetting_accuracy = 0.0;  // aggregate F_A (0 for single-task streams)
    double forgetting_auc = 0.0;
    std::optional<std::string> failure;
};

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;
};

struct ExperimentReport {
    Approach approach;
    std::vector<SeedResult> per_seed;
    Aggregate accuracy, auc, forgetting_accuracy, forgetting_auc;
};

namespace detail {

inline Aggregate aggregate(const std::vector<double>& values) {
    Aggregate out;
    if (values.empty()) return out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    return out;
}

}  // namespace detail

// Each seed is an isolated deterministic run over the whole task sequence.
// Per-seed failures are annotated in the report instead of aborting the sweep.
using StageObserver = std::function<void(uint64_t seed, size_t stage, const RunState&)>;

inline ExperimentReport run_experiment(const data::TaskStream& stream, const Approach& approach,
                                       const RunConfig& config, const kb::KnowledgeGraph& graph,
                                       const mention::MentionTrie& trie,
                                       std::shared_ptr<const encoder::Encoder> enc,
                                       const std::vector<uint64_t>& seeds,
                                       std::vector<RunState>* final_states = nullptr,
                                       const StageObserver& on_stage = nullptr) {
    if (seeds.empty()) throw ConfigError("run_experiment requires at least one seed");
    ExperimentReport report;
    report.approach = approach;
    std::vector<double> acc, auc, f_acc, f_auc;
    for (uint64_t seed : seeds) {
        SeedResult result;
        result.seed = seed;
        try {
            RunState state(enc);
            std::vector<data::TaskBundle> observed;
            for (const auto& task : stream.tasks) {
                state = observe_task(state, task, observed, approach, config, graph, trie, seed);
                observed.push_back(task);
                if (on_stage) on_stage(seed, *state.stage, state);
            }
            result.matrix = state.history;
            const auto& last = state.history.rows.back();
            result.final_accuracy = last.average_accuracy;
            result.final_auc = last.average_auc;
            auto fa = eval::forgetting(state.history, eval::Metric::accuracy);
            auto fauc = eval::forgetting(state.history, eval::Metric::auc);
            result.forgetting_accuracy = fa.aggregate.value_or(0.0);
            result.forgetting_auc = fauc.aggregate.value_or(0.0);
            acc.push_back(result.final_accuracy);
            auc.push_back(result.final_auc);
            f_acc.push_back(result.forgetting_accuracy);
            f_auc.push_back(result.forgetting_auc);
            if (final_states) final_states->push_back(state);
        } catch (const std::exception& e) {
            result.failure = e.what();
        }
        report.per_seed.push_back(std::move(result));
    }
    report.accuracy = detail::aggregate(acc);
    report.auc = detail::aggregate(auc);
    report.forgetting_accuracy = detail::aggregate(f_acc);
    report.forgetting_auc = detail::aggregate(f_auc);
    return report;
}

inline nlohmann::json matrix_to_json(const eval::EvalMatrix& matrix) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : matrix.rows) {
        rows.push_back({{"accuracy", row.task_accuracy},
                        {"auc", row.task_auc},
                        {"average_accuracy", row.average_accuracy},
                        {"average_auc", row.average_auc}});
    }
    return rows;
}

inline nlohmann::json report_to_json(const ExperimentReport& report,
                                     const std::vector<uint64_t>& seeds) {
    nlohmann::json per_seed = nlohmann::json::array();
    for (const auto& r : report.per_seed) {
        nlohmann::json entry = {{"seed", r.seed}};
        if (r.failure) {
            entry["failure"] = *r.failure;
        } else {
            entry["eval_matrix"] = matrix_to_json(r.matrix);
            entry["final_metrics"] = {{"A", r.final_accuracy},
                                      {"AUC", r.final_auc},
                                      {"F_A", r.forgetting_accuracy},
                                      {"F_AUC", r.forgetting_auc}};
        }
        per_seed.push_back(std::move(entry));
    }
    return {{"approach", approach_name(report.approach.name)},
            {"seeds", seeds},
            {"per_seed", per_seed},
            {"aggregate",
             {{"A_mean", report.accuracy.mean},
              {"A_std", report.accuracy.stddev},
              {"AUC_mean", report.auc.mean},
              {"AUC_std", report.auc.stddev},
              {"F_A_mean", report.forgetting_accuracy.mean},
              {"F_A_std", report.forgetting_accuracy.stddev},
              {"F_AUC_mean", report.forgetting_auc.mean},
              {"F_AUC_std", report.forgetting_auc.stddev}}}};
}

}  // namespace kgcl::continual
