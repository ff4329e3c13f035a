#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>
#include <kgcl/augment.hpp>
#include <kgcl/common.hpp>
#include <kgcl/encoder.hpp>
#include <kgcl/instance.hpp>

namespace kgcl::memory {

class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SelectionStrategy { random, stratified, cluster, knowledge };

inline const char* strategy_name(SelectionStrategy s) {
    switch (s) {
        case SelectionStrategy::random: return "random";
        case SelectionStrategy::stratified: return "stratified";
        case SelectionStrategy::cluster: return "cluster";
        case SelectionStrategy::knowledge: return "knowledge";
    }
    return "?";
}

struct BufferConfig {
    size_t capacity = 500;  // M
    SelectionStrategy strategy = SelectionStrategy::random;
    uint64_t seed = 0;
};

// floor(M/t) per task, remainder to the earliest tasks.
inline std::vector<size_t> quota(size_t capacity, size_t task_count) {
    if (task_count == 0) throw ConfigError("quota requires task_count >= 1");
    size_t base = capacity / task_count;
    if (base == 0) {
        throw CapacityError("buffer capacity " + std::to_string(capacity) +
                            " exhausted by " + std::to_string(task_count) + " tasks");
    }
    size_t remainder = capacity % task_count;
    std::vector<size_t> out(task_count, base);
    for (size_t i = 0; i < remainder; ++i) ++out[i];
    return out;
}

inline std::vector<LabeledInstance> select_random(const std::vector<LabeledInstance>& pool,
                                                  size_t n, uint64_t seed) {
    Rng rng(mix64(seed, 0x72616e64ull));
    std::vector<LabeledInstance> out;
    for (size_t idx : rng.sample_indices(pool.size(), n)) out.push_back(pool[idx]);
    return out;
}

// Even split across classes (remainder in label order), uniform within class,
// deficits redistributed to classes with spare instances.
inline std::vector<LabeledInstance> select_stratified(const std::vector<LabeledInstance>& pool,
                                                      size_t n, uint64_t seed) {
    n = std::min(n, pool.size());
    std::map<std::string, std::vector<size_t>> by_label;
    for (size_t i = 0; i < pool.size(); ++i) by_label[pool[i].label].push_back(i);

    std::vector<std::string> labels;
    for (const auto& [label, idx] : by_label) labels.push_back(label);
    size_t k = labels.size();

    std::vector<size_t> target(k, n / k);
    for (size_t i = 0; i < n % k; ++i) ++target[i];

    // Redistribute deficits from short classes to classes with spares.
    std::vector<size_t> take(k);
    size_t assigned = 0;
    for (size_t i = 0; i < k; ++i) {
        take[i] = std::min(target[i], by_label[labels[i]].size());
        assigned += take[i];
    }
    while (assigned < n) {
        bool progressed = false;
        for (size_t i = 0; i < k && assigned < n; ++i) {
            if (take[i] < by_label[labels[i]].size()) {
                ++take[i];
                ++assigned;
                progressed = true;
            }
        }
        if (!progressed) break;
    }

    std::vector<size_t> chosen;
    Rng rng(mix64(seed, 0x73747261ull));
    for (size_t i = 0; i < k; ++i) {
        const auto& members = by_label[labels[i]];
        for (size_t j : rng.sample_indices(members.size(), take[i])) {
            chosen.push_back(members[j]);
        }
    }
    std::sort(chosen.begin(), chosen.end());
    std::vector<LabeledInstance> out;
    for (size_t idx : chosen) out.push_back(pool[idx]);
    return out;
}

namespace detail {

struct KMeansResult {
    std::vector<std::vector<double>> centroids;
    std::vector<size_t> assignment;  // point -> centroid
};

inline double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

// k-means with k-means++ seeding, Euclidean distance, max 100 iterations,
// tolerance 1e-4 on centroid shift.
inline KMeansResult kmeans(const std::vector<std::vector<double>>& points, size_t k, Rng& rng) {
    KMeansResult result;
    size_t dim = points.empty() ? 0 : points[0].size();

    // k-means++ seeding
    std::vector<size_t> seeds;
    seeds.push_back(static_cast<size_t>(rng.below(points.size())));
    std::vector<double> min_sq(points.size());
    while (seeds.size() < k) {
        double total = 0.0;
        for (size_t i = 0; i < points.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (size_t s : seeds) best = std::min(best, sq_distance(points[i], points[s]));
            min_sq[i] = best;
            total += best;
        }
        size_t pick = 0;
        if (total <= 0.0) {
            pick = static_cast<size_t>(rng.below(points.size()));
        } else {
            double r = rng.next_double() * total;
            double acc = 0.0;
            pick = points.size() - 1;
            for (size_t i = 0; i < points.size(); ++i) {
                acc += min_sq[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        }
        seeds.push_back(pick);
    }
    for (size_t s : seeds) result.centroids.push_back(points[s]);

    result.assignment.assign(points.size(), 0);
    for (size_t iter = 0; iter < 100; ++iter) {
        for (size_t i = 0; i < points.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            size_t best_c = 0;
            for (size_t c = 0; c < k; ++c) {
                double d = sq_distance(points[i], result.centroids[c]);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            result.assignment[i] = best_c;
        }
        std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
        std::vector<size_t> counts(k, 0);
        for (size_t i = 0; i < points.size(); ++i) {
            ++counts[result.assignment[i]];
            for (size_t d = 0; d < dim; ++d) next[result.assignment[i]][d] += points[i][d];
        }
        double shift = 0.0;
        for (size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                next[c] = result.centroids[c];  // empty cluster keeps its centroid
            } else {
                for (size_t d = 0; d < dim; ++d) next[c][d] /= static_cast<double>(counts[c]);
            }
            shift = std::max(shift, std::sqrt(sq_distance(next[c], result.centroids[c])));
        }
        result.centroids = std::move(next);
        if (shift <= 1e-4) break;
    }
    // Final assignment against the converged centroids.
    for (size_t i = 0; i < points.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        size_t best_c = 0;
        for (size_t c = 0; c < k; ++c) {
            double d = sq_distance(points[i], result.centroids[c]);
            if (d < best) {
                best = d;
                best_c = c;
            }
        }
        result.assignment[i] = best_c;
    }
    return result;
}

}  // namespace detail

using Embedder = std::function<std::vector<double>(const std::string&)>;

// k-means (k = min(n, |pool|)) over embeddings; per cluster the instance
// nearest its centroid (ties to the lowest pool index). Empty clusters are
// backfilled with the globally farthest unselected instance.
inline std::vector<LabeledInstance> select_cluster(const std::vector<LabeledInstance>& pool,
                                                   size_t n, const Embedder& embedder,
                                                   uint64_t seed) {
    if (pool.empty() || n == 0) return {};
    size_t k = std::min(n, pool.size());
    std::vector<std::vector<double>> points;
    points.reserve(pool.size());
    for (const auto& inst : pool) points.push_back(embedder(inst.text));

    Rng rng(mix64(seed, 0x636c7573ull));
    detail::KMeansResult km = detail::kmeans(points, k, rng);

    std::vector<bool> selected(pool.size(), false);
    std::vector<size_t> chosen;
    for (size_t c = 0; c < k; ++c) {
        double best = std::numeric_limits<double>::infinity();
        size_t best_i = pool.size();
        for (size_t i = 0; i < pool.size(); ++i) {
            if (km.assignment[i] != c || selected[i]) continue;
            double d = detail::sq_distance(points[i], km.centroids[c]);
            if (d < best) {
                best = d;
                best_i = i;
            }
        }
        if (best_i == pool.size()) continue;  // empty cluster, backfill below
        selected[best_i] = true;
        chosen.push_back(best_i);
    }
    while (chosen.size() < k) {
        double far = -1.0;
        size_t far_i = pool.size();
        for (size_t i = 0; i < pool.size(); ++i) {
            if (selected[i]) continue;
            double d = detail::sq_distance(points[i], km.centroids[km.assignment[i]]);
            if (d > far) {
                far = d;
                far_i = i;
            }
        }
        if (far_i == pool.size()) break;
        selected[far_i] = true;
        chosen.push_back(far_i);
    }
    std::sort(chosen.begin(), chosen.end());
    std::vector<LabeledInstance> out;
    for (size_t idx : chosen) out.push_back(pool[idx]);
    return out;
}

// Augment the pool first, then cluster-select over originals + copies.
inline std::vector<LabeledInstance> select_knowledge(const std::vector<LabeledInstance>& pool,
                                                     size_t n, const Embedder& embedder,
                                                     const kb::KnowledgeGraph& graph,
                                                     const mention::MentionTrie& trie,
                                                     const augment::AugmentConfig& aug_config,
                                                     uint64_t seed) {
    std::vector<LabeledInstance> combined =
        augment::augment_dataset(pool, graph, trie, aug_config);
    return select_cluster(combined, n, embedder, seed);
}

class MemoryBuffer {
public:
    explicit MemoryBuffer(BufferConfig config) : config_(std::move(config)) {}

    const BufferConfig& config() const { return config_; }
    size_t task_count() const { return tasks_.size(); }

    size_t total_size() const {
        size_t total = 0;
        for (const auto& [task, exemplars] : tasks_) total += exemplars.size();
        return total;
    }

    const std::vector<std::pair<std::string, std::vector<LabeledInstance>>>& tasks() const {
        return tasks_;
    }

    std::vector<LabeledInstance> contents() const {
        std::vector<LabeledInstance> out;
        for (const auto& [task, exemplars] : tasks_) {
            out.insert(out.end(), exemplars.begin(), exemplars.end());
        }
        return out;
    }

    bool contains_task(const std::string& task) const {
        for (const auto& [name, exemplars] : tasks_) {
            if (name == task) return true;
        }
        return false;
    }

    // Rebalance existing tasks to the new quotas, then admit the new task's
    // exemplars selected from its training pool. Called after training on the
    // task. The knowledge strategy augments train_pool before selection (when
    // aug_config is supplied) but never re-augments stored exemplars.
    void update(const std::string& task, const std::vector<LabeledInstance>& train_pool,
                const Embedder& embedder, const kb::KnowledgeGraph* graph,
                const mention::MentionTrie* trie, const augment::AugmentConfig* aug_config) {
        if (contains_task(task)) throw ConfigError("task already buffered: " + task);
        size_t t = tasks_.size() + 1;
        std::vector<size_t> quotas = quota(config_.capacity, t);

        for (size_t i = 0; i < tasks_.size(); ++i) {
            uint64_t task_seed = mix64(config_.seed, mix64(t, i));
            tasks_[i].second = down_select(tasks_[i].second, quotas[i], embedder, task_seed);
        }

        uint64_t new_seed = mix64(config_.seed, mix64(t, t - 1));
        std::vector<LabeledInstance> admitted;
        if (config_.strategy == SelectionStrategy::knowledge && aug_config && graph && trie) {
            admitted = select_knowledge(train_pool, quotas[t - 1], embedder, *graph, *trie,
                                        *aug_config, new_seed);
        } else {
            admitted = select_by_strategy(train_pool, quotas[t - 1], embedder, new_seed);
        }
        tasks_.emplace_back(task, std::move(admitted));
    }

    nlohmann::json manifest() const {
        nlohmann::json per_task = nlohmann::json::object();
        for (const auto& [task, exemplars] : tasks_) per_task[task] = exemplars.size();
        return {{"capacity", config_.capacity},
                {"strategy", strategy_name(config_.strategy)},
                {"per_task_counts", per_task}};
    }

private:
    // Old-task down-selection reuses the buffer strategy; knowledge falls back
    // to plain clustering (re-augmentation happens at replay time instead).
    std::vector<LabeledInstance> down_select(const std::vector<LabeledInstance>& stored, size_t n,
                                             const Embedder& embedder, uint64_t seed) const {
        if (stored.size() <= n) return stored;
        return select_by_strategy(stored, n, embedder, seed);
    }

    std::vector<LabeledInstance> select_by_strategy(const std::vector<LabeledInstance>& pool,
                                                    size_t n, const Embedder& embedder,
                                                    uint64_t seed) const {
        switch (config_.strategy) {
            case SelectionStrategy::random: return select_random(pool, n, seed);
            case SelectionStrategy::stratified: return select_stratified(pool, n, seed);
            case SelectionStrategy::cluster:
            case SelectionStrategy::knowledge: return select_cluster(pool, n, embedder, seed);
        }
        throw ConfigError("unknown selection strategy");
    }

    BufferConfig config_;
    std::vector<std::pair<std::string, std::vector<LabeledInstance>>> tasks_;  // arrival order
};

}  // namespace kgcl::memory
