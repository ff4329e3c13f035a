#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>
#include <kgcl/common.hpp>
#include <kgcl/encoder.hpp>
#include <kgcl/instance.hpp>

namespace kgcl::learner {

// Append-only class registry; column ids never change once assigned.
class ClassRegistry {
public:
    size_t add(const std::string& task, const std::string& name) {
        if (index_.contains(name)) throw ConfigError("duplicate class: " + name);
        classes_.emplace_back(task, name);
        index_[name] = classes_.size() - 1;
        return classes_.size() - 1;
    }

    size_t column(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw NotFoundError("unregistered class: " + name);
        return it->second;
    }

    bool contains(const std::string& name) const { return index_.contains(name); }
    size_t size() const { return classes_.size(); }
    const std::vector<std::pair<std::string, std::string>>& classes() const { return classes_; }

private:
    std::vector<std::pair<std::string, std::string>> classes_;  // (task, name)
    std::unordered_map<std::string, size_t> index_;
};

struct TrainConfig {
    double learning_rate = 0.2;
    size_t batch_size = 16;
    size_t max_epochs = 20;
    size_t patience = 8;
    double weight_decay = 0.1;
    double replay_weight = 1.0;  // lambda
    uint64_t seed = 0;
};

struct TrainReport {
    std::vector<double> epoch_losses;
    std::vector<double> epoch_valid_accuracy;
    size_t stopped_after_epoch = 0;
    size_t best_epoch = 0;
    double best_valid_accuracy = 0.0;
    bool restored_best_snapshot = true;  // early stopping returns the best model
};

class ClassifierModel {
public:
    explicit ClassifierModel(std::shared_ptr<const encoder::Encoder> enc)
        : encoder_(std::move(enc)) {}

    const encoder::Encoder& text_encoder() const { return *encoder_; }
    std::shared_ptr<const encoder::Encoder> encoder_ptr() const { return encoder_; }
    const ClassRegistry& registry() const { return registry_; }
    size_t class_count() const { return registry_.size(); }
    size_t dim() const { return encoder_->dim(); }

    std::span<const double> weights_row(size_t c) const {
        return {weights_.data() + c * dim(), dim()};
    }
    std::vector<double>& weights() { return weights_; }
    const std::vector<double>& weights() const { return weights_; }
    std::vector<double>& biases() { return biases_; }
    const std::vector<double>& biases() const { return biases_; }

    // New rows are zero-initialized so old-class logits are preserved exactly.
    void extend_classes(const std::vector<std::pair<std::string, std::string>>& new_classes) {
        std::unordered_map<std::string, int> seen;
        for (const auto& [task, name] : new_classes) {
            if (registry_.contains(name) || seen[name]++) {
                throw ConfigError("duplicate class: " + name);
            }
        }
        for (const auto& [task, name] : new_classes) {
            registry_.add(task, name);
            weights_.resize(weights_.size() + dim(), 0.0);
            biases_.push_back(0.0);
        }
    }

    std::vector<double> logits_sparse(
        const std::vector<std::pair<uint32_t, double>>& features) const {
        std::vector<double> z(registry_.size());
        for (size_t c = 0; c < registry_.size(); ++c) {
            double acc = biases_[c];
            const double* row = weights_.data() + c * dim();
            for (const auto& [idx, v] : features) acc += row[idx] * v;
            z[c] = acc;
        }
        return z;
    }

    std::vector<double> logits(std::string_view text) const {
        return logits_sparse(encoder_->encode_sparse(text));
    }

    // Softmax over all registered classes; argmax ties break to the lowest column.
    std::pair<size_t, std::vector<double>> predict(std::string_view text) const {
        if (registry_.size() == 0) throw StateError("predict on a zero-class model");
        std::vector<double> p = softmax(logits(text));
        size_t best = 0;
        for (size_t c = 1; c < p.size(); ++c) {
            if (p[c] > p[best]) best = c;
        }
        return {best, std::move(p)};
    }

    std::vector<double> embed(std::string_view text) const { return encoder_->encode(text); }

    static std::vector<double> softmax(std::vector<double> z) {
        double mx = -std::numeric_limits<double>::infinity();
        for (double v : z) mx = std::max(mx, v);
        double sum = 0.0;
        for (double& v : z) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (double& v : z) v /= sum;
        return z;
    }

private:
    std::shared_ptr<const encoder::Encoder> encoder_;
    ClassRegistry registry_;
    std::vector<double> weights_;  // row-major, |classes| x dim
    std::vector<double> biases_;
};

namespace detail {

struct EncodedInstance {
    std::vector<std::pair<uint32_t, double>> features;
    size_t label_col = 0;
    bool is_replay = false;
};

inline std::vector<EncodedInstance> encode_all(const ClassifierModel& model,
                                               const std::vector<LabeledInstance>& instances,
                                               bool is_replay) {
    std::vector<EncodedInstance> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) {
        out.push_back({model.text_encoder().encode_sparse(inst.text),
                       model.registry().column(inst.label), is_replay});
    }
    return out;
}

// Cross-entropy of one instance plus its gradient contribution, weighted.
inline double accumulate_example(const ClassifierModel& model, const EncodedInstance& ex,
                                 double weight, std::vector<double>& grad_w,
                                 std::vector<double>& grad_b) {
    std::vector<double> p = ClassifierModel::softmax(model.logits_sparse(ex.features));
    size_t dim = model.dim();
    for (size_t c = 0; c < p.size(); ++c) {
        double err = weight * (p[c] - (c == ex.label_col ? 1.0 : 0.0));
        if (err == 0.0) continue;
        double* row = grad_w.data() + c * dim;
        for (const auto& [idx, v] : ex.features) row[idx] += err * v;
        grad_b[c] += err;
    }
    return -std::log(std::max(p[ex.label_col], 1e-300));
}

}  // namespace detail

// Joint objective: mean CE over current + lambda * mean CE over replay
// + (weight_decay / 2) * ||W||^2. Biases are not decayed. The replay term is
// omitted when replay is empty.
inline double joint_loss(const ClassifierModel& model,
                         const std::vector<detail::EncodedInstance>& current,
                         const std::vector<detail::EncodedInstance>& replay, double lambda,
                         double weight_decay) {
    double loss = 0.0;
    std::vector<double> scratch_w(model.weights().size(), 0.0);
    std::vector<double> scratch_b(model.biases().size(), 0.0);
    double cur = 0.0, rep = 0.0;
    for (const auto& ex : current) cur += detail::accumulate_example(model, ex, 0.0, scratch_w, scratch_b);
    for (const auto& ex : replay) rep += detail::accumulate_example(model, ex, 0.0, scratch_w, scratch_b);
    if (!current.empty()) loss += cur / static_cast<double>(current.size());
    if (!replay.empty()) loss += lambda * rep / static_cast<double>(replay.size());
    double sq = 0.0;
    for (double w : model.weights()) sq += w * w;
    return loss + 0.5 * weight_decay * sq;
}

// Analytic gradient of the same objective, for the full batch.
inline std::pair<std::vector<double>, std::vector<double>> joint_gradient(
    const ClassifierModel& model, const std::vector<detail::EncodedInstance>& current,
    const std::vector<detail::EncodedInstance>& replay, double lambda, double weight_decay) {
    std::vector<double> grad_w(model.weights().size(), 0.0);
    std::vector<double> grad_b(model.biases().size(), 0.0);
    if (!current.empty()) {
        double w = 1.0 / static_cast<double>(current.size());
        for (const auto& ex : current) detail::accumulate_example(model, ex, w, grad_w, grad_b);
    }
    if (!replay.empty()) {
        double w = lambda / static_cast<double>(replay.size());
        for (const auto& ex : replay) detail::accumulate_example(model, ex, w, grad_w, grad_b);
    }
    for (size_t i = 0; i < grad_w.size(); ++i) grad_w[i] += weight_decay * model.weights()[i];
    return {std::move(grad_w), std::move(grad_b)};
}

inline double validation_accuracy(const ClassifierModel& model,
                                  const std::vector<detail::EncodedInstance>& valid) {
    size_t correct = 0;
    for (const auto& ex : valid) {
        std::vector<double> z = model.logits_sparse(ex.features);
        size_t best = 0;
        for (size_t c = 1; c < z.size(); ++c) {
            if (z[c] > z[best]) best = c;
        }
        if (best == ex.label_col) ++correct;
    }
    return valid.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(valid.size());
}

// Seeded mini-batch gradient descent on the joint objective, with early
// stopping on current-task validation accuracy. Returns the best snapshot.
inline std::pair<ClassifierModel, TrainReport> train_task(
    const ClassifierModel& start, const std::vector<LabeledInstance>& current,
    const std::vector<LabeledInstance>& replay, const std::vector<LabeledInstance>& valid,
    const TrainConfig& config) {
    if (valid.empty()) throw ConfigError("train_task requires a non-empty validation set");
    if (config.patience > config.max_epochs) {
        throw ConfigError("patience must not exceed max_epochs");
    }

    ClassifierModel model = start;
    auto cur = detail::encode_all(model, current, false);
    auto rep = detail::encode_all(model, replay, true);
    auto val = detail::encode_all(model, valid, false);

    // Pooled epoch order; the two loss means keep their own normalizations.
    std::vector<const detail::EncodedInstance*> pool;
    pool.reserve(cur.size() + rep.size());
    for (const auto& ex : cur) pool.push_back(&ex);
    for (const auto& ex : rep) pool.push_back(&ex);
    size_t total = pool.size();
    double cur_weight = cur.empty() ? 0.0 : 1.0 / static_cast<double>(cur.size());
    double rep_weight = rep.empty() ? 0.0 : config.replay_weight / static_cast<double>(rep.size());

    TrainReport report;
    ClassifierModel best = model;
    double best_acc = -1.0;
    size_t since_improvement = 0;
    Rng rng(mix64(config.seed, 0x747261696eull));

    std::vector<double> grad_w(model.weights().size());
    std::vector<double> grad_b(model.biases().size());

    for (size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        rng.shuffle(pool);
        double epoch_cur_loss = 0.0, epoch_rep_loss = 0.0;
        for (size_t off = 0; off < total; off += config.batch_size) {
            size_t end = std::min(off + config.batch_size, total);
            std::fill(grad_w.begin(), grad_w.end(), 0.0);
            std::fill(grad_b.begin(), grad_b.end(), 0.0);
            // Each batch step is an unbiased estimate of the full objective
            // gradient: the per-instance weights carry the two means of the
            // joint loss, and the batch sum is rescaled by total / |batch|.
            double scale = static_cast<double>(total) / static_cast<double>(end - off);
            for (size_t k = off; k < end; ++k) {
                const auto& ex = *pool[k];
                double w = scale * (ex.is_replay ? rep_weight : cur_weight);
                double ce = detail::accumulate_example(model, ex, w, grad_w, grad_b);
                (ex.is_replay ? epoch_rep_loss : epoch_cur_loss) += ce;
            }
            // Decay is spread over the epoch so one epoch shrinks weights by
            // (1 - lr * wd), matching a single full-batch step of the objective.
            double decay = config.weight_decay * static_cast<double>(end - off) /
                           static_cast<double>(total);
            for (size_t i = 0; i < grad_w.size(); ++i) {
                grad_w[i] += decay * model.weights()[i];
                model.weights()[i] -= config.learning_rate * grad_w[i];
            }
            for (size_t c = 0; c < grad_b.size(); ++c) {
                model.biases()[c] -= config.learning_rate * grad_b[c];
            }
        }
        double epoch_loss = 0.0;
        if (!cur.empty()) epoch_loss += epoch_cur_loss / static_cast<double>(cur.size());
        if (!rep.empty()) {
            epoch_loss += config.replay_weight * epoch_rep_loss / static_cast<double>(rep.size());
        }
        if (!std::isfinite(epoch_loss)) throw StateError("training loss diverged to non-finite");
        report.epoch_losses.push_back(epoch_loss);

        double acc = validation_accuracy(model, val);
        report.epoch_valid_accuracy.push_back(acc);
        if (acc >= best_acc) {
            // Ties keep the later snapshot: validation only sees the current
            // task, so among equally accurate epochs the later one has had
            // more optimization on the joint (replay-inclusive) objective.
            if (acc > best_acc) since_improvement = 0;
            best_acc = acc;
            best = model;
            report.best_epoch = epoch;
        } else if (++since_improvement >= config.patience) {
            report.stopped_after_epoch = epoch + 1;
            break;
        }
        report.stopped_after_epoch = epoch + 1;
    }
    report.best_valid_accuracy = best_acc;
    return {std::move(best), std::move(report)};
}

// Versioned model checkpoint.
inline nlohmann::json checkpoint_to_json(const ClassifierModel& model) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& [task, name] : model.registry().classes()) {
        classes.push_back({task, name});
    }
    return {{"format", "kgcl-checkpoint-v1"},
            {"encoder", encoder::encoder_spec_to_json(model.text_encoder())},
            {"classes", classes},
            {"W", model.weights()},
            {"b", model.biases()}};
}

inline ClassifierModel checkpoint_from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != "kgcl-checkpoint-v1") {
        throw ParseError("not a kgcl-checkpoint-v1 document");
    }
    ClassifierModel model(encoder::make_encoder(doc.at("encoder")));
    std::vector<std::pair<std::string, std::string>> classes;
    for (const auto& c : doc.at("classes")) {
        classes.emplace_back(c.at(0).get<std::string>(), c.at(1).get<std::string>());
    }
    model.extend_classes(classes);
    model.weights() = doc.at("W").get<std::vector<double>>();
    model.biases() = doc.at("b").get<std::vector<double>>();
    if (model.weights().size() != model.class_count() * model.dim() ||
        model.biases().size() != model.class_count()) {
        throw ParseError("checkpoint shape mismatch");
    }
    return model;
}

}  // namespace kgcl::learner
