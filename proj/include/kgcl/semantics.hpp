#pragma once

#include <cmath>
#include <istream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>
#include <kgcl/common.hpp>
#include <kgcl/csv.hpp>
#include <kgcl/encoder.hpp>
#include <kgcl/kb.hpp>

namespace kgcl::semantics {

struct DefinitionExample {
    std::string gloss;
    bool relevant = false;
};

struct DefinitionRow {
    std::string text;
    std::string word;
    std::string definition;
    std::string label;  // "hateful" | "normal"
};

// HateWIC-derived CSV: columns text, word, definition, label.
inline std::vector<DefinitionRow> load_definition_rows(std::istream& in) {
    std::vector<std::string> header;
    if (!csv::read_row(in, header)) return {};
    std::map<std::string, size_t> cols;
    for (size_t i = 0; i < header.size(); ++i) cols[header[i]] = i;
    for (const char* required : {"text", "word", "definition", "label"}) {
        if (!cols.contains(required)) {
            throw ParseError(std::string("missing column: ") + required);
        }
    }
    std::vector<DefinitionRow> rows;
    std::vector<std::string> row;
    while (csv::read_row(in, row)) {
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() < header.size()) {
            throw ParseError("row " + std::to_string(rows.size() + 2) + ": too few fields");
        }
        rows.push_back({row[cols["text"]], row[cols["word"]], row[cols["definition"]],
                        row[cols["label"]]});
    }
    return rows;
}

struct DeriveStats {
    size_t unique_definitions = 0;
    size_t ties_dropped = 0;
};

// Groups rows by unique definition and emits one example per definition with
// the majority label; exact ties are dropped and counted.
inline std::vector<DefinitionExample> derive_definition_dataset(
    const std::vector<DefinitionRow>& rows, DeriveStats* stats = nullptr) {
    std::map<std::string, std::pair<size_t, size_t>> counts;  // definition -> (hateful, normal)
    for (const auto& row : rows) {
        auto& [hateful, normal] = counts[row.definition];
        if (row.label == "hateful") ++hateful;
        else if (row.label == "normal") ++normal;
        else throw ParseError("unknown label: " + row.label);
    }
    std::vector<DefinitionExample> out;
    size_t ties = 0;
    for (const auto& [definition, tally] : counts) {
        if (definition.empty()) throw ParseError("empty definition field");
        if (tally.first == tally.second) {
            ++ties;
            continue;
        }
        out.push_back({definition, tally.first > tally.second});
    }
    if (stats) {
        stats->unique_definitions = counts.size();
        stats->ties_dropped = ties;
    }
    return out;
}

struct DefinitionModel {
    encoder::HashSpec featurizer{1024, {1, 2}, 0x64656673ull};
    std::vector<double> weights;  // dim entries
    double bias = 0.0;
    double threshold = 0.5;

    double probability(std::string_view gloss) const {
        auto features = encoder::hash_features(featurizer, gloss);
        encoder::l2_normalize(features);
        double z = bias;
        for (const auto& [idx, v] : features) z += weights[idx] * v;
        return 1.0 / (1.0 + std::exp(-z));
    }

    bool relevant(std::string_view gloss) const { return probability(gloss) >= threshold; }
};

struct DefinitionTrainConfig {
    double learning_rate = 0.5;
    size_t batch_size = 16;
    size_t epochs = 50;
    double weight_decay = 1e-4;
    double threshold = 0.5;
    encoder::HashSpec featurizer{1024, {1, 2}, 0x64656673ull};
};

// Seeded mini-batch logistic regression on hashed gloss n-grams.
inline DefinitionModel train_definition_model(const std::vector<DefinitionExample>& data,
                                              const DefinitionTrainConfig& config,
                                              uint64_t seed) {
    bool has_pos = false, has_neg = false;
    for (const auto& ex : data) {
        if (ex.gloss.empty()) throw ConfigError("empty gloss in training data");
        (ex.relevant ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
        throw ConfigError("definition training data must contain both labels");
    }

    DefinitionModel model;
    model.featurizer = config.featurizer;
    model.threshold = config.threshold;
    model.weights.assign(config.featurizer.dim, 0.0);

    std::vector<std::vector<std::pair<uint32_t, double>>> features;
    features.reserve(data.size());
    for (const auto& ex : data) {
        auto f = encoder::hash_features(config.featurizer, ex.gloss);
        encoder::l2_normalize(f);
        features.push_back(std::move(f));
    }

    Rng rng(mix64(seed, 0x64656674ull));
    std::vector<size_t> order(data.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (size_t off = 0; off < order.size(); off += config.batch_size) {
            size_t end = std::min(off + config.batch_size, order.size());
            std::vector<double> grad_w(config.featurizer.dim, 0.0);
            double grad_b = 0.0;
            for (size_t k = off; k < end; ++k) {
                size_t i = order[k];
                double z = model.bias;
                for (const auto& [idx, v] : features[i]) z += model.weights[idx] * v;
                double p = 1.0 / (1.0 + std::exp(-z));
                double err = p - (data[i].relevant ? 1.0 : 0.0);
                for (const auto& [idx, v] : features[i]) grad_w[idx] += err * v;
                grad_b += err;
            }
            double scale = config.learning_rate / static_cast<double>(end - off);
            for (size_t d = 0; d < config.featurizer.dim; ++d) {
                model.weights[d] -= scale * (grad_w[d] + config.weight_decay * model.weights[d] *
                                                             static_cast<double>(end - off));
            }
            model.bias -= scale * grad_b;
        }
    }
    return model;
}

// Returns a copy of the graph with relevance set for every sense that has a
// non-empty gloss; empty glosses stay unscored. Identical glosses score once.
inline kb::KnowledgeGraph score_graph(const DefinitionModel& model,
                                      const kb::KnowledgeGraph& graph) {
    kb::KnowledgeGraph out = graph;
    std::unordered_map<std::string, bool> cache;
    for (const auto& [id, sense] : graph.senses()) {
        if (sense.gloss.empty()) continue;
        auto it = cache.find(sense.gloss);
        if (it == cache.end()) {
            it = cache.emplace(sense.gloss, model.relevant(sense.gloss)).first;
        }
        out.set_relevance(id, it->second ? kb::Relevance::relevant : kb::Relevance::not_relevant);
    }
    return out;
}

inline nlohmann::json model_to_json(const DefinitionModel& model) {
    return {{"format", "kgcl-defmodel-v1"},
            {"dim", model.featurizer.dim},
            {"ngram_orders", model.featurizer.ngram_orders},
            {"seed_salt", model.featurizer.seed_salt},
            {"weights", model.weights},
            {"bias", model.bias},
            {"threshold", model.threshold}};
}

inline DefinitionModel model_from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != "kgcl-defmodel-v1") {
        throw ParseError("not a kgcl-defmodel-v1 document");
    }
    DefinitionModel model;
    model.featurizer.dim = doc.at("dim").get<size_t>();
    model.featurizer.ngram_orders = doc.at("ngram_orders").get<std::vector<size_t>>();
    model.featurizer.seed_salt = doc.at("seed_salt").get<uint64_t>();
    model.weights = doc.at("weights").get<std::vector<double>>();
    model.bias = doc.at("bias").get<double>();
    model.threshold = doc.at("threshold").get<double>();
    if (model.weights.size() != model.featurizer.dim) {
        throw ParseError("weight dimension mismatch");
    }
    return model;
}

}  // namespace kgcl::semantics
