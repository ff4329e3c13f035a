#pragma once

#include <set>
#include <string>
#include <vector>

#include <kgcl/common.hpp>
#include <kgcl/instance.hpp>
#include <kgcl/kb.hpp>
#include <kgcl/mention.hpp>

namespace kgcl::augment {

enum class Strategy { random, semantic };

struct AugmentConfig {
    Strategy strategy = Strategy::random;
    double replace_prob = 0.15;  // p
    std::set<kb::Predicate> predicates = {kb::Predicate::synonym, kb::Predicate::hyponym,
                                          kb::Predicate::instance};
    size_t copies_per_instance = 3;
    std::set<std::string> deviant_labels;  // required for semantic
    uint64_t seed = 0;
};

namespace detail {

struct Candidate {
    std::string sense_id;
    kb::Predicate predicate;
    std::string object;
};

// Flattened (sense, triple) pool for one mention. For the semantic strategy
// the pool is filtered so subject relevance matches the instance's deviance;
// unscored senses are never eligible.
inline std::vector<Candidate> candidate_pool(const kb::KnowledgeGraph& graph,
                                             const mention::Mention& m,
                                             const AugmentConfig& config, bool semantic,
                                             bool instance_is_deviant) {
    std::vector<Candidate> pool;
    for (const std::string& sense_id : m.candidate_senses) {
        if (semantic) {
            kb::Relevance rel = graph.sense(sense_id).relevance;
            if (rel == kb::Relevance::unscored) continue;
            bool sense_is_relevant = rel == kb::Relevance::relevant;
            if (sense_is_relevant != instance_is_deviant) continue;
        }
        for (size_t idx : graph.triple_indices_for_subject(sense_id)) {
            const kb::KnowledgeTriple& t = graph.triples()[idx];
            if (config.predicates.contains(t.predicate)) {
                pool.push_back({sense_id, t.predicate, t.object});
            }
        }
    }
    return pool;
}

inline std::vector<LabeledInstance> augment_instance(const LabeledInstance& instance,
                                                     const kb::KnowledgeGraph& graph,
                                                     const mention::MentionTrie& trie,
                                                     const AugmentConfig& config, Rng& rng,
                                                     bool semantic,
                                                     const std::string& source_id) {
    std::vector<mention::Token> tokens = mention::tokenize(instance.text);
    std::vector<mention::Mention> mentions = mention::extract_mentions(trie, tokens, instance.text);
    bool deviant = config.deviant_labels.contains(instance.label);

    std::vector<std::vector<Candidate>> pools;
    pools.reserve(mentions.size());
    for (const auto& m : mentions) {
        pools.push_back(candidate_pool(graph, m, config, semantic, deviant));
    }

    std::vector<LabeledInstance> out;
    for (size_t copy = 0; copy < config.copies_per_instance; ++copy) {
        LabeledInstance aug;
        aug.label = instance.label;
        aug.task = instance.task;
        aug.provenance = Provenance::augmented;
        aug.source_id = source_id;

        std::string text;
        size_t cursor = 0;
        size_t replaced = 0;
        for (size_t mi = 0; mi < mentions.size(); ++mi) {
            if (pools[mi].empty()) continue;  // nothing eligible, span left unchanged
            if (rng.next_double() >= config.replace_prob) continue;
            const Candidate& cand = pools[mi][static_cast<size_t>(rng.below(pools[mi].size()))];
            size_t span_start = tokens[mentions[mi].first_token].start;
            size_t span_end = tokens[mentions[mi].last_token - 1].end;
            text += instance.text.substr(cursor, span_start - cursor);
            text += cand.object;
            cursor = span_end;
            aug.replacements.push_back({span_start, span_end, mentions[mi].surface, cand.object,
                                        cand.sense_id, cand.predicate});
            ++replaced;
        }
        if (replaced == 0) continue;  // duplicates of the source carry no information
        text += instance.text.substr(cursor);
        aug.text = std::move(text);
        out.push_back(std::move(aug));
    }
    return out;
}

}  // namespace detail

inline std::vector<LabeledInstance> augment_random(const LabeledInstance& instance,
                                                   const kb::KnowledgeGraph& graph,
                                                   const mention::MentionTrie& trie,
                                                   const AugmentConfig& config, Rng& rng,
                                                   const std::string& source_id = "") {
    if (config.strategy != Strategy::random) {
        throw ConfigError("augment_random requires strategy = random");
    }
    return detail::augment_instance(instance, graph, trie, config, rng, false, source_id);
}

inline std::vector<LabeledInstance> augment_semantic(const LabeledInstance& instance,
                                                     const kb::KnowledgeGraph& graph,
                                                     const mention::MentionTrie& trie,
                                                     const AugmentConfig& config, Rng& rng,
                                                     const std::string& source_id = "") {
    if (config.strategy != Strategy::semantic) {
        throw ConfigError("augment_semantic requires strategy = semantic");
    }
    if (config.deviant_labels.empty()) {
        throw ConfigError("semantic augmentation requires deviant_labels");
    }
    bool any_scored = false;
    for (const auto& [id, sense] : graph.senses()) {
        if (sense.relevance != kb::Relevance::unscored) {
            any_scored = true;
            break;
        }
    }
    if (!any_scored) throw ConfigError("semantic augmentation requires a relevance-scored graph");
    return detail::augment_instance(instance, graph, trie, config, rng, true, source_id);
}

// Originals concatenated with all augmented copies. Per-instance RNG streams
// are derived from (seed, index), so the output is order-stable.
inline std::vector<LabeledInstance> augment_dataset(const std::vector<LabeledInstance>& instances,
                                                    const kb::KnowledgeGraph& graph,
                                                    const mention::MentionTrie& trie,
                                                    const AugmentConfig& config) {
    std::vector<LabeledInstance> out = instances;
    for (size_t i = 0; i < instances.size(); ++i) {
        Rng rng(mix64(config.seed, i));
        std::string source_id =
            instances[i].source_id ? *instances[i].source_id : std::to_string(i);
        std::vector<LabeledInstance> copies =
            config.strategy == Strategy::random
                ? augment_random(instances[i], graph, trie, config, rng, source_id)
                : augment_semantic(instances[i], graph, trie, config, rng, source_id);
        out.insert(out.end(), std::make_move_iterator(copies.begin()),
                   std::make_move_iterator(copies.end()));
    }
    return out;
}

}  // namespace kgcl::augment
