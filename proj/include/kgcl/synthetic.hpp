#pragma once

#include <string>
#include <vector>

#include <kgcl/common.hpp>
#include <kgcl/data.hpp>
#include <kgcl/kb.hpp>
#include <kgcl/semantics.hpp>

namespace kgcl::synthetic {

// Desk-scale generator: each task's classes are separable by task-specific
// keyword sets, and the companion KB maps every keyword surface to sibling
// paraphrase tokens via synonym triples, so augmentation contributes surface
// forms the replay exemplars alone may not cover.
struct SyntheticSpec {
    size_t tasks = 5;
    size_t classes_per_task = 2;
    size_t train_per_task = 200;
    size_t valid_per_task = 50;
    size_t test_per_task = 100;
    size_t keywords_per_class = 3;
    size_t synonyms_per_keyword = 4;
    size_t tokens_per_text = 8;
    size_t keyword_slots = 4;
    double synonym_prob = 0.7;   // chance a keyword slot surfaces as a paraphrase
    double cross_noise = 0.05;   // chance a keyword slot draws from another class
    size_t filler_vocab = 60;    // shared across all tasks
};

struct SyntheticData {
    data::TaskStream stream;
    kb::KnowledgeGraph graph;
    std::vector<semantics::DefinitionExample> definitions;
    std::set<std::string> deviant_labels;
};

namespace detail {

inline std::string label_name(size_t c) {
    if (c == 0) return "benign";
    if (c == 1) return "deviant";
    return "class" + std::to_string(c);
}

inline std::string keyword(size_t t, size_t c, size_t k) {
    return "t" + std::to_string(t) + "c" + std::to_string(c) + "w" + std::to_string(k);
}

}  // namespace detail

inline SyntheticData make_synthetic_stream(const SyntheticSpec& spec, uint64_t seed) {
    SyntheticData out;
    out.stream.order_seed = seed;

    // Surface groups: keyword plus its paraphrases, all senses of one another.
    // surfaces[t][c][k] lists the full group.
    std::vector<std::vector<std::vector<std::vector<std::string>>>> surfaces(spec.tasks);
    for (size_t t = 0; t < spec.tasks; ++t) {
        surfaces[t].resize(spec.classes_per_task);
        for (size_t c = 0; c < spec.classes_per_task; ++c) {
            surfaces[t][c].resize(spec.keywords_per_class);
            for (size_t k = 0; k < spec.keywords_per_class; ++k) {
                auto& group = surfaces[t][c][k];
                group.push_back(detail::keyword(t, c, k));
                for (size_t s = 0; s < spec.synonyms_per_keyword; ++s) {
                    group.push_back(detail::keyword(t, c, k) + "s" + std::to_string(s));
                }
                bool deviant = detail::label_name(c) == "deviant";
                std::string gloss =
                    deviant ? "a slur offensive insult targeting group " + std::to_string(t) +
                                  " item " + std::to_string(k)
                            : "an ordinary common neutral word about topic " + std::to_string(t) +
                                  " item " + std::to_string(k);
                for (size_t s = 0; s < group.size(); ++s) {
                    kb::WordSense sense{kb::derive_sense_id(group[s], "noun", gloss), group[s],
                                        "noun", gloss, kb::Relevance::unscored};
                    std::string id = sense.sense_id;
                    out.graph.add_sense(std::move(sense));
                    for (size_t other = 0; other < group.size(); ++other) {
                        if (other == s) continue;
                        out.graph.add_triple({id, kb::Predicate::synonym, group[other]});
                    }
                    if (s == 0) {
                        out.definitions.push_back({gloss, deviant});
                    }
                }
            }
        }
    }

    std::vector<std::string> fillers;
    for (size_t f = 0; f < spec.filler_vocab; ++f) fillers.push_back("fill" + std::to_string(f));

    auto make_text = [&](size_t t, size_t c, Rng& rng) {
        std::vector<std::string> words;
        for (size_t slot = 0; slot < spec.keyword_slots; ++slot) {
            size_t cls = c;
            if (spec.classes_per_task > 1 && rng.next_double() < spec.cross_noise) {
                size_t shift = 1 + static_cast<size_t>(rng.below(spec.classes_per_task - 1));
                cls = (c + shift) % spec.classes_per_task;
            }
            const auto& group =
                surfaces[t][cls][static_cast<size_t>(rng.below(spec.keywords_per_class))];
            size_t pick = 0;
            if (rng.next_double() < spec.synonym_prob) {
                pick = 1 + static_cast<size_t>(rng.below(group.size() - 1));
            }
            words.push_back(group[pick]);
        }
        for (size_t slot = spec.keyword_slots; slot < spec.tokens_per_text; ++slot) {
            words.push_back(fillers[static_cast<size_t>(rng.below(fillers.size()))]);
        }
        rng.shuffle(words);
        std::string text;
        for (size_t i = 0; i < words.size(); ++i) {
            if (i) text += ' ';
            text += words[i];
        }
        return text;
    };

    for (size_t t = 0; t < spec.tasks; ++t) {
        data::TaskBundle bundle;
        bundle.task_id = t;
        bundle.name = "t" + std::to_string(t);
        for (size_t c = 0; c < spec.classes_per_task; ++c) {
            bundle.classes.push_back(bundle.name + ":" + detail::label_name(c));
        }
        out.deviant_labels.insert(bundle.name + ":deviant");

        auto fill_split = [&](std::vector<LabeledInstance>& split, size_t count,
                              uint64_t split_salt) {
            for (size_t i = 0; i < count; ++i) {
                size_t c = i % spec.classes_per_task;
                Rng rng(mix64(seed, mix64(split_salt, mix64(t, i))));
                LabeledInstance inst;
                inst.text = make_text(t, c, rng);
                inst.label = bundle.name + ":" + detail::label_name(c);
                inst.task = bundle.name;
                split.push_back(std::move(inst));
            }
        };
        fill_split(bundle.train, spec.train_per_task, 0x747261696eull);
        fill_split(bundle.valid, spec.valid_per_task, 0x76616c6964ull);
        fill_split(bundle.test, spec.test_per_task, 0x74657374ull);
        out.stream.tasks.push_back(std::move(bundle));
    }
    return out;
}

}  // namespace kgcl::synthetic
