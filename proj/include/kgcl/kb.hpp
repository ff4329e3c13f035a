#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>
#include <kgcl/common.hpp>

namespace kgcl::kb {

enum class Predicate { form, synonym, hyponym, instance };

inline const char* predicate_name(Predicate p) {
    switch (p) {
        case Predicate::form: return "form";
        case Predicate::synonym: return "synonym";
        case Predicate::hyponym: return "hyponym";
        case Predicate::instance: return "instance";
    }
    return "?";
}

inline std::optional<Predicate> predicate_from_relation_key(const std::string& key) {
    if (key == "forms") return Predicate::form;
    if (key == "synonyms") return Predicate::synonym;
    if (key == "hyponyms") return Predicate::hyponym;
    if (key == "instances") return Predicate::instance;
    return std::nullopt;
}

inline std::optional<Predicate> predicate_from_name(const std::string& name) {
    if (name == "form") return Predicate::form;
    if (name == "synonym") return Predicate::synonym;
    if (name == "hyponym") return Predicate::hyponym;
    if (name == "instance") return Predicate::instance;
    return std::nullopt;
}

enum class Relevance { unscored, relevant, not_relevant };

inline const char* relevance_name(Relevance r) {
    switch (r) {
        case Relevance::unscored: return "unscored";
        case Relevance::relevant: return "relevant";
        case Relevance::not_relevant: return "not_relevant";
    }
    return "?";
}

struct WordSense {
    std::string sense_id;
    std::string lemma;
    std::string pos;
    std::string gloss;
    Relevance relevance = Relevance::unscored;
};

struct KnowledgeTriple {
    std::string subject;  // sense_id
    Predicate predicate;
    std::string object;  // related term, possibly multi-word

    bool operator==(const KnowledgeTriple&) const = default;
};

// Stable content hash id for a (word, pos, gloss) sense record.
inline std::string derive_sense_id(const std::string& word, const std::string& pos,
                                   const std::string& gloss) {
    uint64_t h = fnv1a64(word);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(pos, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(gloss, h);
    return to_hex(h);
}

class KnowledgeGraph {
public:
    // Returns false if a sense with the same id already exists.
    bool add_sense(WordSense sense) {
        auto [it, inserted] = senses_.emplace(sense.sense_id, std::move(sense));
        if (!inserted) return false;
        lemma_index_[normalize_term(it->second.lemma)].push_back(it->first);
        return true;
    }

    // Deduplicates exact (subject, predicate, object) repeats.
    bool add_triple(KnowledgeTriple triple) {
        if (!senses_.contains(triple.subject)) {
            throw NotFoundError("triple subject not in graph: " + triple.subject);
        }
        std::string key = triple.subject + '\x1f' + predicate_name(triple.predicate) + '\x1f' +
                          triple.object;
        if (!triple_keys_.insert(std::move(key)).second) return false;
        subject_index_[triple.subject].push_back(triples_.size());
        triples_.push_back(std::move(triple));
        return true;
    }

    const WordSense* find_sense(const std::string& sense_id) const {
        auto it = senses_.find(sense_id);
        return it == senses_.end() ? nullptr : &it->second;
    }

    const WordSense& sense(const std::string& sense_id) const {
        const WordSense* s = find_sense(sense_id);
        if (!s) throw NotFoundError("unknown sense id: " + sense_id);
        return *s;
    }

    void set_relevance(const std::string& sense_id, Relevance r) {
        auto it = senses_.find(sense_id);
        if (it == senses_.end()) throw NotFoundError("unknown sense id: " + sense_id);
        it->second.relevance = r;
    }

    const std::vector<std::string>* senses_for_lemma(const std::string& lemma) const {
        auto it = lemma_index_.find(normalize_term(lemma));
        return it == lemma_index_.end() ? nullptr : &it->second;
    }

    std::vector<size_t> triple_indices_for_subject(const std::string& sense_id) const {
        auto it = subject_index_.find(sense_id);
        return it == subject_index_.end() ? std::vector<size_t>{} : it->second;
    }

    const std::map<std::string, WordSense>& senses() const { return senses_; }
    const std::vector<KnowledgeTriple>& triples() const { return triples_; }
    size_t sense_count() const { return senses_.size(); }
    size_t triple_count() const { return triples_.size(); }

private:
    std::map<std::string, WordSense> senses_;  // ordered: deterministic iteration
    std::vector<KnowledgeTriple> triples_;
    std::unordered_set<std::string> triple_keys_;
    std::unordered_map<std::string, std::vector<std::string>> lemma_index_;
    std::unordered_map<std::string, std::vector<size_t>> subject_index_;
};

struct IngestOptions {
    bool strict = false;
};

struct IngestStats {
    size_t parsed_records = 0;
    size_t skipped_records = 0;
    size_t unsupported_relations = 0;
    size_t duplicate_triples = 0;
    std::map<std::string, size_t> triples_per_predicate;
    std::vector<std::string> errors;  // "line N: message"
};

struct IngestResult {
    KnowledgeGraph graph;
    IngestStats stats;
};

namespace detail {

inline void ingest_record(KnowledgeGraph& graph, const nlohmann::json& rec, IngestStats& stats) {
    if (!rec.is_object()) throw ParseError("record is not an object");
    const std::string word = rec.at("word").get<std::string>();
    const std::string pos = rec.at("pos").get<std::string>();
    if (word.empty()) throw ParseError("empty word");
    const auto& senses = rec.at("senses");
    if (!senses.is_array()) throw ParseError("senses is not an array");
    for (const auto& sense_rec : senses) {
        const std::string gloss = sense_rec.at("gloss").get<std::string>();
        WordSense sense{derive_sense_id(word, pos, gloss), word, pos, gloss,
                        Relevance::unscored};
        std::string sense_id = sense.sense_id;
        graph.add_sense(std::move(sense));
        if (!sense_rec.contains("relations")) continue;
        const auto& relations = sense_rec.at("relations");
        if (!relations.is_object()) throw ParseError("relations is not an object");
        for (const auto& [key, values] : relations.items()) {
            auto pred = predicate_from_relation_key(key);
            if (!pred) {
                ++stats.unsupported_relations;
                continue;
            }
            if (!values.is_array()) throw ParseError("relation '" + key + "' is not an array");
            for (const auto& obj : values) {
                std::string term = obj.get<std::string>();
                if (term.empty() || normalize_term(term).empty()) {
                    throw ParseError("empty object term under '" + key + "'");
                }
                if (graph.add_triple({sense_id, *pred, std::move(term)})) {
                    ++stats.triples_per_predicate[predicate_name(*pred)];
                } else {
                    ++stats.duplicate_triples;
                }
            }
        }
    }
}

}  // namespace detail

// Reads the KB JSONL format, one record per line. Lenient mode skips and counts
// malformed lines; strict mode fails on the first one.
inline IngestResult ingest_dump(std::istream& stream, const IngestOptions& options = {}) {
    IngestResult result;
    std::string line;
    size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            nlohmann::json rec = nlohmann::json::parse(line);
            detail::ingest_record(result.graph, rec, result.stats);
            ++result.stats.parsed_records;
        } catch (const std::exception& e) {
            std::string msg = "line " + std::to_string(line_no) + ": " + e.what();
            if (options.strict) throw ParseError(msg);
            ++result.stats.skipped_records;
            result.stats.errors.push_back(std::move(msg));
        }
    }
    return result;
}

// All triples with the given subject and a predicate in the requested set,
// ordered by (predicate, object).
inline std::vector<std::pair<Predicate, std::string>> related_terms(
    const KnowledgeGraph& graph, const std::string& sense_id,
    const std::set<Predicate>& predicates) {
    graph.sense(sense_id);  // not-found check
    std::vector<std::pair<Predicate, std::string>> out;
    for (size_t idx : graph.triple_indices_for_subject(sense_id)) {
        const KnowledgeTriple& t = graph.triples()[idx];
        if (predicates.contains(t.predicate)) out.emplace_back(t.predicate, t.object);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return static_cast<int>(a.first) < static_cast<int>(b.first);
        return a.second < b.second;
    });
    return out;
}

// The lemma itself plus every `form` object of senses whose lemma normalizes
// to the input. Objects are kept verbatim.
inline std::set<std::string> surface_forms(const KnowledgeGraph& graph, const std::string& lemma) {
    std::set<std::string> out;
    std::string norm = normalize_term(lemma);
    if (norm.empty()) return out;
    out.insert(norm);
    if (const auto* ids = graph.senses_for_lemma(norm)) {
        for (const std::string& id : *ids) {
            for (size_t idx : graph.triple_indices_for_subject(id)) {
                const KnowledgeTriple& t = graph.triples()[idx];
                if (t.predicate == Predicate::form) out.insert(t.object);
            }
        }
    }
    return out;
}

// Graph artifact (JSON) round-trip, used by the CLI to persist built/scored graphs.
inline nlohmann::json graph_to_json(const KnowledgeGraph& graph) {
    nlohmann::json senses = nlohmann::json::array();
    for (const auto& [id, s] : graph.senses()) {
        senses.push_back({{"id", s.sense_id},
                          {"lemma", s.lemma},
                          {"pos", s.pos},
                          {"gloss", s.gloss},
                          {"relevance", relevance_name(s.relevance)}});
    }
    nlohmann::json triples = nlohmann::json::array();
    for (const auto& t : graph.triples()) {
        triples.push_back({t.subject, predicate_name(t.predicate), t.object});
    }
    return {{"format", "kgcl-graph-v1"}, {"senses", senses}, {"triples", triples}};
}

inline KnowledgeGraph graph_from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != "kgcl-graph-v1") {
        throw ParseError("not a kgcl-graph-v1 document");
    }
    KnowledgeGraph graph;
    for (const auto& s : doc.at("senses")) {
        Relevance rel = Relevance::unscored;
        std::string rel_name = s.value("relevance", "unscored");
        if (rel_name == "relevant") rel = Relevance::relevant;
        else if (rel_name == "not_relevant") rel = Relevance::not_relevant;
        graph.add_sense({s.at("id").get<std::string>(), s.at("lemma").get<std::string>(),
                         s.at("pos").get<std::string>(), s.at("gloss").get<std::string>(), rel});
    }
    for (const auto& t : doc.at("triples")) {
        auto pred = predicate_from_name(t.at(1).get<std::string>());
        if (!pred) throw ParseError("unknown predicate: " + t.at(1).get<std::string>());
        graph.add_triple({t.at(0).get<std::string>(), *pred, t.at(2).get<std::string>()});
    }
    return graph;
}

// TSV export: subject_id, lemma, predicate, object.
inline void export_triples_tsv(const KnowledgeGraph& graph, std::ostream& out) {
    for (const auto& t : graph.triples()) {
        out << t.subject << '\t' << graph.sense(t.subject).lemma << '\t'
            << predicate_name(t.predicate) << '\t' << t.object << '\n';
    }
}

}  // namespace kgcl::kb
