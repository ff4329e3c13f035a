#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <kgcl/common.hpp>
#include <kgcl/kb.hpp>

namespace kgcl::mention {

struct Token {
    std::string text;
    size_t start = 0;  // offset into the original string
    size_t end = 0;    // exclusive
};

namespace detail {

inline bool is_word_char(unsigned char c) {
    return std::isalnum(c) || c == '\'' || c == '_' || c >= 0x80;
}

}  // namespace detail

// Whitespace/punctuation split; punctuation marks are single-character tokens.
// Lossless: every non-whitespace character belongs to exactly one token.
inline std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        size_t start = i;
        if (detail::is_word_char(c)) {
            while (i < text.size() && detail::is_word_char(static_cast<unsigned char>(text[i]))) {
                ++i;
            }
        } else {
            ++i;
        }
        tokens.push_back({std::string(text.substr(start, i - start)), start, i});
    }
    return tokens;
}

class MentionTrie {
public:
    MentionTrie() : nodes_(1) {}

    void insert(std::span<const std::string> key_tokens, const std::string& sense_id) {
        if (key_tokens.empty()) return;
        size_t node = 0;
        for (const std::string& tok : key_tokens) {
            auto it = nodes_[node].children.find(tok);
            if (it == nodes_[node].children.end()) {
                nodes_.push_back({});
                it = nodes_[node].children.emplace(tok, nodes_.size() - 1).first;
            }
            node = it->second;
        }
        auto& senses = nodes_[node].senses;
        if (senses.empty()) ++key_count_;
        if (std::find(senses.begin(), senses.end(), sense_id) == senses.end()) {
            senses.push_back(sense_id);
        }
    }

    const std::vector<std::string>* lookup(std::span<const std::string> key_tokens) const {
        size_t node = 0;
        for (const std::string& tok : key_tokens) {
            auto it = nodes_[node].children.find(tok);
            if (it == nodes_[node].children.end()) return nullptr;
            node = it->second;
        }
        return nodes_[node].senses.empty() ? nullptr : &nodes_[node].senses;
    }

    size_t key_count() const { return key_count_; }

    // Walks from the root along `tokens`, reporting every terminal depth.
    // Returns (match length, senses) pairs in increasing length order.
    std::vector<std::pair<size_t, const std::vector<std::string>*>> prefix_matches(
        std::span<const std::string> tokens) const {
        std::vector<std::pair<size_t, const std::vector<std::string>*>> out;
        size_t node = 0;
        for (size_t len = 0; len < tokens.size(); ++len) {
            auto it = nodes_[node].children.find(tokens[len]);
            if (it == nodes_[node].children.end()) break;
            node = it->second;
            if (!nodes_[node].senses.empty()) out.emplace_back(len + 1, &nodes_[node].senses);
        }
        return out;
    }

private:
    struct Node {
        std::map<std::string, size_t> children;
        std::vector<std::string> senses;
    };
    std::vector<Node> nodes_;
    size_t key_count_ = 0;
};

// Inserts every surface form of every sense, tokenized and normalized.
inline MentionTrie build_trie(const kb::KnowledgeGraph& graph) {
    MentionTrie trie;
    for (const auto& [id, sense] : graph.senses()) {
        for (const std::string& form : kb::surface_forms(graph, sense.lemma)) {
            std::vector<std::string> key;
            for (const Token& tok : tokenize(form)) key.push_back(normalize_term(tok.text));
            trie.insert(key, id);
        }
    }
    return trie;
}

struct Mention {
    size_t first_token = 0;
    size_t last_token = 0;  // exclusive
    std::string surface;    // original casing, original spacing within the span
    std::vector<std::string> candidate_senses;
};

// Left-to-right longest-match scan over normalized tokens; matches never
// overlap and the scan resumes after each emitted span.
inline std::vector<Mention> extract_mentions(const MentionTrie& trie,
                                             const std::vector<Token>& tokens,
                                             std::string_view original_text = {}) {
    std::vector<std::string> norm(tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i) norm[i] = normalize_term(tokens[i].text);

    std::vector<Mention> mentions;
    size_t i = 0;
    while (i < tokens.size()) {
        auto matches = trie.prefix_matches(std::span(norm).subspan(i));
        if (matches.empty()) {
            ++i;
            continue;
        }
        const auto& [len, senses] = matches.back();  // longest
        Mention m;
        m.first_token = i;
        m.last_token = i + len;
        if (!original_text.empty()) {
            m.surface = std::string(
                original_text.substr(tokens[i].start, tokens[i + len - 1].end - tokens[i].start));
        } else {
            for (size_t j = i; j < i + len; ++j) {
                if (j > i) m.surface += ' ';
                m.surface += tokens[j].text;
            }
        }
        m.candidate_senses = *senses;
        mentions.push_back(std::move(m));
        i += len;
    }
    return mentions;
}

}  // namespace kgcl::mention
