#include <doctest.h>

#include <kgcl/mention.hpp>

using namespace kgcl;

namespace {

kb::KnowledgeGraph toy_graph() {
    kb::KnowledgeGraph graph;
    graph.add_sense({"s_ny", "New York", "noun", "a city", kb::Relevance::unscored});
    graph.add_sense({"s_nyc", "New York City", "noun", "the big city", kb::Relevance::unscored});
    graph.add_sense({"s_york", "York", "noun", "an older city", kb::Relevance::unscored});
    graph.add_sense({"s_cat", "cat", "noun", "an animal", kb::Relevance::unscored});
    graph.add_triple({"s_cat", kb::Predicate::form, "cats"});
    return graph;
}

// Reference implementation of the leftmost-longest policy: at each position,
// try every key by brute force, take the longest match, never overlap.
std::vector<std::pair<size_t, size_t>> brute_force_spans(
    const std::vector<std::vector<std::string>>& keys, const std::vector<std::string>& norm) {
    std::vector<std::pair<size_t, size_t>> spans;
    size_t i = 0;
    while (i < norm.size()) {
        size_t best = 0;
        for (const auto& key : keys) {
            if (key.size() > norm.size() - i || key.size() <= best) continue;
            bool match = true;
            for (size_t j = 0; j < key.size(); ++j) {
                if (norm[i + j] != key[j]) {
                    match = false;
                    break;
                }
            }
            if (match) best = key.size();
        }
        if (best == 0) {
            ++i;
        } else {
            spans.emplace_back(i, i + best);
            i += best;
        }
    }
    return spans;
}

}  // namespace

TEST_CASE("tokenize is lossless with byte offsets") {
    std::string text = "Hello, world!  It's  fine";
    auto tokens = mention::tokenize(text);
    REQUIRE(tokens.size() == 6);
    CHECK(tokens[0].text == "Hello");
    CHECK(tokens[1].text == ",");
    CHECK(tokens[2].text == "world");
    CHECK(tokens[3].text == "!");
    CHECK(tokens[4].text == "It's");
    CHECK(tokens[5].text == "fine");
    for (const auto& tok : tokens) {
        CHECK(text.substr(tok.start, tok.end - tok.start) == tok.text);
    }
    CHECK(mention::tokenize("").empty());
}

TEST_CASE("extraction is leftmost-longest and non-overlapping") {
    auto graph = toy_graph();
    auto trie = mention::build_trie(graph);

    std::string text = "I moved to New York City from York with my Cats";
    auto tokens = mention::tokenize(text);
    auto mentions = mention::extract_mentions(trie, tokens, text);
    REQUIRE(mentions.size() == 3);
    CHECK(mentions[0].surface == "New York City");  // longest wins over "New York"
    CHECK(mentions[0].candidate_senses == std::vector<std::string>{"s_nyc"});
    CHECK(mentions[1].surface == "York");
    CHECK(mentions[2].surface == "Cats");  // form triple, original casing kept
    CHECK(mentions[2].candidate_senses == std::vector<std::string>{"s_cat"});
}

TEST_CASE("matching is case- and whitespace-insensitive") {
    auto graph = toy_graph();
    auto trie = mention::build_trie(graph);
    std::string text = "new  YORK city";
    auto mentions = mention::extract_mentions(trie, mention::tokenize(text), text);
    REQUIRE(mentions.size() == 1);
    CHECK(mentions[0].surface == "new  YORK city");
}

TEST_CASE("trie extraction equals the brute-force scan on 1000 random texts") {
    // Random dictionary of 1-3 token keys over a small vocabulary, so overlap
    // and prefix situations are frequent.
    std::vector<std::string> vocab = {"alpha", "beta", "gamma", "delta", "epsilon",
                                      "zeta",  "eta",  "theta", "iota",  "kappa"};
    Rng rng(20240826);
    std::vector<std::vector<std::string>> keys;
    kb::KnowledgeGraph graph;
    for (size_t k = 0; k < 40; ++k) {
        size_t len = 1 + static_cast<size_t>(rng.below(3));
        std::vector<std::string> key;
        std::string phrase;
        for (size_t j = 0; j < len; ++j) {
            key.push_back(vocab[static_cast<size_t>(rng.below(vocab.size()))]);
            if (j) phrase += ' ';
            phrase += key.back();
        }
        std::string id = "k" + std::to_string(k);
        if (graph.add_sense({id, phrase, "noun", "g", kb::Relevance::unscored})) {
            keys.push_back(key);
        }
    }
    auto trie = mention::build_trie(graph);

    for (size_t t = 0; t < 1000; ++t) {
        std::vector<std::string> words;
        size_t n = 1 + static_cast<size_t>(rng.below(15));
        std::string text;
        for (size_t i = 0; i < n; ++i) {
            words.push_back(vocab[static_cast<size_t>(rng.below(vocab.size()))]);
            if (i) text += ' ';
            text += words.back();
        }
        auto mentions = mention::extract_mentions(trie, mention::tokenize(text), text);
        auto expected = brute_force_spans(keys, words);
        REQUIRE(mentions.size() == expected.size());
        for (size_t i = 0; i < mentions.size(); ++i) {
            CHECK(mentions[i].first_token == expected[i].first);
            CHECK(mentions[i].last_token == expected[i].second);
        }
    }
}

TEST_CASE("no mentions in unrelated text") {
    auto trie = mention::build_trie(toy_graph());
    std::string text = "nothing to see here";
    CHECK(mention::extract_mentions(trie, mention::tokenize(text), text).empty());
}
