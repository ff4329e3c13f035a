#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>
#include <kgcl/common.hpp>

namespace kgcl::encoder {

// Hashed word n-gram featurizer shared by the text encoder and the
// definition-relevance model. Pure function of (spec, text).
struct HashSpec {
    size_t dim = 4096;
    std::vector<size_t> ngram_orders = {1, 2};
    uint64_t seed_salt = 0x6b67636cull;  // feature-hash salt
};

inline std::vector<std::string> word_tokens_lower(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

// Sparse (index, count) features; indices strictly increasing.
inline std::vector<std::pair<uint32_t, double>> hash_features(const HashSpec& spec,
                                                              std::string_view text) {
    std::vector<std::string> words = word_tokens_lower(text);
    std::vector<std::pair<uint32_t, double>> out;
    std::vector<std::pair<uint32_t, double>> raw;
    for (size_t order : spec.ngram_orders) {
        if (order == 0 || words.size() < order) continue;
        for (size_t i = 0; i + order <= words.size(); ++i) {
            uint64_t h = spec.seed_salt ^ (0x9e3779b97f4a7c15ull * order);
            for (size_t j = 0; j < order; ++j) {
                h = fnv1a64(words[i + j], h);
                h = fnv1a64("\x1f", h);
            }
            raw.emplace_back(static_cast<uint32_t>(h % spec.dim), 1.0);
        }
    }
    std::sort(raw.begin(), raw.end());
    for (const auto& [idx, v] : raw) {
        if (!out.empty() && out.back().first == idx) {
            out.back().second += v;
        } else {
            out.emplace_back(idx, v);
        }
    }
    return out;
}

inline void l2_normalize(std::vector<std::pair<uint32_t, double>>& features) {
    double sq = 0.0;
    for (const auto& [idx, v] : features) sq += v * v;
    if (sq <= 0.0) return;
    double inv = 1.0 / std::sqrt(sq);
    for (auto& [idx, v] : features) v *= inv;
}

// Text encoder interface: text -> dense real vector of fixed dimension.
class Encoder {
public:
    virtual ~Encoder() = default;
    virtual size_t dim() const = 0;
    virtual std::string descriptor() const = 0;
    // Sparse form; the dense vector is its scatter. Deterministic and pure.
    virtual std::vector<std::pair<uint32_t, double>> encode_sparse(std::string_view text) const = 0;

    std::vector<double> encode(std::string_view text) const {
        std::vector<double> v(dim(), 0.0);
        for (const auto& [idx, val] : encode_sparse(text)) v[idx] = val;
        return v;
    }
};

// Default desk-scale encoder: L2-normalized hashed unigram+bigram counts.
class HashedEncoder final : public Encoder {
public:
    explicit HashedEncoder(HashSpec spec = {}) : spec_(std::move(spec)) {}

    size_t dim() const override { return spec_.dim; }
    std::string descriptor() const override { return "hashed-ngram"; }
    const HashSpec& spec() const { return spec_; }

    std::vector<std::pair<uint32_t, double>> encode_sparse(std::string_view text) const override {
        auto features = hash_features(spec_, text);
        l2_normalize(features);
        return features;
    }

private:
    HashSpec spec_;
};

inline nlohmann::json encoder_spec_to_json(const Encoder& enc) {
    if (const auto* hashed = dynamic_cast<const HashedEncoder*>(&enc)) {
        return {{"descriptor", hashed->descriptor()},
                {"dim", hashed->spec().dim},
                {"ngram_orders", hashed->spec().ngram_orders},
                {"seed_salt", hashed->spec().seed_salt}};
    }
    return {{"descriptor", enc.descriptor()}, {"dim", enc.dim()}};
}

// Unknown descriptors fail fast.
inline std::shared_ptr<Encoder> make_encoder(const nlohmann::json& spec) {
    std::string descriptor = spec.at("descriptor").get<std::string>();
    if (descriptor == "hashed-ngram") {
        HashSpec hs;
        hs.dim = spec.value("dim", hs.dim);
        if (spec.contains("ngram_orders")) {
            hs.ngram_orders = spec.at("ngram_orders").get<std::vector<size_t>>();
        }
        hs.seed_salt = spec.value("seed_salt", hs.seed_salt);
        return std::make_shared<HashedEncoder>(hs);
    }
    throw ConfigError("unknown encoder descriptor: " + descriptor);
}

}  // namespace kgcl::encoder
