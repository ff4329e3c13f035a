#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kgcl {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// FNV-1a, 64-bit. Stable across platforms; used for sense ids and feature hashing.
inline uint64_t fnv1a64(std::string_view s, uint64_t seed = 0xcbf29ce484222325ull) {
    uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t mix64(uint64_t a, uint64_t b) {
    uint64_t z = a + 0x9e3779b97f4a7c15ull + b * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

// Case-fold (ASCII) and collapse runs of whitespace to single spaces.
inline std::string normalize_term(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            in_space = !out.empty();
            continue;
        }
        if (in_space) {
            out.push_back(' ');
            in_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

// Deterministic PRNG (splitmix64). The standard distributions are
// implementation-defined, so all sampling goes through this type.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased uniform in [0, n).
    uint64_t below(uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below(0)");
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[static_cast<size_t>(below(i))]);
        }
    }

    // Uniform sample without replacement of min(n, |v|) indices from [0, count).
    std::vector<size_t> sample_indices(size_t count, size_t n) {
        std::vector<size_t> idx(count);
        for (size_t i = 0; i < count; ++i) idx[i] = i;
        size_t take = std::min(n, count);
        for (size_t i = 0; i < take; ++i) {
            size_t j = i + static_cast<size_t>(below(count - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(take);
        std::sort(idx.begin(), idx.end());
        return idx;
    }

private:
    uint64_t state_;
};

}  // namespace kgcl
