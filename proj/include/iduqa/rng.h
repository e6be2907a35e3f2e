#pragma once

// Deterministic randomness helpers. std::shuffle, std::sample, and the
// distribution classes are implementation-defined, so seeded runs would
// differ across standard libraries; these hand-rolled versions consume
// std::mt19937_64 output the same way everywhere.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace iduqa {

inline uint64_t fnv1a(std::string_view text) {
    uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

template <typename T>
void shuffle_deterministic(std::vector<T>& values, std::mt19937_64& gen) {
    if (values.size() < 2) {
        return;
    }
    for (size_t i = values.size() - 1; i > 0; --i) {
        size_t j = static_cast<size_t>(gen() % (i + 1));
        std::swap(values[i], values[j]);
    }
}

/// k distinct indices drawn from [0, n) by partial Fisher-Yates,
/// returned ascending. k >= n returns all of them.
inline std::vector<size_t> sample_indices(size_t n, size_t k, std::mt19937_64& gen) {
    std::vector<size_t> pool(n);
    for (size_t i = 0; i < n; ++i) {
        pool[i] = i;
    }
    if (k >= n) {
        return pool;
    }
    for (size_t i = 0; i < k; ++i) {
        size_t j = i + static_cast<size_t>(gen() % (n - i));
        std::swap(pool[i], pool[j]);
    }
    std::vector<size_t> chosen(pool.begin(), pool.begin() + static_cast<long>(k));
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

} // namespace iduqa
