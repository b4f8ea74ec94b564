#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace attx {

// Deterministic generator with named substreams. Every consumer derives its
// stream from (seed, name), so adding or removing one consumer never shifts
// the draws seen by another. All outputs are computed from integer state with
// explicit arithmetic, so sequences are identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t seed, const std::string& stream);

    std::uint64_t next_u64();

    // [0, 1), 53-bit resolution
    double uniform();
    double uniform(double lo, double hi);
    // standard normal via Box-Muller
    double normal();
    // inclusive on both ends
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    template <class T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i)));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::uint64_t s_[4];
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

std::uint64_t fnv1a(const std::string& s);

}  // namespace attx
