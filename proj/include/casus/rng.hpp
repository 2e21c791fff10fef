#pragma once

// Counter-based random streams. A stream is identified by a 64-bit key
// derived from (seed, path); draws are pure functions of (key, counter),
// so results do not depend on evaluation order or thread count.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

#include <Eigen/Core>

namespace casus {

// splitmix64 finalizer (Steele/Lea/Flood; Vigna's public-domain code)
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a, used for hashing case ids into stream paths and file digests.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class RandomStream {
public:
    RandomStream() : key_(mix64(0)) {}
    explicit RandomStream(std::uint64_t seed) : key_(mix64(mix64(seed))) {}

    // Derive an independent sub-stream. child(a).child(b) != child(b).child(a).
    [[nodiscard]] RandomStream child(std::uint64_t index) const {
        RandomStream s;
        s.key_ = mix64(key_ ^ mix64(index + 0x632be59bd9b4e019ULL));
        return s;
    }
    [[nodiscard]] RandomStream child(std::string_view name) const { return child(fnv1a64(name)); }

    std::uint64_t next_u64() { return mix64(key_ ^ mix64(counter_++ + 0x9e3779b97f4a7c15ULL)); }

    // uniform on [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal pair via Box-Muller
    Eigen::Vector2d normal2() {
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(t), r * std::sin(t)};
    }

    double normal() { return normal2()(0); }

    Eigen::VectorXd normal_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; i += 2) {
            const Eigen::Vector2d z = normal2();
            v(i) = z(0);
            if (i + 1 < n) v(i + 1) = z(1);
        }
        return v;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace casus
