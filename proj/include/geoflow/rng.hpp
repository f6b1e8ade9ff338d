#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "geoflow/vec.hpp"

namespace geoflow {

// Deterministic stream splitting: every consumer derives its own stream from
// (root seed, label path), so results do not depend on evaluation order or on
// how many worker threads the harness uses.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : state_(mix(seed ^ kPhi)) {}

    RngStream derive(std::uint64_t tag) const {
        RngStream s(0);
        s.state_ = mix(state_ ^ mix(tag + kPhi));
        return s;
    }

    RngStream derive(std::string_view label) const { return derive(fnv1a(label)); }

    std::mt19937_64 engine() const { return std::mt19937_64(state_); }

    Vec normal_vec(std::size_t n) const {
        std::mt19937_64 eng = engine();
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vec v(n);
        for (double& x : v) x = gauss(eng);
        return v;
    }

    std::uint64_t state() const { return state_; }

  private:
    static constexpr std::uint64_t kPhi = 0x9E3779B97F4A7C15ull;

    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z += kPhi;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xCBF29CE484222325ull;
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ull;
        }
        return h;
    }

    std::uint64_t state_;
};

}  // namespace geoflow
