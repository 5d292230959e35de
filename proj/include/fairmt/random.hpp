#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace fairmt {

/// Seeded 64-bit Mersenne twister with a portable uniform draw, so sampled
/// trajectories do not depend on the standard library's distribution code.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::string state() const {
        std::ostringstream out;
        out << engine_;
        return out.str();
    }
    void restore(const std::string& state) {
        std::istringstream in(state);
        in >> engine_;
    }

    bool operator==(const Rng&) const = default;

private:
    std::mt19937_64 engine_;
};

}  // namespace fairmt
