#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hb {

/// Seeded mt19937_64 with distribution code written out, so streams are
/// identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
    double normal() {
        // Box-Muller; 1 - u keeps the log argument positive.
        const double u = 1.0 - uniform(), v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace hb
