#pragma once

// Seeded random streams. mt19937_64 output is fixed by the standard; the
// uniform and normal mappings below are our own, so streams are bit-stable
// across platforms and library versions.

#include <cmath>
#include <cstdint>
#include <random>

namespace gmmiter {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform on [0, 1), 53-bit resolution.
    double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; consumes exactly two uniforms per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - u01();  // (0, 1], keeps the log finite
        const double u2 = u01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace gmmiter
