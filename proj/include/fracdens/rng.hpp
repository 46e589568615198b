#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace fracdens {

// SplitMix64 finalizer; the basis for all seed derivation in this project.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Documented seed splitting rule: every derived stream (replication r,
// dimension j, bootstrap b, ...) uses derive_seed(parent, index).  Two mix64
// rounds keep streams decorrelated even for adjacent indices, and the rule
// composes: derive_seed(derive_seed(root, r), j) is the stream for
// replication r, dimension j.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
    return mix64(parent ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

// Gaussian sampler with an explicit uniform mapping and Box-Muller transform.
// Avoids std::normal_distribution so that streams are bit-identical across
// standard library implementations, not just across runs of one build.
class NormalSampler {
  public:
    explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}

    // Strictly inside (0,1): top 53 bits, offset by half an ulp.
    double uniform01() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    void fill_normal(std::span<double> out) {
        for (double& v : out) v = normal();
    }

    std::mt19937_64& engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fracdens
