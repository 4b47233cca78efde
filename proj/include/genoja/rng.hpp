#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace genoja {

// splitmix64 (Steele/Lea/Vigna). Chosen so that sample streams are a pure
// function of (seed, draw index) and reproducible across implementations;
// the constants below are the published ones.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derive an independent stream seed from (seed, tag).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t s = seed ^ (0xBF58476D1CE4E5B9ULL * (tag + 1));
    return splitmix64_next(s);
}

/// Deterministic generator: splitmix64 uniforms, Box-Muller normals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    /// Uniform in [0, 1), 53-bit mantissa.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; pairs are cached, so each pair of
    /// calls consumes exactly two uniforms.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] so the log is finite.
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// +1 or -1 with equal probability.
    double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

    Eigen::VectorXd normal_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    /// Uniform draw from the Euclidean unit sphere.
    Eigen::VectorXd unit_sphere(Eigen::Index n) {
        Eigen::VectorXd v = normal_vector(n);
        double nrm = v.norm();
        while (nrm == 0.0) {  // measure zero, but keep the draw total
            v = normal_vector(n);
            nrm = v.norm();
        }
        return v / nrm;
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace genoja
