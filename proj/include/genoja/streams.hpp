#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "genoja/core.hpp"
#include "genoja/rng.hpp"

namespace genoja {

/// One stream element: A_t symmetric, B_t symmetric PSD.
struct MatrixSample {
    Matrix A;
    Matrix B;
};

enum class StreamKind { Deterministic, GaussianGev, CcaGaussian, Pca };

std::string to_string(StreamKind k);
StreamKind stream_kind_from_string(const std::string& s);

/// Joint Gaussian law of (X, Y) for CCA block streams.
struct CcaJointSpec {
    int dx = 0;
    int dy = 0;
    Matrix sigma_xx;
    Matrix sigma_yy;
    Matrix sigma_xy;
};

/// Immutable description of a sample source. `radius_sq` is the stream
/// radius R^2 = max(tr A, tr B) for stochastic kinds (operator norms for the
/// deterministic kind); schedules of the form alpha = 1/(2 R^2) consume it.
struct StreamSpec {
    StreamKind kind = StreamKind::Deterministic;
    std::uint64_t seed = 0;
    int dim = 0;
    ProblemSpec population;
    double radius_sq = 0.0;
    std::optional<double> clip_radius;  // operator-norm cap on samples

    // Gaussian GEV factors: population = Q D Q' with these square roots
    // cached for sampling (A_plus^{1/2}, A_minus^{1/2}, B^{1/2}).
    Matrix a_plus_sqrt;
    Matrix a_minus_sqrt;
    Matrix b_sqrt;
    bool a_two_sided = false;  // true when A has a nonzero negative part

    // CCA: symmetric square root of the joint covariance of (X, Y).
    Matrix joint_sqrt;
    int dx = 0;
    int dy = 0;
};

/// Full-batch source: every sample is exactly (A, B).
StreamSpec make_deterministic_stream(const ProblemSpec& population);

/// Synthetic GEV stream matching a 1/i spectral decay: population
/// A = Q_A D Q_A', B = Q_B D Q_B' with D = diag(1, 1/2, ..., 1/d) and
/// independent Haar-random Q_A, Q_B drawn from `seed`. Samples are rank-one
/// outer products, clipped at 20 * max(tr A, tr B) when `clip` is set.
std::pair<StreamSpec, ProblemSpec> make_gaussian_gev_stream(
    int dim, std::uint64_t seed, bool clip = true);

/// As above with an explicit spectrum for A and B.
std::pair<StreamSpec, ProblemSpec> make_gaussian_gev_stream(
    int dim, std::uint64_t seed, const Eigen::VectorXd& spectrum,
    bool clip = true);

/// Gaussian stream over an arbitrary fixed population (A, B). A is split
/// into PSD parts for unbiased rank-one sampling.
StreamSpec make_gaussian_stream(const ProblemSpec& population,
                                std::uint64_t seed, bool clip = true);

/// CCA block stream: each draw (x, y) of the joint law emits
/// A_t = [[0, x y'], [y x', 0]], B_t = [[x x', 0], [0, y y']].
std::pair<StreamSpec, ProblemSpec> make_cca_stream(const CcaJointSpec& joint,
                                                   std::uint64_t seed);

/// Convenience joint spec with identity marginals and diagonal coupling
/// E[XY'] = diag(rhos).
CcaJointSpec make_cca_identity_joint(int dx, int dy,
                                     const Eigen::VectorXd& rhos);

/// PCA stream: B_t = I exactly, A_t a rank-one sample of the PSD matrix A.
std::pair<StreamSpec, ProblemSpec> make_pca_stream(const Matrix& A,
                                                   std::uint64_t seed,
                                                   bool clip = false);

/// Draws i.i.d. samples from a StreamSpec; the sequence is a pure function
/// of (spec.seed, sampler seed offset, draw index). A sampler is single
/// threaded; run one per trial.
class StreamSampler {
  public:
    explicit StreamSampler(const StreamSpec& spec)
        : StreamSampler(spec, spec.seed) {}
    StreamSampler(const StreamSpec& spec, std::uint64_t sample_seed)
        : spec_(&spec), rng_(sample_seed) {}

    MatrixSample next();

    const StreamSpec& spec() const { return *spec_; }

  private:
    const StreamSpec* spec_;
    Rng rng_;
};

/// Max operator norm over n_probe samples, combined with the population
/// radius formula max(tr A, tr B).
double estimate_radius(const StreamSpec& spec, int n_probe);

}  // namespace genoja
