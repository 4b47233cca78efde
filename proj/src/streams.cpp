#include "genoja/streams.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace genoja {

namespace {

constexpr double kClipFactor = 20.0;
constexpr std::uint64_t kPopulationTag = 0x706F70;  // population sub-stream
constexpr std::uint64_t kProbeTag = 0x70726F62;

Matrix haar_orthogonal(int d, Rng& rng) {
    Matrix g(d, d);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) g(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

/// Symmetric PSD square root with tiny negative eigenvalues clamped to zero.
Matrix psd_sqrt(const Matrix& m, double floor_tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success ||
        es.eigenvalues().minCoeff() < -floor_tol) {
        throw InvalidCovariance("matrix is not positive semidefinite");
    }
    Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
}

/// Splits symmetric A into square roots of its PSD parts A = A+ - A-.
void split_psd_parts(const Matrix& A, Matrix& plus_sqrt, Matrix& minus_sqrt,
                     bool& two_sided) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    Eigen::VectorXd pos = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::VectorXd neg = (-es.eigenvalues()).cwiseMax(0.0).cwiseSqrt();
    plus_sqrt = es.eigenvectors() * pos.asDiagonal() * es.eigenvectors().transpose();
    minus_sqrt = es.eigenvectors() * neg.asDiagonal() * es.eigenvectors().transpose();
    double neg_mass = neg.squaredNorm();
    double pos_mass = pos.squaredNorm();
    two_sided = neg_mass > 1e-14 * std::max(pos_mass, 1.0);
}

double gaussian_radius_sq(const ProblemSpec& p) {
    return std::max(p.A.trace(), p.B.trace());
}

void clip_rank_one(Matrix& m, double norm, double radius) {
    if (norm > radius) m *= radius / norm;
}

}  // namespace

std::string to_string(StreamKind k) {
    switch (k) {
        case StreamKind::Deterministic: return "deterministic";
        case StreamKind::GaussianGev: return "gaussian-gev";
        case StreamKind::CcaGaussian: return "cca-gaussian";
        case StreamKind::Pca: return "pca";
    }
    return "unknown";
}

StreamKind stream_kind_from_string(const std::string& s) {
    if (s == "deterministic") return StreamKind::Deterministic;
    if (s == "gaussian-gev") return StreamKind::GaussianGev;
    if (s == "cca-gaussian") return StreamKind::CcaGaussian;
    if (s == "pca") return StreamKind::Pca;
    throw ConfigError("unknown stream kind: " + s);
}

StreamSpec make_deterministic_stream(const ProblemSpec& population) {
    StreamSpec spec;
    spec.kind = StreamKind::Deterministic;
    spec.dim = population.dim;
    spec.population = population;
    spec.radius_sq = std::max(population.A.operatorNorm(),
                              population.B.operatorNorm());
    return spec;
}

StreamSpec make_gaussian_stream(const ProblemSpec& population,
                                std::uint64_t seed, bool clip) {
    StreamSpec spec;
    spec.kind = StreamKind::GaussianGev;
    spec.seed = seed;
    spec.dim = population.dim;
    spec.population = population;
    spec.radius_sq = gaussian_radius_sq(population);
    split_psd_parts(population.A, spec.a_plus_sqrt, spec.a_minus_sqrt,
                    spec.a_two_sided);
    spec.b_sqrt = psd_sqrt(population.B, 1e-10);
    if (clip) {
        spec.clip_radius = kClipFactor * spec.radius_sq;
        spec.population.R = *spec.clip_radius;
    }
    return spec;
}

std::pair<StreamSpec, ProblemSpec> make_gaussian_gev_stream(
    int dim, std::uint64_t seed, const Eigen::VectorXd& spectrum, bool clip) {
    if (dim < 2) throw InvalidDimension("gaussian-gev stream needs dim >= 2");
    if (spectrum.size() != dim || spectrum.minCoeff() <= 0.0) {
        throw InvalidDimension("spectrum must have dim positive entries");
    }
    Rng rng(derive_seed(seed, kPopulationTag));
    Matrix qa = haar_orthogonal(dim, rng);
    Matrix qb = haar_orthogonal(dim, rng);
    Matrix A = qa * spectrum.asDiagonal() * qa.transpose();
    Matrix B = qb * spectrum.asDiagonal() * qb.transpose();
    A = ((A + A.transpose()) * 0.5).eval();
    B = ((B + B.transpose()) * 0.5).eval();
    ProblemSpec population = make_problem(A, B);
    StreamSpec spec = make_gaussian_stream(population, seed, clip);
    return {spec, spec.population};
}

std::pair<StreamSpec, ProblemSpec> make_gaussian_gev_stream(int dim,
                                                            std::uint64_t seed,
                                                            bool clip) {
    Eigen::VectorXd spectrum(dim);
    for (int i = 0; i < dim; ++i) spectrum[i] = 1.0 / (i + 1);
    return make_gaussian_gev_stream(dim, seed, spectrum, clip);
}

CcaJointSpec make_cca_identity_joint(int dx, int dy,
                                     const Eigen::VectorXd& rhos) {
    CcaJointSpec joint;
    joint.dx = dx;
    joint.dy = dy;
    joint.sigma_xx = Matrix::Identity(dx, dx);
    joint.sigma_yy = Matrix::Identity(dy, dy);
    joint.sigma_xy = Matrix::Zero(dx, dy);
    int k = static_cast<int>(rhos.size());
    for (int i = 0; i < std::min({dx, dy, k}); ++i) {
        joint.sigma_xy(i, i) = rhos[i];
    }
    return joint;
}

std::pair<StreamSpec, ProblemSpec> make_cca_stream(const CcaJointSpec& joint,
                                                   std::uint64_t seed) {
    const int dx = joint.dx, dy = joint.dy, d = dx + dy;
    if (dx < 1 || dy < 1) throw InvalidDimension("cca stream needs dx, dy >= 1");

    Matrix sigma(d, d);
    sigma.topLeftCorner(dx, dx) = joint.sigma_xx;
    sigma.topRightCorner(dx, dy) = joint.sigma_xy;
    sigma.bottomLeftCorner(dy, dx) = joint.sigma_xy.transpose();
    sigma.bottomRightCorner(dy, dy) = joint.sigma_yy;

    Eigen::SelfAdjointEigenSolver<Matrix> marg_x(joint.sigma_xx);
    Eigen::SelfAdjointEigenSolver<Matrix> marg_y(joint.sigma_yy);
    if (marg_x.eigenvalues().minCoeff() <= 0.0 ||
        marg_y.eigenvalues().minCoeff() <= 0.0) {
        throw InvalidCovariance("marginal covariances must be SPD");
    }

    StreamSpec spec;
    spec.kind = StreamKind::CcaGaussian;
    spec.seed = seed;
    spec.dim = d;
    spec.dx = dx;
    spec.dy = dy;
    spec.joint_sqrt = psd_sqrt(sigma, 1e-10);  // throws InvalidCovariance

    Matrix A = Matrix::Zero(d, d);
    A.topRightCorner(dx, dy) = joint.sigma_xy;
    A.bottomLeftCorner(dy, dx) = joint.sigma_xy.transpose();
    Matrix B = Matrix::Zero(d, d);
    B.topLeftCorner(dx, dx) = joint.sigma_xx;
    B.bottomRightCorner(dy, dy) = joint.sigma_yy;
    spec.population = make_problem(A, B);
    spec.radius_sq = gaussian_radius_sq(spec.population);
    return {spec, spec.population};
}

std::pair<StreamSpec, ProblemSpec> make_pca_stream(const Matrix& A,
                                                   std::uint64_t seed,
                                                   bool clip) {
    ProblemSpec population =
        make_problem(A, Matrix::Identity(A.rows(), A.cols()));
    StreamSpec spec = make_gaussian_stream(population, seed, clip);
    spec.kind = StreamKind::Pca;
    return {spec, spec.population};
}

MatrixSample StreamSampler::next() {
    const StreamSpec& s = *spec_;
    switch (s.kind) {
        case StreamKind::Deterministic:
            return {s.population.A, s.population.B};
        case StreamKind::GaussianGev:
        case StreamKind::Pca: {
            MatrixSample out;
            // A_t: sign draw (only when A has a negative part), then the
            // rank-one factor.
            double scale = 1.0;
            const Matrix* factor = &s.a_plus_sqrt;
            if (s.a_two_sided) {
                double sign = rng_.sign();
                scale = 2.0 * sign;
                factor = (sign > 0.0) ? &s.a_plus_sqrt : &s.a_minus_sqrt;
            }
            Eigen::VectorXd a = (*factor) * rng_.normal_vector(s.dim);
            out.A = scale * (a * a.transpose());
            if (s.clip_radius) {
                clip_rank_one(out.A, std::abs(scale) * a.squaredNorm(),
                              *s.clip_radius);
            }
            if (s.kind == StreamKind::Pca) {
                out.B = Matrix::Identity(s.dim, s.dim);
            } else {
                Eigen::VectorXd b = s.b_sqrt * rng_.normal_vector(s.dim);
                out.B = b * b.transpose();
                if (s.clip_radius) {
                    clip_rank_one(out.B, b.squaredNorm(), *s.clip_radius);
                }
            }
            return out;
        }
        case StreamKind::CcaGaussian: {
            Eigen::VectorXd xy = s.joint_sqrt * rng_.normal_vector(s.dim);
            auto x = xy.head(s.dx);
            auto y = xy.tail(s.dy);
            MatrixSample out;
            out.A = Matrix::Zero(s.dim, s.dim);
            out.A.topRightCorner(s.dx, s.dy) = x * y.transpose();
            out.A.bottomLeftCorner(s.dy, s.dx) = y * x.transpose();
            out.B = Matrix::Zero(s.dim, s.dim);
            out.B.topLeftCorner(s.dx, s.dx) = x * x.transpose();
            out.B.bottomRightCorner(s.dy, s.dy) = y * y.transpose();
            return out;
        }
    }
    throw std::logic_error("unreachable stream kind");
}

double estimate_radius(const StreamSpec& spec, int n_probe) {
    if (n_probe < 1) throw InvalidDimension("estimate_radius needs n_probe >= 1");
    StreamSampler sampler(spec, derive_seed(spec.seed, kProbeTag));
    double r = spec.radius_sq;
    for (int i = 0; i < n_probe; ++i) {
        MatrixSample m = sampler.next();
        r = std::max({r, m.A.operatorNorm(), m.B.operatorNorm()});
    }
    return r;
}

}  // namespace genoja
