#include "genoja/core.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <Eigen/Dense>

namespace genoja {

namespace {

void check_symmetric(const Matrix& m, const char* name) {
    double scale = m.cwiseAbs().maxCoeff();
    double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(scale, 1.0)) {
        throw std::invalid_argument(std::string(name) +
                                    " is not symmetric within tolerance");
    }
}

// Fix sign so the largest-magnitude coordinate is positive; ties broken by
// the first index reaching the maximum.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0.0) v = -v;
}

}  // namespace

ProblemSpec make_problem(const Matrix& A, const Matrix& B) {
    if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows() ||
        A.rows() < 1) {
        throw InvalidDimension("A and B must be square with equal dimension");
    }
    check_symmetric(A, "A");
    check_symmetric(B, "B");

    Eigen::SelfAdjointEigenSolver<Matrix> es(B);
    if (es.info() != Eigen::Success) {
        throw NonPositiveDefinite("eigendecomposition of B failed");
    }
    double bmin = es.eigenvalues().minCoeff();
    if (bmin <= 0.0) {
        throw NonPositiveDefinite("B has a nonpositive eigenvalue");
    }

    ProblemSpec p;
    p.dim = static_cast<int>(A.rows());
    p.A = A;
    p.B = B;
    p.mu = bmin;
    p.R = std::max(A.operatorNorm(), B.operatorNorm());
    return p;
}

EigenReference solve_reference(const ProblemSpec& problem) {
    const int d = problem.dim;
    Eigen::SelfAdjointEigenSolver<Matrix> esb(problem.B);
    if (esb.info() != Eigen::Success || esb.eigenvalues().minCoeff() <= 0.0) {
        throw NonPositiveDefinite("B is not positive definite");
    }

    Eigen::VectorXd s = esb.eigenvalues();
    const Matrix& U = esb.eigenvectors();
    Matrix b_inv_sqrt =
        U * s.cwiseSqrt().cwiseInverse().asDiagonal() * U.transpose();

    Matrix C = b_inv_sqrt * problem.A * b_inv_sqrt;
    C = ((C + C.transpose()) * 0.5).eval();  // kill rounding asymmetry
    Eigen::SelfAdjointEigenSolver<Matrix> esc(C);
    if (esc.info() != Eigen::Success) {
        throw NonPositiveDefinite("eigendecomposition of B^{-1/2}AB^{-1/2} failed");
    }

    // Eigen returns ascending order; we want descending by signed value.
    EigenReference ref;
    ref.eigenvalues.resize(d);
    ref.right_vectors.resize(d, d);
    for (int i = 0; i < d; ++i) {
        ref.eigenvalues[i] = esc.eigenvalues()[d - 1 - i];
        ref.right_vectors.col(i) = b_inv_sqrt * esc.eigenvectors().col(d - 1 - i);
    }
    for (int i = 0; i < d; ++i) {
        auto u = ref.right_vectors.col(i);
        double bnorm = std::sqrt(u.dot(problem.B * u));
        ref.right_vectors.col(i) /= bnorm;
        fix_sign(ref.right_vectors.col(i));
    }
    ref.left_vectors = problem.B * ref.right_vectors;
    ref.gap = (d >= 2) ? ref.eigenvalues[0] - ref.eigenvalues[1]
                       : std::numeric_limits<double>::infinity();
    ref.gap_usable = ref.gap > 1e-10;
    ref.left_principal_norm = ref.left_vectors.col(0).norm();
    return ref;
}

double sin2_b(const BVector& v, const BVector& w, const Matrix& B) {
    double vbv = v.dot(B * v);
    double wbw = w.dot(B * w);
    if (!(vbv > 0.0) || !(wbw > 0.0)) {
        throw DegenerateDirection("sin2_b needs nonzero directions");
    }
    double vbw = v.dot(B * w);
    double cos2 = (vbw * vbw) / (vbv * wbw);
    if (cos2 > 1.0 + 1e-10) {
        throw std::logic_error("B-cosine exceeded 1 beyond rounding; metric not SPD?");
    }
    double s = 1.0 - std::min(cos2, 1.0);
    return std::min(std::max(s, 0.0), 1.0);
}

BVector b_normalize(const BVector& v, const Matrix& B) {
    double vbv = v.dot(B * v);
    if (!(vbv > 0.0)) {
        throw DegenerateDirection("cannot B-normalize a zero vector");
    }
    return v / std::sqrt(vbv);
}

Matrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open matrix file: " + path);
    int d = 0;
    in >> d;
    if (d < 1) throw ConfigError("bad dimension in matrix file: " + path);
    Matrix m(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (!(in >> m(i, j))) {
                throw ConfigError("truncated matrix file: " + path);
            }
        }
    }
    return m;
}

void save_matrix(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write matrix file: " + path);
    out << m.rows() << "\n";
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << m(i, j) << (j + 1 == m.cols() ? "" : " ");
        }
        out << "\n";
    }
}

}  // namespace genoja
