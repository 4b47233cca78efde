#pragma once

#include <string>

#include <Eigen/Core>

#include "genoja/errors.hpp"

namespace genoja {

using BVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A pair (A, B) of population matrices: A symmetric, B symmetric positive
/// definite with smallest eigenvalue >= mu > 0. R is the operator-norm bound
/// witnessed by the matrices themselves when they are used as a full-batch
/// stream.
struct ProblemSpec {
    int dim = 0;
    Matrix A;
    Matrix B;
    double mu = 0.0;
    double R = 0.0;
};

/// Validates symmetry of A and B (1e-12 relative) and positive definiteness
/// of B. mu is taken as the computed smallest eigenvalue of B; R defaults to
/// max of the two operator norms.
ProblemSpec make_problem(const Matrix& A, const Matrix& B);

/// Full spectral data of the pencil (A, B): eigenvalues of B^{-1}A sorted
/// descending by signed value, right eigenvectors B-normalized, left
/// eigenvectors tilde_u_i = B u_i.
struct EigenReference {
    Eigen::VectorXd eigenvalues;
    Matrix right_vectors;       // columns u_1..u_d, u_i' B u_i = 1
    Matrix left_vectors;        // columns B u_1..B u_d
    double gap = 0.0;           // lambda_1 - lambda_2
    bool gap_usable = false;    // false when gap <= 1e-10
    double left_principal_norm = 0.0;  // ||B u_1||_2

    const auto principal() const { return right_vectors.col(0); }
};

/// Solves A u = lambda B u through the symmetric reduction
/// B^{-1/2} A B^{-1/2}; B^{-1/2} is formed from the eigendecomposition of B.
/// Throws NonPositiveDefinite when B fails the SPD check.
EigenReference solve_reference(const ProblemSpec& problem);

/// sin^2 in the B-metric: 1 - (v'Bw)^2 / (||v||_B^2 ||w||_B^2), clamped into
/// [0,1]. Symmetric, and invariant to scaling/sign of either argument.
/// Throws DegenerateDirection on a zero vector. Cosine-squared overshoot
/// beyond 1 + 1e-10 indicates a non-SPD metric and throws logic_error.
double sin2_b(const BVector& v, const BVector& w, const Matrix& B);

/// v / ||v||_B. Throws DegenerateDirection on zero input.
BVector b_normalize(const BVector& v, const Matrix& B);

/// Dense row-major text format: first line "d", then d lines of d
/// space-separated decimals.
Matrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const Matrix& m);

}  // namespace genoja
