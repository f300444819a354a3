#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace snwit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Largest absolute entry of A - B.
inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs(const Matrix& a) {
    return a.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& a, double tol = 1e-12) {
    return max_abs_diff(a, a.adjoint()) < tol;
}

// Smallest eigenvalue of a Hermitian matrix.
inline double min_eigenvalue(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

// Engine seeded from (seed, stream) so parallel or per-trial draws stay
// reproducible and order-independent.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{seed, stream};
    return std::mt19937_64(seq);
}

}  // namespace snwit
