#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include "snwit/matrix.hpp"
#include "snwit/operator_basis.hpp"
#include "snwit/positive_maps.hpp"
#include "snwit/rotations.hpp"

namespace snwit {

// Density operator on C^dA (x) C^dB. The constructor rejects anything that
// is not a state: Hermiticity and unit trace at 1e-12, positivity at -1e-10.
struct BipartiteState {
    Matrix matrix;
    int dA = 0;
    int dB = 0;

    BipartiteState(Matrix m, int dim_a, int dim_b)
        : matrix(std::move(m)), dA(dim_a), dB(dim_b) {
        if (dA < 1 || dB < 1) {
            throw std::invalid_argument("BipartiteState: factor dimensions must be positive");
        }
        const long expected = static_cast<long>(dA) * dB;
        if (matrix.rows() != expected || matrix.cols() != expected) {
            throw std::invalid_argument("BipartiteState: matrix must be " +
                                        std::to_string(expected) + "x" +
                                        std::to_string(expected));
        }
        if (!is_hermitian(matrix, 1e-12)) {
            throw std::invalid_argument("BipartiteState: matrix is not Hermitian at 1e-12");
        }
        if (std::abs(matrix.trace() - Complex(1.0, 0.0)) > 1e-12) {
            throw std::invalid_argument("BipartiteState: trace must be 1 within 1e-12");
        }
        if (min_eigenvalue(matrix) < -1e-10) {
            throw std::invalid_argument("BipartiteState: matrix is not positive semidefinite");
        }
    }
};

inline BipartiteState pure_state(const Vector& psi, int dA, int dB) {
    if (psi.size() != static_cast<long>(dA) * dB) {
        throw std::invalid_argument("pure_state: vector length must be dA*dB");
    }
    const double norm = psi.norm();
    if (std::abs(norm - 1.0) > 1e-10) {
        throw std::invalid_argument("pure_state: vector must be normalized within 1e-10");
    }
    return BipartiteState(psi * psi.adjoint(), dA, dB);
}

// rho_v = v |psi_d><psi_d| + (1-v)/d^2 I
inline BipartiteState isotropic_state(int d, double v) {
    if (d < 2) {
        throw std::invalid_argument("isotropic_state: need d >= 2");
    }
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("isotropic_state: need 0 <= v <= 1, got " +
                                    std::to_string(v));
    }
    Matrix rho = Matrix::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            rho(i * d + i, j * d + j) = Complex(v / d, 0.0);
        }
    }
    rho += ((1.0 - v) / (d * d)) * Matrix::Identity(d * d, d * d);
    return BipartiteState(std::move(rho), d, d);
}

namespace detail {

inline void require_unitary(const Matrix& u, int d, const char* name) {
    if (u.rows() != d || u.cols() != d) {
        throw std::invalid_argument(std::string(name) + " must be " + std::to_string(d) +
                                    "x" + std::to_string(d));
    }
    const Matrix gram = u.adjoint() * u;
    if (max_abs_diff(gram, Matrix::Identity(d, d)) > 1e-10) {
        throw std::invalid_argument(std::string(name) + " is not unitary at 1e-10");
    }
}

}  // namespace detail

// |psi_k> = (U (x) V) (1/sqrt k) sum_{i<k} |ii>
inline Vector max_entangled_rank_k(int d, int k, const Matrix& u, const Matrix& v) {
    if (k < 1 || k > d) {
        throw std::invalid_argument("max_entangled_rank_k: need 1 <= k <= d");
    }
    detail::require_unitary(u, d, "max_entangled_rank_k: U");
    detail::require_unitary(v, d, "max_entangled_rank_k: V");
    Vector psi = Vector::Zero(d * d);
    const double amp = 1.0 / std::sqrt(static_cast<double>(k));
    for (int i = 0; i < k; ++i) {
        for (int r = 0; r < d; ++r) {
            for (int s = 0; s < d; ++s) {
                psi(r * d + s) += amp * u(r, i) * v(s, i);
            }
        }
    }
    return psi;
}

// (U (x) V) sum_{i<k} lambda_i |ii> with Haar U, V and lambda^2 uniform on the
// simplex, floored at 1e-3 so the realized rank is exactly k.
inline Vector random_pure_schmidt_rank(int d, int k, std::uint64_t seed) {
    if (k < 1 || k > d) {
        throw std::invalid_argument("random_pure_schmidt_rank: need 1 <= k <= d");
    }
    const Matrix u = random_unitary(d, seed);
    const Matrix v = random_unitary(d, seed + 0x9e3779b9ULL);

    std::mt19937_64 rng = make_rng(seed, 1);
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> lambda(k);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        double total = 0.0;
        for (int i = 0; i < k; ++i) {
            lambda[i] = expo(rng);
            total += lambda[i];
        }
        bool acceptable = true;
        for (int i = 0; i < k; ++i) {
            lambda[i] = std::sqrt(lambda[i] / total);
            acceptable = acceptable && lambda[i] >= 1e-3;
        }
        if (acceptable) {
            break;
        }
        if (attempt == 999) {
            throw std::runtime_error("random_pure_schmidt_rank: simplex sampling stalled");
        }
    }

    Vector psi = Vector::Zero(d * d);
    for (int i = 0; i < k; ++i) {
        for (int r = 0; r < d; ++r) {
            for (int s = 0; s < d; ++s) {
                psi(r * d + s) += lambda[i] * u(r, i) * v(s, i);
            }
        }
    }
    return psi;
}

struct SchmidtData {
    std::vector<double> coefficients;   // nonincreasing, sum of squares 1
    int rank = 0;                       // count above rank_tol
    std::vector<Vector> left_vectors;   // orthonormal in C^dA
    std::vector<Vector> right_vectors;  // orthonormal in C^dB
};

// SVD of the dA x dB reshaping (row-major: psi(i*dB + j) is the (i,j) entry).
inline SchmidtData schmidt_decomposition(const Vector& psi, int dA, int dB,
                                         double rank_tol = 1e-8) {
    if (psi.size() != static_cast<long>(dA) * dB) {
        throw std::invalid_argument("schmidt_decomposition: length must be dA*dB");
    }
    if (std::abs(psi.norm() - 1.0) > 1e-10) {
        throw std::invalid_argument("schmidt_decomposition: vector must be normalized");
    }
    Matrix amplitude(dA, dB);
    for (int i = 0; i < dA; ++i) {
        for (int j = 0; j < dB; ++j) {
            amplitude(i, j) = psi(i * dB + j);
        }
    }
    Eigen::JacobiSVD<Matrix> svd(amplitude, Eigen::ComputeThinU | Eigen::ComputeThinV);

    SchmidtData data;
    const auto& singular = svd.singularValues();
    const int count = static_cast<int>(singular.size());
    data.coefficients.resize(count);
    data.left_vectors.reserve(count);
    data.right_vectors.reserve(count);
    for (int i = 0; i < count; ++i) {
        data.coefficients[i] = singular(i);
        if (singular(i) > rank_tol) {
            ++data.rank;
        }
        data.left_vectors.push_back(svd.matrixU().col(i));
        // A = U S V^+ gives psi = sum_i s_i u_i (x) conj(v_i)
        data.right_vectors.push_back(svd.matrixV().col(i).conjugate());
    }
    return data;
}

// Closed-form Tr(W_k rho_v); diag_sum = sum_{a,g} O^(a)_{gg} (N*M for identity
// rotations). Valid for rotation families in the commutant of the construction,
// which in matrix form matches expectation() exactly for identity rotations.
inline double isotropic_expectation_analytic(int d, int k, int M, int N, double x, double v,
                                             double diag_sum) {
    if (M < 2) {
        throw std::invalid_argument("isotropic_expectation_analytic: need M >= 2");
    }
    const double h = h_coefficient(d, M, k, x);
    const double alpha = (M + N * d * h) / (static_cast<double>(d) * M);
    const double intra = (d - M * x) / (M * (M - 1.0));
    const double bracket =
        (x - intra) * diag_sum / d + (d - M * x) * N / ((M - 1.0) * d);
    return alpha - h * (1.0 - v) * N / M - v * h * bracket;
}

inline double isotropic_expectation_analytic(int d, int k, double x, double v,
                                             const RotationFamily& rotations) {
    return isotropic_expectation_analytic(d, k, rotations.M, rotations.N, x, v,
                                          rotations.diagonal_sum());
}

// Detection threshold: rho_v is reported outside class k when v exceeds
//   M(kd-1) sqrt(x(M^2 x - d)) / (N(M^2 x - d) sqrt(M(M-1))).
// Values above 1 are returned unclamped.
inline double threshold_v(int d, int k, int M, int N, double x) {
    const double m2xd = static_cast<double>(M) * M * x - d;
    if (!(m2xd > 0.0)) {
        throw std::domain_error("threshold_v: need M^2 x > d");
    }
    return M * (static_cast<double>(k) * d - 1.0) * std::sqrt(x * m2xd) /
           (N * m2xd * std::sqrt(static_cast<double>(M) * (M - 1.0)));
}

}  // namespace snwit
