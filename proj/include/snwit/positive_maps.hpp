#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "snwit/matrix.hpp"
#include "snwit/operator_basis.hpp"
#include "snwit/rotations.hpp"
#include "snwit/symmetric_measurement.hpp"

namespace snwit {

// h_x = 1/(kd-1) * sqrt( M(M-1) / (x(M^2 x - d)) )
inline double h_coefficient(int d, int M, int k, double x) {
    const double denom = x * (static_cast<double>(M) * M * x - d);
    if (!(static_cast<double>(M) * M * x > d)) {
        throw std::domain_error("h_coefficient: need M^2 x > d, got M^2 x = " +
                                std::to_string(static_cast<double>(M) * M * x) +
                                ", d = " + std::to_string(d));
    }
    if (static_cast<long>(k) * d <= 1) {
        throw std::domain_error("h_coefficient: need kd > 1");
    }
    return std::sqrt(static_cast<double>(M) * (M - 1) / denom) / (static_cast<double>(k) * d - 1);
}

// The map Lambda of the witness construction, bundled with its parameters.
// The same measurement family can back maps of different k.
struct WitnessMap {
    SymmetricPovm povm;
    RotationFamily rotations;
    int k = 1;
    double h = 0.0;

    int dim() const { return povm.params.d; }
};

inline WitnessMap make_witness_map(SymmetricPovm povm, RotationFamily rotations, int k) {
    const auto& p = povm.params;
    if (rotations.N != p.N || rotations.M != p.M) {
        throw std::invalid_argument("make_witness_map: rotation family shape (" +
                                    std::to_string(rotations.N) + "," +
                                    std::to_string(rotations.M) + ") does not match POVM (" +
                                    std::to_string(p.N) + "," + std::to_string(p.M) + ")");
    }
    if (k < 1 || k > p.d) {
        throw std::invalid_argument("make_witness_map: need 1 <= k <= d, got k = " +
                                    std::to_string(k));
    }
    WitnessMap map;
    map.k = k;
    map.h = h_coefficient(p.d, p.M, k, p.x);
    map.povm = std::move(povm);
    map.rotations = std::move(rotations);
    return map;
}

namespace detail {

// Shared evaluator: transpose_rotations selects Lambda vs its adjoint.
inline Matrix apply_map_impl(const WitnessMap& map, const Matrix& x, bool transpose_rotations) {
    const int d = map.dim();
    if (x.rows() != d || x.cols() != d) {
        throw std::invalid_argument("apply_map: input must be " + std::to_string(d) + "x" +
                                    std::to_string(d));
    }
    const auto& p = map.povm.params;
    const Complex trace = x.trace();
    const Matrix centered = x - (trace / static_cast<double>(d)) * Matrix::Identity(d, d);

    Matrix result = (trace / static_cast<double>(d)) * Matrix::Identity(d, d);
    for (int a = 0; a < p.N; ++a) {
        // traces tau_l = Tr(centered * E_{a,l}), then one weighted accumulation
        // per g; avoids any d^4 intermediate.
        std::vector<Complex> tau(p.M);
        for (int l = 0; l < p.M; ++l) {
            tau[l] = (centered * map.povm.element(a, l)).trace();
        }
        const RealMatrix& o = map.rotations.matrices[a];
        for (int g = 0; g < p.M; ++g) {
            Complex weight(0.0, 0.0);
            for (int l = 0; l < p.M; ++l) {
                const double ogl = transpose_rotations ? o(l, g) : o(g, l);
                weight += ogl * tau[l];
            }
            result -= map.h * weight * map.povm.element(a, g);
        }
    }
    return result;
}

}  // namespace detail

// Lambda(X) = (I/d) Tr X - h sum_{a,g,l} O_{gl} Tr[(X - (I/d) Tr X) E_{a,l}] E_{a,g}
inline Matrix apply_map(const WitnessMap& map, const Matrix& x) {
    return detail::apply_map_impl(map, x, /*transpose_rotations=*/false);
}

// Hilbert-Schmidt adjoint; same structure with the rotations transposed.
inline Matrix adjoint_map(const WitnessMap& map, const Matrix& y) {
    return detail::apply_map_impl(map, y, /*transpose_rotations=*/true);
}

// (I (x) Lambda)(X) for a d^2 x d^2 matrix X, applied block by block.
inline Matrix apply_id_tensor_map(const WitnessMap& map, const Matrix& x) {
    const int d = map.dim();
    if (x.rows() != d * d || x.cols() != d * d) {
        throw std::invalid_argument("apply_id_tensor_map: input must be d^2 x d^2");
    }
    Matrix result(d * d, d * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            result.block(i * d, j * d, d, d) =
                apply_map(map, x.block(i * d, j * d, d, d));
        }
    }
    return result;
}

// C = sum_{ij} |i><j| (x) Lambda(|i><j|)
inline Matrix choi_matrix(const WitnessMap& map) {
    const int d = map.dim();
    Matrix basis_unit = Matrix::Zero(d, d);
    Matrix result(d * d, d * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            basis_unit(i, j) = Complex(1.0, 0.0);
            result.block(i * d, j * d, d, d) = apply_map(map, basis_unit);
            basis_unit(i, j) = Complex(0.0, 0.0);
        }
    }
    return result;
}

struct KposCheckResult {
    double max_trace_deviation = 0.0;  // vs the constant 1/(kd-1)
    double min_eigenvalue = 0.0;       // of (I (x) Lambda) on the sampled states
};

// Draws Haar U, V, forms |psi_k> = (U (x) V) (1/sqrt k) sum_i |ii>, and
// measures Tr{[(I (x) Lambda)(|psi_k><psi_k|)]^2} against the constant
// 1/(kd-1), tracking the smallest eigenvalue of the extended output as the
// sampled positivity certificate.
inline KposCheckResult kpos_trace_square_check(const WitnessMap& map, int trials,
                                               std::uint64_t seed) {
    if (trials < 1) {
        throw std::invalid_argument("kpos_trace_square_check: need trials >= 1");
    }
    const int d = map.dim();
    const int k = map.k;
    const double target = 1.0 / (static_cast<double>(k) * d - 1.0);

    KposCheckResult result;
    result.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < trials; ++trial) {
        const Matrix u = random_unitary(d, seed + static_cast<std::uint64_t>(trial));
        const Matrix v = random_unitary(d, seed + static_cast<std::uint64_t>(trial) + 0x9e3779b9ULL);
        Vector psi = Vector::Zero(d * d);
        for (int i = 0; i < k; ++i) {
            for (int r = 0; r < d; ++r) {
                for (int s = 0; s < d; ++s) {
                    psi(r * d + s) += u(r, i) * v(s, i);
                }
            }
        }
        psi /= std::sqrt(static_cast<double>(k));
        const Matrix extended = apply_id_tensor_map(map, psi * psi.adjoint());
        const double trace_square = (extended * extended).trace().real();
        result.max_trace_deviation =
            std::max(result.max_trace_deviation, std::abs(trace_square - target));
        result.min_eigenvalue = std::min(result.min_eigenvalue, min_eigenvalue(extended));
    }
    return result;
}

// Both sides of the Hilbert-Schmidt identity
//   sum_{a,k} |Tr(E_{a,k} sigma)|^2
//     = [ d(M^2 x - d) Tr(sigma sigma^+) + (d^3 - M^2 x) |Tr sigma|^2 ] / (d M (M-1))
// valid for arbitrary complex sigma when the family is informationally complete.
inline std::pair<double, double> hs_identity_check(const SymmetricPovm& povm,
                                                   const Matrix& sigma) {
    const auto& p = povm.params;
    if (!p.informationally_complete) {
        throw std::invalid_argument(
            "hs_identity_check: identity requires an informationally complete family");
    }
    if (sigma.rows() != p.d || sigma.cols() != p.d) {
        throw std::invalid_argument("hs_identity_check: sigma must be d x d");
    }
    double lhs = 0.0;
    for (int a = 0; a < p.N; ++a) {
        for (int k = 0; k < p.M; ++k) {
            lhs += std::norm((povm.element(a, k) * sigma).trace());
        }
    }
    const double d = p.d;
    const double m2x = static_cast<double>(p.M) * p.M * p.x;
    const double hs_norm = (sigma * sigma.adjoint()).trace().real();
    const double trace_norm = std::norm(sigma.trace());
    const double rhs =
        (d * (m2x - d) * hs_norm + (d * d * d - m2x) * trace_norm) / (d * p.M * (p.M - 1));
    return {lhs, rhs};
}

}  // namespace snwit
