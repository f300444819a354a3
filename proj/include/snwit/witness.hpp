#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "snwit/matrix.hpp"
#include "snwit/positive_maps.hpp"
#include "snwit/rotations.hpp"
#include "snwit/states.hpp"
#include "snwit/symmetric_measurement.hpp"

namespace snwit {

struct WitnessOperator {
    Matrix matrix;  // d^2 x d^2, Hermitian
    PovmParameters params;
    int k = 1;
    RotationFamily rotations;

    int dim() const { return params.d; }
};

// W_k = (M + N d h)/(dM) I (x) I - h sum_{a,g,l} O_{gl} conj(E_{a,l}) (x) E_{a,g}
// Conjugation is entrywise, in the basis the measurement was built in.
inline WitnessOperator build_witness(const SymmetricPovm& povm, RotationFamily rotations,
                                     int k) {
    const auto& p = povm.params;
    if (rotations.N != p.N || rotations.M != p.M) {
        throw std::invalid_argument("build_witness: rotation family shape (" +
                                    std::to_string(rotations.N) + "," +
                                    std::to_string(rotations.M) + ") does not match POVM (" +
                                    std::to_string(p.N) + "," + std::to_string(p.M) + ")");
    }
    if (k < 1 || k > p.d) {
        throw std::invalid_argument("build_witness: need 1 <= k <= d, got k = " +
                                    std::to_string(k));
    }
    const double h = h_coefficient(p.d, p.M, k, p.x);
    const int dd = p.d * p.d;

    Matrix w = ((p.M + p.N * p.d * h) / (static_cast<double>(p.d) * p.M)) *
               Matrix::Identity(dd, dd);
    for (int a = 0; a < p.N; ++a) {
        const RealMatrix& o = rotations.matrices[a];
        for (int g = 0; g < p.M; ++g) {
            for (int l = 0; l < p.M; ++l) {
                if (o(g, l) == 0.0) {
                    continue;
                }
                w -= (h * o(g, l)) *
                     Eigen::kroneckerProduct(povm.element(a, l).conjugate(),
                                             povm.element(a, g));
            }
        }
    }

    WitnessOperator witness;
    witness.matrix = std::move(w);
    witness.params = p;
    witness.k = k;
    witness.rotations = std::move(rotations);
    return witness;
}

inline double expectation(const WitnessOperator& w, const BipartiteState& rho) {
    if (rho.dA != w.params.d || rho.dB != w.params.d) {
        throw std::invalid_argument("expectation: state factors must both have dimension " +
                                    std::to_string(w.params.d));
    }
    const Complex value = (w.matrix * rho.matrix).trace();
    if (std::abs(value.imag()) > 1e-10) {
        throw std::runtime_error("expectation: trace has imaginary part " +
                                 std::to_string(value.imag()));
    }
    return value.real();
}

// || W - d (I (x) Lambda)(Psi_d) ||_max. Zero (to rounding) exactly when the
// rotation rows sum to 1, which ties the witness back to the map.
inline double choi_consistency_check(const WitnessOperator& w, const WitnessMap& map) {
    const auto& wp = w.params;
    const auto& mp = map.povm.params;
    if (wp.d != mp.d || wp.N != mp.N || wp.M != mp.M || w.k != map.k ||
        std::abs(wp.x - mp.x) > 1e-12) {
        throw std::invalid_argument("choi_consistency_check: witness and map parameters differ");
    }
    const int d = wp.d;
    Matrix psi_d = Matrix::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            psi_d(i * d + i, j * d + j) = Complex(1.0 / d, 0.0);
        }
    }
    const Matrix extended = static_cast<double>(d) * apply_id_tensor_map(map, psi_d);
    return max_abs_diff(w.matrix, extended);
}

namespace detail {

// Candidate kept in factor form A, B in C^{d x k}: psi = sum_i A_i (x) B_i has
// Schmidt rank at most k by construction, so descent cannot leave the class.
struct FactorCandidate {
    Matrix a;
    Matrix b;
};

inline Vector factor_vector(const FactorCandidate& c, int d, int k) {
    Vector psi = Vector::Zero(d * d);
    for (int i = 0; i < k; ++i) {
        for (int r = 0; r < d; ++r) {
            for (int s = 0; s < d; ++s) {
                psi(r * d + s) += c.a(r, i) * c.b(s, i);
            }
        }
    }
    return psi;
}

inline double rayleigh_value(const Matrix& w, const FactorCandidate& c, int d, int k) {
    const Vector psi = factor_vector(c, d, k);
    const double norm2 = psi.squaredNorm();
    if (norm2 < 1e-18) {
        return std::numeric_limits<double>::infinity();
    }
    return (psi.adjoint() * w * psi).real()(0, 0) / norm2;
}

}  // namespace detail

// Empirical minimum of <psi|W|psi> over pure states of Schmidt rank <= k:
// random factor-form samples, then coordinate descent on the best candidate
// with the step halved whenever a full sweep fails to improve.
inline double min_over_schmidt_k(const WitnessOperator& w, int k, int samples,
                                 std::uint64_t seed, int refine_iters = 0) {
    const int d = w.params.d;
    if (k < 1 || k > d) {
        throw std::invalid_argument("min_over_schmidt_k: need 1 <= k <= d");
    }
    if (samples < 1) {
        throw std::invalid_argument("min_over_schmidt_k: need samples >= 1");
    }

    detail::FactorCandidate best;
    best.a = Matrix::Zero(d, k);
    best.b = Matrix::Zero(d, k);
    const double amp = 1.0 / std::sqrt(static_cast<double>(k));
    for (int i = 0; i < k; ++i) {
        best.a(i, i) = Complex(amp, 0.0);
        best.b(i, i) = Complex(1.0, 0.0);
    }
    double best_value = detail::rayleigh_value(w.matrix, best, d, k);

    for (int s = 0; s < samples; ++s) {
        const std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(s);
        const Matrix u = random_unitary(d, trial_seed);
        const Matrix v = random_unitary(d, trial_seed + 0x9e3779b9ULL);
        std::mt19937_64 rng = make_rng(trial_seed, 2);
        std::exponential_distribution<double> expo(1.0);
        std::vector<double> weight(k);
        double total = 0.0;
        for (int i = 0; i < k; ++i) {
            weight[i] = expo(rng);
            total += weight[i];
        }
        detail::FactorCandidate trial;
        trial.a = Matrix(d, k);
        trial.b = Matrix(d, k);
        for (int i = 0; i < k; ++i) {
            trial.a.col(i) = std::sqrt(weight[i] / total) * u.col(i);
            trial.b.col(i) = v.col(i);
        }
        const double value = detail::rayleigh_value(w.matrix, trial, d, k);
        if (value < best_value) {
            best_value = value;
            best = trial;
        }
    }

    double step = 0.1;
    for (int iter = 0; iter < refine_iters && step > 1e-9; ++iter) {
        bool improved = false;
        for (int which = 0; which < 2; ++which) {
            Matrix& target = (which == 0) ? best.a : best.b;
            for (int col = 0; col < k; ++col) {
                for (int row = 0; row < d; ++row) {
                    for (int part = 0; part < 2; ++part) {
                        const Complex delta = (part == 0) ? Complex(step, 0.0)
                                                          : Complex(0.0, step);
                        for (int sign = -1; sign <= 1; sign += 2) {
                            const Complex saved = target(row, col);
                            target(row, col) = saved + static_cast<double>(sign) * delta;
                            const double value =
                                detail::rayleigh_value(w.matrix, best, d, k);
                            if (value < best_value - 1e-15) {
                                best_value = value;
                                improved = true;
                            } else {
                                target(row, col) = saved;
                            }
                        }
                    }
                }
            }
        }
        if (!improved) {
            step *= 0.5;
        }
    }
    return best_value;
}

}  // namespace snwit
