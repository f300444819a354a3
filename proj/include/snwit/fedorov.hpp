#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

#include "snwit/matrix.hpp"

namespace snwit {

// Transverse-momentum amplitude exp(-(q1+q2)^2/(4 s+^2)) exp(-(q1-q2)^2/(4 s-^2)),
// the Gaussian model for which the width ratio equals the Schmidt number exactly.
struct GaussianBiphoton {
    double sigma_plus;
    double sigma_minus;

    GaussianBiphoton(double sp, double sm) : sigma_plus(sp), sigma_minus(sm) {
        if (!(sp > 0.0) || !(sm > 0.0)) {
            throw std::invalid_argument("GaussianBiphoton: widths must be positive");
        }
    }
};

// K = (s+^2 + s-^2) / (2 s+ s-)
inline double schmidt_number_gaussian(const GaussianBiphoton& g) {
    return (g.sigma_plus * g.sigma_plus + g.sigma_minus * g.sigma_minus) /
           (2.0 * g.sigma_plus * g.sigma_minus);
}

// R = (single-particle q1 width) / (q1 width conditioned on q2 = 0).
inline double fedorov_ratio(const GaussianBiphoton& g) {
    const double sum_sq = g.sigma_plus * g.sigma_plus + g.sigma_minus * g.sigma_minus;
    const double single = 0.5 * std::sqrt(sum_sq);
    const double conditional = g.sigma_plus * g.sigma_minus / std::sqrt(sum_sq);
    return single / conditional;
}

// Cell-centered samples of psi(q1, q2) on [-L, L]^2, normalized so that
// sum |psi|^2 step^2 = 1.
struct AmplitudeGrid {
    Matrix values;
    double extent = 0.0;
    int n = 0;

    double step() const { return 2.0 * extent / n; }
    double coordinate(int i) const { return -extent + (i + 0.5) * step(); }
};

struct GridResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline AmplitudeGrid make_gaussian_grid(const GaussianBiphoton& g, int n = 512,
                                        double extent = 0.0) {
    if (n < 8) {
        throw std::invalid_argument("make_gaussian_grid: need n >= 8");
    }
    AmplitudeGrid grid;
    grid.n = n;
    grid.extent = (extent > 0.0) ? extent : 8.0 * std::max(g.sigma_plus, g.sigma_minus);
    grid.values.resize(n, n);
    const double sp2 = 4.0 * g.sigma_plus * g.sigma_plus;
    const double sm2 = 4.0 * g.sigma_minus * g.sigma_minus;
    for (int i = 0; i < n; ++i) {
        const double q1 = grid.coordinate(i);
        for (int j = 0; j < n; ++j) {
            const double q2 = grid.coordinate(j);
            const double plus = q1 + q2;
            const double minus = q1 - q2;
            grid.values(i, j) =
                Complex(std::exp(-plus * plus / sp2 - minus * minus / sm2), 0.0);
        }
    }
    const double weight = grid.values.squaredNorm() * grid.step() * grid.step();
    if (!(weight > 0.0)) {
        throw std::runtime_error("make_gaussian_grid: amplitude vanished on the grid");
    }
    grid.values /= std::sqrt(weight);
    return grid;
}

namespace detail {

// Mean-centered standard deviation of a sampled 1-d density (weights need not
// be normalized).
inline double weighted_sigma(const AmplitudeGrid& grid, const RealVector& weights) {
    const double total = weights.sum();
    if (!(total > 0.0)) {
        throw std::invalid_argument("weighted_sigma: empty distribution");
    }
    double mean = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        mean += weights(i) * grid.coordinate(i);
    }
    mean /= total;
    double var = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double dev = grid.coordinate(i) - mean;
        var += weights(i) * dev * dev;
    }
    return std::sqrt(var / total);
}

}  // namespace detail

// Quadrature version of the ratio: q1 marginal width over the width of the
// q1 slice nearest q2 = 0. Throws GridResolutionError when the conditional
// width comes out below 3 grid steps, where the quotient is meaningless.
inline double fedorov_ratio_grid(const AmplitudeGrid& grid) {
    const int n = grid.n;
    RealVector marginal = RealVector::Zero(n);
    for (int i = 0; i < n; ++i) {
        marginal(i) = grid.values.row(i).squaredNorm();
    }

    int slice_index = 0;
    for (int j = 1; j < n; ++j) {
        if (std::abs(grid.coordinate(j)) < std::abs(grid.coordinate(slice_index))) {
            slice_index = j;
        }
    }
    RealVector slice = RealVector::Zero(n);
    for (int i = 0; i < n; ++i) {
        slice(i) = std::norm(grid.values(i, slice_index));
    }

    const double single = detail::weighted_sigma(grid, marginal);
    const double conditional = detail::weighted_sigma(grid, slice);
    if (conditional < 3.0 * grid.step()) {
        throw GridResolutionError("fedorov_ratio_grid: conditional width " +
                                  std::to_string(conditional) + " is below 3 grid steps (" +
                                  std::to_string(3.0 * grid.step()) + ")");
    }
    return single / conditional;
}

// 1 / sum p_i^2 with p_i the normalized squared singular values of values*step.
// The squared singular values are taken as Gram eigenvalues; the dedicated SVD
// solver loses digits on near-degenerate tails of this kernel family.
inline double participation_ratio_svd(const AmplitudeGrid& grid) {
    const Matrix scaled = grid.values * grid.step();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(scaled.adjoint() * scaled,
                                                 Eigen::EigenvaluesOnly);
    double total = 0.0;
    for (int i = 0; i < solver.eigenvalues().size(); ++i) {
        total += std::max(0.0, solver.eigenvalues()(i));
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("participation_ratio_svd: grid is numerically zero");
    }
    double sum_p2 = 0.0;
    for (int i = 0; i < solver.eigenvalues().size(); ++i) {
        const double p = std::max(0.0, solver.eigenvalues()(i)) / total;
        sum_p2 += p * p;
    }
    return 1.0 / sum_p2;
}

}  // namespace snwit
