#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "snwit/matrix.hpp"

namespace snwit {

// Orthonormal traceless Hermitian operator basis: d^2 - 1 matrices with
// Tr(G_i) = 0 and Tr(G_i G_j) = delta_ij.
struct HermitianBasis {
    int dim = 0;
    std::vector<Matrix> elements;
};

// Generalized Gell-Mann matrices, scaled to Tr(G_i G_j) = delta_ij.
// Ordering is fixed: symmetric pairs, then antisymmetric pairs, then
// diagonal matrices, each block in lexicographic (j,k) order.
inline HermitianBasis gell_mann_basis(int d) {
    if (d < 2) {
        throw std::invalid_argument("gell_mann_basis: dimension must be >= 2, got " +
                                    std::to_string(d));
    }
    HermitianBasis basis;
    basis.dim = d;
    basis.elements.reserve(static_cast<std::size_t>(d) * d - 1);

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            Matrix g = Matrix::Zero(d, d);
            g(j, k) = Complex(inv_sqrt2, 0.0);
            g(k, j) = Complex(inv_sqrt2, 0.0);
            basis.elements.push_back(std::move(g));
        }
    }
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            Matrix g = Matrix::Zero(d, d);
            g(j, k) = Complex(0.0, -inv_sqrt2);
            g(k, j) = Complex(0.0, inv_sqrt2);
            basis.elements.push_back(std::move(g));
        }
    }
    for (int l = 1; l < d; ++l) {
        // diag(1, ..., 1, -l, 0, ..., 0) / sqrt(l(l+1)), with l ones.
        Matrix g = Matrix::Zero(d, d);
        const double scale = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
        for (int i = 0; i < l; ++i) {
            g(i, i) = Complex(scale, 0.0);
        }
        g(l, l) = Complex(-l * scale, 0.0);
        basis.elements.push_back(std::move(g));
    }
    return basis;
}

// Haar-distributed unitary: QR of a complex Ginibre matrix with the R
// diagonal phases folded back into Q. Deterministic for a given seed.
inline Matrix random_unitary(int d, std::uint64_t seed) {
    if (d < 1) {
        throw std::invalid_argument("random_unitary: dimension must be >= 1, got " +
                                    std::to_string(d));
    }
    std::mt19937_64 rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix ginibre(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            ginibre(i, j) = Complex(re, im);
        }
    }
    Eigen::HouseholderQR<Matrix> qr(ginibre);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
        Complex rii = r(i, i);
        Complex phase = (std::abs(rii) > 0.0) ? rii / std::abs(rii) : Complex(1.0, 0.0);
        q.col(i) *= phase;
    }
    return q;
}

}  // namespace snwit
