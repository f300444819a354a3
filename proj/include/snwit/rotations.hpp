#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "snwit/matrix.hpp"

namespace snwit {

// N real orthogonal M x M matrices, each fixing the all-ones direction.
// Fixing that line forces every row and column sum to equal 1.
struct RotationFamily {
    int N = 0;
    int M = 0;
    std::vector<RealMatrix> matrices;

    // sum_{a,g} O^{(a)}_{gg}; equals N*M for the identity family.
    double diagonal_sum() const {
        double total = 0.0;
        for (const auto& o : matrices) {
            total += o.trace();
        }
        return total;
    }
};

inline RotationFamily identity_rotation_family(int N, int M) {
    if (N < 1 || M < 1) {
        throw std::invalid_argument("identity_rotation_family: need N, M >= 1");
    }
    RotationFamily family;
    family.N = N;
    family.M = M;
    family.matrices.assign(N, RealMatrix::Identity(M, M));
    return family;
}

// Random orthogonal matrices fixing the all-ones direction: a Haar-random
// (M-1) x (M-1) orthogonal block acting on the complement of (1,...,1),
// conjugated into place by a fixed Householder frame. Determinant may be +-1.
inline RotationFamily random_rotation_family(int N, int M, std::uint64_t seed) {
    if (N < 1) {
        throw std::invalid_argument("random_rotation_family: need N >= 1");
    }
    if (M < 2) {
        throw std::invalid_argument(
            "random_rotation_family: need M >= 2 (only the identity fixes the line at M=1)");
    }

    // Householder frame whose first column is the normalized all-ones vector.
    RealVector ones = RealVector::Constant(M, 1.0 / std::sqrt(static_cast<double>(M)));
    RealVector w = -ones;
    w(0) += 1.0;
    RealMatrix frame = RealMatrix::Identity(M, M);
    const double wnorm2 = w.squaredNorm();
    if (wnorm2 > 1e-30) {
        frame -= (2.0 / wnorm2) * (w * w.transpose());
    }

    RotationFamily family;
    family.N = N;
    family.M = M;
    family.matrices.reserve(N);

    std::mt19937_64 rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int a = 0; a < N; ++a) {
        RealMatrix ginibre(M - 1, M - 1);
        for (int i = 0; i < M - 1; ++i) {
            for (int j = 0; j < M - 1; ++j) {
                ginibre(i, j) = gauss(rng);
            }
        }
        Eigen::HouseholderQR<RealMatrix> qr(ginibre);
        RealMatrix q = qr.householderQ();
        RealMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int i = 0; i < M - 1; ++i) {
            if (r(i, i) < 0.0) {
                q.col(i) *= -1.0;
            }
        }

        RealMatrix block = RealMatrix::Identity(M, M);
        block.bottomRightCorner(M - 1, M - 1) = q;
        family.matrices.push_back(frame * block * frame.transpose());
    }
    return family;
}

}  // namespace snwit
