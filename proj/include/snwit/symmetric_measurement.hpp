#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "snwit/matrix.hpp"
#include "snwit/operator_basis.hpp"

namespace snwit {

// Construction failed because some element I/M + tH has a negative eigenvalue.
class NonPositiveElementError : public std::runtime_error {
public:
    NonPositiveElementError(const std::string& msg, double worst)
        : std::runtime_error(msg), worst_eigenvalue_(worst) {}
    double worst_eigenvalue() const { return worst_eigenvalue_; }

private:
    double worst_eigenvalue_;
};

struct PovmParameters {
    int d = 0;   // Hilbert space dimension
    int N = 0;   // number of sub-POVMs
    int M = 0;   // outcomes per sub-POVM
    double x = 0.0;  // purity parameter, Tr(E^2)
    double t = 0.0;  // construction parameter
    bool informationally_complete = false;  // N(M-1) == d^2 - 1
};

// The family {E_{a,k} = I/M + t H_{a,k}}, indexed [a][k], a = 0..N-1,
// k = 0..M-1. The H operators are kept for diagnostics.
struct SymmetricPovm {
    PovmParameters params;
    std::vector<std::vector<Matrix>> elements;
    std::vector<std::vector<Matrix>> h_operators;

    const Matrix& element(int a, int k) const { return elements[a][k]; }
};

struct ValidationReport {
    double trace_deviation = 0.0;         // |Tr(E) - d/M|
    double purity_deviation = 0.0;        // |Tr(E^2) - x|
    double intra_overlap_deviation = 0.0; // |Tr(E_{a,k}E_{a,l}) - (d-Mx)/(M(M-1))|, l != k
    double inter_overlap_deviation = 0.0; // |Tr(E_{a,k}E_{b,l}) - d/M^2|, b != a
    double completeness_deviation = 0.0;  // max-norm of sum_k E_{a,k} - I
    double min_eigenvalue = 0.0;          // over all elements

    double positivity_deviation() const { return std::max(0.0, -min_eigenvalue); }

    bool passes(double tol) const {
        return trace_deviation < tol && purity_deviation < tol &&
               intra_overlap_deviation < tol && inter_overlap_deviation < tol &&
               completeness_deviation < tol && positivity_deviation() < tol;
    }
};

// x = d/M^2 + t^2 (M-1)(sqrt(M)+1)^2
inline double x_of_t(double t, int d, int M) {
    const double s = std::sqrt(static_cast<double>(M)) + 1.0;
    return static_cast<double>(d) / (static_cast<double>(M) * M) + t * t * (M - 1) * s * s;
}

// Nonnegative root of the relation above.
inline double t_of_x(double x, int d, int M) {
    const double x0 = static_cast<double>(d) / (static_cast<double>(M) * M);
    if (x < x0) {
        throw std::domain_error("t_of_x: x = " + std::to_string(x) +
                                " is below the minimum d/M^2 = " + std::to_string(x0));
    }
    const double s = std::sqrt(static_cast<double>(M)) + 1.0;
    return std::sqrt((x - x0) / ((M - 1) * s * s));
}

// Partitions the basis into N consecutive groups of M-1 elements and builds
//   H_{a,k} = G_a - sqrt(M)(sqrt(M)+1) G_{a,k}   for k < M-1 (0-based k)
//   H_{a,M-1} = (sqrt(M)+1) G_a
// with G_a the sum over the group.
inline std::vector<std::vector<Matrix>> build_h_operators(const HermitianBasis& basis,
                                                          int N, int M) {
    const int d = basis.dim;
    if (static_cast<long>(N) * (M - 1) != static_cast<long>(d) * d - 1) {
        throw std::invalid_argument(
            "build_h_operators: need N(M-1) = d^2-1, got N=" + std::to_string(N) +
            ", M=" + std::to_string(M) + ", d=" + std::to_string(d));
    }
    const double sqrt_m = std::sqrt(static_cast<double>(M));
    const double off_coeff = sqrt_m * (sqrt_m + 1.0);

    std::vector<std::vector<Matrix>> h(N);
    for (int a = 0; a < N; ++a) {
        Matrix group_sum = Matrix::Zero(d, d);
        for (int k = 0; k < M - 1; ++k) {
            group_sum += basis.elements[static_cast<std::size_t>(a) * (M - 1) + k];
        }
        h[a].reserve(M);
        for (int k = 0; k < M - 1; ++k) {
            h[a].push_back(group_sum -
                           off_coeff * basis.elements[static_cast<std::size_t>(a) * (M - 1) + k]);
        }
        h[a].push_back((sqrt_m + 1.0) * group_sum);
    }
    return h;
}

// Closed interval of t values for which every I/M + tH is positive
// semidefinite. lambda_max is the largest and lambda_min the smallest
// eigenvalue over the whole family.
inline std::pair<double, double> t_interval(const std::vector<std::vector<Matrix>>& h_ops,
                                            int M) {
    if (h_ops.empty() || h_ops.front().empty()) {
        throw std::invalid_argument("t_interval: empty operator family");
    }
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    for (const auto& group : h_ops) {
        for (const auto& h : group) {
            Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
            lambda_max = std::max(lambda_max, solver.eigenvalues().maxCoeff());
            lambda_min = std::min(lambda_min, solver.eigenvalues().minCoeff());
        }
    }
    if (lambda_max <= 0.0 || lambda_min >= 0.0) {
        throw std::runtime_error("t_interval: degenerate family, interval unbounded");
    }
    return {-1.0 / (M * lambda_max), 1.0 / (M * std::abs(lambda_min))};
}

namespace detail {

inline SymmetricPovm assemble_povm(int d, int N, int M, double x,
                                   const HermitianBasis& basis, bool require_positive) {
    if (basis.dim != d) {
        throw std::invalid_argument("build_nm_povm: basis dimension mismatch");
    }
    const double x_min = static_cast<double>(d) / (static_cast<double>(M) * M);
    if (!(x > x_min)) {
        throw std::domain_error("x = " + std::to_string(x) +
                                " out of range: need x > d/M^2 = " + std::to_string(x_min));
    }
    if (require_positive) {
        const double x_max = std::min(static_cast<double>(d) * d / (static_cast<double>(M) * M),
                                      static_cast<double>(d) / M);
        if (x > x_max * (1.0 + 1e-12)) {
            throw std::domain_error("x = " + std::to_string(x) +
                                    " out of range: need x <= min{d^2/M^2, d/M} = " +
                                    std::to_string(x_max));
        }
    }

    SymmetricPovm povm;
    povm.params.d = d;
    povm.params.N = N;
    povm.params.M = M;
    povm.params.x = x;
    povm.params.t = t_of_x(x, d, M);
    povm.params.informationally_complete =
        (static_cast<long>(N) * (M - 1) == static_cast<long>(d) * d - 1);
    povm.h_operators = build_h_operators(basis, N, M);

    if (require_positive) {
        const auto [t_lo, t_hi] = t_interval(povm.h_operators, M);
        const double slack = 1e-12 * std::max(1.0, t_hi);
        if (povm.params.t > t_hi + slack || povm.params.t < t_lo - slack) {
            double worst = 0.0;
            for (const auto& group : povm.h_operators) {
                for (const auto& h : group) {
                    Matrix e = Matrix::Identity(d, d) / static_cast<double>(M) +
                               povm.params.t * h;
                    worst = std::min(worst, min_eigenvalue(e));
                }
            }
            throw NonPositiveElementError(
                "build_nm_povm: t = " + std::to_string(povm.params.t) +
                    " outside [" + std::to_string(t_lo) + ", " + std::to_string(t_hi) +
                    "], worst element eigenvalue " + std::to_string(worst),
                worst);
        }
    }

    povm.elements.resize(N);
    const Matrix identity_over_m = Matrix::Identity(d, d) / static_cast<double>(M);
    for (int a = 0; a < N; ++a) {
        povm.elements[a].reserve(M);
        for (int k = 0; k < M; ++k) {
            povm.elements[a].push_back(identity_over_m + povm.params.t * povm.h_operators[a][k]);
        }
    }
    return povm;
}

}  // namespace detail

// Strict POVM construction: x must lie in (d/M^2, min{d^2/M^2, d/M}] and t
// must fall inside t_interval so every element is positive semidefinite.
inline SymmetricPovm build_nm_povm(int d, int N, int M, double x,
                                   const HermitianBasis& basis) {
    return detail::assemble_povm(d, N, M, x, basis, /*require_positive=*/true);
}

inline SymmetricPovm build_nm_povm(int d, int N, int M, double x) {
    return build_nm_povm(d, N, M, x, gell_mann_basis(d));
}

// Same algebraic construction without the positivity gate. The four trace
// identities hold for any x > d/M^2, so witness and map formulas built on the
// family stay valid even where the elements stop being positive semidefinite.
inline SymmetricPovm build_nm_frame(int d, int N, int M, double x,
                                    const HermitianBasis& basis) {
    return detail::assemble_povm(d, N, M, x, basis, /*require_positive=*/false);
}

inline SymmetricPovm build_nm_frame(int d, int N, int M, double x) {
    return build_nm_frame(d, N, M, x, gell_mann_basis(d));
}

// Measures the four defining trace conditions plus completeness and
// positivity. Reports deviations; never throws.
inline ValidationReport validate_povm(const SymmetricPovm& povm) {
    const auto& p = povm.params;
    const double d = p.d;
    const double M = p.M;
    const double trace_target = d / M;
    const double intra_target = (p.M > 1) ? (d - M * p.x) / (M * (M - 1)) : 0.0;
    const double inter_target = d / (M * M);

    ValidationReport report;
    report.min_eigenvalue = std::numeric_limits<double>::infinity();

    for (int a = 0; a < p.N; ++a) {
        Matrix sum = Matrix::Zero(p.d, p.d);
        for (int k = 0; k < p.M; ++k) {
            const Matrix& e = povm.element(a, k);
            sum += e;
            report.trace_deviation =
                std::max(report.trace_deviation, std::abs(e.trace().real() - trace_target) +
                                                     std::abs(e.trace().imag()));
            report.purity_deviation =
                std::max(report.purity_deviation, std::abs((e * e).trace().real() - p.x));
            report.min_eigenvalue = std::min(report.min_eigenvalue, min_eigenvalue(e));
            for (int l = k + 1; l < p.M; ++l) {
                const double overlap = (e * povm.element(a, l)).trace().real();
                report.intra_overlap_deviation =
                    std::max(report.intra_overlap_deviation, std::abs(overlap - intra_target));
            }
            for (int b = a + 1; b < p.N; ++b) {
                for (int l = 0; l < p.M; ++l) {
                    const double overlap = (e * povm.element(b, l)).trace().real();
                    report.inter_overlap_deviation =
                        std::max(report.inter_overlap_deviation, std::abs(overlap - inter_target));
                }
            }
        }
        report.completeness_deviation =
            std::max(report.completeness_deviation,
                     max_abs_diff(sum, Matrix::Identity(p.d, p.d)));
    }
    return report;
}

}  // namespace snwit
