#pragma once

// Test-only helpers: code families and a dense eigenvalue oracle that shares
// nothing with the sparse power iteration under test.

#include "convdetect/convdetect.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

namespace convdetect::testing {

/// Every k=1, n=2, m=2 code with nonzero generators and a tight memory order.
inline std::vector<ConvCode> all_m2_codes()
{
    std::vector<ConvCode> out;
    for (int a = 0; a < 8; ++a) {
        for (int b = 0; b < 8; ++b) {
            if (a == 0 || b == 0 || (a < 4 && b < 4) || ((a | b) & 1) == 0) {
                continue;
            }
            out.push_back(parse_octal_generators({std::to_string(a), std::to_string(b)}));
        }
    }
    return out;
}

inline std::vector<ConvCode> eligible_m2_codes()
{
    std::vector<ConvCode> out;
    for (auto& c : all_m2_codes()) {
        if (validate_assumptions(c).is_analysis_eligible) {
            out.push_back(c);
        }
    }
    return out;
}

/// Dense geometric interpolation of two transition matrices, built from
/// at() lookups rather than the sparse row merge.
inline Eigen::MatrixXd dense_chernoff(const TransitionMatrix& p1, const TransitionMatrix& p2, double u)
{
    const auto dim = static_cast<Eigen::Index>(p1.dimension());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            const double a = p1.at(static_cast<OutputState>(i), static_cast<OutputState>(j));
            const double b = p2.at(static_cast<OutputState>(i), static_cast<OutputState>(j));
            if (a > 0.0 && b > 0.0) {
                M(i, j) = std::pow(a, u) * std::pow(b, 1.0 - u);
            }
        }
    }
    return M;
}

inline double dense_spectral_radius(const Eigen::MatrixXd& M)
{
    Eigen::EigenSolver<Eigen::MatrixXd> solver(M, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

struct GridMinimum {
    double u;
    double lambda;
};

/// Brute-force minimum of the dense spectral radius over u = 0, step, 2 step, ..., 1.
inline GridMinimum dense_grid_minimum(const TransitionMatrix& p1, const TransitionMatrix& p2, double step)
{
    GridMinimum best{0.0, dense_spectral_radius(dense_chernoff(p1, p2, 0.0))};
    const int count = static_cast<int>(std::lround(1.0 / step));
    for (int i = 1; i <= count; ++i) {
        const double u = i * step;
        const double lambda = dense_spectral_radius(dense_chernoff(p1, p2, u));
        if (lambda < best.lambda) {
            best = {u, lambda};
        }
    }
    return best;
}

/// Sorted nonzero probabilities of a row.
inline std::vector<double> sorted_row(const TransitionMatrix::Row& row)
{
    std::vector<double> out;
    for (const auto& t : row) {
        if (t.prob != 0.0) {
            out.push_back(t.prob);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace convdetect::testing
