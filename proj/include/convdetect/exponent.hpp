#pragma once

#include "convdetect/markov.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace convdetect {

/// M(u)_{ij} = P1_{ij}^u P2_{ij}^{1-u}, stored only on the common support.
struct ChernoffMatrix {
    double u = 0.0;
    std::vector<std::vector<Transition>> rows;

    std::size_t dimension() const { return rows.size(); }
};

inline ChernoffMatrix chernoff_matrix(const TransitionMatrix& p1, const TransitionMatrix& p2, double u)
{
    if (p1.dimension() != p2.dimension()) {
        throw std::invalid_argument("chernoff_matrix: dimension mismatch");
    }
    if (!(u >= 0.0 && u <= 1.0)) {
        throw std::invalid_argument("chernoff_matrix: u must lie in [0, 1]");
    }
    ChernoffMatrix M;
    M.u = u;
    M.rows.resize(p1.dimension());
    for (OutputState i = 0; i < p1.dimension(); ++i) {
        const auto& a = p1.row(i);
        const auto& b = p2.row(i);
        auto& out = M.rows[i];
        auto ia = a.begin();
        auto ib = b.begin();
        while (ia != a.end() && ib != b.end()) {
            if (ia->to < ib->to) {
                ++ia;
            } else if (ib->to < ia->to) {
                ++ib;
            } else {
                if (ia->prob > 0.0 && ib->prob > 0.0) {
                    out.push_back({ia->to, std::pow(ia->prob, u) * std::pow(ib->prob, 1.0 - u)});
                }
                ++ia;
                ++ib;
            }
        }
    }
    return M;
}

struct SpectralRadiusOptions {
    double tol = 1e-12;
    std::size_t max_iterations = 1000000;
};

namespace detail {

/// Power iteration x <- (M + shift I) x / ||.||_1 from the uniform vector.
/// The estimate is ||(M + shift I) x||_1 for ||x||_1 = 1, which converges to
/// the Perron root for non-negative matrices.
inline std::optional<double> power_iteration(const ChernoffMatrix& M, double shift, const SpectralRadiusOptions& opt)
{
    const std::size_t dim = M.dimension();
    std::vector<double> x(dim, 1.0 / static_cast<double>(dim));
    std::vector<double> y(dim);
    double previous = -1.0;
    for (std::size_t iter = 0; iter < opt.max_iterations; ++iter) {
        double norm = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            double acc = shift * x[i];
            for (const auto& t : M.rows[i]) {
                acc += t.prob * x[t.to];
            }
            y[i] = acc;
            norm += acc;
        }
        if (norm == 0.0) {
            return 0.0;
        }
        for (std::size_t i = 0; i < dim; ++i) {
            x[i] = y[i] / norm;
        }
        if (std::abs(norm - previous) <= opt.tol) {
            return norm;
        }
        previous = norm;
    }
    return std::nullopt;
}

} // namespace detail

/// Perron root of a non-negative sparse matrix. Falls back to iterating on
/// M + ||M||_inf I if the plain iteration does not settle (periodic support).
inline double spectral_radius(const ChernoffMatrix& M, SpectralRadiusOptions opt = {})
{
    if (M.dimension() == 0) {
        throw std::invalid_argument("spectral_radius: empty matrix");
    }
    if (auto lambda = detail::power_iteration(M, 0.0, opt)) {
        return *lambda;
    }
    double shift = 0.0;
    for (const auto& row : M.rows) {
        double s = 0.0;
        for (const auto& t : row) {
            s += t.prob;
        }
        shift = std::max(shift, s);
    }
    if (auto lambda = detail::power_iteration(M, shift, opt)) {
        return *lambda - shift;
    }
    throw std::runtime_error("spectral_radius: power iteration did not converge");
}

struct ExponentResult {
    double u_star = 0.0;
    double lambda_star = 1.0;
    double i_err = 0.0;
    int iterations = 0;
    std::optional<double> theorem1_bound;
    double row_bound = 0.0;
};

/// min over rows present in both chains of (1/8) ||P1_i - P2_i||_1^2.
inline double lower_bound_rows(const TransitionMatrix& p1, const TransitionMatrix& p2)
{
    if (p1.dimension() != p2.dimension()) {
        throw std::invalid_argument("lower_bound_rows: dimension mismatch");
    }
    bool any = false;
    double best = 0.0;
    for (OutputState i = 0; i < p1.dimension(); ++i) {
        const auto& a = p1.row(i);
        const auto& b = p2.row(i);
        if (a.empty() || b.empty()) {
            continue;
        }
        double l1 = 0.0;
        for (const auto& t : a) {
            l1 += std::abs(t.prob - p2.at(i, t.to));
        }
        for (const auto& t : b) {
            if (p1.at(i, t.to) == 0.0) {
                l1 += t.prob;
            }
        }
        const double bound = l1 * l1 / 8.0;
        best = any ? std::min(best, bound) : bound;
        any = true;
    }
    return best;
}

inline double lower_bound_theorem1(double p1, double p2) { return 0.5 * (p1 - p2) * (p1 - p2); }

/// Ternary search for min_u lambda(u) on [0, 1], stopping once r - l < delta.
/// Reports u* = l and I_err = -ln lambda(u*).
inline ExponentResult error_exponent(const TransitionMatrix& p1, const TransitionMatrix& p2, double delta = 1e-6,
                                     SpectralRadiusOptions opt = {})
{
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("error_exponent: delta must lie in (0, 1)");
    }
    const auto lambda = [&](double u) { return spectral_radius(chernoff_matrix(p1, p2, u), opt); };

    ExponentResult r;
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo >= delta) {
        const double u1 = lo + (hi - lo) / 3.0;
        const double u2 = hi - (hi - lo) / 3.0;
        if (lambda(u1) < lambda(u2)) {
            hi = u2;
        } else {
            lo = u1;
        }
        ++r.iterations;
    }
    r.u_star = lo;
    r.lambda_star = lambda(lo);
    r.i_err = -std::log(r.lambda_star);
    r.row_bound = lower_bound_rows(p1, p2);
    return r;
}

/// Iteration bound for the ternary search: ceil(log_{3/2}(1/delta)) + 1.
inline int ternary_iteration_bound(double delta)
{
    return static_cast<int>(std::ceil(std::log(1.0 / delta) / std::log(1.5))) + 1;
}

} // namespace convdetect
