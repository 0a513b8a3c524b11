#pragma once

#include "convdetect/codes.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace convdetect {

enum class BcjrMode { scaled, unscaled };

enum class Hypothesis { h1, h2 };

inline constexpr double log_zero = -std::numeric_limits<double>::infinity();

struct BcjrOutput {
    double log_likelihood = 0.0;
    /// Unscaled mode only: the linear-domain likelihood underflowed.
    bool underflow = false;
};

struct LikelihoodResult {
    double log_likelihood_h1 = 0.0;
    double log_likelihood_h2 = 0.0;
    double log_ratio = 0.0;
    Hypothesis decision = Hypothesis::h1;
    bool underflow_h1 = false;
    bool underflow_h2 = false;
};

/// Forward recursion over the code trellis computing ln P(Y | code) for a
/// BSC. Holds the trellis and a reusable workspace; one instance per thread.
///
/// Branch metric: 2^-k eps^d (1-eps)^(n-d), d = Hamming distance between the
/// received word and the branch output. Starts in the zero memory-state; no
/// termination, so the likelihood is the sum of the final forward vector.
class TrellisLikelihood {
public:
    explicit TrellisLikelihood(const ConvCode& code) : trellis_(trellis(code)) {}

    const Trellis& trellis_table() const { return trellis_; }

    BcjrOutput operator()(const Bits& received, double eps, BcjrMode mode)
    {
        const auto n = static_cast<std::size_t>(trellis_.n);
        if (received.size() % n != 0) {
            throw std::invalid_argument("bcjr: received length is not a multiple of n");
        }
        if (!(eps >= 0.0 && eps <= 0.5)) {
            throw std::invalid_argument("bcjr: epsilon must lie in [0, 0.5]");
        }
        const std::size_t steps = received.size() / n;
        const std::uint32_t states = trellis_.num_states();
        const std::uint32_t inputs = trellis_.num_inputs();
        const std::uint32_t words = std::uint32_t{1} << n;

        const double prior = 1.0 / static_cast<double>(inputs);
        per_distance_.resize(n + 1);
        for (std::size_t d = 0; d <= n; ++d) {
            per_distance_[d] =
                prior * std::pow(eps, static_cast<double>(d)) * std::pow(1.0 - eps, static_cast<double>(n - d));
        }
        branch_metric_.resize(words);
        alpha_.assign(states, 0.0);
        next_.assign(states, 0.0);
        alpha_[0] = 1.0;

        double log_scale = 0.0;
        for (std::size_t t = 0; t < steps; ++t) {
            const auto y = static_cast<std::uint32_t>(pack_msb_first(received, t * n, n));
            for (std::uint32_t w = 0; w < words; ++w) {
                branch_metric_[w] = per_distance_[static_cast<std::size_t>(popcount(w ^ y))];
            }
            std::fill(next_.begin(), next_.end(), 0.0);
            std::size_t b = 0;
            for (std::uint32_t s = 0; s < states; ++s) {
                const double a = alpha_[s];
                for (std::uint32_t u = 0; u < inputs; ++u, ++b) {
                    next_[trellis_.next[b]] += a * branch_metric_[trellis_.output[b]];
                }
            }
            if (mode == BcjrMode::scaled) {
                double c = 0.0;
                for (double x : next_) {
                    c += x;
                }
                if (c == 0.0) {
                    return {log_zero, false};
                }
                log_scale += std::log(c);
                const double inv = 1.0 / c;
                for (auto& x : next_) {
                    x *= inv;
                }
            }
            alpha_.swap(next_);
        }

        if (mode == BcjrMode::scaled) {
            return {log_scale, false};
        }
        double total = 0.0;
        for (double x : alpha_) {
            total += x;
        }
        BcjrOutput out;
        out.log_likelihood = total > 0.0 ? std::log(total) : log_zero;
        // At eps = 0 an exact zero is an impossible observation, not underflow.
        out.underflow = (total == 0.0 && eps > 0.0) || (total > 0.0 && total < DBL_MIN);
        return out;
    }

private:
    Trellis trellis_;
    std::vector<double> per_distance_;
    std::vector<double> branch_metric_;
    std::vector<double> alpha_;
    std::vector<double> next_;
};

inline BcjrOutput bcjr_log_likelihood(const ConvCode& code, const Bits& received, double eps,
                                      BcjrMode mode = BcjrMode::scaled)
{
    TrellisLikelihood engine(code);
    return engine(received, eps, mode);
}

inline constexpr int brute_force_max_message_bits = 20;

namespace detail {

inline double log_add(double a, double b)
{
    if (a == log_zero) {
        return b;
    }
    if (b == log_zero) {
        return a;
    }
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// Pairwise (tree) log-sum-exp over terms[first, last).
inline double log_sum_pairwise(const std::vector<double>& terms, std::size_t first, std::size_t last)
{
    if (last - first == 1) {
        return terms[first];
    }
    const std::size_t mid = first + (last - first) / 2;
    return log_add(log_sum_pairwise(terms, first, mid), log_sum_pairwise(terms, mid, last));
}

} // namespace detail

/// ln Σ_u 2^{-Nk} eps^d (1-eps)^{Nn-d}, d = d_H(received, encode(u)), over
/// all 2^{Nk} messages.
inline double brute_force_log_likelihood(const ConvCode& code, const Bits& received, double eps)
{
    const auto n = static_cast<std::size_t>(code.n());
    if (received.size() % n != 0) {
        throw std::invalid_argument("brute_force: received length is not a multiple of n");
    }
    const std::size_t steps = received.size() / n;
    const std::size_t message_bits = steps * static_cast<std::size_t>(code.k());
    if (message_bits > static_cast<std::size_t>(brute_force_max_message_bits) || steps == 0) {
        throw std::invalid_argument("brute_force: N*k must lie in [1, 20]");
    }
    const double log_prior = -static_cast<double>(message_bits) * std::numbers::ln2;
    const double log_eps = eps > 0.0 ? std::log(eps) : log_zero;
    const double log_keep = std::log1p(-eps);
    const std::size_t total_bits = received.size();

    const std::size_t count = std::size_t{1} << message_bits;
    std::vector<double> terms(count);
    Bits message(message_bits);
    for (std::size_t u = 0; u < count; ++u) {
        for (std::size_t i = 0; i < message_bits; ++i) {
            message[i] = static_cast<std::uint8_t>((u >> i) & 1u);
        }
        const std::size_t d = hamming_distance(encode(code, message), received);
        if (d > 0 && eps == 0.0) {
            terms[u] = log_zero;
        } else {
            terms[u] = log_prior + static_cast<double>(d) * (d ? log_eps : 0.0) +
                       static_cast<double>(total_bits - d) * log_keep;
        }
    }
    return detail::log_sum_pairwise(terms, 0, count);
}

/// Decides H1 iff ln P(Y|H1) - ln P(Y|H2) >= ln tau. Both likelihoods -inf
/// is treated as a tie.
inline LikelihoodResult decide(const BcjrOutput& h1, const BcjrOutput& h2, double tau = 1.0)
{
    if (!(tau > 0.0)) {
        throw std::invalid_argument("lrt: tau must be positive");
    }
    LikelihoodResult r;
    r.log_likelihood_h1 = h1.log_likelihood;
    r.log_likelihood_h2 = h2.log_likelihood;
    r.underflow_h1 = h1.underflow;
    r.underflow_h2 = h2.underflow;
    if (h1.log_likelihood == log_zero && h2.log_likelihood == log_zero) {
        r.log_ratio = 0.0;
    } else {
        r.log_ratio = h1.log_likelihood - h2.log_likelihood;
    }
    r.decision = r.log_ratio >= std::log(tau) ? Hypothesis::h1 : Hypothesis::h2;
    return r;
}

inline LikelihoodResult lrt_decide(const ConvCode& c1, const ConvCode& c2, const Bits& received, double eps,
                                   double tau = 1.0, BcjrMode mode = BcjrMode::scaled)
{
    if (c1.n() != c2.n() || c1.k() != c2.k()) {
        throw std::invalid_argument("lrt_decide: codes must share k and n");
    }
    return decide(bcjr_log_likelihood(c1, received, eps, mode), bcjr_log_likelihood(c2, received, eps, mode), tau);
}

} // namespace convdetect
