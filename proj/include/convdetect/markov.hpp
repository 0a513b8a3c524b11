#pragma once

#include "convdetect/codes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace convdetect {

/// Window of the last m n-bit words, most recent word in the low n bits.
using OutputState = std::uint32_t;

enum class StateSpace { clean, noisy };

struct Transition {
    OutputState to;
    double prob;

    friend bool operator==(const Transition&, const Transition&) = default;
};

/// Sparse row-stochastic matrix over output states (2^{nm} of them). Every
/// stored entry is overlap-consistent; rows never reached by a clean chain
/// are left empty.
class TransitionMatrix {
public:
    using Row = std::vector<Transition>;

    TransitionMatrix(int word_bits, int window, StateSpace space, double epsilon)
        : word_bits_(word_bits), window_(window), space_(space), epsilon_(epsilon),
          rows_(std::size_t{1} << (word_bits * window))
    {
    }

    std::size_t dimension() const { return rows_.size(); }
    int word_bits() const { return word_bits_; }
    int window() const { return window_; }
    StateSpace space() const { return space_; }
    double epsilon() const { return epsilon_; }

    const Row& row(OutputState i) const { return rows_[i]; }
    const std::vector<Row>& rows() const { return rows_; }

    /// Row entries must be sorted by column.
    void set_row(OutputState i, Row row) { rows_[i] = std::move(row); }

    double at(OutputState i, OutputState j) const
    {
        const auto& r = rows_[i];
        auto it = std::lower_bound(r.begin(), r.end(), j, [](const Transition& t, OutputState c) { return t.to < c; });
        return (it != r.end() && it->to == j) ? it->prob : 0.0;
    }

    std::size_t nonempty_rows() const
    {
        return static_cast<std::size_t>(std::count_if(rows_.begin(), rows_.end(), [](const Row& r) { return !r.empty(); }));
    }

    OutputState successor(OutputState from, std::uint32_t word) const
    {
        const OutputState keep = (OutputState{1} << (word_bits_ * (window_ - 1))) - 1;
        return ((from & keep) << word_bits_) | word;
    }

    bool is_admissible(OutputState from, OutputState to) const
    {
        const OutputState word = to & ((OutputState{1} << word_bits_) - 1);
        return successor(from, word) == to;
    }

private:
    int word_bits_;
    int window_;
    StateSpace space_;
    double epsilon_;
    std::vector<Row> rows_;
};

inline constexpr int default_state_bits_cap = 26;

namespace detail {

inline void check_markov_shape(const ConvCode& code)
{
    if (code.m() < 1) {
        throw std::invalid_argument("output-state chain requires m >= 1");
    }
    if (code.n() * code.m() > default_state_bits_cap) {
        throw EnumerationTooLarge("output-state space exceeds 2^26 states");
    }
}

inline void check_noisy_epsilon(double eps)
{
    if (!(eps > 0.0 && eps <= 0.5)) {
        throw std::invalid_argument("noisy transition requires epsilon in (0, 0.5]; use noise_free_transition at 0");
    }
}

/// pw[d] = eps^d (1-eps)^(length-d).
inline std::vector<double> bsc_weights(double eps, int length)
{
    std::vector<double> pw(static_cast<std::size_t>(length) + 1);
    for (int d = 0; d <= length; ++d) {
        pw[static_cast<std::size_t>(d)] = std::pow(eps, d) * std::pow(1.0 - eps, length - d);
    }
    return pw;
}

} // namespace detail

/// Clean chain P'. Drives the encoder from every memory-state through m+1
/// further inputs and tallies window-to-window transitions.
inline TransitionMatrix noise_free_transition(const ConvCode& code)
{
    detail::check_markov_shape(code);
    const int n = code.n();
    const int m = code.m();
    const Trellis tr = trellis(code);
    TransitionMatrix P(n, m, StateSpace::clean, 0.0);

    std::vector<std::vector<std::pair<OutputState, std::uint64_t>>> counts(P.dimension());
    const std::uint64_t blocks = std::uint64_t{1} << (code.k() * (m + 1));
    const std::uint32_t input_mask = tr.num_inputs() - 1;
    const OutputState window_mask = static_cast<OutputState>((std::uint64_t{1} << (n * m)) - 1);
    for (MemoryState start = 0; start < tr.num_states(); ++start) {
        for (std::uint64_t block = 0; block < blocks; ++block) {
            MemoryState s = start;
            std::uint64_t words = 0;
            for (int step = 0; step <= m; ++step) {
                const auto u = static_cast<std::uint32_t>(block >> (step * code.k())) & input_mask;
                const auto b = tr.branch(s, u);
                words = (words << n) | tr.output[b];
                s = tr.next[b];
            }
            const auto from = static_cast<OutputState>(words >> n);
            const auto to = static_cast<OutputState>(words & window_mask);
            auto& row = counts[from];
            auto it = std::find_if(row.begin(), row.end(), [&](const auto& e) { return e.first == to; });
            if (it == row.end()) {
                row.emplace_back(to, 1);
            } else {
                ++it->second;
            }
        }
    }
    for (OutputState i = 0; i < P.dimension(); ++i) {
        auto& row = counts[i];
        if (row.empty()) {
            continue;
        }
        std::sort(row.begin(), row.end());
        std::uint64_t total = 0;
        for (const auto& e : row) {
            total += e.second;
        }
        TransitionMatrix::Row out;
        for (const auto& e : row) {
            out.push_back({e.first, static_cast<double>(e.second) / static_cast<double>(total)});
        }
        P.set_row(i, std::move(out));
    }
    return P;
}

/// Noisy chain P from the window-probability ratio
///   P[s -> (s,w)] = P[Y window of m+1 words = (s,w)] / P[Y window of m words = s]
/// with codewords of D_{m+1} and D_m taken uniformly.
inline TransitionMatrix noisy_transition_exact(const ConvCode& code, double eps)
{
    detail::check_markov_shape(code);
    detail::check_noisy_epsilon(eps);
    const int n = code.n();
    const int m = code.m();
    const SectionCode dm = section_code(code, m);
    const SectionCode dm1 = section_code(code, m + 1);
    const auto pw_m = detail::bsc_weights(eps, n * m);
    const auto pw_m1 = detail::bsc_weights(eps, n * (m + 1));
    const std::uint32_t words = std::uint32_t{1} << n;
    const std::uint64_t word_mask = words - 1;

    TransitionMatrix P(n, m, StateSpace::noisy, eps);
    std::vector<double> acc(words);
    for (OutputState s = 0; s < P.dimension(); ++s) {
        double den = 0.0;
        for (auto v : dm.codewords) {
            den += pw_m[static_cast<std::size_t>(popcount(s ^ v))];
        }
        den /= static_cast<double>(dm.size());

        std::fill(acc.begin(), acc.end(), 0.0);
        for (auto v : dm1.codewords) {
            const int prefix = popcount(s ^ (v >> n));
            const auto last = static_cast<std::uint32_t>(v & word_mask);
            for (std::uint32_t w = 0; w < words; ++w) {
                acc[w] += pw_m1[static_cast<std::size_t>(prefix + popcount(w ^ last))];
            }
        }
        TransitionMatrix::Row row;
        row.reserve(words);
        for (std::uint32_t w = 0; w < words; ++w) {
            row.push_back({P.successor(s, w), acc[w] / static_cast<double>(dm1.size()) / den});
        }
        std::sort(row.begin(), row.end(), [](const Transition& a, const Transition& b) { return a.to < b.to; });
        P.set_row(s, std::move(row));
    }
    return P;
}

/// Noisy chain P from the marginalization chain
///   P(s'|s) ∝ Σ_{c,c'} P(s|c) P'(c'|c) P(s'|c'),
/// rows normalized over admissible successors. Treats the two received
/// windows as conditionally independent given the clean windows, so it only
/// approximates noisy_transition_exact.
inline TransitionMatrix noisy_transition_factored(const ConvCode& code, double eps)
{
    detail::check_markov_shape(code);
    detail::check_noisy_epsilon(eps);
    const TransitionMatrix clean = noise_free_transition(code);
    const int n = code.n();
    const int m = code.m();
    const auto pw = detail::bsc_weights(eps, n * m);
    const std::uint32_t words = std::uint32_t{1} << n;

    struct CleanEdge {
        OutputState from;
        OutputState to;
        double prob;
    };
    std::vector<CleanEdge> edges;
    for (OutputState c = 0; c < clean.dimension(); ++c) {
        for (const auto& t : clean.row(c)) {
            edges.push_back({c, t.to, t.prob});
        }
    }

    TransitionMatrix P(n, m, StateSpace::noisy, eps);
    std::vector<double> acc(words);
    std::vector<OutputState> succ(words);
    for (OutputState s = 0; s < P.dimension(); ++s) {
        for (std::uint32_t w = 0; w < words; ++w) {
            succ[w] = P.successor(s, w);
        }
        std::fill(acc.begin(), acc.end(), 0.0);
        for (const auto& e : edges) {
            const double head = pw[static_cast<std::size_t>(popcount(s ^ e.from))] * e.prob;
            for (std::uint32_t w = 0; w < words; ++w) {
                acc[w] += head * pw[static_cast<std::size_t>(popcount(succ[w] ^ e.to))];
            }
        }
        double total = 0.0;
        for (double a : acc) {
            total += a;
        }
        TransitionMatrix::Row row;
        for (std::uint32_t w = 0; w < words; ++w) {
            row.push_back({succ[w], acc[w] / total});
        }
        std::sort(row.begin(), row.end(), [](const Transition& a, const Transition& b) { return a.to < b.to; });
        P.set_row(s, std::move(row));
    }
    return P;
}

/// Row parameter of eligible codes: each noisy row is a permutation of
/// {p/2, p/2, (1-p)/2, (1-p)/2, 0, ...}.
struct ClosedFormRow {
    double p = 1.0;

    std::array<double, 4> row() const { return {(1.0 - p) / 2.0, (1.0 - p) / 2.0, p / 2.0, p / 2.0}; }
};

/// p = Σ_j A_j^(3) eps^j (1-eps)^(6-j) / Σ_j A_j^(2) eps^j (1-eps)^(4-j).
///
/// The window-probability ratio with uniform codeword priors gives
/// (Q3/|D_3|) / (Q2/|D_2|) = Q3/(2 Q2), which is the row entry p/2, not p.
inline ClosedFormRow closed_form_p(const ConvCode& code, double eps)
{
    if (!validate_assumptions(code).is_analysis_eligible) {
        throw std::invalid_argument("closed form requires an analysis-eligible code (k=1, n=2, m=2, minimal)");
    }
    if (!(eps >= 0.0 && eps <= 0.5)) {
        throw std::invalid_argument("closed_form_p: epsilon must lie in [0, 0.5]");
    }
    const double q3 = weight_enumerator(section_code(code, 3)).codeword_noise_probability(eps);
    const double q2 = weight_enumerator(section_code(code, 2)).codeword_noise_probability(eps);
    return ClosedFormRow{q3 / q2};
}

/// Left fixed point of P via the lazy iteration pi <- (pi + pi P)/2, started
/// uniform over the nonempty rows. Stops once ||pi P - pi||_1 <= tol.
inline std::vector<double> stationary_distribution(const TransitionMatrix& P, double tol = 1e-12,
                                                   std::size_t max_iterations = 100000)
{
    const std::size_t dim = P.dimension();
    std::vector<double> pi(dim, 0.0);
    const auto support = P.nonempty_rows();
    if (support == 0) {
        throw std::invalid_argument("stationary_distribution: matrix has no nonempty rows");
    }
    for (std::size_t i = 0; i < dim; ++i) {
        if (!P.row(static_cast<OutputState>(i)).empty()) {
            pi[i] = 1.0 / static_cast<double>(support);
        }
    }
    std::vector<double> next(dim);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            if (pi[i] == 0.0) {
                continue;
            }
            for (const auto& t : P.row(static_cast<OutputState>(i))) {
                next[t.to] += pi[i] * t.prob;
            }
        }
        double residual = 0.0;
        double mass = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            residual += std::abs(next[i] - pi[i]);
            mass += next[i];
        }
        if (residual <= tol) {
            for (auto& x : next) {
                x /= mass;
            }
            return next;
        }
        for (std::size_t i = 0; i < dim; ++i) {
            pi[i] = 0.5 * (pi[i] + next[i] / mass);
        }
    }
    throw std::runtime_error("stationary_distribution: no convergence");
}

/// Largest element-wise |P1 - P2| over the union of supports.
inline double max_abs_difference(const TransitionMatrix& a, const TransitionMatrix& b)
{
    if (a.dimension() != b.dimension()) {
        throw std::invalid_argument("max_abs_difference: dimension mismatch");
    }
    double worst = 0.0;
    for (OutputState i = 0; i < a.dimension(); ++i) {
        for (const auto& t : a.row(i)) {
            worst = std::max(worst, std::abs(t.prob - b.at(i, t.to)));
        }
        for (const auto& t : b.row(i)) {
            worst = std::max(worst, std::abs(t.prob - a.at(i, t.to)));
        }
    }
    return worst;
}

/// Codes inducing identical noise-free output-state chains.
inline bool codes_equivalent(const ConvCode& a, const ConvCode& b)
{
    if (a.k() != b.k() || a.n() != b.n() || a.m() != b.m()) {
        throw std::invalid_argument("codes_equivalent: parameter mismatch");
    }
    return noise_free_transition(a).rows() == noise_free_transition(b).rows();
}

/// "row,col,prob" lines, one per stored entry.
inline void write_csv_triplets(std::ostream& os, const TransitionMatrix& P)
{
    os << "row,col,prob\n";
    char buf[64];
    for (OutputState i = 0; i < P.dimension(); ++i) {
        for (const auto& t : P.row(i)) {
            std::snprintf(buf, sizeof buf, "%.17g", t.prob);
            os << i << ',' << t.to << ',' << buf << '\n';
        }
    }
}

} // namespace convdetect
