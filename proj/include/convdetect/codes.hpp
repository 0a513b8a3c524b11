#pragma once

#include "convdetect/bits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace convdetect {

/// Raised when an exhaustive enumeration would exceed its configured cap.
class EnumerationTooLarge : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Packed shift-register contents: u_{t-1} in the low k bits, u_{t-2} in the
/// next k bits, and so on. Always < 2^{m*k}.
using MemoryState = std::uint32_t;

/// Feed-forward convolutional code C(k, n, m).
///
/// Generator j holds k*(m+1) taps laid out by delay: tap(j, i, d) multiplies
/// input bit i of u_{t-d}. Instances are immutable and validated on
/// construction.
class ConvCode {
public:
    ConvCode(int k, int n, int m, std::vector<std::vector<std::uint8_t>> generators)
        : k_(k), n_(n), m_(m), generators_(std::move(generators))
    {
        if (k_ < 1 || n_ <= k_ || m_ < 0) {
            throw std::invalid_argument("ConvCode: require k >= 1, n > k, m >= 0");
        }
        if (static_cast<int>(generators_.size()) != n_) {
            throw std::invalid_argument("ConvCode: expected n generators");
        }
        if (n_ > 16 || k_ * (m_ + 1) > 30) {
            throw std::invalid_argument("ConvCode: parameters exceed packed-word limits");
        }
        const auto width = static_cast<std::size_t>(k_ * (m_ + 1));
        bool tight = false;
        masks_.assign(static_cast<std::size_t>(n_), 0);
        for (std::size_t j = 0; j < generators_.size(); ++j) {
            const auto& g = generators_[j];
            if (g.size() != width) {
                throw std::invalid_argument("ConvCode: generator has wrong tap count");
            }
            for (std::size_t t = 0; t < width; ++t) {
                if (g[t] > 1) {
                    throw std::invalid_argument("ConvCode: taps must be 0 or 1");
                }
                if (g[t]) {
                    masks_[j] |= std::uint64_t{1} << t;
                    if (static_cast<int>(t) / k_ == m_) {
                        tight = true;
                    }
                }
            }
        }
        if (!tight) {
            throw std::invalid_argument("ConvCode: memory order is not tight (no tap at delay m)");
        }
    }

    int k() const { return k_; }
    int n() const { return n_; }
    int m() const { return m_; }
    const std::vector<std::vector<std::uint8_t>>& generators() const { return generators_; }

    std::uint8_t tap(int j, int input, int delay) const
    {
        return generators_[static_cast<std::size_t>(j)][static_cast<std::size_t>(delay * k_ + input)];
    }

    std::uint32_t num_memory_states() const { return std::uint32_t{1} << (m_ * k_); }
    std::uint32_t num_inputs() const { return std::uint32_t{1} << k_; }

    /// Output word for (memory-state, input); v^(0) is the most significant of the n bits.
    std::uint32_t output_word(MemoryState state, std::uint32_t input) const
    {
        const std::uint64_t reg = (std::uint64_t{state} << k_) | input;
        std::uint32_t word = 0;
        for (int j = 0; j < n_; ++j) {
            word = (word << 1) | static_cast<std::uint32_t>(parity(reg & masks_[static_cast<std::size_t>(j)]));
        }
        return word;
    }

    MemoryState next_state(MemoryState state, std::uint32_t input) const
    {
        const std::uint64_t reg = (std::uint64_t{state} << k_) | input;
        return static_cast<MemoryState>(reg & (num_memory_states() - 1));
    }

    /// Any generator uses the current input.
    bool uses_current_input() const
    {
        const std::uint64_t low = (std::uint64_t{1} << k_) - 1;
        return std::any_of(masks_.begin(), masks_.end(), [&](std::uint64_t mask) { return (mask & low) != 0; });
    }

    /// Octal label, e.g. "5,7". Only meaningful for k = 1.
    std::string label() const
    {
        std::string out;
        for (std::size_t j = 0; j < generators_.size(); ++j) {
            std::uint64_t v = 0;
            for (auto t : generators_[j]) {
                v = (v << 1) | t;
            }
            if (j) {
                out += ',';
            }
            std::string digits;
            do {
                digits.insert(digits.begin(), static_cast<char>('0' + (v & 7u)));
                v >>= 3;
            } while (v);
            out += digits;
        }
        return out;
    }

    friend bool operator==(const ConvCode& a, const ConvCode& b)
    {
        return a.k_ == b.k_ && a.n_ == b.n_ && a.m_ == b.m_ && a.generators_ == b.generators_;
    }

private:
    int k_;
    int n_;
    int m_;
    std::vector<std::vector<std::uint8_t>> generators_;
    std::vector<std::uint64_t> masks_;
};

/// Builds a k = 1 code from octal generator strings such as {"133", "171"}.
///
/// Each numeral expands most-significant digit first. The longest expansion,
/// stripped of leading zero bits, fixes m + 1; shorter generators are
/// left-padded with zeros. Tap 0 (current input) is the leftmost bit.
inline ConvCode parse_octal_generators(const std::vector<std::string>& octal, int k = 1)
{
    if (k != 1) {
        throw std::invalid_argument("parse_octal_generators: only k = 1 is supported");
    }
    if (octal.empty()) {
        throw std::invalid_argument("parse_octal_generators: empty generator list");
    }
    std::vector<std::vector<std::uint8_t>> expanded;
    std::size_t width = 0;
    for (const auto& text : octal) {
        if (text.empty()) {
            throw std::invalid_argument("parse_octal_generators: empty numeral");
        }
        std::vector<std::uint8_t> bits;
        for (char c : text) {
            if (c < '0' || c > '7') {
                throw std::invalid_argument("parse_octal_generators: non-octal character in '" + text + "'");
            }
            const int v = c - '0';
            bits.push_back(static_cast<std::uint8_t>((v >> 2) & 1));
            bits.push_back(static_cast<std::uint8_t>((v >> 1) & 1));
            bits.push_back(static_cast<std::uint8_t>(v & 1));
        }
        const auto first = std::find(bits.begin(), bits.end(), std::uint8_t{1});
        if (first == bits.end()) {
            throw std::invalid_argument("parse_octal_generators: all-zero generator '" + text + "'");
        }
        bits.erase(bits.begin(), first);
        width = std::max(width, bits.size());
        expanded.push_back(std::move(bits));
    }
    for (auto& g : expanded) {
        g.insert(g.begin(), width - g.size(), std::uint8_t{0});
    }
    const int n = static_cast<int>(expanded.size());
    return ConvCode(1, n, static_cast<int>(width) - 1, std::move(expanded));
}

/// Splits "5,7" (or "5 7") into numerals and parses them.
inline ConvCode parse_octal_list(std::string_view text)
{
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ',' || c == ' ' || c == '[' || c == ']') {
            if (!cur.empty()) {
                parts.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) {
        parts.push_back(cur);
    }
    return parse_octal_generators(parts, 1);
}

/// Encodes from the all-zero memory-state. Output words are concatenated in
/// time order with v^(0)_t first within each word.
inline Bits encode(const ConvCode& code, const Bits& message)
{
    const auto k = static_cast<std::size_t>(code.k());
    if (message.size() % k != 0) {
        throw std::invalid_argument("encode: message length is not a multiple of k");
    }
    Bits out;
    out.reserve(message.size() / k * static_cast<std::size_t>(code.n()));
    MemoryState state = 0;
    for (std::size_t t = 0; t < message.size(); t += k) {
        std::uint32_t input = 0;
        for (std::size_t i = 0; i < k; ++i) {
            input |= static_cast<std::uint32_t>(message[t + i] & 1u) << i;
        }
        unpack_msb_first(code.output_word(state, input), static_cast<std::size_t>(code.n()), out);
        state = code.next_state(state, input);
    }
    return out;
}

/// Branch table indexed by state * 2^k + input.
struct Trellis {
    int k = 0;
    int n = 0;
    int m = 0;
    std::vector<MemoryState> next;
    std::vector<std::uint32_t> output;

    std::uint32_t num_states() const { return std::uint32_t{1} << (m * k); }
    std::uint32_t num_inputs() const { return std::uint32_t{1} << k; }
    std::size_t branch(MemoryState s, std::uint32_t input) const
    {
        return static_cast<std::size_t>(s) * num_inputs() + input;
    }
};

inline Trellis trellis(const ConvCode& code)
{
    Trellis t;
    t.k = code.k();
    t.n = code.n();
    t.m = code.m();
    const auto states = code.num_memory_states();
    const auto inputs = code.num_inputs();
    t.next.resize(static_cast<std::size_t>(states) * inputs);
    t.output.resize(t.next.size());
    for (MemoryState s = 0; s < states; ++s) {
        for (std::uint32_t u = 0; u < inputs; ++u) {
            t.next[t.branch(s, u)] = code.next_state(s, u);
            t.output[t.branch(s, u)] = code.output_word(s, u);
        }
    }
    return t;
}

inline constexpr std::uint64_t default_enumeration_cap = std::uint64_t{1} << 24;

/// Block code D_i: every length n*i output reachable in i consecutive steps
/// from any memory-state. Codewords are packed with the earliest word in the
/// most significant bits, sorted ascending.
struct SectionCode {
    int steps = 0;
    int n = 0;
    std::vector<std::uint64_t> codewords;

    int length() const { return n * steps; }
    std::size_t size() const { return codewords.size(); }
    int dimension() const { return static_cast<int>(std::lround(std::log2(static_cast<double>(codewords.size())))); }
    bool contains(std::uint64_t word) const { return std::binary_search(codewords.begin(), codewords.end(), word); }
};

inline SectionCode section_code(const ConvCode& code, int steps, std::uint64_t path_cap = default_enumeration_cap)
{
    if (steps < 1) {
        throw std::invalid_argument("section_code: steps must be >= 1");
    }
    const int mk = code.m() * code.k();
    const int ik = steps * code.k();
    if (mk + ik >= 63 || (std::uint64_t{1} << (mk + ik)) > path_cap || code.n() * steps > 64) {
        throw EnumerationTooLarge("section_code: enumeration too large");
    }
    const Trellis tr = trellis(code);
    SectionCode out;
    out.steps = steps;
    out.n = code.n();
    out.codewords.reserve(std::size_t{1} << (mk + ik));

    // Depth-first over input blocks, one frame per step.
    struct Frame {
        MemoryState state;
        std::uint64_t word;
        int depth;
    };
    std::vector<Frame> stack;
    for (MemoryState s = 0; s < tr.num_states(); ++s) {
        stack.push_back({s, 0, 0});
        while (!stack.empty()) {
            const Frame f = stack.back();
            stack.pop_back();
            if (f.depth == steps) {
                out.codewords.push_back(f.word);
                continue;
            }
            for (std::uint32_t u = 0; u < tr.num_inputs(); ++u) {
                const auto b = tr.branch(f.state, u);
                stack.push_back({tr.next[b], (f.word << code.n()) | tr.output[b], f.depth + 1});
            }
        }
    }
    std::sort(out.codewords.begin(), out.codewords.end());
    out.codewords.erase(std::unique(out.codewords.begin(), out.codewords.end()), out.codewords.end());
    return out;
}

/// A[j] = number of codewords of Hamming weight j, j = 0..length.
struct WeightEnumerator {
    std::vector<std::uint64_t> counts;

    std::uint64_t total() const
    {
        std::uint64_t s = 0;
        for (auto c : counts) {
            s += c;
        }
        return s;
    }

    /// sum_j A[j] eps^j (1-eps)^(L-j): probability that BSC(eps) noise is a codeword.
    double codeword_noise_probability(double eps) const
    {
        const int length = static_cast<int>(counts.size()) - 1;
        double s = 0.0;
        for (int j = 0; j <= length; ++j) {
            if (counts[static_cast<std::size_t>(j)]) {
                s += static_cast<double>(counts[static_cast<std::size_t>(j)]) * std::pow(eps, j) *
                     std::pow(1.0 - eps, length - j);
            }
        }
        return s;
    }

    friend bool operator==(const WeightEnumerator&, const WeightEnumerator&) = default;
};

inline WeightEnumerator weight_enumerator(const SectionCode& section)
{
    WeightEnumerator we;
    we.counts.assign(static_cast<std::size_t>(section.length()) + 1, 0);
    for (auto w : section.codewords) {
        ++we.counts[static_cast<std::size_t>(popcount(w))];
    }
    return we;
}

struct AssumptionReport {
    bool has_identical_memory_states = false;
    bool has_equal_branch_outputs = false;
    /// No generator taps the current input.
    bool is_delay_degenerate = false;
    /// D_1, D_2, D_3 have dimensions 2, 4, 5 (checked only for k=1, n=2, m=2).
    bool has_minimal_dimensions = false;
    bool is_analysis_eligible = false;
};

/// Exhaustive check of the assumptions behind the closed-form analysis.
/// Reports; never rejects.
inline AssumptionReport validate_assumptions(const ConvCode& code)
{
    AssumptionReport r;
    const Trellis tr = trellis(code);
    std::vector<std::vector<std::uint32_t>> signatures;
    signatures.reserve(tr.num_states());
    for (MemoryState s = 0; s < tr.num_states(); ++s) {
        std::vector<std::uint32_t> sig;
        for (std::uint32_t u = 0; u < tr.num_inputs(); ++u) {
            sig.push_back(tr.output[tr.branch(s, u)]);
        }
        auto sorted = sig;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            r.has_equal_branch_outputs = true;
        }
        signatures.push_back(std::move(sig));
    }
    auto sorted = signatures;
    std::sort(sorted.begin(), sorted.end());
    r.has_identical_memory_states = std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
    r.is_delay_degenerate = !code.uses_current_input();

    const bool shape = code.k() == 1 && code.n() == 2 && code.m() == 2;
    if (shape) {
        r.has_minimal_dimensions = section_code(code, 1).dimension() == 2 && section_code(code, 2).dimension() == 4 &&
                                   section_code(code, 3).dimension() == 5;
    }
    r.is_analysis_eligible =
        shape && !r.has_identical_memory_states && !r.has_equal_branch_outputs && r.has_minimal_dimensions;
    return r;
}

} // namespace convdetect
