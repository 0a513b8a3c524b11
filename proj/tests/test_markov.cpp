#include "convdetect/channel.hpp"
#include "convdetect/markov.hpp"
#include "oracles/test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace convdetect;
namespace ct = convdetect::testing;
using convdetect::testing::sorted_row;

namespace {

const std::vector<double> row_eps{0.05, 0.1, 0.2, 0.4};

void expect_row_stochastic(const TransitionMatrix& P)
{
    for (OutputState i = 0; i < P.dimension(); ++i) {
        const auto& row = P.row(i);
        if (row.empty()) {
            continue;
        }
        double s = 0.0;
        for (const auto& t : row) {
            s += t.prob;
            EXPECT_TRUE(P.is_admissible(i, t.to));
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
        EXPECT_LE(row.size(), std::size_t{1} << P.word_bits());
    }
}

} // namespace

TEST(NoiseFree, Code57RowsAreHalfHalf)
{
    const auto P = noise_free_transition(parse_octal_generators({"5", "7"}));
    EXPECT_EQ(P.dimension(), 16u);
    EXPECT_EQ(P.nonempty_rows(), 16u);
    for (OutputState i = 0; i < 16; ++i) {
        EXPECT_EQ(sorted_row(P.row(i)), (std::vector<double>{0.5, 0.5}));
    }
    expect_row_stochastic(P);
}

TEST(NoiseFree, Code45FromEnumeration)
{
    // Enumeration shows every 2-word window of [4,5] is reachable and
    // determines the next word's dependence on one fresh input bit.
    const auto P = noise_free_transition(parse_octal_generators({"4", "5"}));
    EXPECT_EQ(P.nonempty_rows(), 16u);
    for (OutputState i = 0; i < 16; ++i) {
        EXPECT_EQ(sorted_row(P.row(i)), (std::vector<double>{0.5, 0.5}));
    }
}

TEST(NoiseFree, NonMinimalCodeHasEmptyRows)
{
    const auto P = noise_free_transition(parse_octal_generators({"3", "5"}));
    EXPECT_EQ(P.nonempty_rows(), 8u);
    expect_row_stochastic(P);
}

TEST(NoiseFree, HalfHalfRowsOnEligibleFamily)
{
    for (const auto& c : ct::eligible_m2_codes()) {
        const auto P = noise_free_transition(c);
        EXPECT_EQ(P.nonempty_rows(), 16u) << c.label();
        for (OutputState i = 0; i < P.dimension(); ++i) {
            EXPECT_EQ(sorted_row(P.row(i)), (std::vector<double>{0.5, 0.5})) << c.label();
        }
    }
}

TEST(NoiseFree, StateCapAndShape)
{
    EXPECT_THROW(noise_free_transition(ConvCode(1, 2, 0, {{1}, {1}})), std::invalid_argument);
}

TEST(NoisyExact, FourEntryRowStructureFor57)
{
    const auto code = parse_octal_generators({"5", "7"});
    const auto P = noisy_transition_exact(code, 0.1);
    const double p = closed_form_p(code, 0.1).p;
    for (OutputState i = 0; i < P.dimension(); ++i) {
        const auto row = sorted_row(P.row(i));
        ASSERT_EQ(row.size(), 4u);
        EXPECT_NEAR(row[0], (1 - p) / 2, 1e-12);
        EXPECT_NEAR(row[1], (1 - p) / 2, 1e-12);
        EXPECT_NEAR(row[2], p / 2, 1e-12);
        EXPECT_NEAR(row[3], p / 2, 1e-12);
    }
}

TEST(NoisyExact, CodewordSuccessorsCarryTheLargerMass)
{
    const auto code = parse_octal_generators({"5", "7"});
    const auto P = noisy_transition_exact(code, 0.1);
    const auto clean = noise_free_transition(code);
    const double p = closed_form_p(code, 0.1).p;
    for (OutputState i = 0; i < P.dimension(); ++i) {
        for (const auto& t : P.row(i)) {
            const double expected = clean.at(i, t.to) > 0 ? p / 2 : (1 - p) / 2;
            EXPECT_NEAR(t.prob, expected, 1e-12);
        }
    }
}

TEST(NoisyExact, UniformAtHalf)
{
    for (const auto& gens : std::vector<std::vector<std::string>>{{"5", "7"}, {"4", "5"}, {"11", "5"}}) {
        const auto P = noisy_transition_exact(parse_octal_generators(gens), 0.5);
        for (OutputState i = 0; i < P.dimension(); ++i) {
            ASSERT_EQ(P.row(i).size(), 4u);
            for (const auto& t : P.row(i)) {
                EXPECT_NEAR(t.prob, 0.25, 1e-15);
            }
        }
    }
}

TEST(NoisyExact, RowValueMatchesSimulatedWindows)
{
    // 10^6 independent 3-word windows: random start memory-state, inputs and noise.
    const auto code = parse_octal_generators({"5", "7"});
    const double eps = 0.1;
    const auto P = noisy_transition_exact(code, eps);
    const OutputState from = 0b0110;
    const OutputState to = P.successor(from, 0b11);

    auto eng = RngStream(31337).engine();
    std::uint64_t from_count = 0, pair_count = 0;
    for (int trial = 0; trial < 1000000; ++trial) {
        MemoryState s = static_cast<MemoryState>(eng() & 3u);
        std::uint32_t window = 0;
        for (int step = 0; step < 3; ++step) {
            const auto u = static_cast<std::uint32_t>(eng() & 1u);
            std::uint32_t word = code.output_word(s, u);
            for (int b = 0; b < 2; ++b) {
                if (uniform01(eng) < eps) {
                    word ^= 1u << b;
                }
            }
            window = (window << 2) | word;
            s = code.next_state(s, u);
        }
        if ((window >> 2) == from) {
            ++from_count;
            pair_count += (window & 0xF) == to;
        }
    }
    const double estimate = static_cast<double>(pair_count) / static_cast<double>(from_count);
    const double p = P.at(from, to);
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(from_count));
    EXPECT_NEAR(estimate, p, 3 * sigma);
}

TEST(NoisyExact, Errors)
{
    const auto code = parse_octal_generators({"5", "7"});
    EXPECT_THROW(noisy_transition_exact(code, 0.0), std::invalid_argument);
    EXPECT_THROW(noisy_transition_exact(code, 0.6), std::invalid_argument);
}

TEST(NoisyFactored, ConvergesToCleanChainAsNoiseVanishes)
{
    for (const auto& gens : std::vector<std::vector<std::string>>{{"5", "7"}, {"4", "5"}, {"11", "5"}}) {
        const auto code = parse_octal_generators(gens);
        const auto clean = noise_free_transition(code);
        const auto P = noisy_transition_factored(code, 1e-9);
        for (OutputState i = 0; i < P.dimension(); ++i) {
            if (clean.row(i).empty()) {
                continue;
            }
            for (const auto& t : P.row(i)) {
                EXPECT_NEAR(t.prob, clean.at(i, t.to), 1e-6);
            }
        }
    }
}

TEST(NoisyFactored, UniformAtHalf)
{
    const auto P = noisy_transition_factored(parse_octal_generators({"5", "7"}), 0.5);
    for (OutputState i = 0; i < P.dimension(); ++i) {
        for (const auto& t : P.row(i)) {
            EXPECT_NEAR(t.prob, 0.25, 1e-15);
        }
    }
}

TEST(NoisyFactored, GapToExactConstructionIsReported)
{
    const auto code = parse_octal_generators({"5", "7"});
    const auto exact = noisy_transition_exact(code, 0.1);
    const auto factored = noisy_transition_factored(code, 0.1);
    expect_row_stochastic(factored);
    const double gap = max_abs_difference(exact, factored);
    RecordProperty("max_abs_gap", std::to_string(gap));
    std::cout << "[ info ] factored vs exact max |dP| at eps=0.1: " << gap << '\n';
    EXPECT_TRUE(std::isfinite(gap));
    EXPECT_LT(gap, 0.5);
}

TEST(ClosedFormP, Endpoints)
{
    const auto code = parse_octal_generators({"5", "7"});
    EXPECT_DOUBLE_EQ(closed_form_p(code, 0.0).p, 1.0);
    EXPECT_NEAR(closed_form_p(code, 0.5).p, 0.5, 1e-15);
}

TEST(ClosedFormP, MatchesExactConstructionOnEligibleFamily)
{
    for (const auto& c : ct::eligible_m2_codes()) {
        for (double eps : row_eps) {
            const double p = closed_form_p(c, eps).p;
            EXPECT_GT(p, 1 - p);
            const auto P = noisy_transition_exact(c, eps);
            for (OutputState i = 0; i < P.dimension(); ++i) {
                const auto row = sorted_row(P.row(i));
                ASSERT_EQ(row.size(), 4u);
                EXPECT_NEAR(row[0], (1 - p) / 2, 1e-12);
                EXPECT_NEAR(row[1], (1 - p) / 2, 1e-12);
                EXPECT_NEAR(row[2], p / 2, 1e-12);
                EXPECT_NEAR(row[3], p / 2, 1e-12);
            }
        }
    }
}

TEST(ClosedFormP, RejectsIneligibleCodes)
{
    EXPECT_THROW(closed_form_p(parse_octal_generators({"4", "5"}), 0.1), std::invalid_argument);
    EXPECT_THROW(closed_form_p(parse_octal_generators({"11", "5"}), 0.1), std::invalid_argument);
}

TEST(Stationary, UniformForHalfNoise)
{
    const auto P = noisy_transition_exact(parse_octal_generators({"5", "7"}), 0.5);
    const auto pi = stationary_distribution(P);
    for (double x : pi) {
        EXPECT_NEAR(x, 1.0 / 16, 1e-12);
    }
}

TEST(Stationary, CleanChainUniformOverReachableStates)
{
    const auto P = noise_free_transition(parse_octal_generators({"5", "7"}));
    const double tol = 1e-12;
    const auto pi = stationary_distribution(P, tol);
    for (double x : pi) {
        EXPECT_NEAR(x, 1.0 / 16, 1e-10);
    }
    std::vector<double> next(pi.size(), 0.0);
    for (OutputState i = 0; i < P.dimension(); ++i) {
        for (const auto& t : P.row(i)) {
            next[t.to] += pi[i] * t.prob;
        }
    }
    double residual = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        residual += std::abs(next[i] - pi[i]);
    }
    EXPECT_LE(residual, 2 * tol);
}

TEST(MarkovInvariants, StochasticSparseAndFullAdmissibleSupport)
{
    std::vector<ConvCode> codes = ct::all_m2_codes();
    for (const auto& gens : std::vector<std::vector<std::string>>{{"11", "5"}, {"7", "10"}, {"37", "21"}}) {
        codes.push_back(parse_octal_generators(gens));
    }
    for (const auto& c : codes) {
        expect_row_stochastic(noise_free_transition(c));
        for (double eps : {0.05, 0.25, 0.5}) {
            for (const auto& P : {noisy_transition_exact(c, eps), noisy_transition_factored(c, eps)}) {
                expect_row_stochastic(P);
                for (OutputState i = 0; i < P.dimension(); ++i) {
                    ASSERT_EQ(P.row(i).size(), 4u);
                    for (const auto& t : P.row(i)) {
                        EXPECT_GT(t.prob, 0.0);
                    }
                }
            }
        }
    }
}

TEST(MarkovInvariants, NoisyEqualIffCleanEqual)
{
    const auto family = ct::eligible_m2_codes();
    std::mt19937 rng(4);
    int pairs = 0, equal_pairs = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const auto& a = family[rng() % family.size()];
        const auto& b = trial % 5 == 0 ? a : family[rng() % family.size()];
        const bool clean_equal = noise_free_transition(a).rows() == noise_free_transition(b).rows();
        const bool noisy_equal =
            max_abs_difference(noisy_transition_exact(a, 0.25), noisy_transition_exact(b, 0.25)) <= 1e-12;
        EXPECT_EQ(clean_equal, noisy_equal) << a.label() << " vs " << b.label();
        ++pairs;
        equal_pairs += clean_equal;
    }
    EXPECT_GE(pairs, 20);
    EXPECT_GT(equal_pairs, 0);
}

TEST(MatrixExport, CsvTriplets)
{
    std::ostringstream os;
    write_csv_triplets(os, noise_free_transition(parse_octal_generators({"5", "7"})));
    const auto text = os.str();
    EXPECT_EQ(text.rfind("row,col,prob\n", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 33);
    EXPECT_NE(text.find("\n0,0,0.5\n"), std::string::npos);
}
