#pragma once

#include "convdetect/channel.hpp"
#include "convdetect/codes.hpp"
#include "convdetect/detector.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace convdetect {

struct CodePair {
    ConvCode code1;
    ConvCode code2;

    /// e.g. "5-7_vs_4-5"; free of CSV delimiters.
    std::string name() const
    {
        auto dashed = [](std::string s) {
            std::replace(s.begin(), s.end(), ',', '-');
            return s;
        };
        return dashed(code1.label()) + "_vs_" + dashed(code2.label());
    }
};

/// The four code pairs used in the simulation study (1-based).
inline CodePair example_pair(int index)
{
    switch (index) {
    case 1:
        return {parse_octal_generators({"5", "7"}), parse_octal_generators({"4", "5"})};
    case 2:
        return {parse_octal_generators({"11", "5"}), parse_octal_generators({"7", "10"})};
    case 3:
        return {parse_octal_generators({"37", "21"}), parse_octal_generators({"31", "27"})};
    case 4:
        return {parse_octal_generators({"133", "171"}), parse_octal_generators({"117", "127"})};
    default:
        throw std::invalid_argument("example_pair: index must be 1..4");
    }
}

struct ExperimentConfig {
    CodePair pair = example_pair(1);
    std::vector<double> eps_grid{0.05, 0.1, 0.15, 0.2};
    std::vector<std::size_t> n_grid{25, 50, 100, 200, 400};
    std::uint64_t trials = 10000;
    std::uint64_t seed = RngStream::default_seed;
    BcjrMode mode = BcjrMode::scaled;
    double tau = 1.0;
    unsigned workers = 1;
    /// When false, wall_ms is written as 0 so output bytes depend only on the seed.
    bool record_timing = true;

    void validate() const
    {
        if (trials < 1) {
            throw std::invalid_argument("config: trials must be >= 1");
        }
        if (eps_grid.empty() || n_grid.empty()) {
            throw std::invalid_argument("config: grids must be non-empty");
        }
        for (double e : eps_grid) {
            ChannelParams{e};
        }
        for (auto n : n_grid) {
            if (n < 1) {
                throw std::invalid_argument("config: N must be >= 1");
            }
        }
        if (pair.code1.k() != pair.code2.k() || pair.code1.n() != pair.code2.n()) {
            throw std::invalid_argument("config: codes must share k and n");
        }
    }
};

namespace detail {

inline ConvCode code_from_json(const nlohmann::json& j)
{
    if (j.is_string()) {
        return parse_octal_list(j.get<std::string>());
    }
    const int k = j.value("k", 1);
    return parse_octal_generators(j.at("generators").get<std::vector<std::string>>(), k);
}

} // namespace detail

/// Reads {"code1": {"generators": [...], "k": 1}, "code2": ..., "eps": [...],
/// "N": [...], "trials": ..., "seed": ..., "mode": "scaled", "workers": ...}.
/// "example": 1..4 may replace code1/code2. Missing keys keep defaults.
inline ExperimentConfig config_from_json(const nlohmann::json& j)
{
    ExperimentConfig c;
    if (j.contains("example")) {
        c.pair = example_pair(j.at("example").get<int>());
    }
    if (j.contains("code1") || j.contains("code2")) {
        c.pair = CodePair{detail::code_from_json(j.at("code1")), detail::code_from_json(j.at("code2"))};
    }
    if (j.contains("eps")) {
        c.eps_grid = j.at("eps").get<std::vector<double>>();
    }
    if (j.contains("N")) {
        c.n_grid = j.at("N").get<std::vector<std::size_t>>();
    }
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    c.tau = j.value("tau", c.tau);
    c.workers = j.value("workers", c.workers);
    c.record_timing = j.value("record_timing", c.record_timing);
    if (j.contains("mode")) {
        const auto mode = j.at("mode").get<std::string>();
        if (mode == "scaled") {
            c.mode = BcjrMode::scaled;
        } else if (mode == "unscaled") {
            c.mode = BcjrMode::unscaled;
        } else {
            throw std::invalid_argument("config: mode must be scaled or unscaled");
        }
    }
    c.validate();
    return c;
}

struct ExperimentRecord {
    std::string pair;
    double eps = 0.0;
    std::size_t n_steps = 0;
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;
    double p_error_hat = 0.0;
    /// Wilson 95% interval: [ci_center - ci_half, ci_center + ci_half].
    double ci_center = 0.0;
    double ci_half = 0.0;
    std::uint64_t underflows = 0;
    std::int64_t wall_ms = 0;

    double ci_low() const { return ci_center - ci_half; }
    double ci_high() const { return ci_center + ci_half; }
};

struct WilsonInterval {
    double center;
    double half_width;
};

inline WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054)
{
    if (trials == 0) {
        throw std::invalid_argument("wilson_interval: trials must be positive");
    }
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {center, half};
}

/// Stream index of an (eps, N) cell; independent of grid order.
inline std::uint64_t cell_stream(double eps, std::size_t n_steps)
{
    return splitmix64(std::bit_cast<std::uint64_t>(eps)) ^ splitmix64(0xC0DEULL + n_steps);
}

namespace detail {

struct TrialTally {
    std::uint64_t errors = 0;
    std::uint64_t underflows = 0;
};

inline TrialTally run_cell(const ExperimentConfig& config, double eps, std::size_t n_steps)
{
    const RngStream base = RngStream(config.seed).child(cell_stream(eps, n_steps));
    const ChannelParams channel{eps};
    const unsigned workers = std::max(1u, config.workers);
    std::atomic<std::uint64_t> next{0};
    std::vector<TrialTally> tallies(workers);

    auto work = [&](unsigned id) {
        TrellisLikelihood h1(config.pair.code1);
        TrellisLikelihood h2(config.pair.code2);
        TrialTally local;
        for (std::uint64_t trial = next++; trial < config.trials; trial = next++) {
            const RngStream stream = base.child(trial);
            const bool truth_is_h2 = (stream.child(2).engine()() & 1u) != 0;
            const ConvCode& truth = truth_is_h2 ? config.pair.code2 : config.pair.code1;
            const Sample sample = generate_sample(truth, n_steps, channel, stream);
            const auto r = decide(h1(sample.received, eps, config.mode), h2(sample.received, eps, config.mode),
                                  config.tau);
            if ((r.decision == Hypothesis::h2) != truth_is_h2) {
                ++local.errors;
            }
            if (r.underflow_h1 || r.underflow_h2) {
                ++local.underflows;
            }
        }
        tallies[id] = local;
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned id = 0; id < workers; ++id) {
            pool.emplace_back(work, id);
        }
    }
    TrialTally total;
    for (const auto& t : tallies) {
        total.errors += t.errors;
        total.underflows += t.underflows;
    }
    return total;
}

} // namespace detail

/// Monte Carlo error-probability sweep over the (eps, N) grid. The true code
/// of every trial is drawn uniformly; trial randomness is addressed by
/// (seed, cell, trial), so results do not depend on the worker count.
/// Records are sorted by (eps, N).
inline std::vector<ExperimentRecord> run_montecarlo(const ExperimentConfig& config)
{
    config.validate();
    auto eps_grid = config.eps_grid;
    auto n_grid = config.n_grid;
    std::sort(eps_grid.begin(), eps_grid.end());
    eps_grid.erase(std::unique(eps_grid.begin(), eps_grid.end()), eps_grid.end());
    std::sort(n_grid.begin(), n_grid.end());
    n_grid.erase(std::unique(n_grid.begin(), n_grid.end()), n_grid.end());

    std::vector<ExperimentRecord> records;
    const std::string name = config.pair.name();
    for (double eps : eps_grid) {
        for (std::size_t n_steps : n_grid) {
            const auto start = std::chrono::steady_clock::now();
            const auto tally = detail::run_cell(config, eps, n_steps);
            const auto stop = std::chrono::steady_clock::now();

            ExperimentRecord r;
            r.pair = name;
            r.eps = eps;
            r.n_steps = n_steps;
            r.trials = config.trials;
            r.errors = tally.errors;
            r.underflows = tally.underflows;
            r.p_error_hat = static_cast<double>(r.errors) / static_cast<double>(r.trials);
            const auto ci = wilson_interval(r.errors, r.trials);
            r.ci_center = ci.center;
            r.ci_half = ci.half_width;
            r.wall_ms = config.record_timing
                            ? std::chrono::duration_cast<std::chrono::milliseconds>(stop - start).count()
                            : 0;
            records.push_back(r);
        }
    }
    return records;
}

inline void write_results_csv(std::ostream& os, const std::vector<ExperimentRecord>& records)
{
    os << "pair,eps,N,trials,errors,p_err,ci_half,underflows,wall_ms\n";
    char buf[256];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%s,%.10g,%zu,%llu,%llu,%.10g,%.10g,%llu,%lld\n", r.pair.c_str(), r.eps,
                      r.n_steps, static_cast<unsigned long long>(r.trials), static_cast<unsigned long long>(r.errors),
                      r.p_error_hat, r.ci_half, static_cast<unsigned long long>(r.underflows),
                      static_cast<long long>(r.wall_ms));
        os << buf;
    }
}

/// Balanced labeled samples as JSON lines, for each (eps, N) cell in
/// canonical order. Labels alternate 0 (code1), 1 (code2). The `seed` field
/// regenerates a record via generate_sample(code, N, eps, RngStream(seed)).
inline void export_dataset(const ExperimentConfig& config, std::size_t count_per_class, std::ostream& os)
{
    config.validate();
    auto eps_grid = config.eps_grid;
    auto n_grid = config.n_grid;
    std::sort(eps_grid.begin(), eps_grid.end());
    std::sort(n_grid.begin(), n_grid.end());
    const std::string name = config.pair.name();
    for (double eps : eps_grid) {
        const ChannelParams channel{eps};
        for (std::size_t n_steps : n_grid) {
            const RngStream base = RngStream(config.seed).child(cell_stream(eps, n_steps) ^ 0xDA7A5E7ULL);
            for (std::size_t i = 0; i < 2 * count_per_class; ++i) {
                const int label = static_cast<int>(i % 2);
                const std::uint64_t seed = base.child(i).key();
                const ConvCode& code = label == 0 ? config.pair.code1 : config.pair.code2;
                const Sample s = generate_sample(code, n_steps, channel, RngStream(seed));
                nlohmann::ordered_json line;
                line["bits"] = s.received;
                line["label"] = label;
                line["n_steps"] = n_steps;
                line["eps"] = eps;
                line["pair"] = name;
                line["seed"] = seed;
                os << line.dump() << '\n';
            }
        }
    }
}

struct EmpiricalExponent {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t used = 0;
    std::size_t dropped = 0;
};

/// Least-squares slope of -ln(p_error_hat) against N. Records with zero
/// errors are dropped with a warning on stderr.
inline EmpiricalExponent estimate_empirical_exponent(const std::vector<ExperimentRecord>& records)
{
    if (records.empty()) {
        throw std::invalid_argument("estimate_empirical_exponent: no records");
    }
    const double eps = records.front().eps;
    std::vector<std::pair<double, double>> points;
    EmpiricalExponent out;
    for (const auto& r : records) {
        if (r.eps != eps) {
            throw std::invalid_argument("estimate_empirical_exponent: records must share eps");
        }
        if (r.p_error_hat <= 0.0) {
            ++out.dropped;
            std::cerr << "warning: dropping cell N=" << r.n_steps << " with zero errors\n";
            continue;
        }
        points.emplace_back(static_cast<double>(r.n_steps), -std::log(r.p_error_hat));
    }
    if (points.size() < 3) {
        throw std::invalid_argument("estimate_empirical_exponent: need >= 3 records with nonzero errors");
    }
    double mx = 0.0;
    double my = 0.0;
    for (const auto& [x, y] : points) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(points.size());
    my /= static_cast<double>(points.size());
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("estimate_empirical_exponent: N values must differ");
    }
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    out.used = points.size();
    return out;
}

} // namespace convdetect
