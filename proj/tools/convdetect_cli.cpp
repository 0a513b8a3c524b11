// Command-line front end: detect, exponent, montecarlo, export-dataset, matrix-dump.

#include "convdetect/convdetect.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace convdetect;
using nlohmann::ordered_json;

std::string read_all(const std::string& path)
{
    if (path == "-") {
        return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    }
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Writes to `path`, or stdout for "-".
template <class Fn>
void with_output(const std::string& path, Fn&& fn)
{
    if (path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    fn(out);
    if (!out) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

BcjrMode parse_mode(const std::string& mode)
{
    if (mode == "scaled") {
        return BcjrMode::scaled;
    }
    if (mode == "unscaled") {
        return BcjrMode::unscaled;
    }
    throw std::invalid_argument("mode must be scaled or unscaled");
}

struct ExperimentFlags {
    std::string config_path;
    int example = 0;
    std::string code1;
    std::string code2;
    std::vector<double> eps;
    std::vector<std::size_t> n_steps;
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
    std::string mode;
    std::optional<unsigned> workers;
    bool no_timing = false;
    std::string out = "-";

    void attach(CLI::App* app)
    {
        app->add_option("--config", config_path, "JSON experiment config");
        app->add_option("--example", example, "Preset code pair 1..4")->check(CLI::Range(1, 4));
        app->add_option("--code1", code1, "Octal generators of code 1, e.g. 5,7");
        app->add_option("--code2", code2, "Octal generators of code 2, e.g. 4,5");
        app->add_option("--eps", eps, "Crossover probabilities")->delimiter(',');
        app->add_option("--N", n_steps, "Block lengths in trellis steps")->delimiter(',');
        app->add_option("--trials", trials, "Trials per cell");
        app->add_option("--seed", seed, "Master seed");
        app->add_option("--mode", mode, "scaled | unscaled");
        app->add_option("--workers", workers, "Worker threads");
        app->add_flag("--no-timing", no_timing, "Write wall_ms as 0");
        app->add_option("--out", out, "Output path, - for stdout");
    }

    ExperimentConfig build() const
    {
        ExperimentConfig c;
        if (!config_path.empty()) {
            c = config_from_json(nlohmann::json::parse(read_all(config_path)));
        }
        if (example) {
            c.pair = example_pair(example);
        }
        if (!code1.empty() || !code2.empty()) {
            if (code1.empty() || code2.empty()) {
                throw std::invalid_argument("--code1 and --code2 must be given together");
            }
            c.pair = CodePair{parse_octal_list(code1), parse_octal_list(code2)};
        }
        if (!eps.empty()) {
            c.eps_grid = eps;
        }
        if (!n_steps.empty()) {
            c.n_grid = n_steps;
        }
        if (trials) {
            c.trials = *trials;
        }
        if (seed) {
            c.seed = *seed;
        }
        if (!mode.empty()) {
            c.mode = parse_mode(mode);
        }
        if (workers) {
            c.workers = *workers;
        }
        if (no_timing) {
            c.record_timing = false;
        }
        c.validate();
        return c;
    }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Detect which of two convolutional codes produced a BSC-corrupted bit sequence"};
    app.require_subcommand(1);

    // detect
    auto* detect = app.add_subcommand("detect", "Likelihood ratio test on a received sequence");
    std::string d_code1, d_code2, d_bits = "-", d_format = "hex", d_mode = "scaled";
    double d_eps = 0.0, d_tau = 1.0;
    std::optional<std::size_t> d_nbits;
    detect->add_option("--code1", d_code1, "Octal generators of code 1")->required();
    detect->add_option("--code2", d_code2, "Octal generators of code 2")->required();
    detect->add_option("--eps", d_eps, "Crossover probability")->required();
    detect->add_option("--bits", d_bits, "Received bits file, - for stdin");
    detect->add_option("--format", d_format, "hex | bin")->check(CLI::IsMember({"hex", "bin"}));
    detect->add_option("--nbits", d_nbits, "Keep only the first nbits bits (hex padding)");
    detect->add_option("--tau", d_tau, "Likelihood ratio threshold");
    detect->add_option("--mode", d_mode, "scaled | unscaled");

    // exponent
    auto* exponent = app.add_subcommand("exponent", "Error exponent between the two noisy output-state chains");
    std::string e_code1, e_code2;
    double e_eps = 0.1, e_delta = 1e-6;
    exponent->add_option("--code1", e_code1, "Octal generators of code 1")->required();
    exponent->add_option("--code2", e_code2, "Octal generators of code 2")->required();
    exponent->add_option("--eps", e_eps, "Crossover probability")->required();
    exponent->add_option("--delta", e_delta, "Ternary search threshold");

    // montecarlo
    auto* montecarlo = app.add_subcommand("montecarlo", "Monte Carlo error-probability sweep (CSV)");
    ExperimentFlags mc;
    mc.attach(montecarlo);

    // export-dataset
    auto* dataset = app.add_subcommand("export-dataset", "Labeled samples as JSON lines");
    ExperimentFlags ds;
    ds.attach(dataset);
    std::size_t ds_count = 1000;
    dataset->add_option("--count", ds_count, "Samples per class per cell");

    // matrix-dump
    auto* dump = app.add_subcommand("matrix-dump", "Transition matrix as CSV triplets");
    std::string m_code, m_kind = "exact", m_out = "-";
    double m_eps = 0.1;
    dump->add_option("--code", m_code, "Octal generators")->required();
    dump->add_option("--eps", m_eps, "Crossover probability (ignored for clean)");
    dump->add_option("--kind", m_kind, "clean | exact | factored")->check(CLI::IsMember({"clean", "exact", "factored"}));
    dump->add_option("--out", m_out, "Output path, - for stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*detect) {
            Bits bits = d_format == "hex" ? parse_hex_string(read_all(d_bits)) : parse_binary_string(read_all(d_bits));
            if (d_nbits) {
                if (*d_nbits > bits.size()) {
                    throw std::invalid_argument("--nbits exceeds the number of bits read");
                }
                bits.resize(*d_nbits);
            }
            const auto r = lrt_decide(parse_octal_list(d_code1), parse_octal_list(d_code2), bits, d_eps, d_tau,
                                      parse_mode(d_mode));
            ordered_json out;
            out["decision"] = r.decision == Hypothesis::h1 ? "H1" : "H2";
            out["logL1"] = r.log_likelihood_h1;
            out["logL2"] = r.log_likelihood_h2;
            out["logRatio"] = r.log_ratio;
            std::cout << out.dump() << '\n';
        } else if (*exponent) {
            const ConvCode c1 = parse_octal_list(e_code1);
            const ConvCode c2 = parse_octal_list(e_code2);
            if (c1.n() != c2.n() || c1.m() != c2.m() || c1.k() != c2.k()) {
                throw std::invalid_argument("codes must share k, n and m");
            }
            auto r = error_exponent(noisy_transition_exact(c1, e_eps), noisy_transition_exact(c2, e_eps), e_delta);
            if (validate_assumptions(c1).is_analysis_eligible && validate_assumptions(c2).is_analysis_eligible) {
                r.theorem1_bound = lower_bound_theorem1(closed_form_p(c1, e_eps).p, closed_form_p(c2, e_eps).p);
            }
            ordered_json out;
            out["uStar"] = r.u_star;
            out["lambdaStar"] = r.lambda_star;
            out["iErr"] = r.i_err;
            out["theorem1Bound"] = r.theorem1_bound ? ordered_json(*r.theorem1_bound) : ordered_json(nullptr);
            out["rowBound"] = r.row_bound;
            out["iterations"] = r.iterations;
            std::cout << out.dump() << '\n';
        } else if (*montecarlo) {
            const auto config = mc.build();
            const auto records = run_montecarlo(config);
            with_output(mc.out, [&](std::ostream& os) { write_results_csv(os, records); });
        } else if (*dataset) {
            const auto config = ds.build();
            with_output(ds.out, [&](std::ostream& os) { export_dataset(config, ds_count, os); });
        } else if (*dump) {
            const ConvCode code = parse_octal_list(m_code);
            const TransitionMatrix P = m_kind == "clean"   ? noise_free_transition(code)
                                       : m_kind == "exact" ? noisy_transition_exact(code, m_eps)
                                                           : noisy_transition_factored(code, m_eps);
            with_output(m_out, [&](std::ostream& os) { write_csv_triplets(os, P); });
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
