// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// The command-line tool is driven in-process so the whole pipeline, file
// formats included, is exercised.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "cli.hpp"
#include "equivalences.hpp"
#include "mcoupler/circuit.hpp"
#include "mcoupler/gate_metrics.hpp"
#include "mcoupler/io.hpp"
#include "properties.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mcoupler;

namespace {

const std::string kData = MCOUPLER_DATA_DIR;
fs::path g_scratch;

std::string scratch(const std::string& name) { return (g_scratch / name).string(); }

/// Runs the tool; a nonzero exit turns into an exception carrying stderr.
std::string tool(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = app::run(args, out, err);
    if (code != 0) {
        throw std::runtime_error(args[0] + " exited " + std::to_string(code) + ": " + err.str());
    }
    return out.str();
}

json tool_json(const std::vector<std::string>& args) { return json::parse(tool(args)); }

io::Table tool_table(const std::vector<std::string>& args) {
    std::istringstream in(tool(args));
    return io::read_csv(in);
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string num(double v, int decimals = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// ------------------------------------------------------------ g(phi) fits

Verdict gcurve_round_trip(const std::string& config) {
    const std::string csv = scratch(fs::path(config).stem().string() + "_g.csv");
    tool({"synth-g", "--config", kData + "/" + config, "--points", "25", "--phi-min", "0",
          "--phi-max", "0.5", "--sigma-hz", "5e4", "--seed", "42", "--out", csv});
    const json rep = tool_json({"fit-g", "--config", kData + "/" + config, "--data", csv});
    const json& p = rep["result"]["parameters"];
    const double g12 = p["g12_abs_hz"]["value"], g12_se = p["g12_abs_hz"]["standard_error"];
    const double g = p["sqrt_g1c_g2c_hz"]["value"], g_se = p["sqrt_g1c_g2c_hz"]["standard_error"];
    const bool ok = std::abs(g12 - 5.2e6) <= 0.5e6 && std::abs(g - 93e6) <= 2e6;
    return {ok, "|g12| " + num(g12 / 1e6) + " +- " + num(g12_se / 1e6) + " MHz (5.2 +- 0.5), G " +
                    num(g / 1e6, 2) + " +- " + num(g_se / 1e6, 2) + " MHz (93 +- 2)"};
}

// ------------------------------------------------------------ height sensitivity

Verdict height_contrast() {
    const std::string net = kData + "/reference_network.json";
    const std::string hs = "2.5e-6,3.5e-6,4.5e-6";
    const io::Table bump = tool_table({"sensitivity", "--network", net, "--design", "bump-bump", "--heights", hs});
    const io::Table paddle =
        tool_table({"sensitivity", "--network", net, "--design", "paddle-paddle", "--heights", hs});

    double bump_var = 0.0;
    for (const char* col : {"g12_hz", "g1c_hz", "g2c_hz", "max_abs_g_hz"}) {
        const auto v = io::column_values(bump, col);
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        bump_var = std::max(bump_var, (*hi - *lo) / std::max(std::abs(*hi), std::abs(*lo)));
    }
    const auto pg = io::column_values(paddle, "max_abs_g_hz");
    const auto [lo, hi] = std::minmax_element(pg.begin(), pg.end());
    const double paddle_var = (*hi - *lo) / *hi;
    return {bump_var < 1e-3 && paddle_var > 0.10,
            "bump-bump max variation " + num(100 * bump_var, 6) + "% (< 0.1%), paddle max |g| " +
                num(*lo / 1e6, 2) + ".." + num(*hi / 1e6, 2) + " MHz, variation " +
                num(100 * paddle_var, 1) + "% (> 10%)"};
}

// ------------------------------------------------------------ Purcell

Verdict purcell_round_trip() {
    const std::string cfg = kData + "/bump_paddle.json";
    const std::string csv = scratch("t1.csv");
    tool({"synth-t1", "--config", cfg, "--points", "10", "--noise", "0.05", "--seed", "42", "--out", csv});
    const json rep = tool_json({"fit-purcell", "--config", cfg, "--data", csv});
    const json& p = rep["result"]["parameters"]["g_rc_hz"];
    const double g = p["value"];
    return {std::abs(g - 54e6) <= 2e6, "g_rc " + num(g / 1e6, 2) + " +- " +
                                            num(p["standard_error"].get<double>() / 1e6, 2) +
                                            " MHz (54 +- 2)"};
}

// ------------------------------------------------------------ fidelity

double hand_fidelity(double t1q1, double t2q1, double t1q2, double t2q2, double t1m, double t2m,
                     double flat, double pad) {
    return 1.0 - (1.0 / 5.0) * (1.0 / t1q1 + 1.0 / t1m) * pad -
           (2.0 / 5.0) * (1.0 / t2q1 + 1.0 / t2m) * pad -
           (19.0 / 160.0) * (1.0 / t1q2 + 1.0 / t1m) * flat -
           ((61.0 / 80.0) / t2q2 + (29.0 / 80.0) / t2m) * flat;
}

Verdict fidelity_formula() {
    const double inf = std::numeric_limits<double>::infinity();
    const double perfect =
        metrics::coherence_limited_fidelity({inf, inf, inf, inf, inf, inf}, {56e-9, 4e-9});
    const json rep =
        tool_json({"fidelity", "--config", kData + "/four_bump.json", "--assume-static-equals-modulated"});
    const double f = rep["result"]["fidelity"];
    const double oracle = hand_fidelity(16.4e-6, 8.4e-6, 11.5e-6, 5.7e-6, 11.5e-6, 5.7e-6, 56e-9, 4e-9);
    const bool ok = perfect == 1.0 && std::abs(f - oracle) <= 1e-12 && std::abs(f - 0.987) <= 0.001;
    return {ok, "F(inf) = " + num(perfect, 1) + ", F = " + num(f, 5) + ", hand oracle " +
                    num(oracle, 5) + " (0.987 +- 0.001)"};
}

// ------------------------------------------------------------ RB

std::vector<std::string> synth_rb_args(double fidelity, bool interleaved, unsigned seed,
                                       const std::string& out) {
    std::vector<std::string> a{"synth-rb", "--p", "0.96", "--a", "0.75", "--b", "0.25", "--lengths",
                               "1,2,4,8,16,24,32,48,64,96,128,192", "--shots", "100",
                               "--randomizations", "30", "--seed", std::to_string(seed), "--out", out};
    if (interleaved) {
        a.push_back("--irb-fidelity");
        a.push_back(io::format_number(fidelity));
    }
    return a;
}

double irb_run(double fidelity, unsigned seed, const std::string& tag) {
    tool(synth_rb_args(0.0, false, seed, scratch(tag + "_ref.csv")));
    tool(synth_rb_args(fidelity, true, seed + 1, scratch(tag + "_irb.csv")));
    const json rep = tool_json({"rb", "--reference", scratch(tag + "_ref.csv"), "--interleaved",
                                scratch(tag + "_irb.csv")});
    return rep["result"]["fidelity"];
}

Verdict rb_pipeline() {
    const double single = irb_run(0.9913, 42, "single");

    // Planted ensemble with mean 98.61% and spread 0.18% exactly.
    std::mt19937_64 rng(61);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> raw(20);
    for (double& v : raw) v = z(rng);
    const auto zs = metrics::stability_stats(raw);
    std::vector<double> planted;
    for (double v : raw) planted.push_back(0.9861 + 0.0018 * (v - zs.mean) / zs.stddev);
    const auto ps = metrics::stability_stats(planted);
    const std::string planted_text = metrics::format_percent(ps.mean, ps.stddev);

    std::ofstream hist(scratch("history.csv"));
    hist << "fidelity\n";
    for (size_t k = 0; k < planted.size(); ++k) {
        hist << io::format_number(irb_run(planted[k], 1000 + 2 * unsigned(k), "rerun")) << "\n";
    }
    hist.close();
    tool(synth_rb_args(0.0, false, 42, scratch("ref.csv")));
    tool(synth_rb_args(0.9913, true, 43, scratch("irb.csv")));
    const json rep = tool_json({"rb", "--reference", scratch("ref.csv"), "--interleaved",
                                scratch("irb.csv"), "--history", scratch("history.csv")});
    const json& h = rep["result"]["history"];
    const std::string text = h["formatted"];
    const double mean = h["mean"], sd = h["stddev"];
    const bool ok = std::abs(single - 0.9913) <= 0.003 && planted_text == "98.61 ± 0.18%" &&
                    std::regex_match(text, std::regex(R"(\d{2}\.\d{2} ± \d\.\d{2}%)")) &&
                    std::abs(mean - 0.9861) <= 0.001 && std::abs(sd - 0.0018) <= 0.001;
    return {ok, "single iRB " + num(single, 5) + " (0.9913 +- 0.003); planted " + planted_text +
                    ", recovered over 20 reruns " + text};
}

// ------------------------------------------------------------ equivalences

CouplerModel four_bump_model() {
    CouplerModel m;
    m.q1 = TransmonParams::from_frequency(4.29e9, 200e6, "q1");
    m.q2 = TransmonParams::from_frequency(4.39e9, 200e6, "q2");
    m.coupler = {15.1e9, 3.0, 116e6, PadConfig::Symmetric};
    m.couplings = {-5.2e6, 94e6, 94e6};
    return m;
}

Verdict oracle_equivalences() {
    const io::NetworkFile net = io::load_network(kData + "/reference_network.json");
    double split = 0.0;
    for (const auto& c : equiv::splitting_checks(net)) split = std::max(split, c.rel_dev());
    const double galvanic = equiv::galvanic_limit_deviation(net);

    CouplerModel quiet = four_bump_model();
    quiet.couplings = {0.0, 0.0, 0.0};
    bool exact_zero = true;
    for (int levels : {3, 4, 5, 6}) {
        for (double phi : {0.0, 0.2, 0.4}) exact_zero = exact_zero && residual_zz(quiet, {phi}, levels) == 0.0;
    }
    const CouplerModel m = four_bump_model();
    double trunc = 0.0;
    for (double phi : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5}) {
        const double z4 = residual_zz(m, {phi}, 4), z6 = residual_zz(m, {phi}, 6);
        trunc = std::max(trunc, std::abs(z4 - z6) / std::abs(z6));
    }

    const json four = tool_json({"zz", "--config", kData + "/four_bump.json", "--points", "101"});
    const json two = tool_json({"zz", "--config", kData + "/bump_bump.json", "--points", "101"});
    const double ratio = four["result"].value("suppression_ratio", 0.0);
    const double ratio_bb = two["result"].value("suppression_ratio", 0.0);

    const bool ok = split < 0.02 && galvanic < 1e-3 && exact_zero && trunc < 0.01 && ratio >= 10.0;
    return {ok, "(a) splitting dev " + num(100 * split, 3) + "% (< 2%); (b) galvanic dev " +
                    num(100 * galvanic, 5) + "% (< 0.1%); (c) zero " + (exact_zero ? "exact" : "NOT exact") +
                    ", L4 vs L6 " + num(100 * trunc, 5) + "% (< 1%); (d) ZZ suppression " +
                    num(ratio, 1) + "x four-bump (>= 10x), bump-bump " + num(ratio_bb, 1) + "x"};
}

// ------------------------------------------------------------ properties

Verdict invariant_suites() {
    int cases = 0, failures = 0;
    std::string first;
    for (const auto& o : props::run_all()) {
        cases += o.cases;
        failures += o.failures;
        if (o.failures && first.empty()) first = o.name + ": " + o.first_failure;
    }
    return {failures == 0 && cases >= 1000, std::to_string(cases) + " cases, " + std::to_string(failures) +
                                                 " failures" + (first.empty() ? "" : " (" + first + ")")};
}

}  // namespace

int main() {
    g_scratch = fs::temp_directory_path() / ("mcoupler_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(g_scratch);

    struct Criterion {
        int id;
        const char* title;
        double budget_s;
        std::function<Verdict()> check;
    };
    const std::vector<Criterion> criteria{
        {1, "Bump-Bump g(phi) round trip", 5, [] { return gcurve_round_trip("bump_bump.json"); }},
        {2, "Four-Bump g(phi) round trip", 5, [] { return gcurve_round_trip("four_bump.json"); }},
        {3, "bump versus paddle height sensitivity", 10, height_contrast},
        {4, "Purcell round trip", 1, purcell_round_trip},
        {5, "coherence-limited fidelity", 1, fidelity_formula},
        {6, "RB pipeline", 10, rb_pipeline},
        {7, "oracle equivalences", 30, oracle_equivalences},
        {8, "invariant suites", 60, invariant_suites},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = v.pass && in_time;
        if (!pass) ++failed;
        std::cout << (pass ? "PASS" : "FAIL") << " " << c.id << " " << c.title << ": " << v.detail
                  << " [" << num(secs, 2) << " s of " << num(c.budget_s, 0) << " s"
                  << (in_time ? "" : ", OVER BUDGET") << "]" << std::endl;
    }
    fs::remove_all(g_scratch);
    std::cout << (failed ? std::to_string(failed) + " of 8 criteria failed" : "all 8 criteria passed")
              << std::endl;
    return failed ? 1 : 0;
}
