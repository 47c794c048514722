#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "mcoupler/capnet.hpp"
#include "mcoupler/circuit.hpp"
#include "mcoupler/fit.hpp"
#include "mcoupler/gate_metrics.hpp"
#include "mcoupler/io.hpp"
#include "mcoupler/version.hpp"

namespace mcoupler::app {

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidInput:
        case ErrorCode::EmptyInput:
        case ErrorCode::InitOutOfBounds:
        case ErrorCode::NonPositiveDefinite:
        case ErrorCode::SingularTransform:
            return kInputError;
        case ErrorCode::MaxIterations:
        case ErrorCode::TruncationUnconverged:
            return kNotConverged;
        case ErrorCode::DegenerateSquid:
        case ErrorCode::ResonantCoupler:
        case ErrorCode::NoSignChange:
        case ErrorCode::ZeroDetuning:
        case ErrorCode::LabelAmbiguous:
        case ErrorCode::SingularJacobian:
        case ErrorCode::InvalidDecay:
            return kNumericError;
    }
    return kNumericError;
}

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Where a command's product and its summary go.
class Sink {
public:
    Sink(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

    std::string path;  ///< --out; empty means stdout

    std::ostream& summary() { return path.empty() ? err_ : out_; }

    void write(const std::string& content) {
        if (path.empty()) {
            out_ << content;
            return;
        }
        std::ofstream f(path);
        require(f.good(), "cannot write '" + path + "'");
        f << content;
        f.close();
        require(f.good(), "failed writing '" + path + "'");
    }

private:
    std::ostream& out_;
    std::ostream& err_;
};

std::string fixed(double v, int decimals) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(decimals) << v;
    return os.str();
}

std::string mhz(double hz, int decimals = 3) { return fixed(hz / 1e6, decimals) + " MHz"; }

json report(const std::string& command, json input, json result) {
    return json{{"tool", "mcoupler"},
                {"version", version},
                {"command", command},
                {"input", std::move(input)},
                {"result", std::move(result)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json fit_report_json(const fit::FitReport& r, const std::string& residual_key) {
    json params = json::object();
    json names = json::array();
    for (const fit::FitParam& p : r.params) {
        params[p.name] = {{"value", p.value}, {"standard_error", p.standard_error}};
        names.push_back(p.name);
    }
    json cov = json::array();
    for (Eigen::Index i = 0; i < r.covariance.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < r.covariance.cols(); ++j) row.push_back(r.covariance(i, j));
        cov.push_back(row);
    }
    return json{{"parameters", params},
                {"covariance", {{"order", names}, {"matrix", cov}}},
                {"fixed_params", r.fixed_params},
                {residual_key, r.residual_rms},
                {"cost", r.cost},
                {"correlation_condition", r.correlation_condition},
                {"iterations", r.iterations},
                {"data_points", r.data_points},
                {"converged", r.converged},
                {"warnings", r.warnings},
                {"notes", r.notes}};
}

json model_json(const CouplerModel& m) {
    return json{{"omega1_hz", qubit_frequency(m.q1)},
                {"omega2_hz", qubit_frequency(m.q2)},
                {"g12_hz", m.couplings.g12_hz},
                {"g1c_hz", m.couplings.g1c_hz},
                {"g2c_hz", m.couplings.g2c_hz}};
}

std::string csv_header_row(std::initializer_list<const char*> cols) {
    std::string s;
    for (const char* c : cols) {
        if (!s.empty()) s += ',';
        s += c;
    }
    return s + '\n';
}

std::optional<double> zero_in_grid(const CouplerModel& m, const std::vector<double>& phis,
                                   const std::vector<double>& g) {
    for (size_t i = 0; i + 1 < phis.size(); ++i) {
        if (g[i] == 0.0) return phis[i];
        if ((g[i] < 0.0) != (g[i + 1] < 0.0)) return find_zero_coupling(m, phis[i], phis[i + 1]).phi;
    }
    if (!g.empty() && g.back() == 0.0) return phis.back();
    return std::nullopt;
}

// ---------------------------------------------------------------- commands

struct SweepOpts {
    std::string config;
    double phi_min = 0.0;
    double phi_max = 0.5;
    int points = 101;
};

int cmd_sweep(const SweepOpts& o, Sink& sink) {
    require(o.points >= 2, "--points must be >= 2");
    require(std::isfinite(o.phi_min) && std::isfinite(o.phi_max) && o.phi_max > o.phi_min,
            "--phi-max must exceed --phi-min");
    const DeviceConfig cfg = load_device_config(o.config);
    const CouplerModel m = cfg.model();
    std::ostringstream csv;
    csv << "phi,g_hz\n";
    double lo = INFINITY, hi = -INFINITY;
    for (double phi : fit::linspace(o.phi_min, o.phi_max, o.points)) {
        const double g = net_coupling(m, FluxBias{phi});
        lo = std::min(lo, g);
        hi = std::max(hi, g);
        csv << io::format_number(phi) << ',' << io::format_number(g) << '\n';
    }
    sink.write(csv.str());
    sink.summary() << "g from " << mhz(lo) << " to " << mhz(hi) << " over phi in ["
                   << o.phi_min << ", " << o.phi_max << "] (" << o.points << " points)\n";
    return kOk;
}

struct FindZeroOpts {
    std::string config;
    std::vector<double> bracket{0.0, 0.5};
    double tol_hz = 100.0;
};

int cmd_find_zero(const FindZeroOpts& o, Sink& sink) {
    require(o.bracket.size() == 2, "--bracket takes two values");
    const DeviceConfig cfg = load_device_config(o.config);
    const CouplerModel m = cfg.model();
    ZeroSearchOptions zo;
    zo.tol_g_hz = o.tol_hz;
    const FluxBias z = find_zero_coupling(m, o.bracket[0], o.bracket[1], zo);
    const json result{{"phi_zero", z.phi},
                      {"g_residual_hz", net_coupling(m, z)},
                      {"omega_c_hz", coupler_frequency(m.coupler, z)},
                      {"model", model_json(m)}};
    const json input{{"config_path", o.config},
                     {"config", cfg.resolved},
                     {"bracket", o.bracket},
                     {"tol_g_hz", o.tol_hz}};
    sink.write(dump(report("find-zero", input, result)));
    sink.summary() << "zero coupling at phi = " << fixed(z.phi, 5) << " (coupler at "
                   << fixed(coupler_frequency(m.coupler, z) / 1e9, 4) << " GHz)\n";
    return kOk;
}

struct SensitivityOpts {
    std::string network;
    std::string config;
    std::string design;
    std::vector<double> heights;
    int flux_points = 201;
};

capnet::Design parse_design(const std::string& s) {
    if (s == "paddle-paddle") return capnet::Design::PaddlePaddle;
    if (s == "bump-paddle") return capnet::Design::BumpPaddle;
    if (s == "bump-bump") return capnet::Design::BumpBump;
    fail(ErrorCode::InvalidInput,
         "--design must be paddle-paddle, bump-paddle or bump-bump (got '" + s + "')");
}

int cmd_sensitivity(const SensitivityOpts& o, Sink& sink) {
    require(!o.heights.empty(), "--heights needs at least one value");
    require(o.network.empty() != o.config.empty(), "give exactly one of --network or --config");
    const capnet::Design design = parse_design(o.design);
    io::NetworkFile nf;
    if (!o.network.empty()) {
        nf = io::load_network(o.network);
    } else {
        const DeviceConfig cfg = load_device_config(o.config);
        require(cfg.network.has_value(), "config has no 'network' reference");
        nf = cfg.network->file;
    }
    require(!nf.connections.empty(), "network declares no inter-chip connections");
    capnet::SweepOptions so;
    so.flux_points = o.flux_points;
    const auto rows = capnet::sensitivity_sweep(nf.network, nf.connections, design, o.heights, so);
    std::ostringstream csv;
    csv << csv_header_row({"height_m", "g12_hz", "g1c_hz", "g2c_hz", "max_abs_g_hz", "phi_zero"});
    for (const auto& r : rows) {
        csv << io::format_number(r.height_m) << ',' << io::format_number(r.g12_hz) << ','
            << io::format_number(r.g1c_hz) << ',' << io::format_number(r.g2c_hz) << ','
            << io::format_number(r.max_abs_g_hz) << ','
            << (r.phi_zero ? io::format_number(*r.phi_zero) : std::string()) << '\n';
    }
    sink.write(csv.str());
    for (const auto& r : rows) {
        sink.summary() << "h = " << fixed(r.height_m * 1e6, 2) << " um: g12 " << mhz(r.g12_hz)
                       << ", g1c " << mhz(r.g1c_hz) << ", g2c " << mhz(r.g2c_hz) << ", max |g| "
                       << mhz(r.max_abs_g_hz) << ", zero at "
                       << (r.phi_zero ? fixed(*r.phi_zero, 4) : std::string("none")) << "\n";
    }
    return kOk;
}

struct FitGOpts {
    std::string config;
    std::string data;
    std::optional<double> ecc_hz;
    std::optional<double> q1_hz;
    std::optional<double> q2_hz;
    std::string r_convention;
};

int cmd_fit_g(const FitGOpts& o, Sink& sink) {
    const DeviceConfig cfg = load_device_config(o.config);
    fit::GCurve curve = io::gcurve_from_table(io::read_csv_file(o.data));
    curve.config = cfg.coupler.config;
    curve.device = fs::path(o.config).stem().string();
    const double ecc = o.ecc_hz.value_or(cfg.coupler.e_cc_hz);
    const double w1 = o.q1_hz.value_or(qubit_frequency(cfg.q1));
    const double w2 = o.q2_hz.value_or(qubit_frequency(cfg.q2));
    fit::GFitOptions fo;
    fo.r_convention = cfg.r_convention;
    if (!o.r_convention.empty()) {
        require(o.r_convention == "le1" || o.r_convention == "ge1",
                "--r-convention must be le1 or ge1");
        fo.r_convention = o.r_convention == "le1" ? fit::AsymmetryConvention::AtMostOne
                                                  : fit::AsymmetryConvention::AtLeastOne;
    }
    const fit::FitReport r = fit::fit_gcurve(curve, ecc, {w1, w2}, fo);
    const json input{{"config_path", o.config},
                     {"config", cfg.resolved},
                     {"data_path", o.data},
                     {"fixed_ecc_hz", ecc},
                     {"omega1_hz", w1},
                     {"omega2_hz", w2},
                     {"r_convention", fo.r_convention == fit::AsymmetryConvention::AtMostOne ? "le1" : "ge1"}};
    sink.write(dump(report("fit-g", input, fit_report_json(r, "residual_rms_hz"))));
    auto& s = sink.summary();
    s << "|g12|          = " << mhz(r.value(fit::kG12Abs)) << " +- " << mhz(r.error(fit::kG12Abs)) << "\n"
      << "sqrt(g1c g2c)  = " << mhz(r.value(fit::kGProduct)) << " +- " << mhz(r.error(fit::kGProduct)) << "\n"
      << "E_Jc           = " << fixed(r.value(fit::kEJc) / 1e9, 2) << " +- "
      << fixed(r.error(fit::kEJc) / 1e9, 2) << " GHz\n"
      << "r              = " << fixed(r.value(fit::kAsymmetry), 3) << " +- "
      << fixed(r.error(fit::kAsymmetry), 3) << "\n"
      << "residual rms   = " << mhz(r.residual_rms) << "\n";
    for (const auto& w : r.warnings) s << "warning: " << w << "\n";
    return kOk;
}

struct FitPurcellOpts {
    std::string config;
    std::string data;
    std::optional<double> omega_r_hz;
    std::optional<double> kappa_r_hz;
};

int cmd_fit_purcell(const FitPurcellOpts& o, Sink& sink) {
    json cfg_json;
    std::optional<PurcellParams> from_cfg;
    if (!o.config.empty()) {
        const DeviceConfig cfg = load_device_config(o.config);
        from_cfg = cfg.purcell;
        cfg_json = cfg.resolved;
    }
    require((o.omega_r_hz || from_cfg) && (o.kappa_r_hz || from_cfg),
            "resonator frequency and linewidth are needed: give a config with a "
            "'purcell' section or --omega-r-hz and --kappa-r-hz");
    const double wr = o.omega_r_hz ? *o.omega_r_hz : from_cfg->omega_r_hz;
    const double kr = o.kappa_r_hz ? *o.kappa_r_hz : from_cfg->kappa_r_hz;
    const fit::T1Curve curve = io::t1curve_from_table(io::read_csv_file(o.data), wr, kr);
    const fit::FitReport r = fit::fit_purcell(curve);
    const json input{{"config_path", o.config},
                     {"config", cfg_json},
                     {"data_path", o.data},
                     {"omega_r_hz", wr},
                     {"kappa_r_hz", kr}};
    sink.write(dump(report("fit-purcell", input, fit_report_json(r, "residual_rms_s"))));
    sink.summary() << "g_rc = " << mhz(r.value(fit::kGrc), 2) << " +- " << mhz(r.error(fit::kGrc), 2)
                   << "\n";
    for (const auto& w : r.warnings) sink.summary() << "warning: " << w << "\n";
    return kOk;
}

struct FidelityOpts {
    std::string config;
    bool assume_static = false;
};

int cmd_fidelity(const FidelityOpts& o, Sink& sink) {
    const DeviceConfig cfg = load_device_config(o.config);
    require(cfg.coherence.has_value(), "config: missing 'coherence'");
    require(cfg.gate_timing.has_value(), "config: missing 'gate_timing'");
    const CoherenceInput& ci = *cfg.coherence;
    std::vector<std::string> warnings;
    metrics::CoherenceSet c;
    c.t1_q1_s = ci.t1_q1_s;
    c.t2s_q1_s = ci.t2s_q1_s;
    c.t1_q2_mod_s = ci.t1_q2_mod_s;
    c.t2s_q2_mod_s = ci.t2s_q2_mod_s;
    if (o.assume_static) {
        if (ci.t1_q2_s) {
            warnings.push_back("static q2 coherence in the config ignored because "
                               "--assume-static-equals-modulated was given");
        }
        c.t1_q2_s = ci.t1_q2_mod_s;
        c.t2s_q2_s = ci.t2s_q2_mod_s;
    } else {
        require(ci.t1_q2_s.has_value(),
                "config.coherence lacks the static q2 values 't1_q2_s' and 't2s_q2_s'. They are "
                "not defaulted silently; supply them, or pass --assume-static-equals-modulated "
                "to use the modulated q2 values in their place");
        c.t1_q2_s = *ci.t1_q2_s;
        c.t2s_q2_s = *ci.t2s_q2_s;
    }
    for (auto& w : c.validate()) warnings.push_back(std::move(w));
    const double f = metrics::coherence_limited_fidelity(c, *cfg.gate_timing);
    const json used{{"t1_q1_s", c.t1_q1_s},         {"t2s_q1_s", c.t2s_q1_s},
                    {"t1_q2_s", c.t1_q2_s},         {"t2s_q2_s", c.t2s_q2_s},
                    {"t1_q2_mod_s", c.t1_q2_mod_s}, {"t2s_q2_mod_s", c.t2s_q2_mod_s}};
    const json result{{"fidelity", f},
                      {"error", 1.0 - f},
                      {"static_equals_modulated_assumed", o.assume_static},
                      {"coherence_used", used},
                      {"t_flat_s", cfg.gate_timing->t_flat_s},
                      {"t_pad_s", cfg.gate_timing->t_pad_s},
                      {"warnings", warnings}};
    const json input{{"config_path", o.config},
                     {"config", cfg.resolved},
                     {"assume_static_equals_modulated", o.assume_static}};
    sink.write(dump(report("fidelity", input, result)));
    sink.summary() << "coherence-limited CZ fidelity " << fixed(100.0 * f, 2) << "%"
                   << (o.assume_static ? " (static q2 coherence assumed equal to modulated)" : "")
                   << "\n";
    for (const auto& w : warnings) sink.summary() << "warning: " << w << "\n";
    return kOk;
}

struct RbOpts {
    std::string reference;
    std::string interleaved;
    std::string history;
    int dimension = 4;
};

json rb_fit_json(const metrics::RbFit& f) {
    return json{{"a", {{"value", f.a}, {"standard_error", f.a_err}}},
                {"b", {{"value", f.b}, {"standard_error", f.b_err}}},
                {"p", {{"value", f.p}, {"standard_error", f.p_err}}},
                {"fit", fit_report_json(f.report, "residual_rms")}};
}

int cmd_rb(const RbOpts& o, Sink& sink) {
    const auto ref = io::rbrun_from_table(io::read_csv_file(o.reference), metrics::RbVariant::Reference);
    const auto irb =
        io::rbrun_from_table(io::read_csv_file(o.interleaved), metrics::RbVariant::Interleaved);
    const metrics::InterleavedResult res = metrics::analyze_interleaved(ref, irb, o.dimension);
    json result{{"reference", rb_fit_json(res.reference)},
                {"interleaved", rb_fit_json(res.interleaved)},
                {"fidelity", res.fidelity},
                {"fidelity_standard_error", res.fidelity_err}};
    json input{{"reference_path", o.reference},
               {"interleaved_path", o.interleaved},
               {"dimension", o.dimension}};
    std::optional<metrics::StabilityStats> stats;
    if (!o.history.empty()) {
        input["history_path"] = o.history;
        stats = metrics::stability_stats(io::column_values(io::read_csv_file(o.history), "fidelity"));
        json ecdf = json::array();
        for (const auto& [v, p] : stats->ecdf) ecdf.push_back({{"fidelity", v}, {"probability", p}});
        result["history"] = {{"mean", stats->mean},
                             {"stddev", stats->stddev},
                             {"median", stats->median},
                             {"median_error", 1.0 - stats->median},
                             {"formatted", metrics::format_percent(stats->mean, stats->stddev)},
                             {"ecdf", ecdf}};
    }
    sink.write(dump(report("rb", input, result)));
    auto& s = sink.summary();
    s << "p_ref = " << fixed(res.reference.p, 5) << ", p_int = " << fixed(res.interleaved.p, 5)
      << ", interleaved gate fidelity " << fixed(100.0 * res.fidelity, 2) << " +- "
      << fixed(100.0 * res.fidelity_err, 2) << "%\n";
    if (stats) {
        s << "history: " << metrics::format_percent(stats->mean, stats->stddev) << ", median error "
          << fixed(100.0 * (1.0 - stats->median), 2) << "%\n";
    }
    return kOk;
}

struct ZzOpts {
    std::string config;
    int points = 51;
    int levels = 4;
    std::string table;
};

int cmd_zz(const ZzOpts& o, Sink& sink) {
    require(o.points >= 2, "--points must be >= 2");
    const DeviceConfig cfg = load_device_config(o.config);
    const CouplerModel m = cfg.model();
    const std::vector<double> phis = fit::linspace(0.0, 0.5, o.points);
    std::vector<double> g, zz;
    for (double phi : phis) {
        g.push_back(net_coupling(m, FluxBias{phi}));
        zz.push_back(residual_zz(m, FluxBias{phi}, o.levels));
    }
    size_t imax = 0;
    for (size_t i = 1; i < phis.size(); ++i) {
        if (std::abs(g[i]) > std::abs(g[imax])) imax = i;
    }
    json rows = json::array();
    std::ostringstream csv;
    csv << "phi,g_hz,zz_hz\n";
    for (size_t i = 0; i < phis.size(); ++i) {
        rows.push_back({{"phi", phis[i]}, {"g_hz", g[i]}, {"zz_hz", zz[i]}});
        csv << io::format_number(phis[i]) << ',' << io::format_number(g[i]) << ','
            << io::format_number(zz[i]) << '\n';
    }
    json result{{"levels_per_mode", o.levels},
                {"rows", rows},
                {"max_coupling", {{"phi", phis[imax]}, {"g_hz", g[imax]}, {"zz_hz", zz[imax]}}},
                {"zero_coupling", nullptr}};
    const std::optional<double> z = zero_in_grid(m, phis, g);
    double zz_zero = NAN;
    if (z) {
        zz_zero = residual_zz(m, FluxBias{*z}, o.levels);
        result["zero_coupling"] = {{"phi", *z}, {"zz_hz", zz_zero}};
        result["suppression_ratio"] = std::abs(zz[imax]) / std::abs(zz_zero);
    }
    if (!o.table.empty()) {
        Sink t(sink.summary(), sink.summary());
        t.path = o.table;
        t.write(csv.str());
    }
    const json input{{"config_path", o.config},
                     {"config", cfg.resolved},
                     {"points", o.points},
                     {"levels_per_mode", o.levels}};
    sink.write(dump(report("zz", input, result)));
    auto& s = sink.summary();
    s << "ZZ at max coupling (phi = " << fixed(phis[imax], 3) << "): " << fixed(zz[imax] / 1e3, 2)
      << " kHz\n";
    if (z) {
        s << "ZZ at zero coupling (phi = " << fixed(*z, 4) << "): " << fixed(zz_zero / 1e3, 2)
          << " kHz\n";
    } else {
        s << "no zero coupling in [0, 0.5]\n";
    }
    return kOk;
}

struct SynthGOpts {
    std::string config;
    int points = 25;
    double phi_min = 0.0;
    double phi_max = 0.5;
    double sigma_hz = 0.05e6;
    bool record_sigma = false;
    std::uint64_t seed = 42;
};

int cmd_synth_g(const SynthGOpts& o, Sink& sink) {
    require(o.points >= 1, "--points must be >= 1");
    const DeviceConfig cfg = load_device_config(o.config);
    const auto phis = fit::linspace(o.phi_min, o.phi_max, o.points);
    const fit::GCurve c = fit::simulate_gcurve(cfg.model(), phis, o.sigma_hz, o.seed, o.record_sigma);
    std::ostringstream csv;
    csv << "# synthetic g curve from " << fs::path(o.config).filename().string() << ", sigma "
        << io::format_number(o.sigma_hz) << " Hz, seed " << o.seed << "\n";
    io::write_gcurve_csv(csv, c);
    sink.write(csv.str());
    sink.summary() << "wrote " << c.points.size() << " points\n";
    return kOk;
}

struct SynthT1Opts {
    std::string config;
    int points = 10;
    double detuning_min_hz = 200e6;
    double detuning_max_hz = 900e6;
    double noise = 0.05;
    std::uint64_t seed = 42;
};

int cmd_synth_t1(const SynthT1Opts& o, Sink& sink) {
    require(o.points >= 1, "--points must be >= 1");
    const DeviceConfig cfg = load_device_config(o.config);
    require(cfg.purcell.has_value(), "config: missing 'purcell'");
    require(cfg.purcell->g_rc_hz > 0.0, "config.purcell.g_rc_hz must be > 0 for synthesis");
    std::vector<double> wc;
    // Coupler below the resonator, as when it is tuned up towards it.
    for (double d : fit::linspace(o.detuning_max_hz, o.detuning_min_hz, o.points)) {
        wc.push_back(cfg.purcell->omega_r_hz - d);
    }
    const fit::T1Curve c = fit::simulate_t1(*cfg.purcell, wc, o.noise, o.seed);
    std::ostringstream csv;
    csv << "# synthetic Purcell T1 from " << fs::path(o.config).filename().string()
        << ", relative noise " << o.noise << ", seed " << o.seed << "\n";
    io::write_t1curve_csv(csv, c);
    sink.write(csv.str());
    sink.summary() << "wrote " << c.points.size() << " points\n";
    return kOk;
}

struct SynthRbOpts {
    double p = 0.95;
    double a = 0.75;
    double b = 0.25;
    std::optional<double> irb_fidelity;
    std::vector<int> lengths{1, 2, 4, 8, 16, 32, 64, 96, 128};
    int shots = 100;
    int randomizations = 30;
    int dimension = 4;
    std::uint64_t seed = 42;
};

int cmd_synth_rb(const SynthRbOpts& o, Sink& sink) {
    metrics::RbSynthesis spec;
    spec.a = o.a;
    spec.b = o.b;
    spec.p = o.p;
    spec.lengths = o.lengths;
    spec.shots = o.shots;
    spec.randomizations = o.randomizations;
    if (o.irb_fidelity) {
        // Interleaved decay that gives the requested gate fidelity against reference decay p.
        const double f = *o.irb_fidelity;
        require(f > 0.0 && f <= 1.0, "--irb-fidelity must be in (0, 1]");
        const double k = double(o.dimension - 1) / double(o.dimension);
        spec.p = o.p * (1.0 - (1.0 - f) / k);
        spec.variant = metrics::RbVariant::Interleaved;
    }
    const metrics::RbRun run = metrics::simulate_rb(spec, o.seed);
    std::ostringstream csv;
    csv << "# synthetic RB, A " << spec.a << ", B " << spec.b << ", p "
        << io::format_number(spec.p) << ", " << spec.shots << " shots x " << spec.randomizations
        << " randomizations, seed " << o.seed << "\n";
    io::write_rbrun_csv(csv, run);
    sink.write(csv.str());
    sink.summary() << "wrote " << run.points.size() << " lengths (p = " << fixed(spec.p, 6) << ")\n";
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-chip tunable coupler modeling and parameter extraction"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version));

    Sink sink(out, err);
    std::function<int()> action;
    auto add_out = [&](CLI::App* sub, const char* what) {
        sub->add_option("--out,-o", sink.path, std::string("Write the ") + what + " here (default stdout)");
    };

    SweepOpts sweep;
    auto* s_sweep = app.add_subcommand("sweep", "Net coupling g(phi) table");
    s_sweep->add_option("--config,-c", sweep.config, "Device config")->required();
    s_sweep->add_option("--phi-min", sweep.phi_min, "First flux (flux quanta)");
    s_sweep->add_option("--phi-max", sweep.phi_max, "Last flux (flux quanta)");
    s_sweep->add_option("--points,-n", sweep.points, "Number of flux points (>= 2)");
    add_out(s_sweep, "phi,g_hz table");
    s_sweep->callback([&] { action = [&] { return cmd_sweep(sweep, sink); }; });

    FindZeroOpts fz;
    auto* s_fz = app.add_subcommand("find-zero", "Flux of zero net coupling");
    s_fz->add_option("--config,-c", fz.config, "Device config")->required();
    s_fz->add_option("--bracket", fz.bracket, "Flux bracket LO HI (default 0 0.5)")->expected(2);
    s_fz->add_option("--tol-hz", fz.tol_hz, "Stop when |g| is below this (Hz)");
    add_out(s_fz, "JSON report");
    s_fz->callback([&] { action = [&] { return cmd_find_zero(fz, sink); }; });

    SensitivityOpts sens;
    auto* s_sens = app.add_subcommand("sensitivity", "Couplings versus inter-chip gap height");
    s_sens->add_option("--network", sens.network, "Network file");
    s_sens->add_option("--config,-c", sens.config, "Device config with a network reference");
    s_sens->add_option("--design", sens.design, "paddle-paddle, bump-paddle or bump-bump")->required();
    s_sens->add_option("--heights", sens.heights, "Gap heights in metres, comma separated")
        ->required()
        ->delimiter(',');
    s_sens->add_option("--flux-points", sens.flux_points, "Flux grid for max |g| and the zero");
    add_out(s_sens, "table");
    s_sens->callback([&] { action = [&] { return cmd_sensitivity(sens, sink); }; });

    FitGOpts fg;
    auto* s_fg = app.add_subcommand("fit-g", "Fit |g12|, sqrt(g1c g2c), E_Jc and r to g(phi)");
    s_fg->add_option("--config,-c", fg.config, "Device config (qubits, coupler E_Cc, config)")->required();
    s_fg->add_option("--data,-d", fg.data, "phi,g_hz[,sigma_hz] CSV")->required();
    s_fg->add_option("--ecc-hz", fg.ecc_hz, "Override the fixed coupler E_Cc");
    s_fg->add_option("--q1-hz", fg.q1_hz, "Override the q1 frequency");
    s_fg->add_option("--q2-hz", fg.q2_hz, "Override the q2 frequency");
    s_fg->add_option("--r-convention", fg.r_convention, "le1 or ge1");
    add_out(s_fg, "JSON report");
    s_fg->callback([&] { action = [&] { return cmd_fit_g(fg, sink); }; });

    FitPurcellOpts fp;
    auto* s_fp = app.add_subcommand("fit-purcell", "Fit g_rc to Purcell-limited coupler T1");
    s_fp->add_option("--config,-c", fp.config, "Device config with a 'purcell' section");
    s_fp->add_option("--data,-d", fp.data, "omega_c_hz,t1_s CSV")->required();
    s_fp->add_option("--omega-r-hz", fp.omega_r_hz, "Resonator frequency");
    s_fp->add_option("--kappa-r-hz", fp.kappa_r_hz, "Resonator linewidth");
    add_out(s_fp, "JSON report");
    s_fp->callback([&] { action = [&] { return cmd_fit_purcell(fp, sink); }; });

    FidelityOpts fid;
    auto* s_fid = app.add_subcommand("fidelity", "Coherence-limited CZ fidelity");
    s_fid->add_option("--config,-c", fid.config, "Device config")->required();
    s_fid->add_flag("--assume-static-equals-modulated", fid.assume_static,
                    "Use the modulated q2 coherence for the static q2 values");
    add_out(s_fid, "JSON report");
    s_fid->callback([&] { action = [&] { return cmd_fidelity(fid, sink); }; });

    RbOpts rb;
    auto* s_rb = app.add_subcommand("rb", "Interleaved randomized benchmarking analysis");
    s_rb->add_option("--reference", rb.reference, "Reference RB CSV")->required();
    s_rb->add_option("--interleaved", rb.interleaved, "Interleaved RB CSV")->required();
    s_rb->add_option("--history", rb.history, "CSV with a 'fidelity' column of repeated runs");
    s_rb->add_option("--dimension", rb.dimension, "Hilbert space dimension (4 for two qubits)");
    add_out(s_rb, "JSON report");
    s_rb->callback([&] { action = [&] { return cmd_rb(rb, sink); }; });

    ZzOpts zz;
    auto* s_zz = app.add_subcommand("zz", "Residual ZZ versus coupler flux");
    s_zz->add_option("--config,-c", zz.config, "Device config")->required();
    s_zz->add_option("--points,-n", zz.points, "Flux points over [0, 0.5]");
    s_zz->add_option("--levels", zz.levels, "Levels per mode (>= 3)");
    s_zz->add_option("--table", zz.table, "Also write a phi,g_hz,zz_hz table here");
    add_out(s_zz, "JSON report");
    s_zz->callback([&] { action = [&] { return cmd_zz(zz, sink); }; });

    SynthGOpts sg;
    auto* s_sg = app.add_subcommand("synth-g", "Synthetic noisy g(phi) from a device config");
    s_sg->add_option("--config,-c", sg.config, "Device config")->required();
    s_sg->add_option("--points,-n", sg.points, "Number of flux points");
    s_sg->add_option("--phi-min", sg.phi_min, "First flux");
    s_sg->add_option("--phi-max", sg.phi_max, "Last flux");
    s_sg->add_option("--sigma-hz", sg.sigma_hz, "Gaussian noise standard deviation");
    s_sg->add_flag("--record-sigma", sg.record_sigma, "Add a sigma_hz column");
    s_sg->add_option("--seed", sg.seed, "Noise seed");
    add_out(s_sg, "CSV");
    s_sg->callback([&] { action = [&] { return cmd_synth_g(sg, sink); }; });

    SynthT1Opts st;
    auto* s_st = app.add_subcommand("synth-t1", "Synthetic Purcell-limited coupler T1");
    s_st->add_option("--config,-c", st.config, "Device config with purcell.g_rc_hz")->required();
    s_st->add_option("--points,-n", st.points, "Number of coupler frequencies");
    s_st->add_option("--detuning-min-hz", st.detuning_min_hz, "Smallest resonator-coupler detuning");
    s_st->add_option("--detuning-max-hz", st.detuning_max_hz, "Largest resonator-coupler detuning");
    s_st->add_option("--noise", st.noise, "Relative (multiplicative) T1 noise");
    s_st->add_option("--seed", st.seed, "Noise seed");
    add_out(s_st, "CSV");
    s_st->callback([&] { action = [&] { return cmd_synth_t1(st, sink); }; });

    SynthRbOpts sr;
    auto* s_sr = app.add_subcommand("synth-rb", "Synthetic RB survival curve");
    s_sr->add_option("--p", sr.p, "Decay parameter (reference decay with --irb-fidelity)");
    s_sr->add_option("--a", sr.a, "Amplitude A");
    s_sr->add_option("--b", sr.b, "Offset B");
    s_sr->add_option("--irb-fidelity", sr.irb_fidelity,
                     "Emit the interleaved curve for this gate fidelity");
    s_sr->add_option("--lengths", sr.lengths, "Sequence lengths, comma separated")->delimiter(',');
    s_sr->add_option("--shots", sr.shots, "Shots per sequence");
    s_sr->add_option("--randomizations", sr.randomizations, "Random sequences per length");
    s_sr->add_option("--dimension", sr.dimension, "Hilbert space dimension");
    s_sr->add_option("--seed", sr.seed, "Sampling seed");
    add_out(s_sr, "CSV");
    s_sr->callback([&] { action = [&] { return cmd_synth_rb(sr, sink); }; });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        return action();
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kNumericError;
    }
}

}  // namespace mcoupler::app
