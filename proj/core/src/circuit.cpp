#include "mcoupler/circuit.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mcoupler/error.hpp"
#include "mcoupler/units.hpp"

namespace mcoupler {

namespace {

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

std::string describe(const TransmonParams& t) {
    return t.label.empty() ? std::string("transmon") : "transmon '" + t.label + "'";
}

}  // namespace

TransmonParams TransmonParams::from_frequency(double frequency_hz, double e_c_hz,
                                              std::string label) {
    require(finite_positive(frequency_hz), "frequency must be positive");
    require(finite_positive(e_c_hz), "charging energy must be positive");
    TransmonParams t;
    const double plasma = frequency_hz + e_c_hz;
    t.e_j_hz = plasma * plasma / (8.0 * e_c_hz);
    t.e_c_hz = e_c_hz;
    t.label = std::move(label);
    t.frequency_hz = frequency_hz;
    return t;
}

void TransmonParams::validate() const {
    require(finite_positive(e_j_hz), describe(*this) + ": e_j must be > 0");
    require(finite_positive(e_c_hz), describe(*this) + ": e_c must be > 0");
    if (frequency_hz) {
        require(finite_positive(*frequency_hz), describe(*this) + ": frequency must be > 0");
    }
}

std::optional<std::string> transmon_regime_warning(const TransmonParams& t) {
    const double ratio = t.e_j_hz / t.e_c_hz;
    if (ratio >= 20.0) return std::nullopt;
    std::ostringstream os;
    os << describe(t) << " has E_J/E_C = " << ratio
       << " < 20; charge dispersion is not negligible";
    return os.str();
}

void CouplerParams::validate() const {
    require(finite_positive(e_jc_hz), "coupler: e_jc must be > 0");
    require(finite_positive(e_cc_hz), "coupler: e_cc must be > 0");
    require(finite_positive(r), "coupler: asymmetry r must be > 0");
}

void PurcellParams::validate() const {
    require(finite_positive(omega_r_hz), "purcell: omega_r must be > 0");
    require(finite_positive(kappa_r_hz), "purcell: kappa_r must be > 0");
    require(std::isfinite(g_rc_hz) && g_rc_hz >= 0.0, "purcell: g_rc must be >= 0");
}

void CouplerModel::validate() const {
    q1.validate();
    q2.validate();
    coupler.validate();
    require(std::isfinite(couplings.g12_hz) && std::isfinite(couplings.g1c_hz) &&
                std::isfinite(couplings.g2c_hz),
            "couplings must be finite");
    require(resonance_guard_hz >= 0.0, "resonance guard must be >= 0");
    const double product = couplings.g1c_hz * couplings.g2c_hz;
    if (product != 0.0) {
        if (coupler.config == PadConfig::Asymmetric) {
            require(product < 0.0, "asymmetric coupler requires opposite signs of g1c and g2c");
        } else {
            require(product > 0.0, "symmetric coupler requires equal signs of g1c and g2c");
        }
    }
}

double fold_flux(double phi) {
    require(std::isfinite(phi), "flux must be finite");
    return std::abs(phi - std::round(phi));
}

double effective_josephson_energy(const CouplerParams& c, FluxBias f) {
    const double r = c.r;
    const double arg = 1.0 + r * r + 2.0 * r * std::cos(units::two_pi * fold_flux(f.phi));
    // arg can dip a few ulps below zero at r = 1, half flux.
    return c.e_jc_hz * std::sqrt(std::max(arg, 0.0)) / (1.0 + r);
}

double coupler_frequency(const CouplerParams& c, FluxBias f) {
    const double e_jeff = effective_josephson_energy(c, f);
    if (!(e_jeff > 0.0)) {
        fail(ErrorCode::DegenerateSquid, "effective Josephson energy vanishes at this flux");
    }
    const double xi = std::sqrt(2.0 * c.e_cc_hz / c.e_jc_hz);
    return std::sqrt(8.0 * e_jeff * c.e_cc_hz) - c.e_cc_hz * (1.0 + xi / 4.0);
}

double transmon_frequency(const TransmonParams& t) {
    return std::sqrt(8.0 * t.e_j_hz * t.e_c_hz) - t.e_c_hz;
}

double qubit_frequency(const TransmonParams& t) {
    return t.frequency_hz ? *t.frequency_hz : transmon_frequency(t);
}

TransmonParams coupler_as_transmon(const CouplerParams& c) {
    TransmonParams t;
    t.e_j_hz = c.e_jc_hz;
    t.e_c_hz = c.e_cc_hz;
    t.label = "coupler";
    return t;
}

double coupling_from_energy(double e_coupling_hz, const TransmonParams& a,
                            const TransmonParams& b) {
    const double ratio = (a.e_j_hz / a.e_c_hz) * (b.e_j_hz / b.e_c_hz);
    return e_coupling_hz / std::numbers::sqrt2 * std::pow(ratio, 0.25);
}

CouplingSet couplings_at(const CouplerModel& m, FluxBias f) {
    const double scale =
        std::pow(effective_josephson_energy(m.coupler, f) / m.coupler.e_jc_hz, 0.25);
    return {m.couplings.g12_hz, m.couplings.g1c_hz * scale, m.couplings.g2c_hz * scale};
}

double mediated_coupling(const CouplerModel& m, FluxBias f) {
    const double wc = coupler_frequency(m.coupler, f);
    const CouplingSet g = couplings_at(m, f);
    double sum = 0.0;
    for (const TransmonParams* q : {&m.q1, &m.q2}) {
        const double wk = qubit_frequency(*q);
        const double delta = wc - wk;
        if (std::abs(delta) < m.resonance_guard_hz) {
            std::ostringstream os;
            os << "coupler at " << wc << " Hz is within " << m.resonance_guard_hz
               << " Hz of " << describe(*q) << " at " << wk << " Hz (phi = " << f.phi << ")";
            fail(ErrorCode::ResonantCoupler, os.str());
        }
        sum += 1.0 / delta + 1.0 / (wc + wk);
    }
    return 0.5 * g.g1c_hz * g.g2c_hz * sum;
}

double net_coupling(const CouplerModel& m, FluxBias f) {
    return m.couplings.g12_hz - mediated_coupling(m, f);
}

FluxBias find_zero_coupling(const CouplerModel& m, double phi_lo, double phi_hi,
                            const ZeroSearchOptions& opts) {
    require(std::isfinite(phi_lo) && std::isfinite(phi_hi) && phi_lo < phi_hi,
            "zero search bracket must satisfy lo < hi");
    require(opts.tol_g_hz > 0.0, "zero search tolerance must be > 0");
    m.validate();

    auto g = [&](double phi) { return net_coupling(m, FluxBias{phi}); };
    double lo = phi_lo, hi = phi_hi;
    double g_lo = g(lo), g_hi = g(hi);
    if (std::abs(g_lo) < opts.tol_g_hz) return {lo};
    if (std::abs(g_hi) < opts.tol_g_hz) return {hi};
    if (std::signbit(g_lo) == std::signbit(g_hi)) {
        std::ostringstream os;
        os << "net coupling has the same sign at phi = " << lo << " (" << g_lo
           << " Hz) and phi = " << hi << " (" << g_hi << " Hz)";
        fail(ErrorCode::NoSignChange, os.str());
    }

    // Secant steps while they shrink the bracket quickly; fall back to
    // bisection whenever the bracket fails to halve.
    double last_width = hi - lo;
    bool force_bisect = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
        double x = 0.5 * (lo + hi);
        if (!force_bisect) {
            const double secant = hi - g_hi * (hi - lo) / (g_hi - g_lo);
            if (secant > lo && secant < hi) x = secant;
        }
        const double gx = g(x);
        if (std::abs(gx) < opts.tol_g_hz) return {x};
        if (std::signbit(gx) == std::signbit(g_lo)) {
            lo = x;
            g_lo = gx;
        } else {
            hi = x;
            g_hi = gx;
        }
        const double width = hi - lo;
        force_bisect = width > 0.5 * last_width;
        last_width = width;
        if (width <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo))) {
            break;
        }
    }
    std::ostringstream os;
    os << "zero search did not reach |g| < " << opts.tol_g_hz << " Hz in "
       << opts.max_iterations << " iterations";
    fail(ErrorCode::MaxIterations, os.str());
}

double purcell_t1(const PurcellParams& p, double omega_c_hz) {
    p.validate();
    require(std::isfinite(omega_c_hz), "coupler frequency must be finite");
    if (omega_c_hz == p.omega_r_hz) {
        fail(ErrorCode::ZeroDetuning, "coupler frequency equals the resonator frequency");
    }
    if (p.g_rc_hz == 0.0) return std::numeric_limits<double>::infinity();
    const double detuning = units::two_pi * (omega_c_hz - p.omega_r_hz);
    const double kappa = units::two_pi * p.kappa_r_hz;
    const double g = units::two_pi * p.g_rc_hz;
    return detuning * detuning / (kappa * g * g);
}

}  // namespace mcoupler
