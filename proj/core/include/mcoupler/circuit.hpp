#pragma once

// Two transmons coupled through a floating, flux-tunable transmon coupler.
//
// All energies and frequencies are ordinary frequencies in Hz. Flux is the
// coupler flux in units of the flux quantum; every flux-dependent quantity
// is even and 1-periodic in it.

#include <optional>
#include <string>

namespace mcoupler {

struct TransmonParams {
    double e_j_hz = 0.0;
    double e_c_hz = 0.0;
    std::string label;
    /// Measured mode frequency. When set it replaces the
    /// sqrt(8 E_J E_C) - E_C estimate wherever a qubit frequency is needed.
    std::optional<double> frequency_hz;

    /// Builds parameters whose transmon estimate reproduces `frequency_hz`
    /// for the given charging energy, and records the frequency as measured.
    static TransmonParams from_frequency(double frequency_hz, double e_c_hz,
                                         std::string label = {});

    void validate() const;
};

/// Returns a message when E_J/E_C is below the transmon regime (< 20).
std::optional<std::string> transmon_regime_warning(const TransmonParams& t);

enum class PadConfig { Asymmetric, Symmetric };

struct CouplerParams {
    double e_jc_hz = 0.0;  ///< total SQUID Josephson energy E_Jc1 + E_Jc2
    double r = 1.0;        ///< junction asymmetry E_Jc1 / E_Jc2
    double e_cc_hz = 0.0;
    PadConfig config = PadConfig::Asymmetric;

    void validate() const;
};

struct CouplingSet {
    double g12_hz = 0.0;
    double g1c_hz = 0.0;
    double g2c_hz = 0.0;
};

struct FluxBias {
    double phi = 0.0;
};

struct PurcellParams {
    double omega_r_hz = 0.0;
    double kappa_r_hz = 0.0;
    double g_rc_hz = 0.0;

    void validate() const;
};

/// Everything the net-coupling expression needs. `couplings` are the
/// qubit-coupler and direct couplings at zero coupler flux.
struct CouplerModel {
    TransmonParams q1;
    TransmonParams q2;
    CouplerParams coupler;
    CouplingSet couplings;
    /// |omega_c - omega_k| below this raises ResonantCoupler.
    double resonance_guard_hz = 1e3;

    void validate() const;
};

/// Reduces flux to the fundamental interval [0, 0.5] using evenness and
/// periodicity, so symmetric inputs give bit-identical outputs.
double fold_flux(double phi);

double effective_josephson_energy(const CouplerParams& c, FluxBias f);

/// Includes the -E_Cc (1 + xi/4) correction with xi = sqrt(2 E_Cc / E_Jc),
/// which uses the total (flux-independent) E_Jc.
double coupler_frequency(const CouplerParams& c, FluxBias f);

double transmon_frequency(const TransmonParams& t);

/// The measured frequency if present, else transmon_frequency.
double qubit_frequency(const TransmonParams& t);

/// Views the coupler at zero flux as a transmon (E_J = E_Jc, E_C = E_Cc).
TransmonParams coupler_as_transmon(const CouplerParams& c);

/// g = E/sqrt(2) * (E_Ja/E_Ca * E_Jb/E_Cb)^(1/4); the sign follows E.
double coupling_from_energy(double e_coupling_hz, const TransmonParams& a,
                            const TransmonParams& b);

/// Qubit-coupler couplings scaled to flux `f` by (E_Jeff(f)/E_Jc)^(1/4);
/// g12 is flux independent.
CouplingSet couplings_at(const CouplerModel& m, FluxBias f);

/// Virtual coupling mediated by the coupler:
/// g1c g2c / 2 * sum_k (1/(w_c - w_k) + 1/(w_c + w_k)).
double mediated_coupling(const CouplerModel& m, FluxBias f);

/// Net qubit-qubit coupling g = g12 - g_eff.
double net_coupling(const CouplerModel& m, FluxBias f);

struct ZeroSearchOptions {
    double tol_g_hz = 100.0;
    int max_iterations = 200;
};

/// Bracketed bisection with secant acceleration. Requires a sign change of
/// the net coupling over [phi_lo, phi_hi].
FluxBias find_zero_coupling(const CouplerModel& m, double phi_lo, double phi_hi,
                            const ZeroSearchOptions& opts = {});

/// Purcell-limited T1 in seconds: (w_c - w_r)^2 / (kappa_r g_rc^2) with all
/// rates angular. Returns +inf when g_rc is zero.
double purcell_t1(const PurcellParams& p, double omega_c_hz);

struct ZzOptions {
    /// Allowed relative change of zeta when the truncation is doubled.
    double convergence_rtol = 0.01;
    /// Minimum squared overlap between a dressed state and its bare label.
    double min_label_overlap = 0.5;
};

/// Static ZZ (E11 - E10 - E01 + E00) from exact diagonalization of the
/// three-mode Duffing Hamiltonian with exchange couplings, in Hz.
double residual_zz(const CouplerModel& m, FluxBias f, int levels_per_mode,
                   const ZzOptions& opts = {});

}  // namespace mcoupler
