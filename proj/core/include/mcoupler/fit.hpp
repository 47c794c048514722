#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcoupler/circuit.hpp"
#include "mcoupler/nls.hpp"

namespace mcoupler::fit {

struct GPoint {
    double phi = 0.0;
    double g_hz = 0.0;
    std::optional<double> sigma_hz;
};

struct GCurve {
    std::vector<GPoint> points;
    std::string device;
    PadConfig config = PadConfig::Asymmetric;

    /// Finite values; sigmas either all absent or all present and > 0.
    void validate() const;
    bool weighted() const;
};

struct T1Point {
    double omega_c_hz = 0.0;
    double t1_s = 0.0;
};

struct T1Curve {
    std::vector<T1Point> points;
    double omega_r_hz = 0.0;
    double kappa_r_hz = 0.0;

    void validate() const;
};

enum class AsymmetryConvention { AtMostOne, AtLeastOne };

struct GFitOptions {
    /// Net coupling only depends on r through E_Jeff, which is invariant
    /// under r -> 1/r; the report picks one branch.
    AsymmetryConvention r_convention = AsymmetryConvention::AtMostOne;
    /// E_Jc grid (Hz) and r grid for the initial search.
    double e_jc_min_hz = 5e9;
    double e_jc_max_hz = 80e9;
    int e_jc_grid = 48;
    double r_min = 0.2;
    int r_grid = 24;
    /// Number of best grid points refined by least squares.
    int refine_starts = 3;
    double unidentifiable_condition = 1e8;
    NlsOptions nls;
};

/// Parameter names used in g-curve reports.
inline constexpr const char* kG12Abs = "g12_abs_hz";
inline constexpr const char* kGProduct = "sqrt_g1c_g2c_hz";
inline constexpr const char* kEJc = "e_jc_hz";
inline constexpr const char* kAsymmetry = "r";
inline constexpr const char* kGrc = "g_rc_hz";

/// Net coupling model used by the g-curve fit: g12 = -|g12|, g1c = G and
/// g2c = -G (asymmetric) or +G (symmetric) at zero flux.
CouplerModel gcurve_model(double g12_abs_hz, double g_product_hz, double e_jc_hz, double r,
                          double fixed_ecc_hz, std::pair<double, double> qubit_freqs_hz,
                          PadConfig config);

/// Extracts |g12|, sqrt(g1c g2c), E_Jc and r from a measured g(phi) with
/// E_Cc and the qubit frequencies held fixed.
FitReport fit_gcurve(const GCurve& data, double fixed_ecc_hz,
                     std::pair<double, double> qubit_freqs_hz, const GFitOptions& opts = {});

/// Extracts g_rc from coupler T1 versus frequency with omega_r and kappa_r fixed.
FitReport fit_purcell(const T1Curve& data, const NlsOptions& opts = {});

/// Net coupling of `model` at each flux plus Gaussian noise of standard
/// deviation `sigma_hz` (mt19937_64 seeded with `seed`). When `record_sigma`
/// is set every point carries sigma_hz for a weighted fit.
GCurve simulate_gcurve(const CouplerModel& model, std::span<const double> phis, double sigma_hz,
                       std::uint64_t seed, bool record_sigma = false);

/// Purcell-limited T1 at each coupler frequency, multiplied by
/// (1 + rel_noise * N(0, 1)).
T1Curve simulate_t1(const PurcellParams& purcell, std::span<const double> omega_c_hz,
                    double rel_noise, std::uint64_t seed);

/// n equally spaced values from lo to hi inclusive (n >= 2), or {lo} for n = 1.
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace mcoupler::fit
