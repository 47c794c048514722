#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcoupler/nls.hpp"

namespace mcoupler::metrics {

/// Coherence times in seconds. The *_mod entries belong to the modulated
/// qubit (q2) during the parametric gate.
struct CoherenceSet {
    double t1_q1_s = 0.0;
    double t2s_q1_s = 0.0;
    double t1_q2_s = 0.0;
    double t2s_q2_s = 0.0;
    double t1_q2_mod_s = 0.0;
    double t2s_q2_mod_s = 0.0;

    /// Errors on non-positive values; returns warnings for T2* > 2 T1.
    std::vector<std::string> validate() const;
};

struct GateTiming {
    double t_flat_s = 0.0;
    double t_pad_s = 0.0;

    void validate() const;
};

/// Coherence-limited CZ fidelity of a parametric-resonance gate with flat
/// interaction time t_flat and padding t_pad on each side.
double coherence_limited_fidelity(const CoherenceSet& c, const GateTiming& t);

/// A p^m + B.
double rb_decay(double m, double a, double b, double p);

/// 1 - (d-1)/d (1 - p_int/p_ref). Throws InvalidDecay if p_int > p_ref.
double irb_gate_fidelity(double p_ref, double p_int, int d = 4);

enum class RbVariant { Reference, Interleaved };

struct RbPoint {
    int m = 0;
    double survival = 0.0;
    std::optional<double> sem;
};

struct RbRun {
    std::vector<RbPoint> points;
    RbVariant variant = RbVariant::Reference;

    /// Lengths strictly increasing and >= 0, survivals in [0, 1].
    void validate() const;
};

struct RbFit {
    double a = 0.0, a_err = 0.0;
    double b = 0.0, b_err = 0.0;
    double p = 0.0, p_err = 0.0;
    fit::FitReport report;
};

RbFit fit_rb(const RbRun& run, const fit::NlsOptions& opts = {});

struct InterleavedResult {
    RbFit reference;
    RbFit interleaved;
    double fidelity = 0.0;
    double fidelity_err = 0.0;  ///< first-order propagation of the p errors
};

InterleavedResult analyze_interleaved(const RbRun& reference, const RbRun& interleaved, int d = 4);

/// Decay-model RB synthesis: for every length and randomization, draws
/// `shots` Bernoulli outcomes at probability A p^m + B and records the mean
/// and standard error over randomizations.
struct RbSynthesis {
    double a = 0.75;
    double b = 0.25;
    double p = 0.95;
    std::vector<int> lengths;
    int shots = 100;
    int randomizations = 30;
    RbVariant variant = RbVariant::Reference;
};

RbRun simulate_rb(const RbSynthesis& spec, std::uint64_t seed);

struct StabilityStats {
    double mean = 0.0;
    double stddev = 0.0;  ///< n-1 denominator; 0 for a single value
    double median = 0.0;
    std::vector<std::pair<double, double>> ecdf;  ///< (value, k/n), sorted
};

StabilityStats stability_stats(const std::vector<double>& values);

/// "98.61 ± 0.18%" for fidelities given as fractions.
std::string format_percent(double mean, double stddev, int decimals = 2);

}  // namespace mcoupler::metrics
