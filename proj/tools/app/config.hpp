#pragma once

// Device configuration files (schema "mcoupler.device/1"); see docs/formats.md.

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "mcoupler/circuit.hpp"
#include "mcoupler/fit.hpp"
#include "mcoupler/gate_metrics.hpp"
#include "mcoupler/io.hpp"

namespace mcoupler::app {

struct NetworkRef {
    std::filesystem::path path;  ///< resolved against the config directory
    double bump_height_m = 0.0;
    io::NetworkFile file;
    nlohmann::json document;
};

/// Coherence times as given; the static q2 pair may be missing.
struct CoherenceInput {
    double t1_q1_s = 0.0;
    double t2s_q1_s = 0.0;
    std::optional<double> t1_q2_s;
    std::optional<double> t2s_q2_s;
    double t1_q2_mod_s = 0.0;
    double t2s_q2_mod_s = 0.0;
};

struct DeviceConfig {
    TransmonParams q1;
    TransmonParams q2;
    CouplerParams coupler;
    std::optional<CouplingSet> couplings;
    std::optional<NetworkRef> network;
    std::optional<PurcellParams> purcell;
    std::optional<metrics::GateTiming> gate_timing;
    std::optional<CoherenceInput> coherence;
    fit::AsymmetryConvention r_convention = fit::AsymmetryConvention::AtMostOne;

    /// The file as read, plus the referenced network document if any.
    nlohmann::json resolved;

    /// Coupler model at zero flux. With a network reference the coupling
    /// energies come from the reduced network and the E_J/E_C values from
    /// this config.
    CouplerModel model() const;
};

DeviceConfig parse_device_config(const std::string& json_text,
                                 const std::filesystem::path& base_dir = {});
DeviceConfig load_device_config(const std::filesystem::path& path);

}  // namespace mcoupler::app
