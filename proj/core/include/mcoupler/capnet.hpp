#pragma once

// Lumped capacitance model of a multi-chip qubit-coupler-qubit assembly.
//
// A network is a set of metal nodes (one of which is ground), pairwise
// capacitances between them, and element declarations (transmons and the
// coupler) that own one pad (grounded) or two pads (floating). Inter-chip
// connections are either vacuum-gap paddles, whose capacitance depends on
// the bump height, or galvanic indium bumps, which short their two nodes.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mcoupler/circuit.hpp"

namespace mcoupler::capnet {

enum class NodeKind { Ground, Pad };

struct Node {
    int id = 0;
    NodeKind kind = NodeKind::Pad;
    std::string owner;  ///< element label, empty for passive metal
};

struct Capacitor {
    int node_a = 0;
    int node_b = 0;
    double farads = 0.0;
};

enum class ElementRole { Qubit1, Qubit2, Coupler, Other };

struct ElementDecl {
    std::string label;
    std::vector<int> pads;  ///< one pad: grounded; two pads: floating
    ElementRole role = ElementRole::Other;
    double e_j_hz = 0.0;    ///< total Josephson energy (E_Jc for the coupler)
    double asymmetry_r = 1.0;  ///< SQUID asymmetry, coupler only
};

struct CapNetwork {
    std::vector<Node> nodes;
    std::vector<Capacitor> caps;
    std::vector<ElementDecl> elements;

    /// Checks ids, the single ground node, positive capacitances, no
    /// self-capacitance and element pad references.
    void validate() const;
    int ground_id() const;
    const ElementDecl& element(ElementRole role) const;
};

enum class ConnectionKind { Paddle, Bump };

struct InterChipConnection {
    ConnectionKind kind = ConnectionKind::Bump;
    int node_a = 0;  ///< chip 1 side
    int node_b = 0;  ///< chip 2 side
    double area_m2 = 0.0;    ///< paddle overlap area
    double fringe_f = 0.0;   ///< height-independent parasitic, paddle only

    void validate() const;
};

/// epsilon_0 * area / h + fringe.
double paddle_capacitance(const InterChipConnection& c, double bump_height_m);

/// Maxwell matrix over the surviving (merged, non-ground) nodes.
struct MaxwellMatrix {
    Eigen::MatrixXd c;
    /// Original node id -> row. Ground and nodes merged into ground map to -1.
    std::map<int, int> row_of_node;

    int row(int node_id) const;
    Eigen::Index size() const { return c.rows(); }
};

MaxwellMatrix build_matrix(const CapNetwork& net,
                           std::span<const InterChipConnection> connections,
                           double bump_height_m);

/// Charging and coupling energies (Hz) in the convention
/// H = sum_i 4 E_C,i n_i^2 + sum_{i<j} 4 E_ij n_i n_j.
struct ElementEnergies {
    std::vector<std::string> labels;
    Eigen::VectorXd charging_hz;
    Eigen::MatrixXd coupling_hz;  ///< symmetric, zero diagonal

    Eigen::Index index(const std::string& label) const;
    double charging(const std::string& label) const;
    double coupling(const std::string& a, const std::string& b) const;
};

/// Floating elements keep only the differential coordinate (pad a minus
/// pad b); total-charge modes and passive islands carry zero charge.
ElementEnergies reduce_to_energies(const MaxwellMatrix& c,
                                   std::span<const ElementDecl> elements);

/// Qubits, coupler and zero-flux couplings assembled from reduced energies
/// and the Josephson energies in the element declarations. The pad
/// configuration follows the sign of E_1c * E_2c.
CouplerModel model_from_energies(const CapNetwork& net, const ElementEnergies& energies);

enum class Design { PaddlePaddle, BumpPaddle, BumpBump };

/// Realizes every connection site as a paddle or bump. BumpPaddle makes the
/// first site a bump and the rest paddles.
std::vector<InterChipConnection> apply_design(std::span<const InterChipConnection> sites,
                                              Design design);

struct SensitivityRow {
    double height_m = 0.0;
    double g12_hz = 0.0;
    double g1c_hz = 0.0;
    double g2c_hz = 0.0;
    double max_abs_g_hz = 0.0;
    std::optional<double> phi_zero;
};

struct SweepOptions {
    int flux_points = 201;  ///< grid over [0, 0.5] for max |g| and the root bracket
    ZeroSearchOptions zero;
};

std::vector<SensitivityRow> sensitivity_sweep(const CapNetwork& net,
                                              std::span<const InterChipConnection> sites,
                                              Design design, std::span<const double> heights_m,
                                              const SweepOptions& opts = {});

}  // namespace mcoupler::capnet
