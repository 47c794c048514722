#include "mcoupler/capnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "mcoupler/error.hpp"
#include "mcoupler/units.hpp"

namespace mcoupler::capnet {

namespace {

std::string node_str(int id) { return "node " + std::to_string(id); }

// Union-find keyed by node index.
class Merger {
public:
    explicit Merger(size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), size_t{0}); }

    size_t find(size_t i) {
        while (parent_[i] != i) {
            parent_[i] = parent_[parent_[i]];
            i = parent_[i];
        }
        return i;
    }

    void unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<size_t> parent_;
};

}  // namespace

void CapNetwork::validate() const {
    require(!nodes.empty(), "network has no nodes");
    std::set<int> ids;
    int grounds = 0;
    for (const Node& n : nodes) {
        require(ids.insert(n.id).second, "duplicate " + node_str(n.id));
        if (n.kind == NodeKind::Ground) ++grounds;
    }
    require(grounds == 1, "network must have exactly one ground node, found " +
                              std::to_string(grounds));
    for (const Capacitor& c : caps) {
        require(ids.count(c.node_a) && ids.count(c.node_b),
                "capacitance references unknown node (" + std::to_string(c.node_a) + ", " +
                    std::to_string(c.node_b) + ")");
        require(c.node_a != c.node_b, "self-capacitance on " + node_str(c.node_a));
        require(std::isfinite(c.farads) && c.farads > 0.0,
                "capacitance between " + node_str(c.node_a) + " and " + node_str(c.node_b) +
                    " must be > 0");
    }
    const int ground = ground_id();
    std::set<std::string> labels;
    for (const ElementDecl& e : elements) {
        require(!e.label.empty(), "element without label");
        require(labels.insert(e.label).second, "duplicate element '" + e.label + "'");
        require(e.pads.size() == 1 || e.pads.size() == 2,
                "element '" + e.label + "' must have one or two pads");
        for (int p : e.pads) {
            require(ids.count(p), "element '" + e.label + "' references unknown " + node_str(p));
            require(p != ground, "element '" + e.label + "' lists the ground node as a pad");
        }
        if (e.pads.size() == 2) {
            require(e.pads[0] != e.pads[1], "element '" + e.label + "' repeats a pad");
        }
        require(std::isfinite(e.e_j_hz) && e.e_j_hz > 0.0,
                "element '" + e.label + "' needs e_j > 0");
        require(std::isfinite(e.asymmetry_r) && e.asymmetry_r > 0.0,
                "element '" + e.label + "' needs r > 0");
    }
}

int CapNetwork::ground_id() const {
    for (const Node& n : nodes) {
        if (n.kind == NodeKind::Ground) return n.id;
    }
    fail(ErrorCode::InvalidInput, "network has no ground node");
}

const ElementDecl& CapNetwork::element(ElementRole role) const {
    const ElementDecl* found = nullptr;
    for (const ElementDecl& e : elements) {
        if (e.role == role) {
            require(found == nullptr, "element role declared more than once");
            found = &e;
        }
    }
    require(found != nullptr, "network lacks a qubit1/qubit2/coupler element role");
    return *found;
}

void InterChipConnection::validate() const {
    require(node_a != node_b, "connection joins " + node_str(node_a) + " to itself");
    if (kind == ConnectionKind::Paddle) {
        require(std::isfinite(area_m2) && area_m2 > 0.0, "paddle area must be > 0");
        require(std::isfinite(fringe_f) && fringe_f >= 0.0, "paddle fringe must be >= 0");
    }
}

double paddle_capacitance(const InterChipConnection& c, double bump_height_m) {
    require(std::isfinite(bump_height_m) && bump_height_m > 0.0, "bump height must be > 0");
    return units::vacuum_permittivity * c.area_m2 / bump_height_m + c.fringe_f;
}

int MaxwellMatrix::row(int node_id) const {
    auto it = row_of_node.find(node_id);
    require(it != row_of_node.end(), "unknown " + node_str(node_id));
    return it->second;
}

MaxwellMatrix build_matrix(const CapNetwork& net,
                           std::span<const InterChipConnection> connections,
                           double bump_height_m) {
    net.validate();
    require(std::isfinite(bump_height_m) && bump_height_m > 0.0, "bump height must be > 0");

    std::map<int, size_t> index;
    for (size_t i = 0; i < net.nodes.size(); ++i) index[net.nodes[i].id] = i;
    auto idx = [&](int id) {
        auto it = index.find(id);
        require(it != index.end(), "connection references unknown " + node_str(id));
        return it->second;
    };

    Merger merger(net.nodes.size());
    std::vector<Capacitor> all_caps = net.caps;
    for (const InterChipConnection& conn : connections) {
        conn.validate();
        if (conn.kind == ConnectionKind::Bump) {
            merger.unite(idx(conn.node_a), idx(conn.node_b));
        } else {
            idx(conn.node_a);
            idx(conn.node_b);
            all_caps.push_back({conn.node_a, conn.node_b, paddle_capacitance(conn, bump_height_m)});
        }
    }

    // Rows follow ascending node id of each group's first member.
    MaxwellMatrix out;
    const size_t ground_root = merger.find(idx(net.ground_id()));
    std::map<size_t, int> row_of_root;
    for (const auto& [id, i] : index) {
        const size_t root = merger.find(i);
        if (root == ground_root) {
            out.row_of_node[id] = -1;
            continue;
        }
        auto [it, inserted] = row_of_root.try_emplace(root, static_cast<int>(row_of_root.size()));
        out.row_of_node[id] = it->second;
    }

    const auto n = static_cast<Eigen::Index>(row_of_root.size());
    out.c = Eigen::MatrixXd::Zero(n, n);
    for (const Capacitor& cap : all_caps) {
        const int a = out.row_of_node.at(cap.node_a);
        const int b = out.row_of_node.at(cap.node_b);
        if (a == b) continue;  // shorted by a bump
        if (a >= 0) out.c(a, a) += cap.farads;
        if (b >= 0) out.c(b, b) += cap.farads;
        if (a >= 0 && b >= 0) {
            out.c(a, b) -= cap.farads;
            out.c(b, a) -= cap.farads;
        }
    }

    if (n == 0 || Eigen::LLT<Eigen::MatrixXd>(out.c).info() != Eigen::Success) {
        fail(ErrorCode::NonPositiveDefinite,
             "Maxwell capacitance matrix is not positive definite (floating or disconnected node?)");
    }
    return out;
}

Eigen::Index ElementEnergies::index(const std::string& label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    require(it != labels.end(), "no element '" + label + "'");
    return std::distance(labels.begin(), it);
}

double ElementEnergies::charging(const std::string& label) const {
    return charging_hz(index(label));
}

double ElementEnergies::coupling(const std::string& a, const std::string& b) const {
    return coupling_hz(index(a), index(b));
}

ElementEnergies reduce_to_energies(const MaxwellMatrix& cm,
                                   std::span<const ElementDecl> elements) {
    const Eigen::Index n = cm.size();
    require(n > 0, "empty Maxwell matrix");
    Eigen::LLT<Eigen::MatrixXd> llt(cm.c);
    if (llt.info() != Eigen::Success) {
        fail(ErrorCode::NonPositiveDefinite, "Maxwell matrix is not positive definite");
    }

    // Columns of s express node coordinates in terms of mode coordinates:
    // element modes first, then floating-element sum modes, then passive nodes.
    std::vector<Eigen::VectorXd> mode_cols;
    std::vector<Eigen::VectorXd> spare_cols;
    std::vector<bool> used(static_cast<size_t>(n), false);
    auto claim = [&](int row, const std::string& label) {
        if (used[static_cast<size_t>(row)]) {
            fail(ErrorCode::SingularTransform,
                 "element '" + label + "' shares a (possibly merged) pad with another element");
        }
        used[static_cast<size_t>(row)] = true;
    };
    auto unit = [&](int row) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        v(row) = 1.0;
        return v;
    };

    for (const ElementDecl& e : elements) {
        if (e.pads.size() == 1) {
            const int a = cm.row(e.pads[0]);
            if (a < 0) fail(ErrorCode::SingularTransform, "pad of '" + e.label + "' is grounded");
            claim(a, e.label);
            mode_cols.push_back(unit(a));
        } else if (e.pads.size() == 2) {
            const int a = cm.row(e.pads[0]);
            const int b = cm.row(e.pads[1]);
            if (a == b) {
                fail(ErrorCode::SingularTransform, "pads of '" + e.label + "' are shorted together");
            }
            if (b < 0) {
                claim(a, e.label);
                mode_cols.push_back(unit(a));
            } else if (a < 0) {
                claim(b, e.label);
                mode_cols.push_back(-unit(b));
            } else {
                claim(a, e.label);
                claim(b, e.label);
                mode_cols.push_back(0.5 * (unit(a) - unit(b)));
                spare_cols.push_back(unit(a) + unit(b));
            }
        } else {
            fail(ErrorCode::InvalidInput, "element '" + e.label + "' must have one or two pads");
        }
    }
    for (Eigen::Index r = 0; r < n; ++r) {
        if (!used[static_cast<size_t>(r)]) spare_cols.push_back(unit(static_cast<int>(r)));
    }

    const auto modes = static_cast<Eigen::Index>(mode_cols.size());
    Eigen::MatrixXd s(n, modes + static_cast<Eigen::Index>(spare_cols.size()));
    for (Eigen::Index k = 0; k < modes; ++k) s.col(k) = mode_cols[static_cast<size_t>(k)];
    for (size_t k = 0; k < spare_cols.size(); ++k) s.col(modes + static_cast<Eigen::Index>(k)) = spare_cols[k];
    if (s.cols() != n || Eigen::FullPivLU<Eigen::MatrixXd>(s).rank() != n) {
        fail(ErrorCode::SingularTransform, "mode transformation is rank deficient");
    }

    // Inverse capacitance in mode coordinates; zero-charge modes are dropped
    // by keeping only the element block.
    const Eigen::MatrixXd c_modes = s.transpose() * cm.c * s;
    const Eigen::MatrixXd inv = c_modes.llt().solve(Eigen::MatrixXd::Identity(n, n));
    const double e2_over_h = units::elementary_charge * units::elementary_charge / units::planck;

    ElementEnergies out;
    for (const ElementDecl& e : elements) out.labels.push_back(e.label);
    out.charging_hz = 0.5 * e2_over_h * inv.diagonal().head(modes);
    out.coupling_hz = e2_over_h * inv.topLeftCorner(modes, modes);
    out.coupling_hz.diagonal().setZero();
    return out;
}

CouplerModel model_from_energies(const CapNetwork& net, const ElementEnergies& energies) {
    const ElementDecl& d1 = net.element(ElementRole::Qubit1);
    const ElementDecl& d2 = net.element(ElementRole::Qubit2);
    const ElementDecl& dc = net.element(ElementRole::Coupler);

    CouplerModel m;
    m.q1 = {d1.e_j_hz, energies.charging(d1.label), d1.label, std::nullopt};
    m.q2 = {d2.e_j_hz, energies.charging(d2.label), d2.label, std::nullopt};
    m.coupler.e_jc_hz = dc.e_j_hz;
    m.coupler.r = dc.asymmetry_r;
    m.coupler.e_cc_hz = energies.charging(dc.label);

    const TransmonParams c = coupler_as_transmon(m.coupler);
    m.couplings.g12_hz = coupling_from_energy(energies.coupling(d1.label, d2.label), m.q1, m.q2);
    m.couplings.g1c_hz = coupling_from_energy(energies.coupling(d1.label, dc.label), m.q1, c);
    m.couplings.g2c_hz = coupling_from_energy(energies.coupling(d2.label, dc.label), m.q2, c);
    m.coupler.config = m.couplings.g1c_hz * m.couplings.g2c_hz < 0.0 ? PadConfig::Asymmetric
                                                                     : PadConfig::Symmetric;
    return m;
}

std::vector<InterChipConnection> apply_design(std::span<const InterChipConnection> sites,
                                              Design design) {
    std::vector<InterChipConnection> out(sites.begin(), sites.end());
    for (size_t i = 0; i < out.size(); ++i) {
        switch (design) {
            case Design::PaddlePaddle: out[i].kind = ConnectionKind::Paddle; break;
            case Design::BumpBump: out[i].kind = ConnectionKind::Bump; break;
            case Design::BumpPaddle:
                out[i].kind = i == 0 ? ConnectionKind::Bump : ConnectionKind::Paddle;
                break;
        }
    }
    return out;
}

std::vector<SensitivityRow> sensitivity_sweep(const CapNetwork& net,
                                              std::span<const InterChipConnection> sites,
                                              Design design, std::span<const double> heights_m,
                                              const SweepOptions& opts) {
    require(!heights_m.empty(), "sensitivity sweep needs at least one height");
    require(opts.flux_points >= 2, "sensitivity sweep needs at least two flux points");
    for (double h : heights_m) require(std::isfinite(h) && h > 0.0, "bump heights must be > 0");
    const std::vector<InterChipConnection> conns = apply_design(sites, design);

    std::vector<SensitivityRow> rows;
    rows.reserve(heights_m.size());
    for (double h : heights_m) {
        const MaxwellMatrix cm = build_matrix(net, conns, h);
        const ElementEnergies energies = reduce_to_energies(cm, net.elements);
        const CouplerModel model = model_from_energies(net, energies);

        SensitivityRow row;
        row.height_m = h;
        row.g12_hz = model.couplings.g12_hz;
        row.g1c_hz = model.couplings.g1c_hz;
        row.g2c_hz = model.couplings.g2c_hz;

        const int n = opts.flux_points;
        std::vector<double> phis(static_cast<size_t>(n)), gs(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            phis[static_cast<size_t>(i)] = 0.5 * i / (n - 1);
            gs[static_cast<size_t>(i)] = net_coupling(model, FluxBias{phis[static_cast<size_t>(i)]});
            row.max_abs_g_hz = std::max(row.max_abs_g_hz, std::abs(gs[static_cast<size_t>(i)]));
        }
        for (size_t i = 0; i + 1 < phis.size(); ++i) {
            if (gs[i] == 0.0) {
                row.phi_zero = phis[i];
                break;
            }
            if (std::signbit(gs[i]) != std::signbit(gs[i + 1])) {
                row.phi_zero = find_zero_coupling(model, phis[i], phis[i + 1], opts.zero).phi;
                break;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace mcoupler::capnet
