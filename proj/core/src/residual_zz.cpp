#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "mcoupler/circuit.hpp"
#include "mcoupler/error.hpp"

namespace mcoupler {

namespace {

// Mode order: qubit 1, coupler, qubit 2.
using Occupation = std::array<int, 3>;

struct Mode {
    double detuning_hz;      // frequency relative to qubit 1 (rotating frame)
    double anharmonicity_hz; // -E_C
};

// The exchange Hamiltonian conserves the total excitation number, so each
// excitation sector is diagonalized on its own.
struct Sector {
    std::vector<Occupation> states;
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;
};

Sector diagonalize_sector(int excitations, int levels, const std::array<Mode, 3>& modes,
                          const std::array<std::array<double, 3>, 3>& g) {
    Sector s;
    for (int a = 0; a < levels; ++a) {
        for (int b = 0; b < levels; ++b) {
            const int c = excitations - a - b;
            if (c >= 0 && c < levels) s.states.push_back({a, b, c});
        }
    }
    const auto n = static_cast<Eigen::Index>(s.states.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Occupation& occ = s.states[static_cast<size_t>(i)];
        double e = 0.0;
        for (int k = 0; k < 3; ++k) {
            e += occ[k] * modes[k].detuning_hz +
                 0.5 * modes[k].anharmonicity_hz * occ[k] * (occ[k] - 1);
        }
        h(i, i) = e;
    }
    // g_ij (a_i^dag a_j + h.c.): move one quantum from mode j to mode i.
    for (Eigen::Index col = 0; col < n; ++col) {
        const Occupation& from = s.states[static_cast<size_t>(col)];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                if (i == j || g[i][j] == 0.0 || from[j] == 0 || from[i] + 1 >= levels) continue;
                Occupation to = from;
                to[i] += 1;
                to[j] -= 1;
                for (Eigen::Index row = 0; row < n; ++row) {
                    if (s.states[static_cast<size_t>(row)] == to) {
                        h(row, col) += g[i][j] * std::sqrt(double(from[j]) * double(to[i]));
                    }
                }
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    s.energies = solver.eigenvalues();
    s.vectors = solver.eigenvectors();
    return s;
}

double dressed_energy(const Sector& s, const Occupation& bare, double min_overlap) {
    Eigen::Index bare_row = -1;
    for (size_t i = 0; i < s.states.size(); ++i) {
        if (s.states[i] == bare) bare_row = static_cast<Eigen::Index>(i);
    }
    if (bare_row < 0) {
        fail(ErrorCode::InvalidInput, "bare state is outside the truncated space");
    }
    Eigen::Index best = 0;
    double best_overlap = -1.0;
    for (Eigen::Index k = 0; k < s.vectors.cols(); ++k) {
        const double ov = s.vectors(bare_row, k) * s.vectors(bare_row, k);
        if (ov > best_overlap) {
            best_overlap = ov;
            best = k;
        }
    }
    if (!(best_overlap > min_overlap)) {
        std::ostringstream os;
        os << "bare state |" << bare[0] << bare[1] << bare[2]
           << "> has maximum squared overlap " << best_overlap << " <= " << min_overlap;
        fail(ErrorCode::LabelAmbiguous, os.str());
    }
    return s.energies(best);
}

double zz_at_truncation(const CouplerModel& m, FluxBias f, int levels, const ZzOptions& opts) {
    const double w1 = qubit_frequency(m.q1);
    const double w2 = qubit_frequency(m.q2);
    const double wc = coupler_frequency(m.coupler, f);
    const std::array<Mode, 3> modes{{
        {0.0, -m.q1.e_c_hz},
        {wc - w1, -m.coupler.e_cc_hz},
        {w2 - w1, -m.q2.e_c_hz},
    }};
    const CouplingSet cs = couplings_at(m, f);
    std::array<std::array<double, 3>, 3> g{};
    g[0][1] = g[1][0] = cs.g1c_hz;
    g[1][2] = g[2][1] = cs.g2c_hz;
    g[0][2] = g[2][0] = cs.g12_hz;

    const Sector one = diagonalize_sector(1, levels, modes, g);
    const Sector two = diagonalize_sector(2, levels, modes, g);
    // The vacuum is an exact eigenstate with zero energy in this frame.
    const double e10 = dressed_energy(one, {1, 0, 0}, opts.min_label_overlap);
    const double e01 = dressed_energy(one, {0, 0, 1}, opts.min_label_overlap);
    const double e11 = dressed_energy(two, {1, 0, 1}, opts.min_label_overlap);
    return e11 - e10 - e01;
}

}  // namespace

double residual_zz(const CouplerModel& m, FluxBias f, int levels_per_mode, const ZzOptions& opts) {
    require(levels_per_mode >= 3, "residual_zz needs at least 3 levels per mode");
    m.validate();
    const double zeta = zz_at_truncation(m, f, levels_per_mode, opts);
    const double refined = zz_at_truncation(m, f, 2 * levels_per_mode, opts);
    if (std::abs(zeta - refined) > opts.convergence_rtol * std::abs(refined)) {
        std::ostringstream os;
        os << "ZZ changes from " << zeta << " Hz to " << refined << " Hz when levels go from "
           << levels_per_mode << " to " << 2 * levels_per_mode;
        fail(ErrorCode::TruncationUnconverged, os.str());
    }
    return zeta;
}

}  // namespace mcoupler
