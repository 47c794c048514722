#include "mcoupler/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "mcoupler/error.hpp"

namespace mcoupler::fit {

void GCurve::validate() const {
    require(!points.empty(), "g curve is empty");
    const bool any_sigma = std::any_of(points.begin(), points.end(),
                                       [](const GPoint& p) { return p.sigma_hz.has_value(); });
    for (const GPoint& p : points) {
        require(std::isfinite(p.phi) && std::isfinite(p.g_hz), "g curve values must be finite");
        if (any_sigma) {
            require(p.sigma_hz.has_value(), "either all or no g curve points carry sigma");
            require(std::isfinite(*p.sigma_hz) && *p.sigma_hz > 0.0, "sigma must be > 0");
        }
    }
}

bool GCurve::weighted() const { return !points.empty() && points.front().sigma_hz.has_value(); }

void T1Curve::validate() const {
    require(!points.empty(), "T1 curve is empty");
    require(std::isfinite(omega_r_hz) && omega_r_hz > 0.0, "omega_r must be > 0");
    require(std::isfinite(kappa_r_hz) && kappa_r_hz > 0.0, "kappa_r must be > 0");
    for (const T1Point& p : points) {
        require(std::isfinite(p.omega_c_hz) && std::isfinite(p.t1_s), "T1 values must be finite");
        require(p.t1_s > 0.0, "T1 must be > 0");
        require(p.omega_c_hz != omega_r_hz, "coupler frequency equals the resonator frequency");
    }
}

CouplerModel gcurve_model(double g12_abs_hz, double g_product_hz, double e_jc_hz, double r,
                          double fixed_ecc_hz, std::pair<double, double> qubit_freqs_hz,
                          PadConfig config) {
    // Nominal charging energy; only the frequencies enter the net coupling.
    constexpr double kNominalEc = 200e6;
    CouplerModel m;
    m.q1 = TransmonParams::from_frequency(qubit_freqs_hz.first, kNominalEc, "q1");
    m.q2 = TransmonParams::from_frequency(qubit_freqs_hz.second, kNominalEc, "q2");
    m.coupler = {e_jc_hz, r, fixed_ecc_hz, config};
    m.couplings.g12_hz = -g12_abs_hz;
    m.couplings.g1c_hz = g_product_hz;
    m.couplings.g2c_hz = config == PadConfig::Asymmetric ? -g_product_hz : g_product_hz;
    return m;
}

namespace {

struct GridStart {
    double cost;
    Eigen::Vector4d x;
};

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : double(i) / double(n - 1);
        out[static_cast<size_t>(i)] = lo * std::pow(hi / lo, t);
    }
    return out;
}

// For fixed (E_Jc, r) the model g = -a - b v(phi) is linear in a = |g12| and
// b = G^2, so each grid point gets its best (a, b) by weighted least squares.
std::optional<GridStart> grid_point(const GCurve& data, const Eigen::VectorXd& w, double e_jc,
                                    double r, double ecc, std::pair<double, double> freqs) {
    const CouplerModel unit = gcurve_model(0.0, 1.0, e_jc, r, ecc, freqs, data.config);
    const auto n = static_cast<Eigen::Index>(data.points.size());
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd y(n);
    try {
        for (Eigen::Index i = 0; i < n; ++i) {
            const GPoint& p = data.points[static_cast<size_t>(i)];
            design(i, 0) = -w(i);
            design(i, 1) = -w(i) * mediated_coupling(unit, FluxBias{p.phi});
            y(i) = w(i) * p.g_hz;
        }
    } catch (const Error&) {
        return std::nullopt;
    }

    auto evaluate = [&](double a, double b) -> std::optional<GridStart> {
        if (!(a >= 0.0) || !(b > 0.0)) return std::nullopt;
        const double cost = 0.5 * (design * Eigen::Vector2d(a, b) - y).squaredNorm();
        return GridStart{cost, Eigen::Vector4d(a, std::sqrt(b), e_jc, r)};
    };
    const Eigen::Vector2d ab = design.colPivHouseholderQr().solve(y);
    if (auto s = evaluate(ab(0), ab(1))) return s;
    // |g12| pinned at zero.
    const double b = design.col(1).dot(y) / design.col(1).squaredNorm();
    return evaluate(0.0, b);
}

void flip_asymmetry(FitReport& report, Eigen::Index index) {
    FitParam& p = report.params[static_cast<size_t>(index)];
    const double r = p.value;
    p.value = 1.0 / r;
    p.standard_error = p.standard_error / (r * r);
    // d(1/r)/dr = -1/r^2
    const double d = -1.0 / (r * r);
    report.covariance.row(index) *= d;
    report.covariance.col(index) *= d;
}

}  // namespace

FitReport fit_gcurve(const GCurve& data, double fixed_ecc_hz,
                     std::pair<double, double> qubit_freqs_hz, const GFitOptions& opts) {
    data.validate();
    require(data.points.size() >= 4, "g curve fit needs at least 4 points");
    require(std::isfinite(fixed_ecc_hz) && fixed_ecc_hz > 0.0, "fixed E_Cc must be > 0");
    require(qubit_freqs_hz.first > 0.0 && qubit_freqs_hz.second > 0.0,
            "qubit frequencies must be > 0");
    require(opts.e_jc_grid >= 1 && opts.r_grid >= 1 && opts.refine_starts >= 1,
            "grid sizes must be positive");
    require(opts.r_min > 0.0 && opts.r_min <= 1.0, "r grid minimum must be in (0, 1]");

    const auto n = static_cast<Eigen::Index>(data.points.size());
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = data.points[static_cast<size_t>(i)].sigma_hz;
        w(i) = s ? 1.0 / *s : 1.0;
    }

    std::vector<GridStart> starts;
    // r and 1/r are equivalent, so the grid covers r <= 1 only.
    for (double e_jc : log_grid(opts.e_jc_min_hz, opts.e_jc_max_hz, opts.e_jc_grid)) {
        for (double r : log_grid(opts.r_min, 1.0, opts.r_grid)) {
            if (auto s = grid_point(data, w, e_jc, r, fixed_ecc_hz, qubit_freqs_hz)) {
                starts.push_back(*s);
            }
        }
    }
    if (starts.empty()) {
        fail(ErrorCode::InvalidInput,
             "no initial grid point gives a valid dispersive model for this curve");
    }
    std::stable_sort(starts.begin(), starts.end(),
                     [](const GridStart& a, const GridStart& b) { return a.cost < b.cost; });
    starts.resize(std::min(starts.size(), static_cast<size_t>(opts.refine_starts)));

    NlsProblem problem;
    problem.names = {kG12Abs, kGProduct, kEJc, kAsymmetry};
    problem.residuals = [&](const Eigen::VectorXd& x) {
        const CouplerModel m =
            gcurve_model(x(0), x(1), x(2), x(3), fixed_ecc_hz, qubit_freqs_hz, data.config);
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const GPoint& p = data.points[static_cast<size_t>(i)];
            r(i) = w(i) * (net_coupling(m, FluxBias{p.phi}) - p.g_hz);
        }
        return r;
    };
    const double inf = std::numeric_limits<double>::infinity();
    Bounds bounds{Eigen::Vector4d(0.0, 0.0, 1e8, 1e-3), Eigen::Vector4d(inf, inf, 1e13, 1e3)};

    std::optional<FitReport> best;
    std::optional<Error> last_error;
    for (const GridStart& s : starts) {
        problem.typical = {std::max(s.x(0), 0.01 * s.x(1)), s.x(1), s.x(2), 1.0};
        try {
            FitReport r = nls_fit(problem, s.x, bounds, opts.nls);
            if (!best || r.cost < best->cost) best = std::move(r);
        } catch (const Error& e) {
            last_error = e;
        }
    }
    if (!best) throw *last_error;

    FitReport report = std::move(*best);
    const double r = report.value(kAsymmetry);
    if ((opts.r_convention == AsymmetryConvention::AtMostOne && r > 1.0) ||
        (opts.r_convention == AsymmetryConvention::AtLeastOne && r < 1.0)) {
        flip_asymmetry(report, 3);
    }
    report.notes.push_back(
        "r and 1/r give identical E_Jeff(phi); the reported branch follows the requested "
        "convention");
    report.fixed_params = {{"e_cc_hz", fixed_ecc_hz},
                           {"omega1_hz", qubit_freqs_hz.first},
                           {"omega2_hz", qubit_freqs_hz.second}};
    if (report.correlation_condition > opts.unidentifiable_condition) {
        std::ostringstream os;
        os << "Unidentifiable: parameter correlation condition number "
           << report.correlation_condition << " exceeds " << opts.unidentifiable_condition;
        report.warnings.push_back(os.str());
    }
    return report;
}

FitReport fit_purcell(const T1Curve& data, const NlsOptions& opts) {
    data.validate();
    const PurcellParams fixed{data.omega_r_hz, data.kappa_r_hz, 1.0};

    // Single-point inversion g = |w_c - w_r| / sqrt(2 pi kappa T1) (Hz units);
    // the median over points seeds the fit.
    std::vector<double> guesses;
    for (const T1Point& p : data.points) {
        const double unit_t1 = purcell_t1(fixed, p.omega_c_hz);  // T1 at g_rc = 1 Hz
        guesses.push_back(std::sqrt(unit_t1 / p.t1_s));
    }
    std::nth_element(guesses.begin(), guesses.begin() + long(guesses.size() / 2), guesses.end());
    const double init = guesses[guesses.size() / 2];

    NlsProblem problem;
    problem.names = {kGrc};
    problem.typical = {init};
    problem.residuals = [&](const Eigen::VectorXd& x) {
        PurcellParams p = fixed;
        p.g_rc_hz = x(0);
        Eigen::VectorXd r(static_cast<Eigen::Index>(data.points.size()));
        for (size_t i = 0; i < data.points.size(); ++i) {
            r(static_cast<Eigen::Index>(i)) = purcell_t1(p, data.points[i].omega_c_hz) - data.points[i].t1_s;
        }
        return r;
    };
    Bounds bounds{Eigen::VectorXd::Constant(1, 0.0),
                  Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity())};
    FitReport report = nls_fit(problem, Eigen::VectorXd::Constant(1, init), bounds, opts);
    report.fixed_params = {{"omega_r_hz", data.omega_r_hz}, {"kappa_r_hz", data.kappa_r_hz}};
    if (data.points.size() < 3) {
        report.warnings.push_back("fewer than 3 T1 points; g_rc is poorly constrained");
    }
    return report;
}

GCurve simulate_gcurve(const CouplerModel& model, std::span<const double> phis, double sigma_hz,
                       std::uint64_t seed, bool record_sigma) {
    require(!phis.empty(), "need at least one flux point");
    require(std::isfinite(sigma_hz) && sigma_hz >= 0.0, "noise sigma must be >= 0");
    require(!record_sigma || sigma_hz > 0.0, "recorded sigma must be > 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    GCurve out;
    out.config = model.coupler.config;
    for (double phi : phis) {
        GPoint p{phi, net_coupling(model, FluxBias{phi}) + sigma_hz * noise(rng), std::nullopt};
        if (record_sigma) p.sigma_hz = sigma_hz;
        out.points.push_back(p);
    }
    out.validate();
    return out;
}

T1Curve simulate_t1(const PurcellParams& purcell, std::span<const double> omega_c_hz,
                    double rel_noise, std::uint64_t seed) {
    purcell.validate();
    require(!omega_c_hz.empty(), "need at least one coupler frequency");
    require(std::isfinite(rel_noise) && rel_noise >= 0.0 && rel_noise < 0.3,
            "relative T1 noise must be in [0, 0.3)");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    T1Curve out;
    out.omega_r_hz = purcell.omega_r_hz;
    out.kappa_r_hz = purcell.kappa_r_hz;
    for (double w : omega_c_hz) {
        out.points.push_back({w, purcell_t1(purcell, w) * (1.0 + rel_noise * noise(rng))});
    }
    out.validate();
    return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
    require(n >= 1, "need at least one point");
    if (n == 1) return {lo};
    std::vector<double> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return v;
}

}  // namespace mcoupler::fit
