#include "mcoupler/gate_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "mcoupler/error.hpp"

namespace mcoupler::metrics {

namespace {

bool positive(double x) { return x > 0.0 && !std::isnan(x); }

}  // namespace

std::vector<std::string> CoherenceSet::validate() const {
    const std::pair<const char*, double> fields[] = {
        {"t1_q1", t1_q1_s},         {"t2s_q1", t2s_q1_s},         {"t1_q2", t1_q2_s},
        {"t2s_q2", t2s_q2_s},       {"t1_q2_mod", t1_q2_mod_s},   {"t2s_q2_mod", t2s_q2_mod_s},
    };
    for (const auto& [name, value] : fields) {
        require(positive(value), std::string("coherence time ") + name + " must be > 0");
    }
    std::vector<std::string> warnings;
    auto check = [&](const char* which, double t1, double t2s) {
        if (t2s > 2.0 * t1) {
            warnings.push_back(std::string(which) + ": T2* exceeds 2 T1");
        }
    };
    check("q1", t1_q1_s, t2s_q1_s);
    check("q2", t1_q2_s, t2s_q2_s);
    check("q2 (modulated)", t1_q2_mod_s, t2s_q2_mod_s);
    return warnings;
}

void GateTiming::validate() const {
    require(std::isfinite(t_flat_s) && t_flat_s >= 0.0, "t_flat must be >= 0");
    require(std::isfinite(t_pad_s) && t_pad_s >= 0.0, "t_pad must be >= 0");
}

double coherence_limited_fidelity(const CoherenceSet& c, const GateTiming& t) {
    c.validate();
    t.validate();
    const double pad_t1 = (1.0 / c.t1_q1_s + 1.0 / c.t1_q2_mod_s) * t.t_pad_s / 5.0;
    const double pad_t2 = 2.0 * (1.0 / c.t2s_q1_s + 1.0 / c.t2s_q2_mod_s) * t.t_pad_s / 5.0;
    const double flat_t1 = 19.0 * (1.0 / c.t1_q2_s + 1.0 / c.t1_q2_mod_s) * t.t_flat_s / 160.0;
    const double flat_t2 =
        (61.0 / (80.0 * c.t2s_q2_s) + 29.0 / (80.0 * c.t2s_q2_mod_s)) * t.t_flat_s;
    return 1.0 - pad_t1 - pad_t2 - flat_t1 - flat_t2;
}

double rb_decay(double m, double a, double b, double p) {
    require(p > 0.0 && p <= 1.0, "RB decay parameter must be in (0, 1]");
    return a * std::pow(p, m) + b;
}

double irb_gate_fidelity(double p_ref, double p_int, int d) {
    require(d >= 2, "dimension must be >= 2");
    require(p_ref > 0.0 && p_ref <= 1.0 && p_int > 0.0, "decay parameters must be in (0, 1]");
    if (p_int > p_ref) {
        std::ostringstream os;
        os << "interleaved decay " << p_int << " exceeds reference decay " << p_ref
           << " (negative gate error)";
        fail(ErrorCode::InvalidDecay, os.str());
    }
    return 1.0 - double(d - 1) / double(d) * (1.0 - p_int / p_ref);
}

void RbRun::validate() const {
    require(!points.empty(), "RB run is empty");
    for (size_t i = 0; i < points.size(); ++i) {
        const RbPoint& pt = points[i];
        require(pt.m >= 0, "sequence lengths must be >= 0");
        require(pt.survival >= 0.0 && pt.survival <= 1.0,
                "survival probability at m = " + std::to_string(pt.m) + " is outside [0, 1]");
        if (pt.sem) require(*pt.sem >= 0.0 && std::isfinite(*pt.sem), "sem must be >= 0");
        if (i > 0) {
            require(pt.m > points[i - 1].m, "sequence lengths must be strictly increasing");
        }
    }
}

RbFit fit_rb(const RbRun& run, const fit::NlsOptions& opts) {
    run.validate();
    require(run.points.size() >= 4, "RB fit needs at least 4 distinct sequence lengths");
    const auto n = static_cast<Eigen::Index>(run.points.size());
    const bool weighted = std::all_of(run.points.begin(), run.points.end(), [](const RbPoint& p) {
        return p.sem && *p.sem > 0.0;
    });
    Eigen::VectorXd m(n), y(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const RbPoint& pt = run.points[static_cast<size_t>(i)];
        m(i) = pt.m;
        y(i) = pt.survival;
        w(i) = weighted ? 1.0 / *pt.sem : 1.0;
    }

    // Seed: scan p, solving the linear (A, B) subproblem at each value.
    Eigen::Vector3d init(0.5, 0.5, 0.9);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 400; ++k) {
        const double p = 1.0 - std::pow(10.0, -5.0 + 4.7 * k / 400.0);
        Eigen::MatrixXd design(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            design(i, 0) = w(i) * std::pow(p, m(i));
            design(i, 1) = w(i);
        }
        const Eigen::Vector2d ab = design.colPivHouseholderQr().solve(w.cwiseProduct(y));
        const double a = std::clamp(ab(0), 0.0, 1.0);
        const double b = std::clamp(ab(1), 0.0, 1.0);
        const double cost = (design * Eigen::Vector2d(a, b) - w.cwiseProduct(y)).squaredNorm();
        if (cost < best) {
            best = cost;
            init = {a, b, p};
        }
    }

    fit::NlsProblem problem;
    problem.names = {"a", "b", "p"};
    problem.typical = {0.5, 0.5, 1.0};
    problem.residuals = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            r(i) = w(i) * (x(0) * std::pow(x(2), m(i)) + x(1) - y(i));
        }
        return r;
    };
    problem.jacobian = [&](const Eigen::VectorXd& x) {
        Eigen::MatrixXd j(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double pm = std::pow(x(2), m(i));
            j(i, 0) = w(i) * pm;
            j(i, 1) = w(i);
            j(i, 2) = m(i) > 0.0 ? w(i) * x(0) * m(i) * std::pow(x(2), m(i) - 1.0) : 0.0;
        }
        return j;
    };
    const fit::Bounds bounds{Eigen::Vector3d(0.0, 0.0, 0.0), Eigen::Vector3d(1.0, 1.0, 1.0)};

    RbFit out;
    out.report = fit::nls_fit(problem, init, bounds, opts);
    out.a = out.report.value("a");
    out.a_err = out.report.error("a");
    out.b = out.report.value("b");
    out.b_err = out.report.error("b");
    out.p = out.report.value("p");
    out.p_err = out.report.error("p");
    return out;
}

InterleavedResult analyze_interleaved(const RbRun& reference, const RbRun& interleaved, int d) {
    InterleavedResult out;
    out.reference = fit_rb(reference);
    out.interleaved = fit_rb(interleaved);
    const double pr = out.reference.p;
    const double pi = out.interleaved.p;
    out.fidelity = irb_gate_fidelity(pr, pi, d);
    const double k = double(d - 1) / double(d);
    const double d_int = k / pr;
    const double d_ref = -k * pi / (pr * pr);
    out.fidelity_err = std::hypot(d_int * out.interleaved.p_err, d_ref * out.reference.p_err);
    return out;
}

RbRun simulate_rb(const RbSynthesis& spec, std::uint64_t seed) {
    require(!spec.lengths.empty(), "RB synthesis needs sequence lengths");
    require(spec.shots > 0 && spec.randomizations > 1, "RB synthesis needs shots > 0 and >= 2 randomizations");
    std::mt19937_64 rng(seed);
    RbRun run;
    run.variant = spec.variant;
    for (int m : spec.lengths) {
        const double prob = std::clamp(rb_decay(m, spec.a, spec.b, spec.p), 0.0, 1.0);
        std::binomial_distribution<int> draw(spec.shots, prob);
        double sum = 0.0, sum_sq = 0.0;
        for (int k = 0; k < spec.randomizations; ++k) {
            const double s = double(draw(rng)) / spec.shots;
            sum += s;
            sum_sq += s * s;
        }
        const double r = spec.randomizations;
        const double mean = sum / r;
        const double var = std::max(0.0, (sum_sq - r * mean * mean) / (r - 1.0));
        run.points.push_back({m, mean, std::sqrt(var / r)});
    }
    run.validate();
    return run;
}

StabilityStats stability_stats(const std::vector<double>& values) {
    if (values.empty()) fail(ErrorCode::EmptyInput, "stability statistics need at least one value");
    for (double v : values) require(std::isfinite(v), "values must be finite");
    StabilityStats s;
    const double n = double(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / (n - 1.0));
    }
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    for (size_t k = 0; k < sorted.size(); ++k) {
        // Ties collapse onto the highest rank so the step function is right-continuous.
        if (k + 1 < sorted.size() && sorted[k + 1] == sorted[k]) continue;
        s.ecdf.emplace_back(sorted[k], double(k + 1) / n);
    }
    return s;
}

std::string format_percent(double mean, double stddev, int decimals) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(decimals) << 100.0 * mean << " ± " << 100.0 * stddev
       << "%";
    return os.str();
}

}  // namespace mcoupler::metrics
