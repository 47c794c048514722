#include "mcoupler/nls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "mcoupler/error.hpp"

namespace mcoupler::fit {

const FitParam& FitReport::param(const std::string& name) const {
    for (const FitParam& p : params) {
        if (p.name == name) return p;
    }
    fail(ErrorCode::InvalidInput, "fit report has no parameter '" + name + "'");
}

Bounds Bounds::unbounded(Eigen::Index n) {
    const double inf = std::numeric_limits<double>::infinity();
    return {Eigen::VectorXd::Constant(n, -inf), Eigen::VectorXd::Constant(n, inf)};
}

namespace {

class Evaluator {
public:
    Evaluator(const NlsProblem& problem, const Bounds& bounds, Eigen::VectorXd typical)
        : problem_(problem), bounds_(bounds), typical_(std::move(typical)) {}

    Eigen::VectorXd residuals(const Eigen::VectorXd& x) const { return problem_.residuals(x); }

    std::optional<Eigen::VectorXd> try_residuals(const Eigen::VectorXd& x) const {
        try {
            Eigen::VectorXd r = problem_.residuals(x);
            if (!r.allFinite()) return std::nullopt;
            return r;
        } catch (const Error&) {
            return std::nullopt;
        }
    }

    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& r0) const {
        if (problem_.jacobian) return problem_.jacobian(x);
        const Eigen::Index p = x.size();
        Eigen::MatrixXd j(r0.size(), p);
        for (Eigen::Index i = 0; i < p; ++i) {
            const double h = 1e-6 * std::max(std::abs(x(i)), typical_(i));
            const bool room_up = x(i) + h <= bounds_.upper(i);
            const bool room_down = x(i) - h >= bounds_.lower(i);
            Eigen::VectorXd xp = x, xm = x;
            xp(i) += h;
            xm(i) -= h;
            std::optional<Eigen::VectorXd> up = room_up ? try_residuals(xp) : std::nullopt;
            std::optional<Eigen::VectorXd> down = room_down ? try_residuals(xm) : std::nullopt;
            if (up && down) {
                j.col(i) = (*up - *down) / (2.0 * h);
            } else if (up) {
                j.col(i) = (*up - r0) / h;
            } else if (down) {
                j.col(i) = (r0 - *down) / h;
            } else {
                fail(ErrorCode::SingularJacobian,
                     "cannot evaluate the model around parameter '" + problem_.names[size_t(i)] + "'");
            }
        }
        return j;
    }

    Eigen::VectorXd clamp(const Eigen::VectorXd& x) const {
        return x.cwiseMax(bounds_.lower).cwiseMin(bounds_.upper);
    }

    double relative_step(const Eigen::VectorXd& step, const Eigen::VectorXd& x) const {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            worst = std::max(worst, std::abs(step(i)) / std::max(std::abs(x(i)), typical_(i)));
        }
        return worst;
    }

private:
    const NlsProblem& problem_;
    const Bounds& bounds_;
    Eigen::VectorXd typical_;
};

}  // namespace

FitReport nls_fit(const NlsProblem& problem, const Eigen::VectorXd& init, const Bounds& bounds,
                  const NlsOptions& options) {
    const Eigen::Index p = init.size();
    require(p > 0, "nls_fit needs at least one parameter");
    require(problem.residuals != nullptr, "nls_fit needs a residual function");
    require(static_cast<Eigen::Index>(problem.names.size()) == p, "one name per parameter required");
    require(bounds.lower.size() == p && bounds.upper.size() == p, "bounds size mismatch");
    require(problem.typical.empty() || static_cast<Eigen::Index>(problem.typical.size()) == p,
            "typical scale size mismatch");
    require(options.max_iterations > 0, "max_iterations must be > 0");
    for (Eigen::Index i = 0; i < p; ++i) {
        if (!(init(i) >= bounds.lower(i) && init(i) <= bounds.upper(i))) {
            std::ostringstream os;
            os << "initial " << problem.names[size_t(i)] << " = " << init(i) << " outside ["
               << bounds.lower(i) << ", " << bounds.upper(i) << "]";
            fail(ErrorCode::InitOutOfBounds, os.str());
        }
    }

    Eigen::VectorXd typical(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double t = problem.typical.empty() ? std::abs(init(i)) : problem.typical[size_t(i)];
        typical(i) = t > 0.0 ? t : 1.0;
    }
    Evaluator eval(problem, bounds, typical);

    Eigen::VectorXd x = init;
    Eigen::VectorXd r = eval.residuals(x);
    const Eigen::Index n = r.size();
    if (n < p) {
        fail(ErrorCode::InvalidInput, "fewer data points (" + std::to_string(n) +
                                          ") than free parameters (" + std::to_string(p) + ")");
    }
    require(r.allFinite(), "model is not finite at the initial parameters");

    double cost = 0.5 * r.squaredNorm();
    double lambda = options.initial_lambda;
    double nu = 2.0;
    Eigen::VectorXd scale = Eigen::VectorXd::Zero(p);
    bool converged = cost == 0.0;
    int iterations = 0;

    while (!converged && iterations < options.max_iterations) {
        ++iterations;
        const Eigen::MatrixXd j = eval.jacobian(x, r);
        const Eigen::MatrixXd a = j.transpose() * j;
        const Eigen::VectorXd grad = j.transpose() * r;
        scale = scale.cwiseMax(a.diagonal());
        Eigen::VectorXd damping = scale;
        for (Eigen::Index i = 0; i < p; ++i) {
            if (!(damping(i) > 0.0)) damping(i) = 1.0;
        }

        // Coordinates resting on a bound with the descent direction pointing
        // outward are held fixed so the step for the others stays exact.
        std::vector<bool> active(size_t(p), false);
        for (Eigen::Index i = 0; i < p; ++i) {
            active[size_t(i)] = (x(i) <= bounds.lower(i) && grad(i) > 0.0) ||
                                (x(i) >= bounds.upper(i) && grad(i) < 0.0);
        }

        while (true) {
            Eigen::MatrixXd damped = a;
            damped.diagonal() += lambda * damping;
            Eigen::VectorXd rhs = -grad;
            for (Eigen::Index i = 0; i < p; ++i) {
                if (!active[size_t(i)]) continue;
                damped.row(i).setZero();
                damped.col(i).setZero();
                damped(i, i) = 1.0;
                rhs(i) = 0.0;
            }
            const Eigen::VectorXd delta = damped.ldlt().solve(rhs);
            const Eigen::VectorXd trial = eval.clamp(x + delta);
            const Eigen::VectorXd step = trial - x;
            const double rel_step = eval.relative_step(step, x);
            const std::optional<Eigen::VectorXd> r_trial = eval.try_residuals(trial);
            const double trial_cost =
                r_trial ? 0.5 * r_trial->squaredNorm() : std::numeric_limits<double>::infinity();

            if (trial_cost < cost) {
                const double predicted = -(grad.dot(step) + 0.5 * step.dot(a * step));
                const double actual = cost - trial_cost;
                const double rho = predicted > 0.0 ? actual / predicted : 0.0;
                lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
                nu = 2.0;
                const double previous = cost;
                x = trial;
                r = *r_trial;
                cost = trial_cost;
                converged = cost == 0.0 || rel_step <= options.x_tol ||
                            actual <= options.f_tol * previous;
                break;
            }
            // Nothing left to gain: the optimum is resolved to x_tol.
            if (rel_step <= options.x_tol) {
                converged = true;
                break;
            }
            lambda *= nu;
            nu *= 2.0;
            if (!std::isfinite(lambda)) {
                converged = true;
                break;
            }
        }
    }

    if (!converged) {
        fail(ErrorCode::MaxIterations,
             "no convergence after " + std::to_string(options.max_iterations) + " iterations");
    }

    FitReport report;
    report.iterations = iterations;
    report.converged = true;
    report.cost = cost;
    report.data_points = static_cast<int>(n);
    report.residual_rms = std::sqrt(2.0 * cost / static_cast<double>(n));

    // Covariance from column-scaled Jacobian to keep the rank test unit free.
    const Eigen::MatrixXd j = eval.jacobian(x, r);
    Eigen::VectorXd col_norm = j.colwise().norm().transpose();
    for (Eigen::Index i = 0; i < p; ++i) {
        if (!(col_norm(i) > 0.0)) {
            fail(ErrorCode::SingularJacobian,
                 "model does not depend on parameter '" + problem.names[size_t(i)] + "'");
        }
    }
    const Eigen::MatrixXd js = j * col_norm.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(js);
    qr.setThreshold(1e-13);
    if (qr.rank() < p) {
        fail(ErrorCode::SingularJacobian, "Jacobian is rank deficient at the optimum");
    }
    const Eigen::MatrixXd inv_scaled =
        (js.transpose() * js).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd inv =
        col_norm.cwiseInverse().asDiagonal() * inv_scaled * col_norm.cwiseInverse().asDiagonal();
    const Eigen::Index dof = n - p;
    double variance = 0.0;
    if (dof > 0) {
        variance = 2.0 * cost / static_cast<double>(dof);
    } else {
        report.warnings.push_back("no residual degrees of freedom; standard errors set to zero");
    }
    report.covariance = variance * inv;
    report.correlation_condition = correlation_condition(inv);
    for (Eigen::Index i = 0; i < p; ++i) {
        report.params.push_back({problem.names[size_t(i)], x(i),
                                 std::sqrt(std::max(report.covariance(i, i), 0.0))});
    }
    return report;
}

double correlation_condition(const Eigen::MatrixXd& covariance) {
    const Eigen::Index p = covariance.rows();
    if (p == 0) return 1.0;
    Eigen::VectorXd inv_sd(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double v = covariance(i, i);
        if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
        inv_sd(i) = 1.0 / std::sqrt(v);
    }
    const Eigen::MatrixXd corr = inv_sd.asDiagonal() * covariance * inv_sd.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr, Eigen::EigenvaluesOnly);
    const double lo = solver.eigenvalues().minCoeff();
    const double hi = solver.eigenvalues().maxCoeff();
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

}  // namespace mcoupler::fit
