#pragma once

// Bounded Levenberg-Marquardt least squares.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mcoupler::fit {

struct FitParam {
    std::string name;
    double value = 0.0;
    double standard_error = 0.0;
};

struct FitReport {
    std::vector<FitParam> params;
    Eigen::MatrixXd covariance;
    std::map<std::string, double> fixed_params;
    double residual_rms = 0.0;
    double cost = 0.0;  ///< half the weighted sum of squared residuals
    /// Condition number of the parameter correlation matrix (unit free).
    double correlation_condition = 1.0;
    int iterations = 0;
    int data_points = 0;
    bool converged = false;
    std::vector<std::string> warnings;
    std::vector<std::string> notes;

    const FitParam& param(const std::string& name) const;
    double value(const std::string& name) const { return param(name).value; }
    double error(const std::string& name) const { return param(name).standard_error; }
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct NlsProblem {
    /// Weighted residuals. May throw mcoupler::Error for infeasible
    /// parameters; such trial steps are rejected.
    ResidualFn residuals;
    /// Optional analytic Jacobian; central differences otherwise.
    JacobianFn jacobian;
    std::vector<std::string> names;
    /// Typical magnitude of each parameter, used for finite-difference
    /// steps and step-size convergence. Defaults to |init|.
    std::vector<double> typical;
};

struct Bounds {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    static Bounds unbounded(Eigen::Index n);
};

struct NlsOptions {
    int max_iterations = 500;
    double x_tol = 1e-12;   ///< relative step size
    double f_tol = 1e-15;   ///< relative cost reduction
    double initial_lambda = 1e-3;
};

FitReport nls_fit(const NlsProblem& problem, const Eigen::VectorXd& init, const Bounds& bounds,
                  const NlsOptions& options = {});

/// Condition number of the correlation matrix of a covariance-shaped matrix.
double correlation_condition(const Eigen::MatrixXd& covariance);

}  // namespace mcoupler::fit
