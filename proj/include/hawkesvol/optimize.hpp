#pragma once

// Quasi-Newton minimisation shared by the Hawkes and GARCH-family estimators, plus
// finite-difference derivatives for standard errors.

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace hawkesvol {

/// Returns the value to minimise; when `grad` is non-null it must be filled as well.
/// Non-finite values mark infeasible points and make the line search back off.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;
using ScalarFn = std::function<double(const Eigen::VectorXd& x)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& x)>;

struct OptimOptions {
    double grad_tol{1e-6};  ///< infinity norm of the gradient
    double step_tol{1e-8};  ///< infinity norm of the accepted step, relative to 1 + |x|
    int max_iter{500};
};

struct OptimResult {
    Eigen::VectorXd x;
    Eigen::VectorXd grad;
    double value{0.0};
    int iterations{0};
    bool converged{false};
    std::string stop_reason;
};

/// BFGS on the inverse Hessian with backtracking Armijo steps.
OptimResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0, const OptimOptions& options = {});

/// Wrap a value-only function with a central-difference gradient.
Objective with_numeric_gradient(ScalarFn f, double rel_step = 1e-6);

Eigen::VectorXd numeric_gradient(const ScalarFn& f, const Eigen::VectorXd& x, double rel_step = 1e-6);

/// Central differences of an analytic gradient, symmetrised.
Eigen::MatrixXd hessian_from_gradient(const GradientFn& g, const Eigen::VectorXd& x, double rel_step = 1e-5);

/// Second-order central differences of function values.
Eigen::MatrixXd numeric_hessian(const ScalarFn& f, const Eigen::VectorXd& x, double rel_step = 1e-4);

/// Square roots of the diagonal of the inverse of `information`, or an empty vector when the
/// matrix is not positive definite.
Eigen::VectorXd standard_errors(const Eigen::MatrixXd& information);

}  // namespace hawkesvol
