#include "hawkesvol/optimize.hpp"

#include <cmath>
#include <utility>

namespace hawkesvol {

namespace {

double step_size(double x, double rel) { return rel * std::max(1.0, std::abs(x)); }

}  // namespace

OptimResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0, const OptimOptions& options) {
    const Eigen::Index n = x0.size();
    OptimResult r;
    r.x = x0;
    r.grad = Eigen::VectorXd::Zero(n);
    r.value = f(r.x, &r.grad);
    if (!std::isfinite(r.value) || !r.grad.allFinite()) {
        r.stop_reason = "infeasible start";
        return r;
    }
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
    bool scaled = false;
    Eigen::VectorXd g_new(n);

    for (r.iterations = 0; r.iterations < options.max_iter; ++r.iterations) {
        if (r.grad.lpNorm<Eigen::Infinity>() < options.grad_tol) {
            r.converged = true;
            r.stop_reason = "gradient";
            return r;
        }
        Eigen::VectorXd dir = -h * r.grad;
        double slope = r.grad.dot(dir);
        if (!(slope < 0.0)) {
            h.setIdentity();
            dir = -r.grad;
            slope = -r.grad.squaredNorm();
        }

        double step = 1.0;
        double f_new = 0.0;
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int k = 0; k < 60; ++k) {
            x_new = r.x + step * dir;
            f_new = f(x_new, &g_new);
            if (std::isfinite(f_new) && g_new.allFinite() && f_new <= r.value + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            r.stop_reason = "line search";
            return r;
        }

        const Eigen::VectorXd s = x_new - r.x;
        const Eigen::VectorXd y = g_new - r.grad;
        const double sy = s.dot(y);
        r.x = std::move(x_new);
        r.value = f_new;
        r.grad = g_new;
        if (s.lpNorm<Eigen::Infinity>() < options.step_tol * (1.0 + r.x.lpNorm<Eigen::Infinity>())) {
            r.converged = true;
            r.stop_reason = "step";
            return r;
        }
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!scaled) {
                h *= sy / y.squaredNorm();
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::VectorXd hy = h * y;
            h += (rho * rho * y.dot(hy) + rho) * s * s.transpose() - rho * (hy * s.transpose() + s * hy.transpose());
        }
    }
    r.stop_reason = "iteration limit";
    return r;
}

Objective with_numeric_gradient(ScalarFn f, double rel_step) {
    return [f = std::move(f), rel_step](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        const double v = f(x);
        if (grad != nullptr) *grad = numeric_gradient(f, x, rel_step);
        return v;
    };
}

Eigen::VectorXd numeric_gradient(const ScalarFn& f, const Eigen::VectorXd& x, double rel_step) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step_size(x(i), rel_step);
        probe(i) = x(i) + h;
        const double up = f(probe);
        probe(i) = x(i) - h;
        const double down = f(probe);
        probe(i) = x(i);
        g(i) = (up - down) / (2.0 * h);
    }
    return g;
}

Eigen::MatrixXd hessian_from_gradient(const GradientFn& g, const Eigen::VectorXd& x, double rel_step) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd hess(n, n);
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = step_size(x(i), rel_step);
        probe(i) = x(i) + h;
        const Eigen::VectorXd up = g(probe);
        probe(i) = x(i) - h;
        const Eigen::VectorXd down = g(probe);
        probe(i) = x(i);
        hess.col(i) = (up - down) / (2.0 * h);
    }
    return 0.5 * (hess + hess.transpose());
}

Eigen::MatrixXd numeric_hessian(const ScalarFn& f, const Eigen::VectorXd& x, double rel_step) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd hess(n, n);
    Eigen::VectorXd probe = x;
    const double f0 = f(x);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double hi = step_size(x(i), rel_step);
        probe(i) = x(i) + hi;
        const double up = f(probe);
        probe(i) = x(i) - hi;
        const double down = f(probe);
        probe(i) = x(i);
        hess(i, i) = (up - 2.0 * f0 + down) / (hi * hi);
        for (Eigen::Index j = 0; j < i; ++j) {
            const double hj = step_size(x(j), rel_step);
            double acc = 0.0;
            for (int si : {1, -1})
                for (int sj : {1, -1}) {
                    probe(i) = x(i) + si * hi;
                    probe(j) = x(j) + sj * hj;
                    acc += si * sj * f(probe);
                }
            probe(i) = x(i);
            probe(j) = x(j);
            hess(i, j) = hess(j, i) = acc / (4.0 * hi * hj);
        }
    }
    return hess;
}

Eigen::VectorXd standard_errors(const Eigen::MatrixXd& information) {
    if (!information.allFinite()) return {};
    const Eigen::LLT<Eigen::MatrixXd> llt(information);
    if (llt.info() != Eigen::Success) return {};
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(information.rows(), information.cols()));
    Eigen::VectorXd se = cov.diagonal();
    if ((se.array() <= 0.0).any()) return {};
    return se.array().sqrt();
}

}  // namespace hawkesvol
