#include "hawkesvol/errors.hpp"
#include "hawkesvol/estimate.hpp"
#include "likelihood_core.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hawkesvol {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Free parameters of a constrained model: each group of full-vector indices shares one value.
using Groups = std::vector<std::vector<std::size_t>>;

Groups parameter_groups(Constraint constraint, ModelKind kind) {
    Groups g;
    if (constraint == Constraint::general) {
        const std::size_t n = kind == ModelKind::marked ? 12 : 8;
        for (std::size_t i = 0; i < n; ++i) g.push_back({i});
        return g;
    }
    g = {{0}, {1}, {2, 5}, {3, 4}, {6}, {7}};
    if (kind == ModelKind::marked) {
        g.push_back({8, 11});
        g.push_back({9, 10});
    }
    return g;
}

ParamVector expand(const Groups& groups, const Eigen::VectorXd& values) {
    ParamVector theta{};
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (std::size_t idx : groups[g]) theta[idx] = values(static_cast<Eigen::Index>(g));
    return theta;
}

Eigen::VectorXd reduce_gradient(const Groups& groups, const ParamVector& grad) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(groups.size()));
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (std::size_t idx : groups[g]) out(static_cast<Eigen::Index>(g)) += grad[idx];
    return out;
}

Eigen::VectorXd group_values(const Groups& groups, const ParamVector& theta) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(groups.size()));
    for (std::size_t g = 0; g < groups.size(); ++g) {
        double acc = 0.0;
        for (std::size_t idx : groups[g]) acc += theta[idx];
        out(static_cast<Eigen::Index>(g)) = acc / static_cast<double>(groups[g].size());
    }
    return out;
}

struct Problem {
    std::span<const Event> events;
    double start{0.0};
    double horizon{0.0};
    Vec2 marks{};
    bool use_marks{true};
    InitMode init{InitMode::stationary};
    Groups groups;
    double scale{1.0};  ///< 1 / number of events

    detail::CoreResult eval(const ParamVector& theta, bool grad) const {
        return detail::evaluate_likelihood(theta, events, start, horizon, marks, use_marks, init, grad);
    }
};

/// -loglik / n as a function of log parameters.
Objective log_space_objective(const Problem& prob) {
    return [&prob](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        const Eigen::VectorXd values = x.array().exp();
        const ParamVector theta = expand(prob.groups, values);
        const auto r = prob.eval(theta, grad != nullptr);
        if (!r.ok) return std::numeric_limits<double>::infinity();
        if (grad != nullptr) {
            *grad = -prob.scale * reduce_gradient(prob.groups, r.gradient).cwiseProduct(values);
        }
        return -prob.scale * r.value;
    };
}

/// Bring a candidate start inside the stationary region by shrinking the excitation.
MarkedHawkesParams stabilise(MarkedHawkesParams p, const Vec2& marks) {
    const MarkSummaries summaries = MarkSummaries::independent(marks, marks);
    const double rho = stability(p, summaries).spectral_radius;
    if (rho >= 0.9) {
        const double s = 0.8 / rho;
        p.base.alpha = s * p.base.alpha;
        p.eta = s * p.eta;
    }
    return p;
}

}  // namespace

std::vector<MarkedHawkesParams> initial_grid(const Vec2& rates, ModelKind kind) {
    struct Start {
        double beta, a_diag, a_off, eta;
    };
    // Magnitudes spanning the range of typical daily estimates for a liquid stock.
    static constexpr Start kStarts[] = {
        {0.6, 0.10, 0.10, 0.02},
        {0.35, 0.05, 0.05, 0.0005},
        {0.93, 0.22, 0.22, 0.072},
        {0.5, 0.15, 0.05, 0.03},
        {0.8, 0.05, 0.15, 0.01},
    };
    std::vector<MarkedHawkesParams> out;
    for (const Start& s : kStarts) {
        MarkedHawkesParams p;
        p.base.beta = Vec2::constant(s.beta);
        p.base.alpha = {{s.a_diag, s.a_off, s.a_off, s.a_diag}};
        p.eta = kind == ModelKind::marked ? Mat2::constant(s.eta) : Mat2{};
        // Choose mu so that the stationary mean matches the observed rates: mu = (I - beta^{-1} kappa) rate.
        const Mat2 branching = (1.0 / s.beta) * p.base.alpha;
        const Vec2 mu = rates - branching * rates;
        for (std::size_t i = 0; i < 2; ++i) p.base.mu[i] = mu[i] > 0.05 * rates[i] ? mu[i] : 0.5 * rates[i];
        out.push_back(p);
    }
    return out;
}

FitResult fit_mle(std::vector<Event> events, double horizon, const FitOptions& options) {
    break_ties(events);
    if (!(horizon > options.start)) throw ConfigError("fit window must have positive length");
    for (std::size_t k = 0; k < events.size(); ++k) {
        if (events[k].time < options.start || events[k].time > horizon ||
            (k > 0 && !(events[k].time > events[k - 1].time)) || events[k].mark < 1) {
            throw DataError("events must be sorted, inside the window and carry marks >= 1");
        }
    }
    Vec2 counts{};
    for (const Event& e : events) counts[index(e.side)] += 1.0;
    if (counts[0] < options.min_events_per_side || counts[1] < options.min_events_per_side) {
        throw DataError(fmt::format("too few events per side ({} up, {} down; need {})", counts[0], counts[1],
                                    options.min_events_per_side));
    }

    Problem prob;
    prob.events = events;
    prob.start = options.start;
    prob.horizon = horizon;
    prob.use_marks = options.kind == ModelKind::marked;
    prob.marks = prob.use_marks ? mark_means(events) : Vec2::constant(1.0);
    prob.init = options.init_mode;
    prob.groups = parameter_groups(options.constraint, options.kind);
    prob.scale = 1.0 / static_cast<double>(events.size());
    const Objective objective = log_space_objective(prob);

    const double length = horizon - options.start;
    const Vec2 rates{{counts[0] / length, counts[1] / length}};

    std::vector<MarkedHawkesParams> starts;
    if (options.init) starts.push_back(*options.init);
    const bool grid = !options.init || !options.warm_only;
    if (grid) {
        for (auto& s : initial_grid(rates, options.kind)) starts.push_back(s);
    }

    FitResult result;
    result.n_events = events.size();
    result.constraint = options.constraint;
    result.kind = options.kind;
    std::optional<OptimResult> best;
    std::string notes;

    auto run_start = [&](const MarkedHawkesParams& candidate) {
        MarkedHawkesParams p = stabilise(candidate, prob.marks);
        if (options.kind == ModelKind::unmarked) p.eta = Mat2{};
        Eigen::VectorXd x0 = group_values(prob.groups, to_array(p));
        x0 = x0.cwiseMax(1e-8).array().log();
        OptimResult r = minimize_bfgs(objective, x0, options.optim);
        ++result.starts_tried;
        notes += fmt::format("start {}: {} after {} iterations, value {:.10g}; ", result.starts_tried, r.stop_reason,
                             r.iterations, -r.value / prob.scale);
        if (std::isfinite(r.value) && (!best || r.value < best->value)) best = std::move(r);
    };

    for (std::size_t k = 0; k < starts.size(); ++k) run_start(starts[k]);
    if (options.init && options.warm_only && (!best || !best->converged)) {
        for (auto& s : initial_grid(rates, options.kind)) run_start(s);
    }
    result.diagnostics = notes;
    if (!best) {
        result.converged = false;
        result.loglik = kNaN;
        result.params = from_array(ParamVector{});
        result.std_errors = from_array([] {
            ParamVector v;
            v.fill(kNaN);
            return v;
        }());
        result.diagnostics += "all starts failed";
        return result;
    }

    const Eigen::VectorXd values = best->x.array().exp();
    const ParamVector theta = expand(prob.groups, values);
    result.params = from_array(theta);
    result.loglik = -best->value / prob.scale;
    result.converged = best->converged;

    ParamVector se;
    se.fill(kNaN);
    if (options.compute_se) {
        // Observed information in the original (constrained) parameterisation.
        const GradientFn grad = [&prob](const Eigen::VectorXd& v) {
            const auto r = prob.eval(expand(prob.groups, v), true);
            if (!r.ok) return Eigen::VectorXd::Constant(v.size(), kNaN).eval();
            return reduce_gradient(prob.groups, r.gradient);
        };
        const Eigen::MatrixXd info = -hessian_from_gradient(grad, values);
        const Eigen::VectorXd errors = standard_errors(info);
        if (errors.size() == values.size()) {
            result.se_available = true;
            for (std::size_t g = 0; g < prob.groups.size(); ++g)
                for (std::size_t idx : prob.groups[g]) se[idx] = errors(static_cast<Eigen::Index>(g));
        } else {
            result.diagnostics += "information matrix not positive definite; ";
        }
    }
    result.std_errors = from_array(se);
    return result;
}

}  // namespace hawkesvol
