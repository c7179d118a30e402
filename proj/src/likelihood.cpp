#include "hawkesvol/errors.hpp"
#include "hawkesvol/estimate.hpp"
#include "likelihood_core.hpp"

#include <cmath>
#include <string>

namespace hawkesvol {

namespace detail {

namespace {

constexpr std::size_t kMu = 0, kAlpha = 2, kBeta = 6, kEta = 8;

}  // namespace

CoreResult evaluate_likelihood(const ParamVector& theta, std::span<const Event> events, double start, double horizon,
                               const Vec2& mean_marks, bool use_marks, InitMode init, bool want_grad,
                               IntensityTrace* trace) {
    CoreResult out;
    const double mu[2] = {theta[kMu], theta[kMu + 1]};
    const double beta[2] = {theta[kBeta], theta[kBeta + 1]};
    double alpha[2][2], eta[2][2];
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            alpha[i][j] = theta[kAlpha + 2 * i + j];
            eta[i][j] = use_marks ? theta[kEta + 2 * i + j] : 0.0;
        }
    if (!(beta[0] > 0.0) || !(beta[1] > 0.0)) return out;

    // Stationary starting intensity E solves (beta - kappa) E = beta mu.
    Vec2 eps{};
    Mat2 m_inv;
    Vec2 elam{};
    const Vec2 zbar = use_marks ? mean_marks : Vec2::constant(1.0);
    if (init == InitMode::stationary) {
        Mat2 kappa;
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) kappa(i, j) = alpha[i][j] + eta[i][j] * (zbar[j] - 1.0);
        const Mat2 branching = Mat2::diag({{1.0 / beta[0], 1.0 / beta[1]}}) * kappa;
        if (!(spectral_radius(branching) < 1.0)) {
            out.unstable = true;
            return out;
        }
        const Mat2 m = Mat2::diag({{beta[0], beta[1]}}) - kappa;
        const double det = m.det();
        if (!(std::abs(det) > 0.0)) {
            out.unstable = true;
            return out;
        }
        m_inv = Mat2{{m(1, 1) / det, -m(0, 1) / det, -m(1, 0) / det, m(0, 0) / det}};
        elam = m_inv * Vec2{{beta[0] * mu[0], beta[1] * mu[1]}};
        eps = Vec2{{elam[0] - mu[0], elam[1] - mu[1]}};
    }

    double s[2][2] = {}, w[2][2] = {}, ds[2][2] = {}, dw[2][2] = {};
    double decay_total[2] = {1.0, 1.0};  // exp(-beta_i t)
    double count[2] = {0.0, 0.0}, excess_marks[2] = {0.0, 0.0};
    double g_mu[2] = {}, g_beta[2] = {}, c_eps[2] = {}, g_alpha[2][2] = {}, g_eta[2][2] = {};
    double comp[2] = {0.0, 0.0};
    double ll = 0.0;
    double t_prev = 0.0;

    if (trace != nullptr) {
        trace->intensity.clear();
        trace->compensator.clear();
        trace->intensity.reserve(events.size());
        trace->compensator.reserve(events.size());
    }

    auto advance = [&](double t) {
        const double dt = t - t_prev;
        for (std::size_t i = 0; i < 2; ++i) {
            const double d = std::exp(-beta[i] * dt);
            if (trace != nullptr) {
                // Integral of lambda_i over (t_prev, t] from the states at t_prev.
                double excited = eps[i] * decay_total[i];
                for (std::size_t j = 0; j < 2; ++j) excited += alpha[i][j] * s[i][j] + eta[i][j] * w[i][j];
                comp[i] += mu[i] * dt + excited * (1.0 - d) / beta[i];
            }
            decay_total[i] *= d;
            for (std::size_t j = 0; j < 2; ++j) {
                if (want_grad) {
                    ds[i][j] = d * (ds[i][j] - dt * s[i][j]);
                    dw[i][j] = d * (dw[i][j] - dt * w[i][j]);
                }
                s[i][j] *= d;
                w[i][j] *= d;
            }
        }
        t_prev = t;
    };

    for (const Event& e : events) {
        const double t = e.time - start;
        advance(t);
        const std::size_t side = index(e.side);
        const double z1 = use_marks ? static_cast<double>(e.mark - 1) : 0.0;

        if (trace != nullptr) {
            Vec2 lam;
            for (std::size_t i = 0; i < 2; ++i) {
                lam[i] = mu[i] + eps[i] * decay_total[i];
                for (std::size_t j = 0; j < 2; ++j) lam[i] += alpha[i][j] * s[i][j] + eta[i][j] * w[i][j];
            }
            trace->intensity.push_back(lam);
            trace->compensator.push_back({{comp[0], comp[1]}});
        }

        double lam = mu[side] + eps[side] * decay_total[side];
        for (std::size_t j = 0; j < 2; ++j) lam += alpha[side][j] * s[side][j] + eta[side][j] * w[side][j];
        if (!(lam > 0.0) || !std::isfinite(lam)) {
            out.nonpositive = true;
            return out;
        }
        ll += std::log(lam);
        if (want_grad) {
            const double inv = 1.0 / lam;
            g_mu[side] += inv;
            c_eps[side] += decay_total[side] * inv;
            double dl_dbeta = -eps[side] * t * decay_total[side];
            for (std::size_t j = 0; j < 2; ++j) {
                g_alpha[side][j] += s[side][j] * inv;
                g_eta[side][j] += w[side][j] * inv;
                dl_dbeta += alpha[side][j] * ds[side][j] + eta[side][j] * dw[side][j];
            }
            g_beta[side] += dl_dbeta * inv;
        }
        for (std::size_t i = 0; i < 2; ++i) {
            s[i][side] += 1.0;
            w[i][side] += z1;
        }
        count[side] += 1.0;
        excess_marks[side] += z1;
    }
    const double horizon_rel = horizon - start;
    advance(horizon_rel);
    if (trace != nullptr) trace->compensator_at_horizon = {{comp[0], comp[1]}};

    for (std::size_t i = 0; i < 2; ++i) {
        const double f = (1.0 - decay_total[i]) / beta[i];
        double integral = mu[i] * horizon_rel + eps[i] * f;
        double cs[2], cw[2];
        for (std::size_t j = 0; j < 2; ++j) {
            cs[j] = (count[j] - s[i][j]) / beta[i];
            cw[j] = (excess_marks[j] - w[i][j]) / beta[i];
            integral += alpha[i][j] * cs[j] + eta[i][j] * cw[j];
        }
        ll -= integral;
        if (want_grad) {
            g_mu[i] -= horizon_rel;
            c_eps[i] -= f;
            const double df = (horizon_rel * decay_total[i] - f) / beta[i];
            double d_integral = eps[i] * df;
            for (std::size_t j = 0; j < 2; ++j) {
                g_alpha[i][j] -= cs[j];
                g_eta[i][j] -= cw[j];
                d_integral += alpha[i][j] * (-ds[i][j] - cs[j]) / beta[i];
                d_integral += eta[i][j] * (-dw[i][j] - cw[j]) / beta[i];
            }
            g_beta[i] -= d_integral;
        }
    }
    if (!std::isfinite(ll)) {
        out.nonpositive = true;
        return out;
    }
    out.ok = true;
    out.value = ll;
    if (!want_grad) return out;

    if (init == InitMode::stationary) {
        // d eps / d theta through E: M dE = (rhs), so c^T dE = (M^{-T} c)^T rhs.
        const Vec2 wv = m_inv.transpose() * Vec2{{c_eps[0], c_eps[1]}};
        for (std::size_t k = 0; k < 2; ++k) {
            g_mu[k] += wv[k] * beta[k] - c_eps[k];
            g_beta[k] += wv[k] * (mu[k] - elam[k]);
            for (std::size_t l = 0; l < 2; ++l) {
                g_alpha[k][l] += wv[k] * elam[l];
                g_eta[k][l] += wv[k] * (zbar[l] - 1.0) * elam[l];
            }
        }
    }
    for (std::size_t i = 0; i < 2; ++i) {
        out.gradient[kMu + i] = g_mu[i];
        out.gradient[kBeta + i] = g_beta[i];
        for (std::size_t j = 0; j < 2; ++j) {
            out.gradient[kAlpha + 2 * i + j] = g_alpha[i][j];
            out.gradient[kEta + 2 * i + j] = use_marks ? g_eta[i][j] : 0.0;
        }
    }
    return out;
}

}  // namespace detail

Vec2 mark_means(std::span<const Event> events) {
    double total[2] = {0.0, 0.0}, n[2] = {0.0, 0.0};
    for (const Event& e : events) {
        total[index(e.side)] += e.mark;
        n[index(e.side)] += 1.0;
    }
    return {{n[0] > 0.0 ? total[0] / n[0] : 1.0, n[1] > 0.0 ? total[1] / n[1] : 1.0}};
}

namespace {

void check_window(std::span<const Event> events, double horizon, double start) {
    if (!(horizon > start)) throw ConfigError("likelihood window must have positive length");
    double prev = start - 1.0;
    for (std::size_t k = 0; k < events.size(); ++k) {
        const double t = events[k].time;
        if (!(t >= start) || !(t <= horizon)) throw DataError("event " + std::to_string(k) + " outside the window");
        if (!(t > prev)) throw DataError("events not strictly increasing at index " + std::to_string(k));
        if (events[k].mark < 1) throw DataError("event " + std::to_string(k) + ": mark below one tick");
        prev = t;
    }
}

detail::CoreResult checked(const MarkedHawkesParams& p, std::span<const Event> events, double horizon,
                           const LikelihoodOptions& options, bool want_grad, IntensityTrace* trace) {
    check_window(events, horizon, options.start);
    const bool use_marks = options.kind == ModelKind::marked;
    auto r = detail::evaluate_likelihood(to_array(p), events, options.start, horizon, mark_means(events), use_marks,
                                         options.init, want_grad, trace);
    if (r.unstable) throw InvalidParams("unstable");
    if (!r.ok) throw NumericalError("non-positive intensity in likelihood evaluation");
    return r;
}

}  // namespace

double log_likelihood(const MarkedHawkesParams& p, std::span<const Event> events, double horizon,
                      const LikelihoodOptions& options) {
    return checked(p, events, horizon, options, false, nullptr).value;
}

LikelihoodValue log_likelihood_with_gradient(const MarkedHawkesParams& p, std::span<const Event> events,
                                             double horizon, const LikelihoodOptions& options) {
    const auto r = checked(p, events, horizon, options, true, nullptr);
    return {r.value, r.gradient};
}

IntensityTrace trace_intensity(const MarkedHawkesParams& p, std::span<const Event> events, double horizon,
                               const LikelihoodOptions& options) {
    IntensityTrace trace;
    checked(p, events, horizon, options, false, &trace);
    return trace;
}

}  // namespace hawkesvol
