#pragma once

// Test-only oracles. Everything here is written independently of the library's solution
// path: matrix equations are evaluated in their un-vectorized form, linear solves go through
// Eigen, and eigenvalues come from the characteristic polynomial.

#include "hawkesvol/mat2.hpp"
#include "hawkesvol/model.hpp"
#include "hawkesvol/simulate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <random>
#include <vector>

namespace hawkesvol::testing {

inline Eigen::Matrix2d to_eigen(const Mat2& m) {
    Eigen::Matrix2d out;
    out << m(0, 0), m(0, 1), m(1, 0), m(1, 1);
    return out;
}

inline Mat2 from_eigen(const Eigen::Matrix2d& m) { return {{m(0, 0), m(0, 1), m(1, 0), m(1, 1)}}; }

inline Vec4 eigen_solve(const Mat4& lhs, const Vec4& rhs) {
    Eigen::Matrix4d a;
    Eigen::Vector4d b;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) a(r, c) = lhs(r, c);
        b(r) = rhs[r];
    }
    const Eigen::Vector4d x = a.fullPivLu().solve(b);
    return {{x(0), x(1), x(2), x(3)}};
}

/// Roots of x^2 - tr x + det, larger real part (then larger imaginary part) first.
inline std::array<std::complex<double>, 2> quadratic_eigenvalues(const Mat2& m) {
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const std::complex<double> root = std::sqrt(std::complex<double>(tr * tr - 4.0 * det));
    return {(tr + root) / 2.0, (tr - root) / 2.0};
}

/// E[lambda] via Eigen's dense solve of (beta - kappa) x = beta mu.
inline Vec2 dense_expected_intensity(const Mat2& beta_minus_kappa, const Vec2& beta_mu) {
    const Eigen::Vector2d x = to_eigen(beta_minus_kappa).partialPivLu().solve(Eigen::Vector2d(beta_mu[0], beta_mu[1]));
    return {{x(0), x(1)}};
}

inline double max_abs(std::initializer_list<Mat2> ms) {
    double out = 0.0;
    for (const auto& m : ms) out = std::max(out, m.max_abs());
    return out;
}

/// Residual of the unmarked stationary second-moment equation divided by its largest term.
inline double relative_residual_ell_unmarked(const HawkesParams& p, const Vec2& elam, const Mat2& x) {
    const Mat2 d = p.alpha - Mat2::diag(p.beta);
    const Vec2 bm{{p.beta[0] * p.mu[0], p.beta[1] * p.mu[1]}};
    const Mat2 t1 = x * d.transpose();
    const Mat2 t2 = d * x;
    const Mat2 t3 = outer(elam, bm);
    const Mat2 t4 = outer(bm, elam);
    const Mat2 t5 = p.alpha * Mat2::diag(elam) * p.alpha.transpose();
    return (t1 + t2 + t3 + t4 + t5).max_abs() / max_abs({t1, t2, t3, t4, t5});
}

/// G written entry-by-entry as sum over source types j of jump second moments.
inline Mat2 jump_covariation_entrywise(const MarkedHawkesParams& p, const MarkSummaries& m, const Vec2& elam) {
    Mat2 g;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) {
            double acc = 0.0;
            for (int j = 0; j < 2; ++j) {
                const double ai = p.base.alpha(i, j) - p.eta(i, j);
                const double ak = p.base.alpha(k, j) - p.eta(k, j);
                // E[(ai + eta_ij z)(ak + eta_kj z)] with E z = zbar, E z^2 = zbar2
                const double z1 = m.zbar(i, j);
                const double z2 = m.zbar2(i, j);
                acc += (ai * ak + (ai * p.eta(k, j) + ak * p.eta(i, j)) * z1 + p.eta(i, j) * p.eta(k, j) * z2) *
                       elam[j];
            }
            g(i, k) = acc;
        }
    return g;
}

inline double relative_residual_ell_marked(const MarkedHawkesParams& p, const MarkSummaries& m, const Vec2& elam,
                                           const Mat2& x) {
    const Mat2 d = p.base.alpha - Mat2::diag(p.base.beta);
    const Vec2 bm{{p.base.beta[0] * p.base.mu[0], p.base.beta[1] * p.base.mu[1]}};
    const Mat2 t1 = d * x;
    const Mat2 t2 = p.eta * hadamard(m.zbar_ll.transpose() - 1.0, x);
    const Mat2 t3 = outer(bm, elam);
    const Mat2 g = jump_covariation_entrywise(p, m, elam);
    const Mat2 total = sym_sum(t1 + t2 + t3) + g;
    return total.max_abs() / max_abs({t1, t2, t3, g});
}

/// Residual of the count-intensity slope equation, in the E[N lambda^T] orientation.
inline double relative_residual_eq_a(const MarkedHawkesParams& p, const MarkSummaries& m, const Mat2& zbar_nl,
                                     const Vec2& elam, const Mat2& a_nl) {
    const Mat2 d = p.base.alpha - Mat2::diag(p.base.beta);
    const Vec2 bm{{p.base.beta[0] * p.base.mu[0], p.base.beta[1] * p.base.mu[1]}};
    const Mat2 t1 = a_nl * d.transpose();
    const Mat2 t2 = hadamard(a_nl, zbar_nl - 1.0) * p.eta.transpose();
    const Mat2 t3 = diag_part(m.zbar) * outer(elam, bm);
    return (t1 + t2 + t3).max_abs() / max_abs({t1, t2, t3});
}

inline double relative_residual_eq_b(const MarkedHawkesParams& p, const MarkSummaries& m, const Mat2& zbar_nl,
                                     const Vec2& elam, const Mat2& elam2, const Mat2& a_nl, const Mat2& b_nl) {
    const Mat2 d = p.base.alpha - Mat2::diag(p.base.beta);
    const Mat2 t1 = b_nl * d.transpose();
    const Mat2 t2 = hadamard(b_nl, zbar_nl - 1.0) * p.eta.transpose();
    const Mat2 t3 = hadamard(m.zbar_ll.transpose(), elam2);
    const Mat2 rate = hadamard(p.base.alpha - p.eta, m.zbar) + hadamard(p.eta, m.zbar2);
    const Mat2 t4 = Mat2::diag(elam) * rate.transpose();
    return (t1 + t2 + t3 + t4 - a_nl).max_abs() / max_abs({t1, t2, t3, t4, a_nl});
}

/// Random stable marked parameters with spectral radius of the effective branching matrix
/// (under `marks`) scaled to `radius`.
inline MarkedHawkesParams random_stable(std::mt19937_64& rng, const MarkSummaries& marks, double radius,
                                        bool with_eta = true) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MarkedHawkesParams p;
    p.base.mu = {{0.05 + 0.25 * u(rng), 0.05 + 0.25 * u(rng)}};
    p.base.beta = {{0.3 + 1.2 * u(rng), 0.3 + 1.2 * u(rng)}};
    for (auto& x : p.base.alpha.a) x = u(rng);
    if (with_eta)
        for (auto& x : p.eta.a) x = 0.3 * u(rng);
    const double rho = stability(p, marks).spectral_radius;
    const double s = radius / rho;
    p.base.alpha = s * p.base.alpha;
    p.eta = s * p.eta;
    return p;
}

/// Time integrals of lambda and lambda lambda^T over equal batches of [0, horizon], computed
/// exactly from the piecewise-exponential intensity of a simulated path.
struct BatchIntegrals {
    std::vector<Vec2> lam;
    std::vector<Mat2> lam2;
};

inline BatchIntegrals integrate_path(const MarkedHawkesParams& p, const SimPath& path, double horizon,
                                     std::size_t batches) {
    const auto& mu = p.base.mu;
    const auto& beta = p.base.beta;
    BatchIntegrals out{std::vector<Vec2>(batches), std::vector<Mat2>(batches)};
    const double width = horizon / static_cast<double>(batches);
    Vec2 excess = path.initial_intensity - mu;
    double t = 0.0;
    auto advance = [&](double to) {
        while (t < to) {
            const auto b = std::min(batches - 1, static_cast<std::size_t>(t / width));
            const double end = std::min(to, (static_cast<double>(b) + 1.0) * width);
            const double d = end - t;
            for (std::size_t i = 0; i < 2; ++i) {
                const double ei = (1.0 - std::exp(-beta[i] * d)) / beta[i];
                out.lam[b][i] += mu[i] * d + excess[i] * ei;
                for (std::size_t k = 0; k < 2; ++k) {
                    const double ek = (1.0 - std::exp(-beta[k] * d)) / beta[k];
                    const double eik = (1.0 - std::exp(-(beta[i] + beta[k]) * d)) / (beta[i] + beta[k]);
                    out.lam2[b](i, k) +=
                        mu[i] * mu[k] * d + mu[i] * excess[k] * ek + mu[k] * excess[i] * ei + excess[i] * excess[k] * eik;
                }
            }
            for (std::size_t i = 0; i < 2; ++i) excess[i] *= std::exp(-beta[i] * d);
            // guard against an endless loop when rounding keeps t just below a batch edge
            t = (end <= t) ? to : end;
        }
    };
    for (const Event& e : path.events) {
        advance(e.time);
        const std::size_t j = index(e.side);
        for (std::size_t i = 0; i < 2; ++i) excess[i] += p.base.alpha(i, j) + p.eta(i, j) * (e.mark - 1);
    }
    advance(horizon);
    return out;
}

/// Mean and standard error of a sample.
inline std::pair<double, double> mean_and_se(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double m = 0.0;
    for (double x : xs) m += x;
    m /= n;
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    v /= (n - 1.0);
    return {m, std::sqrt(v / n)};
}

/// Log-likelihood by brute force: every intensity is a fresh sum over all earlier events and
/// the compensator integrates each kernel term separately. Cost is quadratic in the count.
inline double direct_log_likelihood(const MarkedHawkesParams& p, const std::vector<Event>& events, double start,
                                    double horizon, bool stationary, bool use_marks) {
    const auto& mu = p.base.mu;
    const auto& beta = p.base.beta;
    Vec2 eps{};
    if (stationary) {
        double total[2] = {0, 0}, n[2] = {0, 0};
        for (const auto& e : events) {
            total[index(e.side)] += e.mark;
            n[index(e.side)] += 1;
        }
        Eigen::Matrix2d m;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double zbar = use_marks && n[j] > 0 ? total[j] / n[j] : 1.0;
                const double eta = use_marks ? p.eta(i, j) : 0.0;
                m(i, j) = (i == j ? beta[i] : 0.0) - (p.base.alpha(i, j) + eta * (zbar - 1.0));
            }
        const Eigen::Vector2d e = m.fullPivLu().solve(Eigen::Vector2d(beta[0] * mu[0], beta[1] * mu[1]));
        eps = {{e(0) - mu[0], e(1) - mu[1]}};
    }
    auto jump = [&](std::size_t i, const Event& e) {
        const std::size_t j = index(e.side);
        return p.base.alpha(i, j) + (use_marks ? p.eta(i, j) * (e.mark - 1) : 0.0);
    };
    double ll = 0.0;
    for (std::size_t k = 0; k < events.size(); ++k) {
        const std::size_t i = index(events[k].side);
        const double t = events[k].time;
        double lam = mu[i] + eps[i] * std::exp(-beta[i] * (t - start));
        for (std::size_t l = 0; l < k; ++l) lam += jump(i, events[l]) * std::exp(-beta[i] * (t - events[l].time));
        ll += std::log(lam);
    }
    for (std::size_t i = 0; i < 2; ++i) {
        double integral = mu[i] * (horizon - start) + eps[i] * (1.0 - std::exp(-beta[i] * (horizon - start))) / beta[i];
        for (const auto& e : events) integral += jump(i, e) * (1.0 - std::exp(-beta[i] * (horizon - e.time))) / beta[i];
        ll -= integral;
    }
    return ll;
}

}  // namespace hawkesvol::testing
