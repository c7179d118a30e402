#include "hawkesvol/moments.hpp"

#include "hawkesvol/errors.hpp"

#include <cmath>

namespace hawkesvol {

namespace {

using C = std::complex<double>;

void require_stable(const MarkedHawkesParams& p, const MarkSummaries& marks) {
    const auto report = stability(p, marks);
    if (!report.stable) throw InvalidParams("unstable");
}

/// Common left-hand operator of the vectorized A and B systems.
Mat4 count_intensity_operator(const MarkedHawkesParams& p, const Mat2& zbar_nl) {
    return kron(Mat2::identity(), p.base.drift()) + hadamard_vec_lhs(p.eta, zbar_nl.transpose() - 1.0);
}

/// G: expected quadratic variation rate of the intensity jumps.
Mat2 jump_covariation(const MarkedHawkesParams& p, const MarkSummaries& marks, const Vec2& elam) {
    const Mat2 dg = Mat2::diag(elam);
    const Mat2 base = p.base.alpha - p.eta;
    const Mat2 eta_z = hadamard(p.eta, marks.zbar);
    const Mat2 eta_root = hadamard(p.eta, hadamard_sqrt(marks.zbar2));
    return (base + eta_z) * dg * base.transpose() + base * dg * eta_z.transpose() +
           eta_root * dg * eta_root.transpose();
}

CMat2 cmul(const CMat2& x, const CMat2& y) {
    return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2],
            x[2] * y[1] + x[3] * y[3]};
}

CMat2 cinverse(const CMat2& m) {
    const C d = m[0] * m[3] - m[1] * m[2];
    if (std::abs(d) == 0.0) throw NumericalError("singular eigenvector matrix");
    return {m[3] / d, -m[1] / d, -m[2] / d, m[0] / d};
}

CMat2 to_complex(const Mat2& m) { return {C(m.a[0]), C(m.a[1]), C(m.a[2]), C(m.a[3])}; }

/// `a_departure`, when given, receives A - E[lambda] E[lambda]^T Dg(Zbar) as solved, before any rounding
/// of the sum.
MomentSolution solve_ab_with(const MarkedHawkesParams& p, const MarkSummaries& marks, bool restricted,
                             Mat2* a_departure = nullptr) {
    MomentSolution out;
    out.elam = expected_intensity_marked(p, marks);
    out.elam2 = second_moment_marked(p, marks);
    const Mat2 lhs_marks = restricted ? marks.zbar : marks.zbar_nl;
    const Mat4 lhs = count_intensity_operator(p, lhs_marks);
    const Mat2 dg_z = diag_part(marks.zbar);

    // Transposed forms: unknowns are A^T and B^T of E[N lambda^T] ~ A t + B.
    const Mat2 a_closed = outer(out.elam, out.elam) * dg_z;
    Mat2 a_t = a_closed;
    Mat2 departure{};
    if (!restricted) {
        // Solve for the departure from the closed form. Its residual follows from the
        // mean-intensity equation, (alpha - beta) E + beta mu = -(eta o (Zbar - 1)) E, so it is
        // exactly zero whenever eta = 0 or the summaries are all ones.
        const Vec2 drift_gap = -1.0 * (hadamard(p.eta, marks.zbar - 1.0) * out.elam);
        const Mat2 residual = outer(drift_gap, out.elam) * dg_z +
                              p.eta * hadamard(lhs_marks.transpose() - 1.0, a_closed);
        departure = kron_solve4_mat(lhs, -1.0 * residual);
        a_t = a_closed + departure;
    }
    if (a_departure != nullptr) *a_departure = departure;
    const Mat2 mark_rate = hadamard(p.base.alpha - p.eta, marks.zbar) + hadamard(p.eta, marks.zbar2);
    const Mat2 rhs_b = hadamard(marks.zbar_ll, out.elam2) + mark_rate * Mat2::diag(out.elam) - a_t;
    out.a_mat = a_t;
    out.b_mat = kron_solve4_mat(lhs, -rhs_b);
    return out;
}

}  // namespace

Vec2 expected_intensity(const HawkesParams& p) {
    return expected_intensity_marked(MarkedHawkesParams::unmarked(p), MarkSummaries::ones());
}

Vec2 expected_intensity_marked(const MarkedHawkesParams& p, const MarkSummaries& marks) {
    require_stable(p, marks);
    const Mat2 m = p.base.beta_matrix() - effective_excitation(p, marks);
    return inverse(m) * hadamard(p.base.beta, p.base.mu);
}

Mat2 second_moment_unmarked(const HawkesParams& p) {
    const Vec2 elam = expected_intensity(p);
    const Mat2 drift = p.drift();
    const Mat4 lhs = kron(Mat2::identity(), drift) + kron(drift, Mat2::identity());
    const Vec2 bm = hadamard(p.beta, p.mu);
    const Mat2 rhs = sym_sum(outer(bm, elam)) + p.alpha * Mat2::diag(elam) * p.alpha.transpose();
    const Mat2 x = kron_solve4_mat(lhs, -rhs);
    return 0.5 * (x + x.transpose());
}

Mat2 second_moment_marked(const MarkedHawkesParams& p, const MarkSummaries& marks) {
    const Vec2 elam = expected_intensity_marked(p, marks);
    const Mat2 drift = p.base.drift();
    const Mat4 lhs = kron(Mat2::identity(), drift) + kron(drift, Mat2::identity()) +
                     hadamard_vec_lhs(p.eta, marks.zbar_ll.transpose() - 1.0) +
                     hadamard_vec_rhs(p.eta.transpose(), marks.zbar_ll - 1.0);
    const Vec2 bm = hadamard(p.base.beta, p.base.mu);
    const Mat2 rhs = sym_sum(outer(bm, elam)) + jump_covariation(p, marks, elam);
    const Mat2 x = kron_solve4_mat(lhs, -rhs);
    return 0.5 * (x + x.transpose());
}

MomentSolution solve_ab_unmarked(const HawkesParams& p) {
    MomentSolution out;
    out.elam = expected_intensity(p);
    out.elam2 = second_moment_unmarked(p);
    out.a_mat = outer(out.elam, out.elam);
    const Mat2 drift = p.drift();
    out.b_mat = inverse(drift) * (out.a_mat - out.elam2 - p.alpha * Mat2::diag(out.elam));

    const Eigen2 eig = eig2(drift);
    if (eig.defective) {
        out.defective = true;
        return out;
    }
    HomogeneousTerm h;
    h.xi = eig.values;
    h.v = {eig.vectors[0][0], eig.vectors[1][0], eig.vectors[0][1], eig.vectors[1][1]};
    const CMat2 minus_b = to_complex(-out.b_mat);
    h.c = cmul(cinverse(h.v), minus_b);
    out.homo = h;
    return out;
}

MomentSolution solve_ab_marked(const MarkedHawkesParams& p, const MarkSummaries& marks) {
    return solve_ab_with(p, marks, false);
}

MomentSolution solve_ab_restricted(const MarkedHawkesParams& p, const MarkSummaries& marks,
                                   MarkDependence dependence) {
    MarkSummaries m = marks;
    m.zbar_nl = m.zbar;
    if (dependence == MarkDependence::independent) m.zbar_ll = m.zbar;
    return solve_ab_with(p, m, true);
}

double variance_unmarked(const HawkesParams& p, double t, Transient transient) {
    if (!(t > 0.0)) throw ConfigError("variance horizon must be positive");
    const MomentSolution s = solve_ab_unmarked(p);
    double var = quad_form(kNetDirection, 2.0 * s.b_mat + Mat2::diag(s.elam), kNetDirection) * t;
    if (transient == Transient::included) {
        if (!s.homo) throw NumericalError("defective spectrum: transient term unavailable");
        const auto& h = *s.homo;
        // integral over [0, t] of V diag(exp(xi s)) C ds = V diag((exp(xi t) - 1) / xi) C
        CMat2 d{};
        for (std::size_t k = 0; k < 2; ++k) d[3 * k] = (std::exp(h.xi[k] * t) - 1.0) / h.xi[k];
        const CMat2 term = cmul(cmul(h.v, d), h.c);
        const C uq = term[0] - term[1] - term[2] + term[3];
        var += 2.0 * uq.real();
    }
    return var;
}

VarianceResult variance_marked_full(const MarkedHawkesParams& p, const MarkSummaries& marks, double t) {
    if (!(t > 0.0)) throw ConfigError("variance horizon must be positive");
    Mat2 departure;
    const MomentSolution s = solve_ab_with(p, marks, false, &departure);
    // The t^2 part of u^T E[N N^T] u minus the squared mean u^T Dg(Zbar) E[lambda] t, collected
    // term by term so that it vanishes exactly when the summaries are consistent.
    const Vec2& e = s.elam;
    double quadratic = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const double uu = kNetDirection[i] * kNetDirection[j];
            quadratic += uu * marks.zbar(i, i) * e[i] * e[j] * (marks.zbar_nl(i, j) - marks.zbar(j, j));
            quadratic += uu * marks.zbar_nl(i, j) * departure(j, i);
        }
    const Mat2 linear = sym_sum(hadamard(marks.zbar_nl, s.b_mat.transpose())) + hadamard(marks.zbar2, Mat2::diag(e));
    VarianceResult out;
    out.value = quadratic * t * t + quad_form(kNetDirection, linear, kNetDirection) * t;
    out.negative = out.value < 0.0;
    return out;
}

double variance_marked_restricted(const MarkedHawkesParams& p, const MarkSummaries& marks, double t,
                                  MarkDependence dependence) {
    if (!(t > 0.0)) throw ConfigError("variance horizon must be positive");
    const MomentSolution s = solve_ab_restricted(p, marks, dependence);
    const Mat2 core = sym_sum(hadamard(marks.zbar, s.b_mat.transpose())) +
                      hadamard(marks.zbar2, Mat2::diag(s.elam));
    return quad_form(kNetDirection, core, kNetDirection) * t;
}

double price_volatility(double count_variance, double tick_size) {
    if (count_variance < 0.0) {
        throw NumericalError("negative variance: use the restricted formula for empirical mark summaries");
    }
    return tick_size * std::sqrt(count_variance);
}

}  // namespace hawkesvol
