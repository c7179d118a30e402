#pragma once

// Closed-form stationary moments of the bivariate (marked) Hawkes model and the resulting
// variance of the net up-minus-down count N1(t) - N2(t).
//
// Every linear system is 2x2 or a 4x4 vectorized system solved through kron_solve4.
// Unstable parameters raise InvalidParams("unstable").

#include "hawkesvol/mat2.hpp"
#include "hawkesvol/model.hpp"

#include <optional>

namespace hawkesvol {

/// Complex 2x2 matrix, row-major. Only used for the transient term.
using CMat2 = std::array<std::complex<double>, 4>;

/// Homogeneous part of E[lambda_t N_t^T]: V diag(exp(xi t)) C, with C fixed by
/// E[lambda_0 N_0^T] = 0.
struct HomogeneousTerm {
    CVec2 xi{};
    CMat2 v{};  ///< eigenvector matrix of alpha - beta (columns are eigenvectors)
    CMat2 c{};
};

/// Ingredients of every variance formula.
///
/// a_mat and b_mat always describe E[lambda_t N_t^T] ~ A t + B (intensity rows, count
/// columns). The marked vectorized systems solve for exactly this orientation; it is the
/// transpose of the E[N_t lambda_t^T] form in which the marked equations are usually written.
struct MomentSolution {
    Vec2 elam;
    Mat2 elam2;
    Mat2 a_mat;
    Mat2 b_mat;
    std::optional<HomogeneousTerm> homo;
    /// alpha - beta had a defective spectrum, so `homo` is absent.
    bool defective{false};
};

enum class MarkDependence {
    dependent,    ///< Zbar_{lambda lambda^T} taken from the supplied summaries
    independent,  ///< every first-moment matrix replaced by zbar
};

enum class Transient { excluded, included };

Vec2 expected_intensity(const HawkesParams& p);
Vec2 expected_intensity_marked(const MarkedHawkesParams& p, const MarkSummaries& marks);

/// Stationary E[lambda lambda^T] from the Sylvester equation in Kronecker form.
Mat2 second_moment_unmarked(const HawkesParams& p);
/// Marked counterpart; the mark-impact blocks use marks.zbar_ll.
Mat2 second_moment_marked(const MarkedHawkesParams& p, const MarkSummaries& marks);

/// A = E[lambda] E[lambda]^T, B = (alpha - beta)^{-1} (A - E[lambda lambda^T] - alpha Dg(E[lambda])),
/// plus the eigen-decomposed transient term when alpha - beta is not defective.
MomentSolution solve_ab_unmarked(const HawkesParams& p);
/// Marked A and B from their vectorized systems, weighted by marks.zbar_nl.
MomentSolution solve_ab_marked(const MarkedHawkesParams& p, const MarkSummaries& marks);
/// Restricted form with Zbar_{N lambda^T} = Zbar, where A = Dg(Zbar) E[lambda] E[lambda]^T.
MomentSolution solve_ab_restricted(const MarkedHawkesParams& p, const MarkSummaries& marks,
                                   MarkDependence dependence);

/// Var(N1(t) - N2(t)) ~ u^T (2B + Dg(E[lambda])) u t. With Transient::included the exact
/// finite-t homogeneous correction is added (requires a non-defective alpha - beta).
double variance_unmarked(const HawkesParams& p, double t, Transient transient = Transient::excluded);

struct VarianceResult {
    double value{0.0};
    /// Inconsistent empirical summaries can drive the full formula below zero; the value is
    /// returned unclamped.
    bool negative{false};
};

/// u^T E[N N^T] u - (u^T Dg(Zbar) E[lambda] t)^2 with the t^2 terms kept.
VarianceResult variance_marked_full(const MarkedHawkesParams& p, const MarkSummaries& marks, double t);

/// u^T [T{Zbar o B} + Zbar2 o Dg(E[lambda])] u t.
double variance_marked_restricted(const MarkedHawkesParams& p, const MarkSummaries& marks, double t,
                                  MarkDependence dependence = MarkDependence::dependent);

/// tick_size * sqrt(count_variance). Throws NumericalError on a negative variance.
double price_volatility(double count_variance, double tick_size);

}  // namespace hawkesvol
