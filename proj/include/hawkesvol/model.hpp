#pragma once

// Parameter bundles for the bivariate (marked) exponential Hawkes model and the
// mark-summary matrices consumed by the moment formulas.
//
// Units: rates per second, times in seconds from session open, marks in integer ticks.
// Index 0 is the up-move process, index 1 the down-move process.

#include "hawkesvol/mat2.hpp"

#include <array>
#include <string>

namespace hawkesvol {

struct HawkesParams {
    Vec2 mu;     ///< exogenous intensities
    Mat2 alpha;  ///< excitation; alpha(i, j) is the jump of lambda_i at a type-j event
    Vec2 beta;   ///< decay rate shared by every kernel in row i

    [[nodiscard]] Mat2 beta_matrix() const { return Mat2::diag(beta); }
    /// alpha - beta.
    [[nodiscard]] Mat2 drift() const { return alpha - beta_matrix(); }
};

struct MarkedHawkesParams {
    HawkesParams base;
    Mat2 eta;  ///< linear mark impact: a type-j event of size z adds alpha(i,j) + eta(i,j)(z-1)

    static MarkedHawkesParams unmarked(const HawkesParams& p) { return {p, Mat2{}}; }
};

/// Covariance-adjusted conditional mark moments. All-ones matrices reproduce the unmarked model.
struct MarkSummaries {
    Mat2 zbar = Mat2::constant(1.0);     ///< first moments, weighted by intensity (columns repeat)
    Mat2 zbar2 = Mat2::constant(1.0);    ///< second moments, same weighting
    Mat2 zbar_ll = Mat2::constant(1.0);  ///< first moments weighted by lambda_i lambda_j
    Mat2 zbar_nl = Mat2::constant(1.0);  ///< first moments weighted by N_i lambda_j

    static MarkSummaries ones() { return {}; }
    /// Summaries when marks are independent of the counting and intensity processes:
    /// every first-moment matrix repeats the per-type mean.
    static MarkSummaries independent(const Vec2& mean, const Vec2& second_moment);
    /// Independent geometric marks on {1, 2, ...}: second moment 2m^2 - m.
    static MarkSummaries geometric(const Vec2& mean);
};

/// kappa = alpha - eta + eta o Zbar: mean jump of the intensity per event.
Mat2 effective_excitation(const MarkedHawkesParams& p, const MarkSummaries& marks);

struct StabilityReport {
    double spectral_radius{0.0};
    bool stable{false};
    Mat2 effective_branching;  ///< beta^{-1} kappa
};

StabilityReport stability(const MarkedHawkesParams& p, const MarkSummaries& marks = {});
StabilityReport stability(const HawkesParams& p);

/// Throws InvalidParams naming the first violated invariant ("mu nonpositive", "alpha negative",
/// "beta nonpositive", "eta negative", "nonfinite parameter", "unstable").
void validate(const MarkedHawkesParams& p, const MarkSummaries& marks = {});
void validate(const HawkesParams& p);

/// Optional equality constraints consumed by the estimator.
enum class Constraint { general, symmetric };

/// Flat parameter order: mu1 mu2 a11 a12 a21 a22 b1 b2 e11 e12 e21 e22.
inline constexpr std::size_t kParamCount = 12;
inline constexpr std::array<const char*, kParamCount> kParamKeys{
    "mu1", "mu2", "a11", "a12", "a21", "a22", "b1", "b2", "e11", "e12", "e21", "e22"};

std::array<double, kParamCount> to_array(const MarkedHawkesParams& p);
MarkedHawkesParams from_array(const std::array<double, kParamCount>& x);

/// key=value text block, one key per line, in kParamKeys order.
std::string to_key_value(const MarkedHawkesParams& p);
/// Missing e* keys default to zero; any other missing or unknown key throws ConfigError.
MarkedHawkesParams parse_key_value(const std::string& text);

}  // namespace hawkesvol
