#pragma once

// Maximum-likelihood estimation of the (marked) bivariate Hawkes model: log-likelihood with
// analytic gradient, multi-start fitting with observed-information standard errors,
// time-rescaling residuals, empirical mark summaries and rolling intraday fits.

#include "hawkesvol/events.hpp"
#include "hawkesvol/model.hpp"
#include "hawkesvol/moments.hpp"
#include "hawkesvol/optimize.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hawkesvol {

enum class ModelKind {
    marked,    ///< all twelve parameters free
    unmarked,  ///< eta fixed at zero, marks ignored
};

enum class InitMode {
    stationary,  ///< lambda(start) = E[lambda] under the fitted parameters and per-side mark means
    baseline,    ///< lambda(start) = mu
};

struct LikelihoodOptions {
    ModelKind kind{ModelKind::marked};
    InitMode init{InitMode::stationary};
    double start{0.0};  ///< window start; event times and the horizon are absolute
};

using ParamVector = std::array<double, kParamCount>;

struct LikelihoodValue {
    double value{0.0};
    ParamVector gradient{};  ///< in kParamKeys order
};

/// Sum of log lambda at the events minus the integrated intensity over [start, horizon].
/// Throws DataError on unsorted or out-of-window events, NumericalError on a non-positive
/// intensity and InvalidParams when the stationary starting intensity does not exist.
double log_likelihood(const MarkedHawkesParams& p, std::span<const Event> events, double horizon,
                      const LikelihoodOptions& options = {});
LikelihoodValue log_likelihood_with_gradient(const MarkedHawkesParams& p, std::span<const Event> events,
                                             double horizon, const LikelihoodOptions& options = {});

/// Plain per-side mark means used for the stationary starting intensity.
Vec2 mark_means(std::span<const Event> events);

/// Fitted intensity just before each event and the cumulative compensator of both sides at
/// each event time.
struct IntensityTrace {
    std::vector<Vec2> intensity;
    std::vector<Vec2> compensator;
    Vec2 compensator_at_horizon;
};

IntensityTrace trace_intensity(const MarkedHawkesParams& p, std::span<const Event> events, double horizon,
                               const LikelihoodOptions& options = {});

struct FitOptions {
    Constraint constraint{Constraint::general};
    ModelKind kind{ModelKind::marked};
    InitMode init_mode{InitMode::stationary};
    double start{0.0};
    /// Tried before the fixed grid; with `warm_only` the grid is used only if it fails.
    std::optional<MarkedHawkesParams> init;
    bool warm_only{false};
    int min_events_per_side{50};
    bool compute_se{true};
    OptimOptions optim{};
};

struct FitResult {
    MarkedHawkesParams params;
    /// Same layout as params; NaN marks an unavailable or fixed entry.
    MarkedHawkesParams std_errors;
    double loglik{0.0};
    bool converged{false};
    bool se_available{false};
    std::size_t n_events{0};
    Constraint constraint{Constraint::general};
    ModelKind kind{ModelKind::marked};
    int starts_tried{0};
    std::string diagnostics;
};

/// The fixed initialisation grid, scaled to the observed per-side event rates.
std::vector<MarkedHawkesParams> initial_grid(const Vec2& rates, ModelKind kind);

FitResult fit_mle(std::vector<Event> events, double horizon, const FitOptions& options = {});

struct ResidualReport {
    std::vector<double> residuals;
    double ks_statistic{0.0};
    double ks_pvalue{1.0};
    std::vector<std::pair<double, double>> qq_points;  ///< (unit exponential quantile, empirical quantile)
};

/// Compensator increments between consecutive same-side events, pooled over both sides, with a
/// KS test against the unit exponential and Q-Q pairs at probabilities k/200, k = 1..199.
ResidualReport residual_report(const MarkedHawkesParams& p, std::span<const Event> events, double horizon,
                               const LikelihoodOptions& options = {});

enum class SummaryMode {
    weighted,     ///< intensity- and count-weighted estimators
    independent,  ///< plain per-side sample moments everywhere
};

/// (sum w z / sum w, sum w z^2 / sum w). Throws DataError on zero total weight.
std::pair<double, double> weighted_mark_moments(std::span<const int> marks, std::span<const double> weights);

MarkSummaries mark_summaries(const MarkedHawkesParams& p, std::span<const Event> events, double horizon,
                             SummaryMode mode, const LikelihoodOptions& options = {});

struct IntradayOptions {
    double window{1800.0};
    double step{10.0};
    double session_end{23400.0};
    double vol_horizon{60.0};  ///< seconds over which the volatility is expressed
    double tick_size{0.01};
    Constraint constraint{Constraint::symmetric};
    ModelKind kind{ModelKind::marked};
    MarkDependence dependence{MarkDependence::dependent};
    int min_events_per_side{20};
};

struct IntradayPoint {
    double window_end{0.0};
    double vol{0.0};  ///< NaN for a gap
    bool gap{false};
    FitResult fit;
};

std::vector<IntradayPoint> intraday_rolling(std::span<const Event> events, const IntradayOptions& options);

/// Fit rows in the daily-estimates layout: a header, then for each fit an estimate row
/// (date, twelve parameters, llh) followed by a standard-error row with an empty date.
void write_fit_csv(std::ostream& out, const std::vector<std::pair<std::string, FitResult>>& fits);
std::vector<std::pair<std::string, FitResult>> read_fit_csv(std::istream& in);

}  // namespace hawkesvol
