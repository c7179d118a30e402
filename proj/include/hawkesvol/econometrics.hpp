#pragma once

// Daily-horizon analyses built on top of Hawkes volatilities: GJR-GARCH, the combined
// GARCH/Hawkes predictor, exceedance backtests, the futures regression surface and
// AR-type forecasting with root mean square relative errors.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hawkesvol {

struct GjrParams {
    double omega{0.0};
    double alpha{0.0};
    double gamma{0.0};
    double beta{0.0};
};

/// Throws InvalidParams unless omega > 0, alpha >= 0, beta >= 0, alpha + gamma >= 0 and
/// alpha + gamma / 2 + beta < 1.
void validate(const GjrParams& p);

/// Conditional variances g^2_1..g^2_n for the returns, starting from `initial`:
/// g^2_n = omega + (alpha + gamma 1{R_{n-1} < 0}) R_{n-1}^2 + beta g^2_{n-1}.
std::vector<double> gjr_variance(const GjrParams& p, std::span<const double> returns, double initial);

/// One-step forecast of the variance following the last return.
double gjr_forecast(const GjrParams& p, std::span<const double> returns, double initial);

/// Gaussian log-likelihood, variance recursion started at `initial`.
double gjr_loglik(const GjrParams& p, std::span<const double> returns, double initial);

struct GjrFit {
    GjrParams params;
    GjrParams std_errors;  ///< NaN when the observed information is not positive definite
    double loglik{0.0};
    double initial_variance{0.0};
    bool converged{false};
    std::string diagnostics;
};

/// Maximum likelihood over the whole sample with g^2_1 at the sample variance.
GjrFit gjr_fit(std::span<const double> returns);

/// For each n >= window: refit on returns [n - window, n) and forecast the volatility g_n.
/// Entries before `window` are NaN.
std::vector<double> gjr_rolling_forecast(std::span<const double> returns, std::size_t window = 1500, int jobs = 1);

std::vector<double> simulate_gjr(const GjrParams& p, std::size_t n, std::uint64_t seed);

struct CombinedWeights {
    double theta1{0.0};
    double theta2{0.0};
    double se1{0.0};
    double se2{0.0};
    double loglik{0.0};  ///< sum of -log sigma_n - R_n^2 / (2 sigma_n^2)
    bool converged{false};
    bool collinear{false};  ///< h carries no information beyond g; theta2 is then fixed at 0
};

/// Maximise the normal likelihood of R_n with sigma_n = theta1 g_n + theta2 h_n, sigma_n > 0.
CombinedWeights combined_weights(std::span<const double> garch_vols, std::span<const double> hawkes_vols,
                                 std::span<const double> returns);

struct Exceedance {
    std::size_t count{0};
    double fraction{0.0};
    std::vector<std::size_t> days;  ///< indices with |dP| > k sigma
};

Exceedance backtest_exceedance(std::span<const double> abs_changes, std::span<const double> vols, double k = 2.0);

struct CoveragePoint {
    double k{0.0};
    double fraction{0.0};   ///< share of days with |dP| <= k sigma
    double reference{0.0};  ///< 2 Phi(k) - 1
};

std::vector<CoveragePoint> coverage_curve(std::span<const double> abs_changes, std::span<const double> vols,
                                          std::span<const double> k_grid);

struct OlsResult {
    std::vector<double> coef;
    std::vector<double> std_errors;
    double r2{0.0};
    double adj_r2{0.0};
    std::size_t n{0};
    bool rank_deficient{false};
};

/// Least squares with an intercept prepended to the given regressor columns.
OlsResult ols(std::span<const std::vector<double>> regressors, std::span<const double> y);

struct R2Cell {
    double t1{0.0};
    double t2{0.0};
    double adj_r2{0.0};  ///< NaN when fewer than min_days complete pairs
    double r2{0.0};
    std::size_t n{0};
};

/// stock[i][n] is h^s_n(t1[i]), futures[j][n] is h^f_n(t2[j]); NaN marks a missing day.
std::vector<R2Cell> futures_r2_surface(std::span<const std::vector<double>> stock, std::span<const double> t1,
                                       std::span<const std::vector<double>> futures, std::span<const double> t2,
                                       std::size_t min_days = 30, int jobs = 1);

struct ForecastReport {
    std::string model;
    std::vector<double> forecasts;  ///< aligned with the input; NaN inside the first training window
    double rmsre{0.0};
    std::size_t n_forecasts{0};
    bool near_unit_root{false};
    bool rank_deficient{false};
};

/// OLS fit of h_n = phi0 + phi1 h_{n-1} + phi2 h_{n-2} + e_n.
OlsResult ar2_fit(std::span<const double> series);

/// Forecast h_n for every n >= train from a refit on the preceding `train` values.
ForecastReport ar2_forecast(std::span<const double> series, std::size_t train = 400, int jobs = 1);

/// Rolling h^s_n = psi0 + psi1 h^s_{n-1} + psi2 h^f_n(T) + e_n, one report per T, on the same
/// forecast days as ar2_forecast.
std::vector<ForecastReport> futures_lm_forecast(std::span<const double> stock,
                                                std::span<const std::vector<double>> futures_by_t,
                                                std::size_t train = 400, int jobs = 1);

/// sqrt(mean(((forecast - actual) / forecast)^2)) over entries where both are finite.
double rmsre(std::span<const double> forecasts, std::span<const double> actual);

}  // namespace hawkesvol
