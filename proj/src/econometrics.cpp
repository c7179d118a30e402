#include "hawkesvol/econometrics.hpp"

#include "hawkesvol/errors.hpp"
#include "hawkesvol/mat2.hpp"
#include "hawkesvol/optimize.hpp"
#include "hawkesvol/parallel.hpp"
#include "hawkesvol/stats.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

namespace hawkesvol {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double persistence(const GjrParams& p) { return p.alpha + 0.5 * p.gamma + p.beta; }

void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw DataError(fmt::format("{}: series lengths differ ({} vs {})", what, a, b));
}

// Optimiser coordinates: log(omega / v), log alpha, log(alpha + gamma), log beta.
GjrParams from_log(const Eigen::VectorXd& x, double v) {
    GjrParams p;
    p.omega = std::exp(x(0)) * v;
    p.alpha = std::exp(x(1));
    p.gamma = std::exp(x(2)) - p.alpha;
    p.beta = std::exp(x(3));
    return p;
}

}  // namespace

void validate(const GjrParams& p) {
    if (!(p.omega > 0.0)) throw InvalidParams("omega nonpositive");
    if (!(p.alpha >= 0.0) || !(p.beta >= 0.0)) throw InvalidParams("negative GARCH coefficient");
    if (!(p.alpha + p.gamma >= 0.0)) throw InvalidParams("alpha + gamma negative");
    if (!(persistence(p) < 1.0)) throw InvalidParams("unstable");
}

std::vector<double> gjr_variance(const GjrParams& p, std::span<const double> returns, double initial) {
    std::vector<double> g2(returns.size());
    double prev = initial;
    for (std::size_t n = 0; n < returns.size(); ++n) {
        if (n > 0) {
            const double r = returns[n - 1];
            prev = p.omega + (p.alpha + (r < 0.0 ? p.gamma : 0.0)) * r * r + p.beta * prev;
        }
        g2[n] = prev;
    }
    return g2;
}

double gjr_forecast(const GjrParams& p, std::span<const double> returns, double initial) {
    if (returns.empty()) return initial;
    const double last = gjr_variance(p, returns, initial).back();
    const double r = returns.back();
    return p.omega + (p.alpha + (r < 0.0 ? p.gamma : 0.0)) * r * r + p.beta * last;
}

double gjr_loglik(const GjrParams& p, std::span<const double> returns, double initial) {
    double ll = 0.0, g2 = initial;
    for (std::size_t n = 0; n < returns.size(); ++n) {
        if (n > 0) {
            const double r = returns[n - 1];
            g2 = p.omega + (p.alpha + (r < 0.0 ? p.gamma : 0.0)) * r * r + p.beta * g2;
        }
        if (!(g2 > 0.0)) return -kInf;
        ll -= 0.5 * (std::log(2.0 * std::numbers::pi * g2) + returns[n] * returns[n] / g2);
    }
    return ll;
}

GjrFit gjr_fit(std::span<const double> returns) {
    if (returns.size() < 10) throw DataError("GJR fit needs at least 10 returns");
    const double v = sample_variance(returns);
    if (!(v > 0.0)) throw DataError("GJR fit: returns have zero variance");
    const double scale = 1.0 / static_cast<double>(returns.size());

    const ScalarFn negloglik = [&](const Eigen::VectorXd& x) {
        const GjrParams p = from_log(x, v);
        if (!(persistence(p) < 1.0)) return kInf;
        return -scale * gjr_loglik(p, returns, v);
    };
    const Objective objective = with_numeric_gradient(negloglik);

    struct Start {
        double alpha, gamma, beta;
    };
    static constexpr Start kStarts[] = {{0.05, 0.10, 0.80}, {0.02, 0.02, 0.50}, {0.10, 0.0, 0.10}};
    GjrFit fit;
    fit.initial_variance = v;
    std::optional<OptimResult> best;
    for (const Start& s : kStarts) {
        const double omega = v * (1.0 - s.alpha - 0.5 * s.gamma - s.beta);
        Eigen::VectorXd x0(4);
        x0 << std::log(omega / v), std::log(s.alpha), std::log(s.alpha + s.gamma), std::log(s.beta);
        OptimResult r = minimize_bfgs(objective, x0);
        fit.diagnostics += fmt::format("{} after {} iterations; ", r.stop_reason, r.iterations);
        if (std::isfinite(r.value) && (!best || r.value < best->value)) best = std::move(r);
    }
    if (!best) {
        fit.diagnostics += "no start produced a finite likelihood";
        fit.loglik = kNaN;
        fit.std_errors = {kNaN, kNaN, kNaN, kNaN};
        return fit;
    }
    fit.params = from_log(best->x, v);
    fit.loglik = -best->value / scale;
    fit.converged = best->converged;

    // Observed information in (omega / v, alpha, gamma, beta).
    const ScalarFn raw = [&](const Eigen::VectorXd& y) {
        return gjr_loglik({y(0) * v, y(1), y(2), y(3)}, returns, v);
    };
    Eigen::VectorXd y(4);
    y << fit.params.omega / v, fit.params.alpha, fit.params.gamma, fit.params.beta;
    const Eigen::MatrixXd info = -numeric_hessian(raw, y);
    const Eigen::VectorXd se = standard_errors(info);
    if (se.size() == 4 && se.allFinite()) {
        fit.std_errors = {se(0) * v, se(1), se(2), se(3)};
        return fit;
    }
    // With no ARCH effect beta is not identified (omega and beta g^2 are collinear); report
    // the remaining errors conditional on beta-hat.
    const Eigen::VectorXd partial = standard_errors(info.topLeftCorner(3, 3));
    if (partial.size() == 3 && partial.allFinite()) {
        fit.std_errors = {partial(0) * v, partial(1), partial(2), kNaN};
        fit.diagnostics += "beta not identified; standard errors conditional on beta";
    } else {
        fit.std_errors = {kNaN, kNaN, kNaN, kNaN};
        fit.diagnostics += "information matrix not positive definite";
    }
    return fit;
}

std::vector<double> gjr_rolling_forecast(std::span<const double> returns, std::size_t window, int jobs) {
    if (returns.size() <= window) throw DataError("GJR rolling forecast needs more returns than the window");
    std::vector<double> out(returns.size(), kNaN);
    parallel_for(returns.size() - window, jobs, [&](std::size_t k) {
        const std::size_t n = window + k;
        const auto past = returns.subspan(n - window, window);
        const GjrFit fit = gjr_fit(past);
        if (std::isfinite(fit.loglik)) out[n] = std::sqrt(gjr_forecast(fit.params, past, fit.initial_variance));
    });
    return out;
}

std::vector<double> simulate_gjr(const GjrParams& p, std::size_t n, std::uint64_t seed) {
    validate(p);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    double g2 = p.omega / (1.0 - persistence(p));
    double r = 0.0;
    std::vector<double> out;
    out.reserve(n);
    constexpr std::size_t kBurn = 500;
    for (std::size_t k = 0; k < n + kBurn; ++k) {
        if (k > 0) g2 = p.omega + (p.alpha + (r < 0.0 ? p.gamma : 0.0)) * r * r + p.beta * g2;
        r = std::sqrt(g2) * z(rng);
        if (k >= kBurn) out.push_back(r);
    }
    return out;
}

CombinedWeights combined_weights(std::span<const double> garch_vols, std::span<const double> hawkes_vols,
                                 std::span<const double> returns) {
    require_same_length(garch_vols.size(), returns.size(), "combined weights");
    require_same_length(hawkes_vols.size(), returns.size(), "combined weights");
    const std::size_t n = returns.size();
    if (n < 3) throw DataError("combined weights need at least three days");

    const auto loglik = [&](double t1, double t2, Eigen::Vector2d* grad, Eigen::Matrix2d* hess) {
        double ll = 0.0;
        Eigen::Vector2d g = Eigen::Vector2d::Zero();
        Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const double s = t1 * garch_vols[i] + t2 * hawkes_vols[i];
            if (!(s > 0.0)) return -kInf;
            const double r2 = returns[i] * returns[i];
            ll += -std::log(s) - r2 / (2.0 * s * s);
            const Eigen::Vector2d x(garch_vols[i], hawkes_vols[i]);
            g += (-1.0 / s + r2 / (s * s * s)) * x;
            h += (1.0 / (s * s) - 3.0 * r2 / (s * s * s * s)) * x * x.transpose();
        }
        if (grad != nullptr) *grad = g;
        if (hess != nullptr) *hess = h;
        return ll;
    };

    double gg = 0.0, hh = 0.0, gh = 0.0, ratio_g = 0.0, ratio_h = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        gg += garch_vols[i] * garch_vols[i];
        hh += hawkes_vols[i] * hawkes_vols[i];
        gh += garch_vols[i] * hawkes_vols[i];
        ratio_g += returns[i] * returns[i] / (garch_vols[i] * garch_vols[i]);
        if (hawkes_vols[i] > 0.0) ratio_h += returns[i] * returns[i] / (hawkes_vols[i] * hawkes_vols[i]);
    }
    const double scale = 1.0 / static_cast<double>(n);

    CombinedWeights out;
    out.collinear = !(hh > 0.0) || 1.0 - gh * gh / (gg * hh) < 1e-12;
    if (out.collinear) {
        // Only the GARCH scale is identified; its MLE is closed form.
        out.theta1 = std::sqrt(ratio_g * scale);
        out.theta2 = 0.0;
        Eigen::Matrix2d h;
        out.loglik = loglik(out.theta1, 0.0, nullptr, &h);
        out.se1 = std::sqrt(-1.0 / h(0, 0));
        out.se2 = kNaN;
        out.converged = true;
        return out;
    }

    const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        Eigen::Vector2d g;
        const double ll = loglik(x(0), x(1), &g, nullptr);
        if (grad != nullptr) *grad = -scale * g;
        return -scale * ll;
    };
    std::optional<OptimResult> best;
    const Eigen::Vector2d starts[] = {{std::sqrt(ratio_g * scale), 0.0},
                                      {0.0, std::sqrt(ratio_h * scale)},
                                      {0.5 * std::sqrt(ratio_g * scale), 0.5 * std::sqrt(ratio_h * scale)}};
    for (const auto& s : starts) {
        if (!std::isfinite(objective(s, nullptr))) continue;
        OptimResult r = minimize_bfgs(objective, s);
        if (std::isfinite(r.value) && (!best || r.value < best->value)) best = std::move(r);
    }
    if (!best) throw NumericalError("combined weights: no feasible start");
    out.theta1 = best->x(0);
    out.theta2 = best->x(1);
    out.converged = best->converged;
    Eigen::Matrix2d h;
    out.loglik = loglik(out.theta1, out.theta2, nullptr, &h);
    const Eigen::VectorXd se = standard_errors(-h);
    out.se1 = se.size() == 2 ? se(0) : kNaN;
    out.se2 = se.size() == 2 ? se(1) : kNaN;
    return out;
}

Exceedance backtest_exceedance(std::span<const double> abs_changes, std::span<const double> vols, double k) {
    require_same_length(abs_changes.size(), vols.size(), "backtest");
    if (abs_changes.empty()) throw DataError("backtest: empty series");
    Exceedance out;
    for (std::size_t i = 0; i < abs_changes.size(); ++i) {
        if (std::abs(abs_changes[i]) > k * vols[i]) out.days.push_back(i);
    }
    out.count = out.days.size();
    out.fraction = static_cast<double>(out.count) / static_cast<double>(abs_changes.size());
    return out;
}

std::vector<CoveragePoint> coverage_curve(std::span<const double> abs_changes, std::span<const double> vols,
                                          std::span<const double> k_grid) {
    std::vector<CoveragePoint> out;
    for (double k : k_grid) {
        const Exceedance e = backtest_exceedance(abs_changes, vols, k);
        out.push_back({k, 1.0 - e.fraction, 2.0 * normal_cdf(k) - 1.0});
    }
    return out;
}

OlsResult ols(std::span<const std::vector<double>> regressors, std::span<const double> y) {
    const auto n = static_cast<Eigen::Index>(y.size());
    const auto p = static_cast<Eigen::Index>(regressors.size() + 1);
    for (const auto& col : regressors) require_same_length(col.size(), y.size(), "regression");
    if (n <= p) throw DataError(fmt::format("regression needs more than {} observations, got {}", p, n));

    Eigen::MatrixXd x(n, p);
    x.col(0).setOnes();
    for (Eigen::Index j = 1; j < p; ++j)
        x.col(j) = Eigen::Map<const Eigen::VectorXd>(regressors[static_cast<std::size_t>(j - 1)].data(), n);
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);

    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
    const Eigen::VectorXd beta = cod.solve(yv);
    const Eigen::VectorXd resid = yv - x * beta;
    const double rss = resid.squaredNorm();
    const double tss = (yv.array() - yv.mean()).square().sum();

    OlsResult out;
    out.n = static_cast<std::size_t>(n);
    out.coef.assign(beta.data(), beta.data() + p);
    out.rank_deficient = cod.rank() < p;
    out.r2 = tss > 0.0 ? 1.0 - rss / tss : kNaN;
    out.adj_r2 = 1.0 - (1.0 - out.r2) * static_cast<double>(n - 1) / static_cast<double>(n - p);
    out.std_errors.assign(static_cast<std::size_t>(p), kNaN);
    if (!out.rank_deficient) {
        const Eigen::MatrixXd cov = (x.transpose() * x).inverse() * (rss / static_cast<double>(n - p));
        for (Eigen::Index j = 0; j < p; ++j) out.std_errors[static_cast<std::size_t>(j)] = std::sqrt(cov(j, j));
    }
    return out;
}

std::vector<R2Cell> futures_r2_surface(std::span<const std::vector<double>> stock, std::span<const double> t1,
                                       std::span<const std::vector<double>> futures, std::span<const double> t2,
                                       std::size_t min_days, int jobs) {
    require_same_length(stock.size(), t1.size(), "r2 surface (stock grid)");
    require_same_length(futures.size(), t2.size(), "r2 surface (futures grid)");
    std::vector<R2Cell> cells(t1.size() * t2.size());
    parallel_for(cells.size(), jobs, [&](std::size_t c) {
        const std::size_t i = c / t2.size(), j = c % t2.size();
        require_same_length(stock[i].size(), futures[j].size(), "r2 surface (days)");
        std::vector<double> y, x;
        for (std::size_t d = 0; d < stock[i].size(); ++d) {
            if (std::isfinite(stock[i][d]) && std::isfinite(futures[j][d])) {
                y.push_back(stock[i][d]);
                x.push_back(futures[j][d]);
            }
        }
        R2Cell& cell = cells[c];
        cell.t1 = t1[i];
        cell.t2 = t2[j];
        cell.n = y.size();
        if (y.size() < std::max<std::size_t>(min_days, 3)) {
            cell.r2 = cell.adj_r2 = kNaN;
            return;
        }
        const std::vector<std::vector<double>> cols = {x};
        const OlsResult fit = ols(cols, y);
        cell.r2 = fit.r2;
        cell.adj_r2 = fit.adj_r2;
    });
    if (std::none_of(cells.begin(), cells.end(), [](const R2Cell& c) { return std::isfinite(c.adj_r2); })) {
        throw DataError("r2 surface: no cell has enough paired days");
    }
    return cells;
}

OlsResult ar2_fit(std::span<const double> series) {
    if (series.size() < 6) throw DataError("AR(2) fit needs at least six observations");
    std::vector<std::vector<double>> lags(2);
    std::vector<double> y;
    for (std::size_t i = 2; i < series.size(); ++i) {
        y.push_back(series[i]);
        lags[0].push_back(series[i - 1]);
        lags[1].push_back(series[i - 2]);
    }
    return ols(lags, y);
}

double rmsre(std::span<const double> forecasts, std::span<const double> actual) {
    require_same_length(forecasts.size(), actual.size(), "rmsre");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        if (!std::isfinite(forecasts[i]) || !std::isfinite(actual[i])) continue;
        const double rel = (forecasts[i] - actual[i]) / forecasts[i];
        sum += rel * rel;
        ++n;
    }
    if (n == 0) throw DataError("rmsre: no forecast/actual pairs");
    return std::sqrt(sum / static_cast<double>(n));
}

namespace {

bool near_unit_root(double phi1, double phi2) {
    return spectral_radius(Mat2{{phi1, phi2, 1.0, 0.0}}) >= 0.97;
}

}  // namespace

ForecastReport ar2_forecast(std::span<const double> series, std::size_t train, int jobs) {
    if (train < 6) throw ConfigError("AR(2) training window must hold at least six values");
    if (series.size() < train + 2) throw DataError("AR(2) forecast needs at least train + 2 observations");
    ForecastReport report;
    report.model = "ar2";
    report.forecasts.assign(series.size(), kNaN);
    std::vector<char> unit(series.size(), 0), deficient(series.size(), 0);
    parallel_for(series.size() - train, jobs, [&](std::size_t k) {
        const std::size_t n = train + k;
        const OlsResult fit = ar2_fit(series.subspan(n - train, train));
        const auto& c = fit.coef;
        report.forecasts[n] = c[0] + c[1] * series[n - 1] + c[2] * series[n - 2];
        unit[n] = near_unit_root(c[1], c[2]);
        deficient[n] = fit.rank_deficient;
    });
    report.near_unit_root = std::find(unit.begin(), unit.end(), 1) != unit.end();
    report.rank_deficient = std::find(deficient.begin(), deficient.end(), 1) != deficient.end();
    report.n_forecasts = series.size() - train;
    report.rmsre = rmsre(report.forecasts, series);
    return report;
}

std::vector<ForecastReport> futures_lm_forecast(std::span<const double> stock,
                                                std::span<const std::vector<double>> futures_by_t,
                                                std::size_t train, int jobs) {
    if (train < 6) throw ConfigError("training window must hold at least six values");
    if (stock.size() < train + 2) throw DataError("forecast needs at least train + 2 observations");
    for (const auto& f : futures_by_t) require_same_length(f.size(), stock.size(), "futures forecast");

    const std::size_t days = stock.size() - train;
    std::vector<ForecastReport> reports(futures_by_t.size());
    for (auto& r : reports) {
        r.model = "lm";
        r.forecasts.assign(stock.size(), kNaN);
        r.n_forecasts = days;
    }
    std::vector<char> deficient(futures_by_t.size() * days, 0);
    parallel_for(futures_by_t.size() * days, jobs, [&](std::size_t task) {
        const std::size_t t = task / days, n = train + task % days;
        const auto& fut = futures_by_t[t];
        std::vector<std::vector<double>> x(2);
        std::vector<double> y;
        for (std::size_t i = n - train + 1; i < n; ++i) {
            if (!std::isfinite(stock[i]) || !std::isfinite(stock[i - 1]) || !std::isfinite(fut[i])) continue;
            y.push_back(stock[i]);
            x[0].push_back(stock[i - 1]);
            x[1].push_back(fut[i]);
        }
        if (y.size() < 4) return;
        const OlsResult fit = ols(x, y);
        reports[t].forecasts[n] = fit.coef[0] + fit.coef[1] * stock[n - 1] + fit.coef[2] * fut[n];
        deficient[task] = fit.rank_deficient;
    });
    for (std::size_t t = 0; t < reports.size(); ++t) {
        reports[t].rank_deficient =
            std::any_of(deficient.begin() + static_cast<std::ptrdiff_t>(t * days),
                        deficient.begin() + static_cast<std::ptrdiff_t>((t + 1) * days), [](char c) { return c != 0; });
        reports[t].rmsre = rmsre(reports[t].forecasts, stock);
    }
    return reports;
}

}  // namespace hawkesvol
