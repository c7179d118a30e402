#include "hawkesvol/econometrics.hpp"
#include "hawkesvol/errors.hpp"
#include "hawkesvol/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace hawkesvol;

namespace {

std::vector<double> normals(std::mt19937_64& rng, std::size_t n, double sd) {
    std::normal_distribution<double> z(0.0, sd);
    std::vector<double> out(n);
    for (auto& x : out) x = z(rng);
    return out;
}

bool within(double est, double se, double truth, double k = 3.0) { return std::abs(est - truth) <= k * se; }

}  // namespace

TEST_CASE("GJR one-step forecast by hand") {
    const GjrParams p{1e-6, 0.05, 0.10, 0.80};
    const std::vector<double> r = {0.01, -0.02, 0.005};
    const double g1 = 2e-4;
    const double g2 = 1e-6 + 0.05 * 1e-4 + 0.80 * g1;            // R_1 > 0
    const double g3 = 1e-6 + (0.05 + 0.10) * 4e-4 + 0.80 * g2;   // R_2 < 0
    const double g4 = 1e-6 + 0.05 * 2.5e-5 + 0.80 * g3;          // R_3 > 0
    const auto g = gjr_variance(p, r, g1);
    CHECK(g[0] == g1);
    CHECK(g[1] == doctest::Approx(g2).epsilon(1e-14));
    CHECK(g[2] == doctest::Approx(g3).epsilon(1e-14));
    CHECK(gjr_forecast(p, r, g1) == doctest::Approx(g4).epsilon(1e-14));
}

TEST_CASE("GJR variances stay positive under valid parameters") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        GjrParams p{1e-7 + 1e-5 * u(rng), 0.2 * u(rng), 0.0, 0.0};
        p.gamma = -p.alpha + 0.3 * u(rng);
        p.beta = std::max(0.0, (0.999 - p.alpha - 0.5 * p.gamma) * u(rng));
        REQUIRE_NOTHROW(validate(p));
        const auto r = normals(rng, 300, 0.05);
        for (double g : gjr_variance(p, r, 1e-4)) CHECK(g > 0.0);
    }
    CHECK_THROWS_AS(validate(GjrParams{1e-6, 0.1, 0.2, 0.85}), InvalidParams);
    CHECK_THROWS_AS(validate(GjrParams{1e-6, 0.1, -0.2, 0.5}), InvalidParams);
}

TEST_CASE("GJR on white noise") {
    std::mt19937_64 rng(11);
    const auto r = normals(rng, 3000, 0.01);
    const GjrFit fit = gjr_fit(r);
    CHECK(fit.converged);
    const double unconditional = fit.params.omega / (1.0 - fit.params.alpha - 0.5 * fit.params.gamma - fit.params.beta);
    CHECK(unconditional == doctest::Approx(sample_variance(r)).epsilon(0.05));
    CHECK(fit.params.alpha < 3.0 * fit.std_errors.alpha + 1e-3);
    CHECK(std::abs(fit.params.gamma) < 3.0 * fit.std_errors.gamma + 1e-3);
}

TEST_CASE("GJR recovers simulated parameters") {
    const GjrParams truth{2e-6, 0.05, 0.10, 0.85};
    int good = 0;
    const int trials = 10;
    for (int t = 0; t < trials; ++t) {
        const auto r = simulate_gjr(truth, 5000, 100 + t);
        const GjrFit fit = gjr_fit(r);
        REQUIRE(std::isfinite(fit.std_errors.beta));
        good += within(fit.params.omega, fit.std_errors.omega, truth.omega) &&
                within(fit.params.alpha, fit.std_errors.alpha, truth.alpha) &&
                within(fit.params.gamma, fit.std_errors.gamma, truth.gamma) &&
                within(fit.params.beta, fit.std_errors.beta, truth.beta);
    }
    CHECK(good >= 8);
}

TEST_CASE("GJR rolling forecast aligns with the window") {
    const auto r = simulate_gjr({2e-6, 0.05, 0.10, 0.85}, 230, 3);
    const auto serial = gjr_rolling_forecast(r, 200, 1);
    const auto threaded = gjr_rolling_forecast(r, 200, 3);
    for (std::size_t n = 0; n < 200; ++n) CHECK(std::isnan(serial[n]));
    for (std::size_t n = 200; n < r.size(); ++n) {
        CHECK(serial[n] > 0.0);
        CHECK(serial[n] == threaded[n]);
    }
    const auto past = std::span<const double>(r).subspan(10, 200);
    const GjrFit fit = gjr_fit(past);
    CHECK(serial[210] == doctest::Approx(std::sqrt(gjr_forecast(fit.params, past, fit.initial_variance))));
}

TEST_CASE("combined weights recover planted mixture") {
    std::mt19937_64 rng(21);
    std::lognormal_distribution<double> vol(std::log(0.01), 0.4);
    std::normal_distribution<double> z;
    const std::size_t n = 2000;
    std::vector<double> g(n), h(n), r(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = vol(rng);
        h[i] = vol(rng);
        r[i] = (0.5 * g[i] + 0.5 * h[i]) * z(rng);
    }
    const CombinedWeights w = combined_weights(g, h, r);
    CHECK(w.converged);
    CHECK_FALSE(w.collinear);
    CHECK(within(w.theta1, w.se1, 0.5));
    CHECK(within(w.theta2, w.se2, 0.5));

    // relabelling the two inputs swaps the weights and keeps the likelihood
    const CombinedWeights swapped = combined_weights(h, g, r);
    CHECK(swapped.loglik == doctest::Approx(w.loglik).epsilon(1e-10));
    CHECK(swapped.theta1 == doctest::Approx(w.theta2).epsilon(1e-4));
    CHECK(swapped.theta2 == doctest::Approx(w.theta1).epsilon(1e-4));
}

TEST_CASE("combined weights with an uninformative Hawkes series") {
    std::mt19937_64 rng(22);
    std::lognormal_distribution<double> vol(std::log(0.01), 0.3);
    std::normal_distribution<double> z;
    std::vector<double> g(500), zero(500, 0.0), r(500);
    double ratio = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = vol(rng);
        r[i] = 1.3 * g[i] * z(rng);
        ratio += r[i] * r[i] / (g[i] * g[i]);
    }
    const CombinedWeights w = combined_weights(g, zero, r);
    CHECK(w.collinear);
    CHECK(std::isnan(w.se2));
    CHECK(w.theta1 == doctest::Approx(std::sqrt(ratio / 500.0)));

    std::vector<double> scaled(g);
    for (auto& x : scaled) x *= 2.0;
    CHECK(combined_weights(g, scaled, r).collinear);
}

TEST_CASE("combined weights favour an informative late-day proxy") {
    std::mt19937_64 rng(23);
    std::lognormal_distribution<double> sigma(std::log(0.01), 0.5);
    std::lognormal_distribution<double> noise(0.0, 0.1);
    std::normal_distribution<double> z;
    const std::size_t n = 1500;
    std::vector<double> g(n), h(n), r(n), s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = sigma(rng);
    for (std::size_t i = 0; i < n; ++i) {
        // GARCH-like: yesterday's level, heavily smoothed; Hawkes-like: today's level, noisy
        g[i] = 0.5 * 0.01 + 0.5 * (i > 0 ? s[i - 1] : 0.01);
        h[i] = s[i] * noise(rng);
        r[i] = s[i] * z(rng);
    }
    const CombinedWeights w = combined_weights(g, h, r);
    CHECK(w.theta2 > w.theta1);
}

TEST_CASE("exceedance and coverage") {
    std::mt19937_64 rng(31);
    const std::size_t n = 20000;
    std::lognormal_distribution<double> vol(0.0, 0.3);
    std::normal_distribution<double> z;
    std::vector<double> sigma(n), change(n);
    for (std::size_t i = 0; i < n; ++i) {
        sigma[i] = vol(rng);
        change[i] = std::abs(sigma[i] * z(rng));
    }
    const Exceedance e = backtest_exceedance(change, sigma, 2.0);
    const double p = 2.0 * (1.0 - normal_cdf(2.0));
    CHECK(std::abs(e.fraction - p) < 3.0 * std::sqrt(p * (1 - p) / n));
    CHECK(e.days.size() == e.count);
    for (std::size_t d : e.days) CHECK(change[d] > 2.0 * sigma[d]);
    CHECK(backtest_exceedance(change, sigma, 0.0).fraction == 1.0);

    std::vector<double> grid;
    for (int k = 0; k <= 40; ++k) grid.push_back(0.1 * k);
    grid.push_back(50.0);
    const auto curve = coverage_curve(change, sigma, grid);
    CHECK(curve.front().fraction == 0.0);
    CHECK(curve.front().reference == 0.0);
    CHECK(curve.back().fraction == 1.0);
    for (const auto& pt : curve) {
        const double q = pt.reference;
        CHECK(std::abs(pt.fraction - q) <= 3.0 * std::sqrt(q * (1 - q) / n) + 1e-12);
        CHECK(pt.fraction + backtest_exceedance(change, sigma, pt.k).fraction == 1.0);
    }

    const std::vector<double> short_vols(3, 1.0);
    CHECK_THROWS_AS(backtest_exceedance(change, short_vols), DataError);
}

TEST_CASE("ordinary least squares") {
    std::mt19937_64 rng(41);
    const auto x = normals(rng, 100, 1.0);
    std::vector<double> y(100);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 2.0 - 3.0 * x[i];
    const std::vector<std::vector<double>> cols = {x};
    const OlsResult exact = ols(cols, y);
    CHECK(exact.coef[0] == doctest::Approx(2.0));
    CHECK(exact.coef[1] == doctest::Approx(-3.0));
    CHECK(exact.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(exact.adj_r2 == doctest::Approx(1.0).epsilon(1e-12));

    for (int trial = 0; trial < 50; ++trial) {
        const auto a = normals(rng, 60, 1.0), b = normals(rng, 60, 1.0);
        const std::vector<std::vector<double>> c = {a};
        const OlsResult fit = ols(c, b);
        CHECK(fit.adj_r2 <= fit.r2);
        CHECK(fit.adj_r2 == doctest::Approx(1.0 - (1.0 - fit.r2) * 59.0 / 58.0));
        // the one-regressor R^2 is the squared correlation
        const double ma = mean(a), mb = mean(b);
        double sab = 0, saa = 0, sbb = 0;
        for (std::size_t i = 0; i < 60; ++i) {
            sab += (a[i] - ma) * (b[i] - mb);
            saa += (a[i] - ma) * (a[i] - ma);
            sbb += (b[i] - mb) * (b[i] - mb);
        }
        CHECK(fit.r2 == doctest::Approx(sab * sab / (saa * sbb)));
    }
}

TEST_CASE("R-squared surface") {
    std::mt19937_64 rng(51);
    std::normal_distribution<double> z;
    const std::size_t days = 2000;
    std::vector<double> t1, t2;
    for (int i = 1; i <= 13; ++i) t1.push_back(1800.0 * i);  // 0.5 h .. 6.5 h
    for (int j = 1; j <= 66; ++j) t2.push_back(900.0 * j);  // 0.25 h .. 16.5 h
    const double peak1 = 7200.0, peak2 = 6300.0, top = std::pow(0.52, 0.25);
    auto loading = [&](double t, double peak) { return top * std::exp(-std::abs(t - peak) / 3600.0); };

    std::vector<double> factor(days);
    for (auto& f : factor) f = z(rng);
    std::vector<std::vector<double>> stock, futures;
    for (double t : t1) {
        const double rho = loading(t, peak1);
        std::vector<double> s(days);
        for (std::size_t d = 0; d < days; ++d) s[d] = 1.0 + 0.1 * (rho * factor[d] + std::sqrt(1 - rho * rho) * z(rng));
        stock.push_back(s);
    }
    for (double t : t2) {
        const double rho = loading(t, peak2);
        std::vector<double> f(days);
        for (std::size_t d = 0; d < days; ++d) f[d] = 2.0 + 0.3 * (rho * factor[d] + std::sqrt(1 - rho * rho) * z(rng));
        futures.push_back(f);
    }
    // an exactly affine cell and a thin cell
    futures.push_back(stock[4]);
    for (auto& x : futures.back()) x = 3.0 * x - 1.0;
    t2.push_back(60000.0);
    futures.push_back(std::vector<double>(days, std::nan("")));
    for (std::size_t d = 0; d < 20; ++d) futures.back()[d] = z(rng);
    t2.push_back(61000.0);

    const auto cells = futures_r2_surface(stock, t1, futures, t2, 30, 2);
    REQUIRE(cells.size() == t1.size() * t2.size());
    const R2Cell* best = nullptr;
    for (const auto& c : cells) {
        if (c.t2 == 60000.0) {
            if (c.t1 == t1[4]) CHECK(c.adj_r2 == doctest::Approx(1.0).epsilon(1e-12));
            continue;
        }
        if (c.t2 == 61000.0) {
            CHECK(std::isnan(c.adj_r2));
            CHECK(c.n == 20);
            continue;
        }
        CHECK(c.adj_r2 <= c.r2);
        if (best == nullptr || c.adj_r2 > best->adj_r2) best = &c;
    }
    REQUIRE(best != nullptr);
    CHECK(best->t1 == peak1);
    CHECK(best->t2 == peak2);
    CHECK(std::abs(best->adj_r2 - 0.52) < 0.05);

    // independent series: adjusted R^2 near zero
    const auto noise = std::vector<std::vector<double>>{normals(rng, days, 1.0)};
    const std::vector<double> one = {1.0};
    const auto null_cell = futures_r2_surface(noise, one, std::vector<std::vector<double>>{normals(rng, days, 1.0)}, one);
    CHECK(std::abs(null_cell[0].adj_r2) < 0.01);

    const std::vector<std::vector<double>> thin = {std::vector<double>(10, 1.0)};
    CHECK_THROWS_AS(futures_r2_surface(thin, one, thin, one), DataError);
}

TEST_CASE("RMSRE properties") {
    const std::vector<double> f = {1.0, 2.0, 4.0}, a = {1.5, 1.0, 4.0};
    const double want = std::sqrt((0.25 + 0.25 + 0.0) / 3.0);
    CHECK(rmsre(f, a) == doctest::Approx(want));
    std::vector<double> f2 = f, a2 = a;
    for (auto& x : f2) x *= 7.3;
    for (auto& x : a2) x *= 7.3;
    CHECK(rmsre(f2, a2) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("AR(2) forecasting") {
    const std::vector<double> flat(450, 0.8);
    const ForecastReport constant = ar2_forecast(flat, 400);
    CHECK(constant.n_forecasts == 50);
    CHECK(constant.rmsre < 1e-10);
    CHECK(constant.forecasts[420] == doctest::Approx(0.8).epsilon(1e-10));

    std::mt19937_64 rng(61);
    std::normal_distribution<double> z;
    std::vector<double> ar(5000, 1.0);
    for (std::size_t n = 2; n < ar.size(); ++n) ar[n] = 0.3 + 0.5 * ar[n - 1] + 0.2 * ar[n - 2] + 0.05 * z(rng);
    const OlsResult fit = ar2_fit(ar);
    CHECK(within(fit.coef[0], fit.std_errors[0], 0.3));
    CHECK(within(fit.coef[1], fit.std_errors[1], 0.5));
    CHECK(within(fit.coef[2], fit.std_errors[2], 0.2));

    std::vector<double> white(1400);
    for (auto& x : white) x = 1.0 + 0.1 * z(rng);
    const ForecastReport wn = ar2_forecast(white, 400, 2);
    const std::span<const double> tail(white.data() + 400, 1000);
    const double cv = std::sqrt(sample_variance(tail)) / mean(tail);
    CHECK(wn.rmsre == doctest::Approx(cv).epsilon(0.05));
    CHECK_FALSE(wn.near_unit_root);

    std::vector<double> walk(500, 1.0);
    for (std::size_t n = 1; n < walk.size(); ++n) walk[n] = walk[n - 1] + 0.01 * z(rng);
    CHECK(ar2_forecast(walk, 400).near_unit_root);
    CHECK_THROWS_AS(ar2_forecast(flat, 449), DataError);
}

TEST_CASE("futures-augmented forecasting") {
    std::mt19937_64 rng(71);
    std::normal_distribution<double> z;
    const std::size_t days = 1000;
    // Futures measured closer to the open carry more of today's shock.
    const std::vector<double> strength = {0.2, 0.5, 0.8, 1.0};
    std::vector<double> shock(days), stock(days, 1.0);
    std::vector<std::vector<double>> futures(strength.size(), std::vector<double>(days));
    for (auto& s : shock) s = z(rng);
    for (std::size_t n = 0; n < days; ++n) {
        for (std::size_t t = 0; t < strength.size(); ++t) {
            const double w = strength[t];
            futures[t][n] = 0.8 + 0.1 * (w * shock[n] + std::sqrt(1 - w * w) * z(rng));
        }
        if (n > 0) stock[n] = 0.3 + 0.4 * stock[n - 1] + 0.5 * (0.8 + 0.1 * shock[n]) + 0.02 * z(rng);
    }
    const ForecastReport ar = ar2_forecast(stock, 400);
    const auto lm = futures_lm_forecast(stock, futures, 400, 2);
    REQUIRE(lm.size() == strength.size());
    for (std::size_t t = 0; t < lm.size(); ++t) {
        CHECK(lm[t].rmsre < ar.rmsre);
        if (t > 0) CHECK(lm[t].rmsre < lm[t - 1].rmsre);
    }

    // a predictor with no signal costs little
    const std::vector<std::vector<double>> junk = {normals(rng, days, 1.0)};
    const auto null_lm = futures_lm_forecast(stock, junk, 400);
    CHECK(null_lm[0].rmsre == doctest::Approx(ar.rmsre).epsilon(0.05));
}
