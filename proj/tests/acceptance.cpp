// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.
// Usage: acceptance [criterion numbers...]   (default: all of 1..10)

#include "cli_support.hpp"
#include "hawkesvol/cli.hpp"
#include "hawkesvol/econometrics.hpp"
#include "hawkesvol/estimate.hpp"
#include "hawkesvol/marketdata.hpp"
#include "hawkesvol/moments.hpp"
#include "hawkesvol/parallel.hpp"
#include "hawkesvol/simulate.hpp"
#include "support/oracles.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace hawkesvol;
namespace oracle = hawkesvol::testing;

namespace {

const std::string kData = HAWKESVOL_DATA_DIR;

struct Verdict {
    bool pass;
    std::string detail;
};

double rel(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }
double rel(const Mat2& got, const Mat2& want) { return (got - want).max_abs() / std::max(want.max_abs(), 1e-300); }
double rel(const Vec2& got, const Vec2& want) {
    return std::max(std::abs(got[0] - want[0]), std::abs(got[1] - want[1])) /
           std::max(std::max(std::abs(want[0]), std::abs(want[1])), 1e-300);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

MarkSummaries perturbed_summaries(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MarkSummaries m = MarkSummaries::geometric({{1.2 + u(rng), 1.2 + u(rng)}});
    for (double& x : m.zbar_ll.a) x *= 1.0 + 0.1 * u(rng);
    for (double& x : m.zbar_nl.a) x *= 1.0 + 0.1 * u(rng);
    return m;
}

// 1. Poisson limit
Verdict poisson_limit() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        MarkedHawkesParams p;
        p.base.mu = {{0.01 + 2.0 * u(rng), 0.01 + 2.0 * u(rng)}};
        p.base.beta = {{0.1 + 3.0 * u(rng), 0.1 + 3.0 * u(rng)}};
        const double t = std::pow(10.0, 6.0 * u(rng));
        const double want = (p.base.mu[0] + p.base.mu[1]) * t;
        const auto ones = MarkSummaries::ones();
        for (double got : {variance_unmarked(p.base, t), variance_unmarked(p.base, t, Transient::included),
                           variance_marked_full(p, ones, t).value,
                           variance_marked_restricted(p, ones, t, MarkDependence::dependent),
                           variance_marked_restricted(p, ones, t, MarkDependence::independent)}) {
            worst = std::max(worst, rel(got, want));
        }
    }
    return {worst < 1e-12, fmt::format("max relative error {:.2e} over 1000 draws (tolerance 1e-12)", worst)};
}

// 2. Closed form against Monte Carlo
Verdict closed_form_vs_mc() {
    std::mt19937_64 rng(2);
    const double t = 1e4;
    const int paths = 10000;
    const MarkModel marks = MarkModel::geometric(1.4);
    const MarkModel unit = MarkModel::constant();
    bool pass = true;
    double worst_z = 0.0;
    std::string failures;
    for (int set = 0; set < 5; ++set) {
        std::uniform_real_distribution<double> radius(0.4, 0.75);
        const MarkedHawkesParams p = oracle::random_stable(rng, marks.summaries(), radius(rng));
        const double rho_unmarked = stability(MarkedHawkesParams::unmarked(p.base), MarkSummaries::ones()).spectral_radius;
        const double rho_marked = stability(p, marks.summaries()).spectral_radius;
        if (!(rho_marked < 0.8 && rho_unmarked < 0.8)) return {false, "generated a set with radius >= 0.8"};

        const auto unmarked_p = MarkedHawkesParams::unmarked(p.base);
        const McEstimate mc_plain = mc_variance(unmarked_p, unit, t, paths, path_seed(20, set), 0);
        const McEstimate mc_marked = mc_variance(p, marks, t, paths, path_seed(21, set), 0);
        const auto s = marks.summaries();
        const std::pair<const char*, std::pair<double, McEstimate>> rows[] = {
            {"unmarked", {variance_unmarked(p.base, t, Transient::included), mc_plain}},
            {"full", {variance_marked_full(p, s, t).value, mc_marked}},
            {"restricted", {variance_marked_restricted(p, s, t, MarkDependence::dependent), mc_marked}},
            {"independent", {variance_marked_restricted(p, s, t, MarkDependence::independent), mc_marked}},
        };
        for (const auto& [name, v] : rows) {
            const double z = (v.first - v.second.value) / v.second.std_error;
            worst_z = std::max(worst_z, std::abs(z));
            if (std::abs(z) >= 3.0) {
                pass = false;
                failures += fmt::format(" set{}:{} z={:.2f}", set, name, z);
            }
        }
    }
    return {pass, fmt::format("5 sets x 4 formulas, 10000 paths at t=1e4, max |z| {:.2f} (tolerance 3){}", worst_z,
                              failures)};
}

// 3. Marked formulas with unit marks reduce to the unmarked ones
Verdict marked_reduction() {
    std::mt19937_64 rng(3);
    double worst = 0.0;
    const auto ones = MarkSummaries::ones();
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = oracle::random_stable(rng, ones, 0.2 + 0.75 * std::uniform_real_distribution<double>()(rng), false);
        const auto u = solve_ab_unmarked(p.base);
        const auto m = solve_ab_marked(p, ones);
        const auto r = solve_ab_restricted(p, ones, MarkDependence::dependent);
        const auto ri = solve_ab_restricted(p, ones, MarkDependence::independent);
        worst = std::max({worst, rel(expected_intensity_marked(p, ones), expected_intensity(p.base)),
                          rel(second_moment_marked(p, ones), second_moment_unmarked(p.base))});
        for (const auto* s : {&m, &r, &ri}) {
            worst = std::max({worst, rel(s->elam, u.elam), rel(s->elam2, u.elam2), rel(s->a_mat, u.a_mat),
                              rel(s->b_mat, u.b_mat)});
        }
        for (double t : {60.0, 23400.0}) {
            const double base = variance_unmarked(p.base, t);
            worst = std::max({worst, rel(variance_marked_full(p, ones, t).value, base),
                              rel(variance_marked_restricted(p, ones, t, MarkDependence::dependent), base),
                              rel(variance_marked_restricted(p, ones, t, MarkDependence::independent), base)});
        }
    }
    return {worst < 1e-9, fmt::format("max relative difference {:.2e} over 100 sets (tolerance 1e-9)", worst)};
}

// 4. Linear-system residuals
Verdict linear_systems() {
    std::mt19937_64 rng(4);
    double worst[4] = {0, 0, 0, 0};
    for (int trial = 0; trial < 1000; ++trial) {
        const auto plain = oracle::random_stable(rng, MarkSummaries::ones(), 0.05 + 0.9 * std::uniform_real_distribution<double>()(rng), false).base;
        worst[0] = std::max(worst[0], oracle::relative_residual_ell_unmarked(plain, expected_intensity(plain),
                                                                             second_moment_unmarked(plain)));
        const MarkSummaries marks = perturbed_summaries(rng);
        const auto p = oracle::random_stable(rng, marks, 0.05 + 0.85 * std::uniform_real_distribution<double>()(rng));
        const Vec2 e = expected_intensity_marked(p, marks);
        worst[1] = std::max(worst[1], oracle::relative_residual_ell_marked(p, marks, e, second_moment_marked(p, marks)));
        const auto s = solve_ab_marked(p, marks);
        const Mat2 a_nl = s.a_mat.transpose();
        const Mat2 b_nl = s.b_mat.transpose();
        worst[2] = std::max(worst[2], oracle::relative_residual_eq_a(p, marks, marks.zbar_nl, s.elam, a_nl));
        worst[3] = std::max(worst[3],
                            oracle::relative_residual_eq_b(p, marks, marks.zbar_nl, s.elam, s.elam2, a_nl, b_nl));
    }
    const double max_all = std::max({worst[0], worst[1], worst[2], worst[3]});
    return {max_all < 1e-8,
            fmt::format("1000 inputs; max residual E_ll {:.1e}, E_ll marked {:.1e}, A {:.1e}, B {:.1e} (tolerance 1e-8)",
                        worst[0], worst[1], worst[2], worst[3])};
}

// 5. Likelihood recursion and gradient
Verdict likelihood() {
    std::mt19937_64 rng(5);
    const MarkModel model = MarkModel::geometric(1.6);
    double worst_ll = 0.0;
    std::size_t largest = 0;
    for (int stream = 0; stream < 200; ++stream) {
        const auto p = oracle::random_stable(rng, model.summaries(), 0.7);
        SimPath path = simulate(p, model, 1500.0, rng());
        if (path.events.size() > 2000) path.events.resize(2000);
        largest = std::max(largest, path.events.size());
        auto q = p;
        q.base.beta = 1.2 * q.base.beta;
        LikelihoodOptions o;
        o.init = stream % 2 == 0 ? InitMode::stationary : InitMode::baseline;
        const double fast = log_likelihood(q, path.events, 1500.0, o);
        const double slow = oracle::direct_log_likelihood(q, path.events, 0.0, 1500.0, o.init == InitMode::stationary, true);
        worst_ll = std::max(worst_ll, std::abs(fast - slow) / std::max(1.0, std::abs(slow)));
    }
    double worst_grad = 0.0;
    for (int point = 0; point < 20; ++point) {
        const auto p = oracle::random_stable(rng, model.summaries(), 0.6);
        const SimPath path = simulate(p, model, 1500.0, rng());
        const auto got = log_likelihood_with_gradient(p, path.events, 1500.0);
        const ParamVector theta = to_array(p);
        for (std::size_t k = 0; k < kParamCount; ++k) {
            // five-point stencil: a large enough step keeps rounding noise far below the tolerance
            const double h = 1e-4 * std::max(std::abs(theta[k]), 1e-2);
            auto at = [&](double offset) {
                ParamVector x = theta;
                x[k] += offset;
                return log_likelihood(from_array(x), path.events, 1500.0);
            };
            const double fd = (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h);
            worst_grad = std::max(worst_grad, std::abs(got.gradient[k] - fd) / std::max(std::abs(fd), 1.0));
        }
    }
    return {worst_ll < 1e-8 && worst_grad < 1e-5,
            fmt::format("200 streams (<= {} events): max relative gap {:.1e} (tolerance 1e-8); 20 points: max gradient "
                        "gap {:.1e} (tolerance 1e-5)",
                        largest, worst_ll, worst_grad)};
}

// 6. Estimator recovery
Verdict recovery() {
    MarkedHawkesParams truth;
    truth.base = {{{0.1, 0.12}}, {{0.2, 0.1, 0.15, 0.25}}, {{0.6, 0.7}}};
    truth.eta = {{0.03, 0.01, 0.02, 0.04}};
    const MarkModel model = MarkModel::geometric(1.5);
    const double horizon = 2e5;
    const int trials = 50;
    const auto want = to_array(truth);
    std::array<int, kParamCount> inside{};
    int joint = 0, usable = 0;
    std::vector<FitResult> fits(trials);
    parallel_for(static_cast<std::size_t>(trials), 0, [&](std::size_t trial) {
        const SimPath path = simulate(truth, model, horizon, path_seed(6, trial));
        fits[trial] = fit_mle(path.events, horizon);
    });
    for (const FitResult& fit : fits) {
        if (!fit.converged || !fit.se_available) continue;
        ++usable;
        const auto got = to_array(fit.params);
        const auto se = to_array(fit.std_errors);
        bool all = true;
        for (std::size_t k = 0; k < kParamCount; ++k) {
            const bool ok = std::abs(got[k] - want[k]) <= 3.0 * se[k];
            inside[k] += ok ? 1 : 0;
            all = all && ok;
        }
        joint += all ? 1 : 0;
    }
    int worst = trials;
    std::string per;
    for (std::size_t k = 0; k < kParamCount; ++k) {
        worst = std::min(worst, inside[k]);
        per += fmt::format(" {}:{}", kParamKeys[k], inside[k]);
    }
    const bool pass = worst >= static_cast<int>(std::ceil(0.9 * trials));
    return {pass, fmt::format("{} trials at horizon 2e5, {} converged with SEs; per-parameter hits within 3 SE{}; "
                              "worst {}/{} (need >= 90%); all twelve at once in {}/{}",
                              trials, usable, per, worst, trials, joint, trials)};
}

// 7. Residual calibration
Verdict residual_calibration() {
    MarkedHawkesParams truth;
    truth.base = {{{0.1, 0.12}}, {{0.2, 0.1, 0.15, 0.25}}, {{0.6, 0.7}}};
    truth.eta = {{0.03, 0.01, 0.02, 0.04}};
    const MarkModel model = MarkModel::geometric(1.5);
    const double horizon = 2e4;
    std::vector<double> pvalues(100);
    parallel_for(pvalues.size(), 0, [&](std::size_t run) {
        const SimPath path = simulate(truth, model, horizon, path_seed(7, run));
        pvalues[run] = residual_report(truth, path.events, horizon).ks_pvalue;
    });
    int passes = 0;
    for (double pv : pvalues) passes += pv > 0.01 ? 1 : 0;
    return {passes >= 95, fmt::format("KS at level 0.01 passed in {}/100 runs (need >= 95)", passes)};
}

// 8. Backtest calibration
Verdict backtest_calibration() {
    MarkedHawkesParams p;
    p.base = {{{0.15, 0.15}}, {{0.3, 0.6, 0.6, 0.3}}, {{2.0, 2.0}}};
    p.eta = {{0.05, 0.1, 0.1, 0.05}};
    const MarkModel model = MarkModel::geometric(1.5);
    const double day = 23400.0, tick = 0.01;
    const std::size_t days = 2000;
    const double vol = price_volatility(variance_marked_full(p, model.summaries(), day).value, tick);
    std::vector<double> changes(days);
    parallel_for(days, 0, [&](std::size_t d) {
        const SimPath path = simulate(p, model, day, path_seed(8, d));
        double net = 0.0;
        for (const Event& e : path.events) net += sign(e.side) * e.mark;
        changes[d] = std::abs(net) * tick;
    });
    const std::vector<double> vols(days, vol);
    const Exceedance e = backtest_exceedance(changes, vols, 2.0);
    const std::vector<double> ks = {1.0, 2.0, 3.0};
    const auto curve = coverage_curve(changes, vols, ks);
    double worst_gap = 0.0;
    for (const auto& pt : curve) worst_gap = std::max(worst_gap, std::abs(pt.fraction - pt.reference));
    const bool pass = e.fraction >= 0.03 && e.fraction <= 0.07 && worst_gap <= 0.05;
    return {pass, fmt::format("{} simulated days: 2-sigma exceedance {:.2f}% (need 3-7%); coverage at k=1,2,3 "
                              "{:.3f}/{:.3f}/{:.3f} vs {:.3f}/{:.3f}/{:.3f}, max gap {:.1f} pp (need <= 5)",
                              days, 100.0 * e.fraction, curve[0].fraction, curve[1].fraction, curve[2].fraction,
                              curve[0].reference, curve[1].reference, curve[2].reference, 100.0 * worst_gap)};
}

// 9. Filtering fixture
Verdict filtering_fixture() {
    std::ifstream in(kData + "/ticks_fixture.csv");
    QualityReport q;
    const auto mids = read_mid_prices(in, &q);
    FilterOptions fo;
    fo.session_open_ns = 1'569'936'600'000'000'000;
    const EventStream stream = filter_grid(mids, fo);
    std::ostringstream csv;
    write_event_csv(csv, stream.events);
    const std::string expected = slurp(kData + "/events_fixture.csv");
    const bool library_ok = csv.str() == expected;

    const auto out = (std::filesystem::temp_directory_path() / "hawkesvol_acceptance_events.csv").string();
    std::ostringstream sink;
    const int code = cli::run({"hawkesvol", "filter", "--input", kData + "/ticks_fixture.csv", "--output", out,
                               "--session-open-ns", "1569936600000000000"},
                              sink, sink);
    const bool cli_ok = code == 0 && slurp(out) == expected;
    std::filesystem::remove(out);
    std::filesystem::remove(out + ".manifest");

    bool multi_tick = false;
    for (const Event& e : stream.events) multi_tick = multi_tick || e.mark > 1;
    return {library_ok && cli_ok && multi_tick,
            fmt::format("library output {}, command-line output {}; {} events, multi-tick mark present: {}",
                        library_ok ? "identical" : "differs", cli_ok ? "identical" : "differs", stream.events.size(),
                        multi_tick ? "yes" : "no")};
}

// 10. Econometrics recovery
Verdict econometrics() {
    std::vector<std::string> notes;
    bool pass = true;
    auto within = [](double est, double se, double truth) { return std::abs(est - truth) <= 3.0 * se; };

    {
        const GjrParams truth{2e-6, 0.05, 0.10, 0.85};
        const GjrFit fit = gjr_fit(simulate_gjr(truth, 5000, 10));
        const bool ok = within(fit.params.omega, fit.std_errors.omega, truth.omega) &&
                        within(fit.params.alpha, fit.std_errors.alpha, truth.alpha) &&
                        within(fit.params.gamma, fit.std_errors.gamma, truth.gamma) &&
                        within(fit.params.beta, fit.std_errors.beta, truth.beta);
        pass = pass && ok;
        notes.push_back(fmt::format("GJR {} (alpha {:.3f}+-{:.3f}, gamma {:.3f}+-{:.3f}, beta {:.3f}+-{:.3f})",
                                    ok ? "ok" : "MISS", fit.params.alpha, fit.std_errors.alpha, fit.params.gamma,
                                    fit.std_errors.gamma, fit.params.beta, fit.std_errors.beta));
    }
    {
        std::mt19937_64 rng(101);
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
        const bool ok = w.converged && within(w.theta1, w.se1, 0.5) && within(w.theta2, w.se2, 0.5);
        pass = pass && ok;
        notes.push_back(fmt::format("weights {} ({:.3f}+-{:.3f}, {:.3f}+-{:.3f})", ok ? "ok" : "MISS", w.theta1, w.se1,
                                    w.theta2, w.se2));
    }
    {
        std::mt19937_64 rng(102);
        std::normal_distribution<double> z;
        const std::size_t days = 2000;
        std::vector<double> t1, t2;
        for (int i = 1; i <= 13; ++i) t1.push_back(1800.0 * i);
        for (int j = 1; j <= 66; ++j) t2.push_back(900.0 * j);
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
        const auto cells = futures_r2_surface(stock, t1, futures, t2, 30, 0);
        const R2Cell* best = &cells.front();
        for (const auto& c : cells)
            if (c.adj_r2 > best->adj_r2) best = &c;
        const bool ok = best->t1 == peak1 && best->t2 == peak2 && std::abs(best->adj_r2 - 0.52) <= 0.05;
        pass = pass && ok;
        notes.push_back(fmt::format("R2 peak {} at ({:.0f}, {:.0f}) = {:.3f}", ok ? "ok" : "MISS", best->t1, best->t2,
                                    best->adj_r2));
    }
    {
        std::mt19937_64 rng(103);
        std::normal_distribution<double> z;
        const std::size_t days = 1000;
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
        const auto lm = futures_lm_forecast(stock, futures, 400, 0);
        bool ok = true;
        std::string values;
        for (const auto& f : lm) {
            ok = ok && f.rmsre < ar.rmsre;
            values += fmt::format(" {:.4f}", f.rmsre);
        }
        pass = pass && ok;
        notes.push_back(fmt::format("forecast {} (AR2 {:.4f}, futures{})", ok ? "ok" : "MISS", ar.rmsre, values));
    }
    std::string detail;
    for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
    return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"poisson limit", poisson_limit},
        {"closed form vs Monte Carlo", closed_form_vs_mc},
        {"marked-to-unmarked reduction", marked_reduction},
        {"linear-system residuals", linear_systems},
        {"likelihood recursion and gradient", likelihood},
        {"estimator recovery", recovery},
        {"residual calibration", residual_calibration},
        {"backtest calibration", backtest_calibration},
        {"filtering fixture", filtering_fixture},
        {"econometrics recovery", econometrics},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!selected.empty() && selected.count(id) == 0) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v{false, ""};
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += v.pass ? 0 : 1;
        std::cout << fmt::format("{} criterion {:>2} {}: {} [{:.1f}s]", v.pass ? "PASS" : "FAIL", id,
                                 criteria[k].first, v.detail, secs)
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
