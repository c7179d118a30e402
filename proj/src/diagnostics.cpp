#include "hawkesvol/errors.hpp"
#include "hawkesvol/estimate.hpp"
#include "hawkesvol/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace hawkesvol {

ResidualReport residual_report(const MarkedHawkesParams& p, std::span<const Event> events, double horizon,
                               const LikelihoodOptions& options) {
    const IntensityTrace trace = trace_intensity(p, events, horizon, options);
    ResidualReport report;
    double last[2] = {0.0, 0.0};
    bool seen[2] = {false, false};
    for (std::size_t k = 0; k < events.size(); ++k) {
        const std::size_t side = index(events[k].side);
        const double here = trace.compensator[k][side];
        if (seen[side]) report.residuals.push_back(here - last[side]);
        last[side] = here;
        seen[side] = true;
    }
    if (report.residuals.size() < 10) throw DataError("fewer than 10 residuals");

    const KsResult ks = ks_unit_exponential(report.residuals);
    report.ks_statistic = ks.statistic;
    report.ks_pvalue = ks.pvalue;

    std::vector<double> sorted = report.residuals;
    std::sort(sorted.begin(), sorted.end());
    for (int k = 1; k < 200; ++k) {
        const double prob = k / 200.0;
        report.qq_points.emplace_back(-std::log1p(-prob), quantile_sorted(sorted, prob));
    }
    return report;
}

std::pair<double, double> weighted_mark_moments(std::span<const int> marks, std::span<const double> weights) {
    if (marks.size() != weights.size()) throw ConfigError("marks and weights differ in length");
    double total = 0.0, first = 0.0, second = 0.0;
    for (std::size_t k = 0; k < marks.size(); ++k) {
        const double z = marks[k];
        total += weights[k];
        first += weights[k] * z;
        second += weights[k] * z * z;
    }
    if (!(total > 0.0)) throw DataError("zero total weight in mark summary");
    return {first / total, second / total};
}

MarkSummaries mark_summaries(const MarkedHawkesParams& p, std::span<const Event> events, double horizon,
                             SummaryMode mode, const LikelihoodOptions& options) {
    std::vector<int> marks[2];
    for (const Event& e : events) marks[index(e.side)].push_back(e.mark);
    if (marks[0].empty() || marks[1].empty()) throw DataError("mark summaries need events on both sides");

    if (mode == SummaryMode::independent) {
        Vec2 first, second;
        for (std::size_t j = 0; j < 2; ++j) {
            const std::vector<double> ones(marks[j].size(), 1.0);
            std::tie(first[j], second[j]) = weighted_mark_moments(marks[j], ones);
        }
        return MarkSummaries::independent(first, second);
    }

    const IntensityTrace trace = trace_intensity(p, events, horizon, options);
    // Weights at type-j events: lambda_j, lambda_i lambda_j, and N_i(tau-) lambda_j with N tick-weighted.
    std::vector<double> w_lam[2], w_ll[2][2], w_nl[2][2];
    Vec2 weighted_count{};
    for (std::size_t k = 0; k < events.size(); ++k) {
        const std::size_t j = index(events[k].side);
        const Vec2& lam = trace.intensity[k];
        w_lam[j].push_back(lam[j]);
        for (std::size_t i = 0; i < 2; ++i) {
            w_ll[i][j].push_back(lam[i] * lam[j]);
            w_nl[i][j].push_back(weighted_count[i] * lam[j]);
        }
        weighted_count[j] += events[k].mark;
    }

    MarkSummaries out;
    for (std::size_t j = 0; j < 2; ++j) {
        const auto [first, second] = weighted_mark_moments(marks[j], w_lam[j]);
        for (std::size_t i = 0; i < 2; ++i) {
            out.zbar(i, j) = first;
            out.zbar2(i, j) = second;
            out.zbar_ll(i, j) = weighted_mark_moments(marks[j], w_ll[i][j]).first;
            out.zbar_nl(i, j) = weighted_mark_moments(marks[j], w_nl[i][j]).first;
        }
    }
    return out;
}

std::vector<IntradayPoint> intraday_rolling(std::span<const Event> events, const IntradayOptions& options) {
    if (!(options.window > 0.0) || !(options.step > 0.0)) throw ConfigError("window and step must be positive");
    std::vector<IntradayPoint> out;
    std::optional<MarkedHawkesParams> warm;
    const auto steps = static_cast<long>(std::floor((options.session_end - options.window) / options.step + 1e-9));
    for (long k = 0; k <= steps; ++k) {
        IntradayPoint point;
        point.window_end = options.window + static_cast<double>(k) * options.step;
        const double start = point.window_end - options.window;
        const auto lo = std::lower_bound(events.begin(), events.end(), start,
                                         [](const Event& e, double t) { return e.time < t; });
        const auto hi = std::upper_bound(lo, events.end(), point.window_end,
                                         [](double t, const Event& e) { return t < e.time; });
        const std::vector<Event> slice(lo, hi);
        try {
            FitOptions fo;
            fo.constraint = options.constraint;
            fo.kind = options.kind;
            fo.start = start;
            fo.init = warm;
            fo.warm_only = warm.has_value();
            fo.compute_se = false;
            fo.min_events_per_side = options.min_events_per_side;
            point.fit = fit_mle(slice, point.window_end, fo);
            if (!point.fit.converged) throw NumericalError("window fit did not converge");
            warm = point.fit.params;

            LikelihoodOptions lo_opts;
            lo_opts.kind = options.kind;
            lo_opts.start = start;
            const MarkSummaries marks =
                options.kind == ModelKind::unmarked
                    ? MarkSummaries::ones()
                    : mark_summaries(point.fit.params, slice, point.window_end,
                                     options.dependence == MarkDependence::dependent ? SummaryMode::weighted
                                                                                     : SummaryMode::independent,
                                     lo_opts);
            const double var =
                variance_marked_restricted(point.fit.params, marks, options.vol_horizon, options.dependence);
            point.vol = price_volatility(var, options.tick_size);
        } catch (const std::exception& e) {
            point.gap = true;
            point.vol = std::numeric_limits<double>::quiet_NaN();
            point.fit.diagnostics += e.what();
        }
        out.push_back(std::move(point));
    }
    return out;
}

namespace {

std::string number(double x) { return std::isfinite(x) ? fmt::format("{:.10g}", x) : std::string("NA"); }

double parse_number(const std::string& field) {
    if (field == "NA" || field.empty()) return std::numeric_limits<double>::quiet_NaN();
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
    if (ec != std::errc{} || ptr != field.data() + field.size()) throw DataError("bad number in fit CSV: " + field);
    return x;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

void write_fit_csv(std::ostream& out, const std::vector<std::pair<std::string, FitResult>>& fits) {
    out << "date";
    for (const char* key : kParamKeys) out << ',' << key;
    out << ",llh\n";
    for (const auto& [date, fit] : fits) {
        out << date;
        for (double v : to_array(fit.params)) out << ',' << number(v);
        out << ',' << number(fit.loglik) << '\n';
        for (double v : to_array(fit.std_errors)) out << ',' << number(v);
        out << ",\n";
    }
}

std::vector<std::pair<std::string, FitResult>> read_fit_csv(std::istream& in) {
    std::vector<std::pair<std::string, FitResult>> out;
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty fit CSV");
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != kParamCount + 2) throw DataError("fit CSV row with wrong column count");
        ParamVector values;
        for (std::size_t k = 0; k < kParamCount; ++k) values[k] = parse_number(fields[k + 1]);
        if (!fields[0].empty()) {
            FitResult fit;
            fit.params = from_array(values);
            fit.loglik = parse_number(fields.back());
            fit.converged = std::isfinite(fit.loglik);
            ParamVector nan;
            nan.fill(std::numeric_limits<double>::quiet_NaN());
            fit.std_errors = from_array(nan);
            out.emplace_back(fields[0], fit);
        } else {
            if (out.empty()) throw DataError("standard-error row without an estimate row");
            out.back().second.std_errors = from_array(values);
            out.back().second.se_available = std::all_of(values.begin(), values.end(), [](double v) {
                return std::isfinite(v);
            });
        }
    }
    return out;
}

}  // namespace hawkesvol
