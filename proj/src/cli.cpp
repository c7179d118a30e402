#include "hawkesvol/cli.hpp"

#include "cli_support.hpp"
#include "hawkesvol/econometrics.hpp"
#include "hawkesvol/errors.hpp"
#include "hawkesvol/estimate.hpp"
#include "hawkesvol/marketdata.hpp"
#include "hawkesvol/moments.hpp"
#include "hawkesvol/parallel.hpp"
#include "hawkesvol/simulate.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace hawkesvol::cli {

namespace {

constexpr std::int64_t kDayNs = 86'400'000'000'000;

/// Every option of every command binds into one of these fields.
struct Settings {
    std::string config;
    int jobs{1};
    std::string output;
    std::string output_dir;
    std::vector<std::string> inputs;
    std::vector<std::string> dates;
    std::vector<std::string> events;
    std::string params;
    std::string fits;
    std::string date;

    std::int64_t session_open_ns{0};
    std::string open_utc;
    double dt{0.1};
    double tick_size{0.01};
    double filter_length{0.0};
    double rv_length{23400.0};
    double interval{300.0};

    double horizon{23400.0};
    double start{0.0};
    std::string kind{"marked"};
    std::string constraint{"general"};
    std::string intraday_constraint{"symmetric"};
    std::string init{"stationary"};
    int min_events{50};
    int intraday_min_events{20};

    std::string mode{"restricted"};
    std::string dependence{"dependent"};
    bool unit_marks{false};

    std::uint64_t seed{1};
    int paths{1};
    int mc_paths{10000};
    std::string marks{"constant"};
    double mc_t{1e4};

    double window{1800.0};
    double step{10.0};
    double vol_horizon{60.0};

    double k{2.0};
    std::string k_grid{"0:4:0.25"};
    std::size_t garch_window{1500};
    std::string garch_mode{"rolling"};
    std::string stock;
    std::string futures;
    std::size_t min_days{30};
    std::size_t train{400};
};

/// Shared state of one command invocation.
struct Run {
    Manifest manifest;
    std::ostream& out;
    int jobs{1};
    std::optional<std::string> failure;  ///< set when the command completed but its check failed

    std::string read_input(const fs::path& path) {
        std::string bytes = read_file(path);
        manifest.add_input(path, sha256_hex(bytes));
        return bytes;
    }
    void emit(const fs::path& path, const std::string& bytes) {
        write_atomic(path, bytes);
        manifest.add_output(path, bytes);
    }
};

// ---------------------------------------------------------------- parsing helpers

ModelKind parse_kind(const std::string& s) { return s == "unmarked" ? ModelKind::unmarked : ModelKind::marked; }
Constraint parse_constraint(const std::string& s) {
    return s == "symmetric" ? Constraint::symmetric : Constraint::general;
}
MarkDependence parse_dependence(const std::string& s) {
    return s == "independent" ? MarkDependence::independent : MarkDependence::dependent;
}

double parse_config_number(const std::string& text, const std::string& what) {
    const double x = parse_number(text, what);
    if (!std::isfinite(x)) throw ConfigError(what + ": expected a number, got '" + text + "'");
    return x;
}

/// constant | geometric:MEAN | empirical:P1,P2,... | linked:COEF
MarkModel parse_marks(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
    if (name == "constant" && arg.empty()) return MarkModel::constant();
    if (name == "geometric") return MarkModel::geometric(parse_config_number(arg, "marks"));
    if (name == "linked") return MarkModel::intensity_linked(parse_config_number(arg, "marks"));
    if (name == "empirical") {
        std::vector<double> probs;
        std::istringstream in(arg);
        std::string field;
        while (std::getline(in, field, ',')) probs.push_back(parse_config_number(field, "marks"));
        return MarkModel::empirical(probs);
    }
    throw ConfigError("unknown mark model '" + spec + "'");
}

/// start:stop:step or a comma-separated list.
std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::istringstream in(spec);
        std::string field;
        while (std::getline(in, field, ':')) parts.push_back(parse_config_number(field, "k-grid"));
        if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
            throw ConfigError("k-grid must be start:stop:step with a positive step");
        }
        const auto n = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
        for (long i = 0; i <= n; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
        return out;
    }
    std::istringstream in(spec);
    std::string field;
    while (std::getline(in, field, ',')) out.push_back(parse_config_number(field, "k-grid"));
    if (out.empty()) throw ConfigError("empty k-grid");
    return out;
}

/// HH:MM:SS[.fraction] after UTC midnight, as nanoseconds.
std::int64_t parse_time_of_day(const std::string& text) {
    int h = 0, m = 0;
    double sec = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> h >> c1 >> m >> c2 >> sec) || c1 != ':' || c2 != ':' || h < 0 || h > 23 || m < 0 || m > 59 ||
        sec < 0.0 || sec >= 60.0) {
        throw ConfigError("open-utc must look like HH:MM:SS, got '" + text + "'");
    }
    return (static_cast<std::int64_t>(h) * 3600 + m * 60) * 1'000'000'000 + std::llround(sec * 1e9);
}

std::int64_t session_open(const Settings& s, std::int64_t first_ts) {
    if (s.session_open_ns != 0) return s.session_open_ns;
    if (s.open_utc.empty()) throw ConfigError("give --session-open-ns or --open-utc");
    const std::int64_t midnight = (first_ts >= 0 ? first_ts / kDayNs : (first_ts - kDayNs + 1) / kDayNs) * kDayNs;
    return midnight + parse_time_of_day(s.open_utc);
}

fs::path require_output(const Settings& s) {
    if (s.output.empty()) throw ConfigError("--output is required");
    return s.output;
}

fs::path single_input(const Settings& s) {
    if (s.inputs.size() != 1) throw ConfigError("exactly one --input is required");
    return s.inputs.front();
}

std::vector<Event> load_events(Run& r, const fs::path& path) {
    std::istringstream in(r.read_input(path));
    return read_event_csv(in);
}

MarkedHawkesParams load_params(const Settings& s, Run& r) {
    if (!s.params.empty()) return parse_key_value(r.read_input(s.params));
    if (s.fits.empty()) throw ConfigError("give --params or --fits");
    std::istringstream in(r.read_input(s.fits));
    const auto rows = read_fit_csv(in);
    if (rows.empty()) throw DataError("fit file has no rows");
    if (s.date.empty()) return rows.front().second.params;
    for (const auto& [date, fit] : rows)
        if (date == s.date) return fit.params;
    throw DataError("no fit for date " + s.date);
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

// ---------------------------------------------------------------- commands

void cmd_filter(const Settings& s, Run& r) {
    if (s.inputs.empty()) throw ConfigError("--input is required");
    if (s.inputs.size() > 1 && s.output_dir.empty()) throw ConfigError("several inputs need --output-dir");
    if (s.inputs.size() == 1 && s.output.empty() && s.output_dir.empty()) throw ConfigError("--output is required");
    for (const auto& in : s.inputs) r.manifest.add_input(in, sha256_file(in));

    std::vector<std::string> csv(s.inputs.size());
    std::vector<QualityReport> quality(s.inputs.size());
    std::vector<std::size_t> counts(s.inputs.size());
    parallel_for(s.inputs.size(), r.jobs, [&](std::size_t i) {
        std::ifstream in(s.inputs[i], std::ios::binary);
        std::vector<MidQuote> mids;
        MidPriceBuilder builder(mids);
        std::optional<std::int64_t> first;
        for_each_tick(in, [&](const QuoteTick& t) {
            if (!first) first = t.ts_ns;
            builder.push(t);
        });
        if (!first) throw DataError(s.inputs[i] + ": no quotes");
        FilterOptions fo;
        fo.session_open_ns = session_open(s, *first);
        fo.dt = s.dt;
        fo.tick_size = s.tick_size;
        fo.session_length = s.filter_length;
        const EventStream stream = filter_grid(mids, fo);
        std::ostringstream buf;
        write_event_csv(buf, stream.events);
        csv[i] = buf.str();
        quality[i] = builder.report();
        counts[i] = stream.events.size();
    });
    for (std::size_t i = 0; i < s.inputs.size(); ++i) {
        const fs::path target =
            s.output_dir.empty() ? fs::path(s.output) : fs::path(s.output_dir) / (stem(s.inputs[i]) + ".events.csv");
        r.emit(target, csv[i]);
        const auto& q = quality[i];
        r.manifest.set(fmt::format("quality.{}", i),
                       fmt::format("records:{} crossed:{} out_of_order:{} duplicates:{} mids:{} events:{}", q.records,
                                   q.crossed, q.out_of_order, q.duplicates, q.emitted, counts[i]));
    }
}

void cmd_fit(const Settings& s, Run& r) {
    if (s.inputs.empty()) throw ConfigError("--input is required");
    if (!s.dates.empty() && s.dates.size() != s.inputs.size()) throw ConfigError("--date needs one label per input");
    const fs::path target = require_output(s);
    std::vector<std::vector<Event>> streams;
    for (const auto& in : s.inputs) streams.push_back(load_events(r, in));

    FitOptions fo;
    fo.constraint = parse_constraint(s.constraint);
    fo.kind = parse_kind(s.kind);
    fo.init_mode = s.init == "baseline" ? InitMode::baseline : InitMode::stationary;
    fo.start = s.start;
    fo.min_events_per_side = s.min_events;
    std::vector<std::pair<std::string, FitResult>> fits(streams.size());
    parallel_for(streams.size(), r.jobs, [&](std::size_t i) {
        fits[i] = {s.dates.empty() ? stem(s.inputs[i]) : s.dates[i], fit_mle(streams[i], s.horizon, fo)};
    });
    for (std::size_t i = 0; i < fits.size(); ++i) {
        r.manifest.set(fmt::format("fit.{}", i), fmt::format("converged:{} starts:{} events:{}", fits[i].second.converged,
                                                              fits[i].second.starts_tried, fits[i].second.n_events));
    }
    std::ostringstream buf;
    write_fit_csv(buf, fits);
    r.emit(target, buf.str());
}

void cmd_vol(const Settings& s, Run& r) {
    const fs::path target = require_output(s);
    std::istringstream in(r.read_input(single_input(s)));
    const auto fits = read_fit_csv(in);
    const bool marked = s.mode != "unmarked";
    if (marked && !s.unit_marks && s.events.size() != fits.size()) {
        throw ConfigError("marked modes need one --events file per fit row (or --unit-marks)");
    }
    std::string csv = "date,vol,variance,mode\n";
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const auto& [date, fit] = fits[i];
        double variance = 0.0;
        if (!marked) {
            variance = variance_unmarked(fit.params.base, s.horizon);
        } else {
            MarkSummaries summaries = MarkSummaries::ones();
            const bool independent = s.mode == "restricted" && s.dependence == "independent";
            if (!s.unit_marks) {
                const auto events = load_events(r, s.events[i]);
                summaries = mark_summaries(fit.params, events, s.horizon,
                                           independent ? SummaryMode::independent : SummaryMode::weighted);
            }
            variance = s.mode == "full"
                           ? variance_marked_full(fit.params, summaries, s.horizon).value
                           : variance_marked_restricted(fit.params, summaries, s.horizon, parse_dependence(s.dependence));
        }
        const double vol = variance >= 0.0 ? price_volatility(variance, s.tick_size) : std::nan("");
        csv += fmt::format("{},{},{},{}\n", date, format_number(vol), format_number(variance), s.mode);
    }
    r.emit(target, csv);
}

void cmd_simulate(const Settings& s, Run& r) {
    const MarkedHawkesParams p = load_params(s, r);
    const MarkModel model = parse_marks(s.marks);
    if (s.paths < 1) throw ConfigError("--paths must be positive");
    if (s.paths == 1 && s.output.empty()) throw ConfigError("--output is required");
    if (s.paths > 1 && s.output_dir.empty()) throw ConfigError("several paths need --output-dir");
    const auto n = static_cast<std::size_t>(s.paths);
    std::vector<std::string> csv(n);
    parallel_for(n, r.jobs, [&](std::size_t i) {
        const SimPath path = simulate(p, model, s.horizon, path_seed(s.seed, i));
        std::ostringstream buf;
        write_event_csv(buf, path.events);
        csv[i] = buf.str();
    });
    for (std::size_t i = 0; i < n; ++i) {
        r.emit(n == 1 ? fs::path(s.output) : fs::path(s.output_dir) / fmt::format("path_{:04d}.csv", i), csv[i]);
    }
}

void cmd_mc_check(const Settings& s, Run& r) {
    const fs::path target = require_output(s);
    const MarkedHawkesParams p = load_params(s, r);
    const MarkModel model = parse_marks(s.marks);
    if (model.kind() == MarkModel::Kind::intensity_linked) {
        throw ConfigError("mc-check needs a mark model with known moments");
    }
    const MarkSummaries summaries = model.summaries();
    std::vector<std::pair<std::string, double>> closed;
    if (model.kind() == MarkModel::Kind::constant && p.eta.max_abs() == 0.0) {
        closed.emplace_back("unmarked", variance_unmarked(p.base, s.mc_t, Transient::included));
    }
    closed.emplace_back("full", variance_marked_full(p, summaries, s.mc_t).value);
    closed.emplace_back("restricted", variance_marked_restricted(p, summaries, s.mc_t, MarkDependence::dependent));
    closed.emplace_back("independent", variance_marked_restricted(p, summaries, s.mc_t, MarkDependence::independent));

    const McEstimate mc = mc_variance(p, model, s.mc_t, s.mc_paths, s.seed, r.jobs);
    std::string csv = "formula,closed_form,mc,mc_se,z,status\n";
    int failed = 0;
    for (const auto& [name, value] : closed) {
        const double z = (value - mc.value) / mc.std_error;
        const bool pass = std::abs(z) < 3.0;
        failed += pass ? 0 : 1;
        const char* status = pass ? "PASS" : "FAIL";
        csv += fmt::format("{},{},{},{},{},{}\n", name, format_number(value), format_number(mc.value),
                           format_number(mc.std_error), format_number(z), status);
        r.out << fmt::format("{} {} closed_form={:.6g} mc={:.6g} se={:.3g} z={:.2f}\n", status, name, value, mc.value,
                             mc.std_error, z);
    }
    r.emit(target, csv);
    if (failed > 0) r.failure = fmt::format("mc-check: {} formula(s) outside 3 standard errors", failed);
}

void cmd_residuals(const Settings& s, Run& r) {
    const fs::path target = require_output(s);
    const MarkedHawkesParams p = load_params(s, r);
    const auto events = load_events(r, single_input(s));
    LikelihoodOptions lo;
    lo.kind = parse_kind(s.kind);
    lo.start = s.start;
    const ResidualReport rep = residual_report(p, events, s.horizon, lo);
    std::string csv = "theoretical,empirical\n";
    for (const auto& [x, y] : rep.qq_points) csv += fmt::format("{},{}\n", format_number(x), format_number(y));
    r.emit(target, csv);
    r.manifest.set("ks_statistic", format_number(rep.ks_statistic));
    r.manifest.set("ks_pvalue", format_number(rep.ks_pvalue));
    r.out << fmt::format("residuals={} ks_statistic={:.6g} ks_pvalue={:.6g}\n", rep.residuals.size(),
                         rep.ks_statistic, rep.ks_pvalue);
}

void cmd_intraday(const Settings& s, Run& r) {
    const fs::path target = require_output(s);
    const auto events = load_events(r, single_input(s));
    IntradayOptions io;
    io.window = s.window;
    io.step = s.step;
    io.session_end = s.horizon;
    io.vol_horizon = s.vol_horizon;
    io.tick_size = s.tick_size;
    io.constraint = parse_constraint(s.intraday_constraint);
    io.kind = parse_kind(s.kind);
    io.dependence = parse_dependence(s.dependence);
    io.min_events_per_side = s.intraday_min_events;
    const auto series = intraday_rolling(events, io);
    std::string csv = "window_end_s,vol,gap\n";
    std::size_t gaps = 0;
    for (const auto& pt : series) {
        csv += fmt::format("{},{},{}\n", format_number(pt.window_end), format_number(pt.vol), pt.gap ? 1 : 0);
        gaps += pt.gap ? 1 : 0;
    }
    r.manifest.set("gaps", std::to_string(gaps));
    r.emit(target, csv);
}

void cmd_rv(const Settings& s, Run& r) {
    if (s.inputs.empty()) throw ConfigError("--input is required");
    const fs::path target = require_output(s);
    for (const auto& in : s.inputs) r.manifest.add_input(in, sha256_file(in));
    std::vector<double> rv(s.inputs.size());
    parallel_for(s.inputs.size(), r.jobs, [&](std::size_t i) {
        std::ifstream in(s.inputs[i], std::ios::binary);
        std::vector<MidQuote> mids;
        MidPriceBuilder builder(mids);
        std::optional<std::int64_t> first;
        for_each_tick(in, [&](const QuoteTick& t) {
            if (!first) first = t.ts_ns;
            builder.push(t);
        });
        if (!first) throw DataError(s.inputs[i] + ": no quotes");
        rv[i] = realized_vol(mids, session_open(s, *first), s.rv_length, s.interval);
    });
    std::string csv = "date,rv\n";
    for (std::size_t i = 0; i < rv.size(); ++i) csv += fmt::format("{},{}\n", stem(s.inputs[i]), format_number(rv[i]));
    r.emit(target, csv);
}

struct ScoredDays {
    std::vector<std::string> dates;
    std::vector<double> changes;
    std::vector<double> vols;
};

ScoredDays load_scored_days(const Settings& s, Run& r) {
    const fs::path path = single_input(s);
    const Table t = Table::parse(r.read_input(path), path.string());
    ScoredDays d;
    d.dates = t.text_column("date");
    d.changes = t.column("abs_change");
    d.vols = t.column("vol");
    for (auto& c : d.changes) c = std::abs(c);
    return d;
}

void cmd_backtest(const Settings& s, Run& r) {
    const fs::path target = require_output(s);
    const ScoredDays d = load_scored_days(s, r);
    const Exceedance e = backtest_exceedance(d.changes, d.vols, s.k);
    std::vector<char> flagged(d.dates.size(), 0);
    for (std::size_t i : e.days) flagged[i] = 1;
    std::string csv = "date,abs_change,vol,exceed\n";
    for (std::size_t i = 0; i < d.dates.size(); ++i) {
        csv += fmt::format("{},{},{},{}\n", d.dates[i], format_number(d.changes[i]), format_number(d.vols[i]),
                           static_cast<int>(flagged[i]));
    }
    r.emit(target, csv);
    r.manifest.set("exceed_count", std::to_string(e.count));
    r.manifest.set("exceed_fraction", format_number(e.fraction));
    r.out << fmt::format("k={} exceed_count={} days={} fraction={:.6g}\n", s.k, e.count, d.dates.size(), e.fraction);
}

void cmd_coverage(const Settings& s, Run& r) {
    const fs::path target = require_output(s);
    const ScoredDays d = load_scored_days(s, r);
    const auto grid = parse_grid(s.k_grid);
    std::string csv = "k,fraction,reference\n";
    for (const auto& pt : coverage_curve(d.changes, d.vols, grid)) {
        csv += fmt::format("{},{},{}\n", format_number(pt.k), format_number(pt.fraction), format_number(pt.reference));
    }
    r.emit(target, csv);
}

void cmd_garch(const Settings& s, Run& r) {
    const fs::path target = require_output(s);
    std::istringstream in(r.read_input(single_input(s)));
    const auto bars = read_daily_bar_csv(in);
    std::vector<double> returns;
    for (const auto& b : bars) returns.push_back(b.ret);
    if (s.garch_mode == "fit") {
        const GjrFit fit = gjr_fit(returns);
        std::string csv = "param,estimate,std_error\n";
        const std::pair<const char*, std::pair<double, double>> rows[] = {
            {"omega", {fit.params.omega, fit.std_errors.omega}},
            {"alpha", {fit.params.alpha, fit.std_errors.alpha}},
            {"gamma", {fit.params.gamma, fit.std_errors.gamma}},
            {"beta", {fit.params.beta, fit.std_errors.beta}},
        };
        for (const auto& [name, v] : rows) {
            csv += fmt::format("{},{},{}\n", name, format_number(v.first), format_number(v.second));
        }
        csv += fmt::format("loglik,{},NA\n", format_number(fit.loglik));
        r.manifest.set("converged", fit.converged ? "true" : "false");
        r.emit(target, csv);
        return;
    }
    const auto vols = gjr_rolling_forecast(returns, s.garch_window, r.jobs);
    std::string csv = "date,ret,garch_vol\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        csv += fmt::format("{},{},{}\n", bars[i].date, format_number(bars[i].ret), format_number(vols[i]));
    }
    r.emit(target, csv);
}

/// Columns named h_<seconds> hold the Hawkes volatility measured up to that cut time.
std::vector<std::pair<double, std::size_t>> cut_columns(const Table& t, const std::string& prefix) {
    std::vector<std::pair<double, std::size_t>> out;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (t.header[c].rfind(prefix, 0) != 0 || t.header[c] == "date") continue;
        const std::string tail = t.header[c].substr(prefix.size());
        out.emplace_back(parse_number(tail, t.source + " header"), c);
    }
    if (out.empty()) throw DataError(t.source + ": no cut-time columns");
    return out;
}

void cmd_combine(const Settings& s, Run& r) {
    const fs::path target = require_output(s);
    const fs::path path = single_input(s);
    const Table t = Table::parse(r.read_input(path), path.string());
    const auto ret = t.column("ret");
    const auto garch = t.column("garch_vol");
    const auto cuts = cut_columns(t, "h_");
    std::vector<CombinedWeights> weights(cuts.size());
    std::vector<std::size_t> used(cuts.size());
    parallel_for(cuts.size(), r.jobs, [&](std::size_t k) {
        const auto h = t.column(cuts[k].second);
        std::vector<double> rr, gg, hh;
        for (std::size_t i = 0; i < h.size(); ++i) {
            if (std::isfinite(ret[i]) && std::isfinite(garch[i]) && std::isfinite(h[i])) {
                rr.push_back(ret[i]);
                gg.push_back(garch[i]);
                hh.push_back(h[i]);
            }
        }
        used[k] = rr.size();
        weights[k] = combined_weights(gg, hh, rr);
    });
    std::string csv = "t_s,theta1,theta2,se1,se2,loglik,collinear,n\n";
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        const auto& w = weights[k];
        csv += fmt::format("{},{},{},{},{},{},{},{}\n", format_number(cuts[k].first), format_number(w.theta1),
                           format_number(w.theta2), format_number(w.se1), format_number(w.se2),
                           format_number(w.loglik), w.collinear ? 1 : 0, used[k]);
    }
    r.emit(target, csv);
}

/// Wide table whose non-date columns are named by a horizon in seconds.
std::pair<std::vector<double>, std::vector<std::vector<double>>> horizon_table(const Table& t,
                                                                              std::vector<std::string>& dates) {
    dates = t.text_column("date");
    std::vector<double> horizons;
    std::vector<std::vector<double>> series;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (t.header[c] == "date") continue;
        horizons.push_back(parse_number(t.header[c], t.source + " header"));
        series.push_back(t.column(c));
    }
    return {horizons, series};
}

void cmd_r2surface(const Settings& s, Run& r) {
    const fs::path target = require_output(s);
    if (s.stock.empty() || s.futures.empty()) throw ConfigError("--stock and --futures are required");
    const Table st = Table::parse(r.read_input(s.stock), s.stock);
    const Table ft = Table::parse(r.read_input(s.futures), s.futures);
    std::vector<std::string> d1, d2;
    const auto [t1, stock] = horizon_table(st, d1);
    const auto [t2, futures] = horizon_table(ft, d2);
    if (d1 != d2) throw DataError("stock and futures tables list different dates");
    const auto cells = futures_r2_surface(stock, t1, futures, t2, s.min_days, r.jobs);
    std::string csv = "t1_s,t2_s,adj_r2\n";
    for (const auto& c : cells) {
        csv += fmt::format("{},{},{}\n", format_number(c.t1), format_number(c.t2), format_number(c.adj_r2));
    }
    r.emit(target, csv);
}

void cmd_forecast(const Settings& s, Run& r) {
    const fs::path target = require_output(s);
    if (s.stock.empty()) throw ConfigError("--stock is required");
    const Table st = Table::parse(r.read_input(s.stock), s.stock);
    if (st.header.size() != 2) throw DataError(s.stock + ": expected columns date,<volatility>");
    const auto stock = st.column(1);
    const ForecastReport ar = ar2_forecast(stock, s.train, r.jobs);
    std::string csv = "model,t_s,rmsre,n_forecasts\n";
    csv += fmt::format("ar2,NA,{},{}\n", format_number(ar.rmsre), ar.n_forecasts);
    if (!s.futures.empty()) {
        const Table ft = Table::parse(r.read_input(s.futures), s.futures);
        std::vector<std::string> dates;
        const auto [horizons, futures] = horizon_table(ft, dates);
        if (dates != st.text_column("date")) throw DataError("stock and futures tables list different dates");
        const auto reports = futures_lm_forecast(stock, futures, s.train, r.jobs);
        for (std::size_t k = 0; k < reports.size(); ++k) {
            csv += fmt::format("lm,{},{},{}\n", format_number(horizons[k]), format_number(reports[k].rmsre),
                               reports[k].n_forecasts);
        }
    }
    if (ar.near_unit_root) r.manifest.set("warning", "near unit root in at least one AR(2) refit");
    r.emit(target, csv);
}

// ---------------------------------------------------------------- wiring

using Handler = std::function<void(const Settings&, Run&)>;

struct Command {
    CLI::App* app;
    Handler handler;
};

std::vector<Command> build(CLI::App& app, Settings& s) {
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    std::vector<Command> cmds;
    auto add = [&](const char* name, const char* help, Handler h) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", s.config, "key=value file; command-line flags take precedence");
        sub->add_option("--jobs", s.jobs, "worker threads (0 = all cores)");
        cmds.push_back({sub, std::move(h)});
        return sub;
    };
    const auto kinds = CLI::IsMember({"marked", "unmarked"});
    const auto constraints = CLI::IsMember({"general", "symmetric"});
    const auto dependences = CLI::IsMember({"dependent", "independent"});
    auto add_session = [&](CLI::App* sub) {
        sub->add_option("--session-open-ns", s.session_open_ns, "session open, UTC nanoseconds");
        sub->add_option("--open-utc", s.open_utc, "session open as HH:MM:SS UTC on each file's first day");
    };

    auto* filter = add("filter", "quotes -> up/down events on a fixed grid", cmd_filter);
    filter->add_option("--input", s.inputs, "tick CSV files (ts_ns,bid,ask,symbol)");
    filter->add_option("--output", s.output, "event CSV (single input)");
    filter->add_option("--output-dir", s.output_dir, "directory for <stem>.events.csv");
    add_session(filter);
    filter->add_option("--dt", s.dt, "grid spacing, seconds")->check(CLI::PositiveNumber);
    filter->add_option("--tick-size", s.tick_size)->check(CLI::PositiveNumber);
    filter->add_option("--session-length", s.filter_length, "seconds; 0 runs to the last quote");

    auto* fit = add("fit", "events -> maximum-likelihood fits", cmd_fit);
    fit->add_option("--input", s.inputs, "event CSV files");
    fit->add_option("--date", s.dates, "row labels, one per input (default: file stem)");
    fit->add_option("--output", s.output);
    fit->add_option("--horizon", s.horizon, "window end, seconds")->check(CLI::PositiveNumber);
    fit->add_option("--start", s.start, "window start, seconds");
    fit->add_option("--kind", s.kind)->check(kinds);
    fit->add_option("--constraint", s.constraint)->check(constraints);
    fit->add_option("--init", s.init)->check(CLI::IsMember({"stationary", "baseline"}));
    fit->add_option("--min-events", s.min_events, "minimum events per side");

    auto* vol = add("vol", "fits -> daily Hawkes volatility", cmd_vol);
    vol->add_option("--input", s.inputs, "fit CSV");
    vol->add_option("--output", s.output);
    vol->add_option("--horizon", s.horizon, "seconds")->check(CLI::PositiveNumber);
    vol->add_option("--tick-size", s.tick_size)->check(CLI::PositiveNumber);
    vol->add_option("--mode", s.mode)->check(CLI::IsMember({"full", "restricted", "unmarked"}));
    vol->add_option("--dependence", s.dependence)->check(dependences);
    vol->add_option("--events", s.events, "event CSV per fit row, for the mark summaries");
    vol->add_flag("--unit-marks", s.unit_marks, "treat every mark as one tick");

    auto* sim = add("simulate", "parameters -> simulated event CSV", cmd_simulate);
    sim->add_option("--params", s.params, "key=value parameter file");
    sim->add_option("--fits", s.fits, "fit CSV to take parameters from");
    sim->add_option("--date", s.date, "row of --fits (default: first)");
    sim->add_option("--horizon", s.horizon)->check(CLI::PositiveNumber);
    sim->add_option("--seed", s.seed);
    sim->add_option("--marks", s.marks, "constant | geometric:MEAN | empirical:P1,P2,.. | linked:COEF");
    sim->add_option("--paths", s.paths);
    sim->add_option("--output", s.output);
    sim->add_option("--output-dir", s.output_dir);

    auto* mc = add("mc-check", "closed-form variances against Monte Carlo", cmd_mc_check);
    mc->add_option("--params", s.params);
    mc->add_option("--fits", s.fits);
    mc->add_option("--date", s.date);
    mc->add_option("--marks", s.marks);
    mc->add_option("--t", s.mc_t, "horizon, seconds")->check(CLI::PositiveNumber);
    mc->add_option("--paths", s.mc_paths);
    mc->add_option("--seed", s.seed);
    mc->add_option("--output", s.output);

    auto* res = add("residuals", "time-rescaled residual Q-Q points and KS test", cmd_residuals);
    res->add_option("--input", s.inputs, "event CSV");
    res->add_option("--params", s.params);
    res->add_option("--fits", s.fits);
    res->add_option("--date", s.date);
    res->add_option("--horizon", s.horizon)->check(CLI::PositiveNumber);
    res->add_option("--start", s.start);
    res->add_option("--kind", s.kind)->check(kinds);
    res->add_option("--output", s.output);

    auto* intra = add("intraday", "rolling-window volatility through the session", cmd_intraday);
    intra->add_option("--input", s.inputs, "event CSV");
    intra->add_option("--output", s.output);
    intra->add_option("--window", s.window)->check(CLI::PositiveNumber);
    intra->add_option("--step", s.step)->check(CLI::PositiveNumber);
    intra->add_option("--horizon", s.horizon, "session end, seconds")->check(CLI::PositiveNumber);
    intra->add_option("--vol-horizon", s.vol_horizon)->check(CLI::PositiveNumber);
    intra->add_option("--tick-size", s.tick_size)->check(CLI::PositiveNumber);
    intra->add_option("--constraint", s.intraday_constraint)->check(constraints);
    intra->add_option("--kind", s.kind)->check(kinds);
    intra->add_option("--dependence", s.dependence)->check(dependences);
    intra->add_option("--min-events", s.intraday_min_events);

    auto* rv = add("rv", "realized volatility per tick file", cmd_rv);
    rv->add_option("--input", s.inputs);
    rv->add_option("--output", s.output);
    add_session(rv);
    rv->add_option("--session-length", s.rv_length)->check(CLI::PositiveNumber);
    rv->add_option("--interval", s.interval)->check(CLI::PositiveNumber);

    auto* bt = add("backtest", "days with |change| above k volatilities", cmd_backtest);
    bt->add_option("--input", s.inputs, "CSV with date,abs_change,vol");
    bt->add_option("--output", s.output);
    bt->add_option("--k", s.k)->check(CLI::NonNegativeNumber);

    auto* cov = add("coverage", "share of days within k volatilities", cmd_coverage);
    cov->add_option("--input", s.inputs, "CSV with date,abs_change,vol");
    cov->add_option("--output", s.output);
    cov->add_option("--k-grid", s.k_grid, "start:stop:step or a comma list");

    auto* garch = add("garch", "GJR-GARCH on daily returns", cmd_garch);
    garch->add_option("--input", s.inputs, "daily bar CSV (date,open,close,ret)");
    garch->add_option("--output", s.output);
    garch->add_option("--window", s.garch_window, "rolling estimation window, days");
    garch->add_option("--mode", s.garch_mode)->check(CLI::IsMember({"rolling", "fit"}));

    auto* comb = add("combine", "GARCH/Hawkes combination weights per cut time", cmd_combine);
    comb->add_option("--input", s.inputs, "CSV with date,ret,garch_vol,h_<seconds>...");
    comb->add_option("--output", s.output);

    auto* r2 = add("r2surface", "adjusted R^2 of stock on pre-market futures volatility", cmd_r2surface);
    r2->add_option("--stock", s.stock, "CSV date,<t1 seconds>...");
    r2->add_option("--futures", s.futures, "CSV date,<t2 seconds>...");
    r2->add_option("--min-days", s.min_days);
    r2->add_option("--output", s.output);

    auto* fc = add("forecast", "rolling AR(2) and futures-augmented forecasts", cmd_forecast);
    fc->add_option("--stock", s.stock, "CSV date,<daily volatility>");
    fc->add_option("--futures", s.futures, "CSV date,<T seconds>...");
    fc->add_option("--train", s.train);
    fc->add_option("--output", s.output);
    return cmds;
}

/// Append `--key value` for every config entry whose flag is absent from the command line.
std::vector<std::string> apply_config(const std::vector<std::string>& args) {
    std::string config_path;
    for (std::size_t i = 2; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;

    std::vector<std::string> out = args;
    std::istringstream in(read_file(config_path));
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
        auto trim = [](std::string x) {
            const auto a = x.find_first_not_of(" \t\r");
            const auto b = x.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : x.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "config") continue;
        const std::string flag = "--" + key;
        bool given = false;
        for (std::size_t i = 2; i < args.size(); ++i) given = given || args[i] == flag || args[i].rfind(flag + "=", 0) == 0;
        if (given) continue;
        std::istringstream values(value);
        std::string v;
        std::vector<std::string> tokens;
        while (values >> v) tokens.push_back(v);
        if (tokens.size() == 1) {
            out.push_back(flag + "=" + tokens.front());
        } else {
            out.push_back(flag);
            for (auto& t : tokens) out.push_back(t);
        }
    }
    return out;
}

std::string one_line(std::string text) {
    for (char& c : text)
        if (c == '\n' || c == '\r') c = ' ';
        else if (c == '"') c = '\'';
    return text;
}

int fail(std::ostream& err, const char* kind, int code, const std::string& reason) {
    err << "error=" << kind << " reason=\"" << one_line(reason) << "\"\n";
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hawkes-process volatility estimation for tick data", "hawkesvol"};
    Settings settings;
    const std::vector<Command> commands = build(app, settings);
    try {
        const std::vector<std::string> expanded = apply_config(args);
        std::vector<const char*> argv;
        for (const auto& a : expanded) argv.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return 0;
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) {
                out << app.help();
                return 0;
            }
            return fail(err, "config", 2, e.what());
        }

        for (const Command& cmd : commands) {
            if (!cmd.app->parsed()) continue;
            Run run{Manifest(cmd.app->get_name()), out, resolve_jobs(settings.jobs), std::nullopt};
            for (const CLI::Option* opt : cmd.app->get_options()) {
                const std::string name = opt->get_single_name();
                if (name == "help") continue;
                std::string value;
                if (opt->count() > 0) {
                    for (const auto& v : opt->results()) value += (value.empty() ? "" : " ") + v;
                } else {
                    value = opt->get_default_str();
                }
                run.manifest.set("config." + name, value);
            }
            cmd.handler(settings, run);
            const fs::path manifest_path = !settings.output.empty() ? fs::path(settings.output + ".manifest")
                                                                    : fs::path(settings.output_dir) / "manifest.txt";
            write_atomic(manifest_path, run.manifest.render());
            if (run.failure) return fail(err, "numerical", 4, *run.failure);
            return 0;
        }
        return fail(err, "config", 2, "no command given");
    } catch (const ConfigError& e) {
        return fail(err, "config", 2, e.what());
    } catch (const DataError& e) {
        return fail(err, "data", 3, e.what());
    } catch (const NumericalError& e) {
        return fail(err, "numerical", 4, e.what());
    } catch (const fs::filesystem_error& e) {
        return fail(err, "data", 3, e.what());
    } catch (const std::exception& e) {
        return fail(err, "numerical", 4, e.what());
    }
}

}  // namespace hawkesvol::cli
