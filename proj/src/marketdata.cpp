#include "hawkesvol/marketdata.hpp"

#include "hawkesvol/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string_view>

namespace hawkesvol {

namespace {

constexpr double kTickTolerance = 1e-6;

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

template <class T>
T parse_field(std::string_view field, std::size_t line_no, const char* what) {
    T value{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw DataError(fmt::format("line {}: bad {} '{}'", line_no, what, field));
    }
    return value;
}

bool next_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

void expect_header(std::istream& in, std::string_view header) {
    std::string line;
    if (!next_line(in, line)) throw DataError(fmt::format("empty file, expected header '{}'", header));
    if (line != header) throw DataError(fmt::format("unexpected header '{}', expected '{}'", line, header));
}

double seconds_since(std::int64_t ts_ns, std::int64_t open_ns) {
    return static_cast<double>(ts_ns - open_ns) / 1e9;
}

}  // namespace

void MidPriceBuilder::push(const QuoteTick& tick) {
    ++report_.records;
    if (!(tick.bid > 0.0) || !(tick.ask >= tick.bid)) {
        ++report_.crossed;
        return;
    }
    if (tick.ts_ns < last_ts_) {
        ++report_.out_of_order;
        return;
    }
    last_ts_ = tick.ts_ns;
    const double mid = 0.5 * (tick.bid + tick.ask);
    if (!out_.empty() && out_.back().ts_ns == tick.ts_ns) {
        // A later record at the same instant supersedes the earlier one.
        out_.back().mid = mid;
        if (out_.size() >= 2 && out_[out_.size() - 2].mid == mid) {
            out_.pop_back();
            --report_.emitted;
            ++report_.duplicates;
        }
        return;
    }
    if (!out_.empty() && out_.back().mid == mid) {
        ++report_.duplicates;
        return;
    }
    out_.push_back({tick.ts_ns, mid});
    ++report_.emitted;
}

std::vector<MidQuote> mid_price(std::span<const QuoteTick> ticks, QualityReport* report) {
    std::vector<MidQuote> out;
    MidPriceBuilder builder(out);
    for (const QuoteTick& t : ticks) builder.push(t);
    if (report != nullptr) *report = builder.report();
    return out;
}

void for_each_tick(std::istream& in, const std::function<void(const QuoteTick&)>& fn) {
    expect_header(in, "ts_ns,bid,ask,symbol");
    std::string line;
    std::size_t line_no = 1;
    QuoteTick tick;
    while (next_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 4) throw DataError(fmt::format("line {}: expected 4 fields, found {}", line_no, f.size()));
        tick.ts_ns = parse_field<std::int64_t>(f[0], line_no, "timestamp");
        tick.bid = parse_field<double>(f[1], line_no, "bid");
        tick.ask = parse_field<double>(f[2], line_no, "ask");
        tick.symbol.assign(f[3]);
        fn(tick);
    }
}

std::vector<MidQuote> read_mid_prices(std::istream& in, QualityReport* report) {
    std::vector<MidQuote> out;
    MidPriceBuilder builder(out);
    for_each_tick(in, [&builder](const QuoteTick& t) { builder.push(t); });
    if (report != nullptr) *report = builder.report();
    return out;
}

EventStream filter_grid(std::span<const MidQuote> mids, const FilterOptions& options) {
    if (!(options.dt > 0.0)) throw ConfigError("filter grid spacing must be positive");
    if (!(options.tick_size > 0.0)) throw ConfigError("tick size must be positive");
    if (options.session_length < 0.0) throw ConfigError("session length must be non-negative");
    for (std::size_t k = 1; k < mids.size(); ++k) {
        if (mids[k].ts_ns < mids[k - 1].ts_ns) throw DataError("mid prices are not time-sorted");
    }

    EventStream stream;
    stream.session_open_ns = options.session_open_ns;
    stream.tick_size = options.tick_size;
    if (mids.empty()) return stream;

    const auto dt_ns = static_cast<std::int64_t>(std::llround(options.dt * 1e9));
    std::int64_t end_ns = 0;
    if (options.session_length > 0.0) {
        end_ns = options.session_open_ns + static_cast<std::int64_t>(std::llround(options.session_length * 1e9));
    } else {
        // Just far enough to sample the last quote.
        const std::int64_t span = std::max<std::int64_t>(mids.back().ts_ns - options.session_open_ns, 0);
        end_ns = options.session_open_ns + (span + dt_ns - 1) / dt_ns * dt_ns;
    }

    std::size_t next = 0;
    bool have_price = false;
    double price = 0.0;
    std::int64_t changed_at = 0;
    auto absorb_until = [&](std::int64_t grid_ns) {
        while (next < mids.size() && mids[next].ts_ns <= grid_ns) {
            if (!have_price || mids[next].mid != price) {
                price = mids[next].mid;
                changed_at = mids[next].ts_ns;
                have_price = true;
            }
            ++next;
        }
    };

    absorb_until(options.session_open_ns);
    bool have_reference = have_price;
    double reference = price;
    for (std::int64_t grid = options.session_open_ns + dt_ns; grid <= end_ns; grid += dt_ns) {
        absorb_until(grid);
        if (!have_price) continue;
        if (!have_reference) {
            reference = price;
            have_reference = true;
            continue;
        }
        const double ticks = (price - reference) / options.tick_size;
        const double whole = std::round(ticks);
        if (std::abs(ticks - whole) > kTickTolerance) {
            throw DataError(fmt::format("tick-size mismatch: change of {} at {} ns is {} ticks of {}", price - reference,
                                        changed_at, ticks, options.tick_size));
        }
        if (whole == 0.0) continue;
        stream.events.push_back({seconds_since(changed_at, options.session_open_ns), whole > 0 ? Side::up : Side::down,
                                 static_cast<int>(std::abs(whole))});
        reference = price;
    }
    return stream;
}

void write_event_csv(std::ostream& out, std::span<const Event> events) {
    out << "time_s,side,mark\n";
    for (const Event& e : events) out << fmt::format("{},{},{}\n", e.time, sign(e.side), e.mark);
}

std::vector<Event> read_event_csv(std::istream& in) {
    expect_header(in, "time_s,side,mark");
    std::vector<Event> events;
    std::string line;
    std::size_t line_no = 1;
    while (next_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 3) throw DataError(fmt::format("line {}: expected 3 fields, found {}", line_no, f.size()));
        Event e;
        e.time = parse_field<double>(f[0], line_no, "time");
        const int side = parse_field<int>(f[1], line_no, "side");
        if (side != 1 && side != -1) throw DataError(fmt::format("line {}: side must be +1 or -1", line_no));
        e.side = side == 1 ? Side::up : Side::down;
        e.mark = parse_field<int>(f[2], line_no, "mark");
        events.push_back(e);
    }
    check_events(events, 0.0);
    return events;
}

double realized_vol(std::span<const MidQuote> mids, std::int64_t session_open_ns, double session_length,
                    double interval) {
    if (!(interval > 0.0) || !(session_length >= interval)) {
        throw ConfigError("realized volatility needs a session at least one interval long");
    }
    const auto step_ns = static_cast<std::int64_t>(std::llround(interval * 1e9));
    const auto n_steps = static_cast<std::int64_t>(std::floor(session_length / interval + 1e-9));

    std::size_t next = 0;
    double sum_sq = 0.0, prev = 0.0;
    int samples = 0;
    for (std::int64_t k = 0; k <= n_steps; ++k) {
        const std::int64_t grid = session_open_ns + k * step_ns;
        while (next < mids.size() && mids[next].ts_ns <= grid) ++next;
        if (next == 0) continue;
        const double price = mids[next - 1].mid;
        if (samples > 0) {
            const double r = std::log(price / prev);
            sum_sq += r * r;
        }
        prev = price;
        ++samples;
    }
    if (samples < 2) throw DataError("realized volatility: fewer than two sampled prices in the session");
    return std::sqrt(sum_sq);
}

DailyBars daily_bars(std::span<const MidQuote> mids, std::span<const Session> calendar) {
    DailyBars out;
    for (const Session& s : calendar) {
        if (s.close_ns <= s.open_ns) throw ConfigError("session " + s.date + " closes before it opens");
        const auto lo = std::lower_bound(mids.begin(), mids.end(), s.open_ns,
                                         [](const MidQuote& m, std::int64_t t) { return m.ts_ns < t; });
        const auto hi = std::upper_bound(lo, mids.end(), s.close_ns,
                                         [](std::int64_t t, const MidQuote& m) { return t < m.ts_ns; });
        if (lo == hi) {
            out.gaps.push_back(s.date);
            continue;
        }
        const double open = lo->mid, close = std::prev(hi)->mid;
        if (!(open > 0.0) || !(close > 0.0)) throw DataError("non-positive price in session " + s.date);
        out.bars.push_back({s.date, open, close, (close - open) / open});
    }
    return out;
}

void write_daily_bar_csv(std::ostream& out, std::span<const DailyBar> bars) {
    out << "date,open,close,ret\n";
    for (const DailyBar& b : bars) out << fmt::format("{},{},{},{}\n", b.date, b.open, b.close, b.ret);
}

std::vector<DailyBar> read_daily_bar_csv(std::istream& in) {
    expect_header(in, "date,open,close,ret");
    std::vector<DailyBar> bars;
    std::string line;
    std::size_t line_no = 1;
    while (next_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 4) throw DataError(fmt::format("line {}: expected 4 fields, found {}", line_no, f.size()));
        bars.push_back({std::string(f[0]), parse_field<double>(f[1], line_no, "open"),
                        parse_field<double>(f[2], line_no, "close"), parse_field<double>(f[3], line_no, "ret")});
    }
    return bars;
}

}  // namespace hawkesvol
