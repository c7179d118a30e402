#pragma once

// Quote ingestion, mid prices, the fixed-grid event filter, realized volatility and daily bars.

#include "hawkesvol/events.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hawkesvol {

struct QuoteTick {
    std::int64_t ts_ns{0};
    double bid{0.0};
    double ask{0.0};
    std::string symbol;
};

struct MidQuote {
    std::int64_t ts_ns{0};
    double mid{0.0};

    friend bool operator==(const MidQuote&, const MidQuote&) = default;
};

struct QualityReport {
    std::size_t records{0};
    std::size_t crossed{0};       ///< ask < bid or a non-positive bid; skipped
    std::size_t out_of_order{0};  ///< timestamp earlier than the last accepted one; skipped
    std::size_t duplicates{0};    ///< mid unchanged from the previous output; collapsed
    std::size_t emitted{0};
};

/// Incremental mid-price extraction. Records sharing a timestamp with the previous output
/// replace it, so the output times are strictly increasing.
class MidPriceBuilder {
public:
    explicit MidPriceBuilder(std::vector<MidQuote>& out) : out_(out) {}
    void push(const QuoteTick& tick);
    const QualityReport& report() const { return report_; }

private:
    std::vector<MidQuote>& out_;
    QualityReport report_;
    std::int64_t last_ts_{std::numeric_limits<std::int64_t>::min()};
};

std::vector<MidQuote> mid_price(std::span<const QuoteTick> ticks, QualityReport* report = nullptr);

/// Streams a `ts_ns,bid,ask,symbol` file line by line. Throws DataError on a malformed line.
void for_each_tick(std::istream& in, const std::function<void(const QuoteTick&)>& fn);
std::vector<MidQuote> read_mid_prices(std::istream& in, QualityReport* report = nullptr);

struct FilterOptions {
    std::int64_t session_open_ns{0};
    double dt{0.1};
    double tick_size{0.01};
    double session_length{0.0};  ///< seconds; 0 means up to the last quote
};

/// Sample the prevailing mid at k*dt after the open (k = 1, 2, ...). Each change between
/// consecutive samples becomes one event stamped at the time the sampled price was set.
/// Throws DataError("tick-size mismatch ...") when a change is not a whole number of ticks.
EventStream filter_grid(std::span<const MidQuote> mids, const FilterOptions& options);

void write_event_csv(std::ostream& out, std::span<const Event> events);
/// Reads `time_s,side,mark`; validates ordering and marks.
std::vector<Event> read_event_csv(std::istream& in);

/// sqrt of the summed squared log returns of the mid sampled every `interval` seconds over
/// [open, open + length]. Throws DataError when no quote precedes the end of the session.
double realized_vol(std::span<const MidQuote> mids, std::int64_t session_open_ns, double session_length,
                    double interval = 300.0);

struct Session {
    std::string date;
    std::int64_t open_ns{0};
    std::int64_t close_ns{0};
};

struct DailyBar {
    std::string date;
    double open{0.0};
    double close{0.0};
    double ret{0.0};
};

struct DailyBars {
    std::vector<DailyBar> bars;
    std::vector<std::string> gaps;  ///< sessions without quotes
};

/// One bar per session from the first and last mid inside [open, close].
DailyBars daily_bars(std::span<const MidQuote> mids, std::span<const Session> calendar);

void write_daily_bar_csv(std::ostream& out, std::span<const DailyBar> bars);
std::vector<DailyBar> read_daily_bar_csv(std::istream& in);

}  // namespace hawkesvol
