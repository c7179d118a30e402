#pragma once

// Up/down price-change events shared by the simulator, the estimator and the filter.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace hawkesvol {

enum class Side : std::uint8_t { up = 0, down = 1 };

inline constexpr std::size_t index(Side s) { return static_cast<std::size_t>(s); }
/// +1 for up, -1 for down: the sign used in the event CSV and in N1 - N2.
inline constexpr int sign(Side s) { return s == Side::up ? 1 : -1; }

struct Event {
    double time{0.0};  ///< seconds from session open
    Side side{Side::up};
    int mark{1};  ///< absolute price change in ticks, >= 1

    friend bool operator==(const Event&, const Event&) = default;
};

struct EventStream {
    std::int64_t session_open_ns{0};
    double tick_size{0.01};
    std::vector<Event> events;
};

/// Throws DataError unless times are strictly increasing, finite and inside [0, horizon]
/// and every mark is >= 1. A non-positive horizon skips the upper bound check.
void check_events(const std::vector<Event>& events, double horizon);

/// Shift later members of every group of identical timestamps by +1 ns per position in the
/// group, so the stream becomes strictly increasing. Returns the number of events moved.
std::size_t break_ties(std::vector<Event>& events);

}  // namespace hawkesvol
