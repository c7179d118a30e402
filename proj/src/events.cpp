#include "hawkesvol/events.hpp"

#include "hawkesvol/errors.hpp"

#include <cmath>
#include <string>

namespace hawkesvol {

void check_events(const std::vector<Event>& events, double horizon) {
    double prev = -1.0;
    for (std::size_t k = 0; k < events.size(); ++k) {
        const Event& e = events[k];
        if (!std::isfinite(e.time) || e.time < 0.0) {
            throw DataError("event " + std::to_string(k) + ": time outside the session");
        }
        if (horizon > 0.0 && e.time > horizon) {
            throw DataError("event " + std::to_string(k) + ": time beyond the horizon");
        }
        if (e.time <= prev) throw DataError("events not strictly increasing at index " + std::to_string(k));
        if (e.mark < 1) throw DataError("event " + std::to_string(k) + ": mark below one tick");
        prev = e.time;
    }
}

std::size_t break_ties(std::vector<Event>& events) {
    constexpr double kNanosecond = 1e-9;
    std::size_t moved = 0;
    double original_prev = events.empty() ? 0.0 : events.front().time;
    for (std::size_t k = 1; k < events.size(); ++k) {
        const double original = events[k].time;
        if (original == original_prev) {
            events[k].time = events[k - 1].time + kNanosecond;
            ++moved;
        }
        original_prev = original;
    }
    return moved;
}

}  // namespace hawkesvol
