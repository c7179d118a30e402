#pragma once

// Ogata thinning for the marked bivariate Hawkes process. This is the Monte Carlo oracle for
// the closed-form moments and the data source for estimator recovery tests.

#include "hawkesvol/events.hpp"
#include "hawkesvol/model.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace hawkesvol {

class MarkModel {
public:
    enum class Kind { constant, geometric, empirical, intensity_linked };

    /// Every mark equals one tick.
    static MarkModel constant();
    /// Geometric on {1, 2, ...} with the given mean (>= 1).
    static MarkModel geometric(double mean);
    /// probabilities[k] is P(mark = k + 1); must be non-negative and sum to one.
    static MarkModel empirical(std::vector<double> probabilities);
    /// Geometric whose mean is 1 + coefficient * (lambda_1 + lambda_2), clipped to [1, 50].
    static MarkModel intensity_linked(double coefficient);

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] int draw(std::mt19937_64& rng, const Vec2& intensity) const;

    /// Mark moments for the independent-marks closed forms. Throws ConfigError for the
    /// intensity-linked kind, whose moments depend on the path.
    [[nodiscard]] MarkSummaries summaries() const;
    [[nodiscard]] double mean() const;
    [[nodiscard]] double second_moment() const;

private:
    Kind kind_{Kind::constant};
    double mean_{1.0};
    double coefficient_{0.0};
    std::vector<double> cdf_;
};

inline constexpr double kLinkedMeanCap = 50.0;

struct SimPath {
    std::vector<Event> events;
    Vec2 initial_intensity;  ///< intensity at time 0, after burn-in
    Vec2 final_intensity;    ///< intensity at the horizon
    std::uint64_t seed{0};
};

struct SimOptions {
    /// Negative selects 10 * max(1/beta) / (1 - rho).
    double burn_in{-1.0};
    /// Refuse to simulate when the expected (or realized) number of events exceeds this.
    double max_events{5e7};
};

/// Deterministic per-path seed derived from the run seed and the path index.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path_index);

double default_burn_in(const MarkedHawkesParams& p, const MarkModel& marks);

SimPath simulate(const MarkedHawkesParams& p, const MarkModel& marks, double horizon, std::uint64_t seed,
                 const SimOptions& options = {});

/// Streaming form: `on_event` sees every retained event in order and the intensity just
/// before it. Returns the intensity at the horizon.
using EventSink = std::function<void(const Event&, const Vec2& intensity_before)>;
Vec2 simulate_stream(const MarkedHawkesParams& p, const MarkModel& marks, double horizon, std::uint64_t seed,
                     const EventSink& on_event, const SimOptions& options = {});

struct McEstimate {
    double value{0.0};
    double std_error{0.0};
};

/// Sample variance of the mark-weighted N1(t) - N2(t) over n_paths independent paths, with the
/// fourth-moment standard error sqrt((m4 - s^4) / n). `jobs` <= 0 uses all hardware threads.
McEstimate mc_variance(const MarkedHawkesParams& p, const MarkModel& marks, double t, int n_paths,
                       std::uint64_t seed, int jobs = 0, const SimOptions& options = {});

}  // namespace hawkesvol
