#include "hawkesvol/simulate.hpp"

#include "hawkesvol/errors.hpp"
#include "hawkesvol/moments.hpp"
#include "hawkesvol/parallel.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

namespace hawkesvol {

MarkModel MarkModel::constant() { return {}; }

MarkModel MarkModel::geometric(double mean) {
    if (!(mean >= 1.0) || !std::isfinite(mean)) throw ConfigError("geometric mark mean must be >= 1");
    MarkModel m;
    m.kind_ = Kind::geometric;
    m.mean_ = mean;
    return m;
}

MarkModel MarkModel::empirical(std::vector<double> probabilities) {
    if (probabilities.empty()) throw ConfigError("empty mark histogram");
    double total = 0.0;
    for (double q : probabilities) {
        if (!(q >= 0.0) || !std::isfinite(q)) throw ConfigError("mark probabilities must be non-negative");
        total += q;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("mark probabilities must sum to one");
    MarkModel m;
    m.kind_ = Kind::empirical;
    m.cdf_.resize(probabilities.size());
    std::partial_sum(probabilities.begin(), probabilities.end(), m.cdf_.begin());
    m.cdf_.back() = 1.0;
    return m;
}

MarkModel MarkModel::intensity_linked(double coefficient) {
    if (!(coefficient >= 0.0) || !std::isfinite(coefficient)) {
        throw ConfigError("intensity-linked coefficient must be non-negative");
    }
    MarkModel m;
    m.kind_ = Kind::intensity_linked;
    m.coefficient_ = coefficient;
    return m;
}

namespace {

int draw_geometric(std::mt19937_64& rng, double mean) {
    if (mean <= 1.0) return 1;
    std::geometric_distribution<int> failures(1.0 / mean);
    return failures(rng) + 1;
}

}  // namespace

int MarkModel::draw(std::mt19937_64& rng, const Vec2& intensity) const {
    switch (kind_) {
        case Kind::constant:
            return 1;
        case Kind::geometric:
            return draw_geometric(rng, mean_);
        case Kind::empirical: {
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
            return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf_.begin(), cdf_.size() - 1)) + 1;
        }
        case Kind::intensity_linked:
            return draw_geometric(rng, std::clamp(1.0 + coefficient_ * intensity.sum(), 1.0, kLinkedMeanCap));
    }
    return 1;
}

double MarkModel::mean() const {
    switch (kind_) {
        case Kind::constant:
            return 1.0;
        case Kind::geometric:
            return mean_;
        case Kind::empirical: {
            double m = 0.0, prev = 0.0;
            for (std::size_t k = 0; k < cdf_.size(); ++k) {
                m += static_cast<double>(k + 1) * (cdf_[k] - prev);
                prev = cdf_[k];
            }
            return m;
        }
        case Kind::intensity_linked:
            break;
    }
    throw ConfigError("intensity-linked marks have no fixed moments");
}

double MarkModel::second_moment() const {
    switch (kind_) {
        case Kind::constant:
            return 1.0;
        case Kind::geometric:
            return 2.0 * mean_ * mean_ - mean_;
        case Kind::empirical: {
            double m = 0.0, prev = 0.0;
            for (std::size_t k = 0; k < cdf_.size(); ++k) {
                const double z = static_cast<double>(k + 1);
                m += z * z * (cdf_[k] - prev);
                prev = cdf_[k];
            }
            return m;
        }
        case Kind::intensity_linked:
            break;
    }
    throw ConfigError("intensity-linked marks have no fixed moments");
}

MarkSummaries MarkModel::summaries() const {
    return MarkSummaries::independent(Vec2::constant(mean()), Vec2::constant(second_moment()));
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path_index) {
    // splitmix64 finaliser applied to a golden-ratio stride of the index
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (path_index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

/// Summaries used for gating and for the starting intensity. Intensity-linked marks have no
/// fixed moments, so only the base kernel is gated and the runaway cap catches explosions.
MarkSummaries gating_summaries(const MarkModel& marks) {
    return marks.kind() == MarkModel::Kind::intensity_linked ? MarkSummaries::ones() : marks.summaries();
}

}  // namespace

double default_burn_in(const MarkedHawkesParams& p, const MarkModel& marks) {
    const double rho = stability(p, gating_summaries(marks)).spectral_radius;
    const double slowest = std::max(1.0 / p.base.beta[0], 1.0 / p.base.beta[1]);
    return 10.0 * slowest / (1.0 - rho);
}

Vec2 simulate_stream(const MarkedHawkesParams& p, const MarkModel& marks, double horizon, std::uint64_t seed,
                     const EventSink& on_event, const SimOptions& options) {
    if (!(horizon > 0.0)) throw ConfigError("simulation horizon must be positive");
    const MarkSummaries gate = gating_summaries(marks);
    validate(p, gate);
    const Vec2 start = expected_intensity_marked(p, gate);
    const double burn = options.burn_in >= 0.0 ? options.burn_in : default_burn_in(p, marks);
    if (start.sum() * (horizon + burn) > options.max_events) {
        throw NumericalError("runaway simulation: expected event count exceeds the cap");
    }

    const auto& mu = p.base.mu;
    const auto& beta = p.base.beta;
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> exp1(1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Vec2 excess = start - mu;
    double t = -burn;
    double count = 0.0;
    for (;;) {
        // Between events the intensity only decays, so its current value bounds the future.
        const double bound = mu.sum() + excess.sum();
        const double wait = exp1(rng) / bound;
        const double next = t + wait;
        if (next >= horizon) {
            const double rest = horizon - t;
            for (std::size_t i = 0; i < 2; ++i) excess[i] *= std::exp(-beta[i] * rest);
            break;
        }
        for (std::size_t i = 0; i < 2; ++i) excess[i] *= std::exp(-beta[i] * wait);
        t = next;
        const Vec2 lambda = mu + excess;
        const double total = lambda.sum();
        assert(total <= bound * (1.0 + 1e-12));
        if (unif(rng) * bound > total) continue;

        const Side side = unif(rng) * total < lambda[0] ? Side::up : Side::down;
        const int mark = marks.draw(rng, lambda);
        if (t >= 0.0) on_event(Event{t, side, mark}, lambda);
        const std::size_t j = index(side);
        for (std::size_t i = 0; i < 2; ++i) {
            excess[i] += p.base.alpha(i, j) + p.eta(i, j) * (mark - 1);
        }
        if (++count > options.max_events) throw NumericalError("runaway simulation: event cap exceeded");
    }
    return mu + excess;
}

SimPath simulate(const MarkedHawkesParams& p, const MarkModel& marks, double horizon, std::uint64_t seed,
                 const SimOptions& options) {
    SimPath path;
    path.seed = seed;
    bool first = true;
    const Vec2 end = simulate_stream(
        p, marks, horizon, seed,
        [&](const Event& e, const Vec2& before) {
            if (first) {
                // Undo the decay between 0 and the first event to recover the intensity at 0.
                for (std::size_t i = 0; i < 2; ++i) {
                    path.initial_intensity[i] =
                        p.base.mu[i] + (before[i] - p.base.mu[i]) * std::exp(p.base.beta[i] * e.time);
                }
                first = false;
            }
            path.events.push_back(e);
        },
        options);
    path.final_intensity = end;
    if (first) {
        for (std::size_t i = 0; i < 2; ++i) {
            path.initial_intensity[i] = p.base.mu[i] + (end[i] - p.base.mu[i]) * std::exp(p.base.beta[i] * horizon);
        }
    }
    return path;
}

McEstimate mc_variance(const MarkedHawkesParams& p, const MarkModel& marks, double t, int n_paths,
                       std::uint64_t seed, int jobs, const SimOptions& options) {
    if (n_paths < 2) throw ConfigError("mc_variance needs at least two paths");
    std::vector<double> net(static_cast<std::size_t>(n_paths), 0.0);
    parallel_for(net.size(), jobs, [&](std::size_t k) {
        double acc = 0.0;
        simulate_stream(
            p, marks, t, path_seed(seed, k),
            [&acc](const Event& e, const Vec2&) { acc += sign(e.side) * e.mark; }, options);
        net[k] = acc;
    });

    const double n = static_cast<double>(net.size());
    const double mean = std::accumulate(net.begin(), net.end(), 0.0) / n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : net) {
        const double d2 = (x - mean) * (x - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    return {m2 * n / (n - 1.0), std::sqrt(std::max(m4 - m2 * m2, 0.0) / n)};
}

}  // namespace hawkesvol
