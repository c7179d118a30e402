#pragma once

// Non-throwing likelihood kernel shared by the public wrappers and the optimiser.

#include "hawkesvol/estimate.hpp"

namespace hawkesvol::detail {

struct CoreResult {
    bool ok{false};
    bool unstable{false};     ///< stationary start requested but E[lambda] does not exist
    bool nonpositive{false};  ///< some intensity was <= 0 or the value was not finite
    double value{0.0};
    ParamVector gradient{};
};

/// One left-to-right pass over `events` (times absolute, window [start, horizon]).
/// Marks enter only when `use_marks`; `mean_marks` fixes Zbar for the stationary start.
CoreResult evaluate_likelihood(const ParamVector& theta, std::span<const Event> events, double start, double horizon,
                               const Vec2& mean_marks, bool use_marks, InitMode init, bool want_grad,
                               IntensityTrace* trace = nullptr);

}  // namespace hawkesvol::detail
