#include "hawkesvol/model.hpp"

#include "hawkesvol/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace hawkesvol {

MarkSummaries MarkSummaries::independent(const Vec2& mean, const Vec2& second_moment) {
    const Mat2 first = Mat2::columns(mean);
    return {first, Mat2::columns(second_moment), first, first};
}

MarkSummaries MarkSummaries::geometric(const Vec2& mean) {
    const Vec2 second{{2.0 * mean[0] * mean[0] - mean[0], 2.0 * mean[1] * mean[1] - mean[1]}};
    return independent(mean, second);
}

Mat2 effective_excitation(const MarkedHawkesParams& p, const MarkSummaries& marks) {
    return p.base.alpha - p.eta + hadamard(p.eta, marks.zbar);
}

StabilityReport stability(const MarkedHawkesParams& p, const MarkSummaries& marks) {
    StabilityReport out;
    const Vec2 inv_beta{{1.0 / p.base.beta[0], 1.0 / p.base.beta[1]}};
    out.effective_branching = Mat2::diag(inv_beta) * effective_excitation(p, marks);
    out.spectral_radius = spectral_radius(out.effective_branching);
    out.stable = std::isfinite(out.spectral_radius) && out.spectral_radius < 1.0;
    return out;
}

StabilityReport stability(const HawkesParams& p) { return stability(MarkedHawkesParams::unmarked(p)); }

void validate(const MarkedHawkesParams& p, const MarkSummaries& marks) {
    const auto& b = p.base;
    if (!b.mu.finite() || !b.alpha.finite() || !b.beta.finite() || !p.eta.finite()) {
        throw InvalidParams("nonfinite parameter");
    }
    if (b.mu[0] <= 0.0 || b.mu[1] <= 0.0) throw InvalidParams("mu nonpositive");
    if (b.beta[0] <= 0.0 || b.beta[1] <= 0.0) throw InvalidParams("beta nonpositive");
    if (std::any_of(b.alpha.a.begin(), b.alpha.a.end(), [](double x) { return x < 0.0; })) {
        throw InvalidParams("alpha negative");
    }
    if (std::any_of(p.eta.a.begin(), p.eta.a.end(), [](double x) { return x < 0.0; })) {
        throw InvalidParams("eta negative");
    }
    if (!stability(p, marks).stable) throw InvalidParams("unstable");
}

void validate(const HawkesParams& p) { validate(MarkedHawkesParams::unmarked(p)); }

std::array<double, kParamCount> to_array(const MarkedHawkesParams& p) {
    const auto& b = p.base;
    return {b.mu[0],    b.mu[1],    b.alpha.a[0], b.alpha.a[1], b.alpha.a[2], b.alpha.a[3],
            b.beta[0],  b.beta[1],  p.eta.a[0],   p.eta.a[1],   p.eta.a[2],   p.eta.a[3]};
}

MarkedHawkesParams from_array(const std::array<double, kParamCount>& x) {
    MarkedHawkesParams p;
    p.base.mu = {{x[0], x[1]}};
    p.base.alpha = {{x[2], x[3], x[4], x[5]}};
    p.base.beta = {{x[6], x[7]}};
    p.eta = {{x[8], x[9], x[10], x[11]}};
    return p;
}

std::string to_key_value(const MarkedHawkesParams& p) {
    const auto values = to_array(p);
    std::string out;
    for (std::size_t i = 0; i < kParamCount; ++i) out += fmt::format("{}={}\n", kParamKeys[i], values[i]);
    return out;
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace

MarkedHawkesParams parse_key_value(const std::string& text) {
    std::map<std::string, double> seen;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::string body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError("parameter line without '=': " + body);
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (std::find_if(kParamKeys.begin(), kParamKeys.end(), [&](const char* k) { return key == k; }) ==
            kParamKeys.end()) {
            throw ConfigError("unknown parameter key: " + key);
        }
        double x = 0.0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
            throw ConfigError("bad value for " + key + ": " + value);
        }
        seen[key] = x;
    }
    std::array<double, kParamCount> values{};
    for (std::size_t i = 0; i < kParamCount; ++i) {
        const auto it = seen.find(kParamKeys[i]);
        if (it != seen.end()) {
            values[i] = it->second;
        } else if (i < 8) {
            throw ConfigError(std::string("missing parameter key: ") + kParamKeys[i]);
        }
    }
    return from_array(values);
}

}  // namespace hawkesvol
