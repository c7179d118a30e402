#pragma once

#include <span>
#include <vector>

namespace hawkesvol {

double normal_cdf(double x);

double mean(std::span<const double> xs);
/// Unbiased sample variance.
double sample_variance(std::span<const double> xs);

/// Linear interpolation between order statistics (the usual "type 7" rule). `sorted` must be
/// ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double p);

/// Survival function of the Kolmogorov distribution, 2 sum_k (-1)^(k-1) exp(-2 k^2 x^2).
double kolmogorov_sf(double x);

struct KsResult {
    double statistic{0.0};
    double pvalue{1.0};
};

/// One-sample Kolmogorov-Smirnov test against the unit exponential, with the Stephens
/// small-sample correction (sqrt(n) + 0.12 + 0.11 / sqrt(n)) D.
KsResult ks_unit_exponential(std::vector<double> sample);

}  // namespace hawkesvol
