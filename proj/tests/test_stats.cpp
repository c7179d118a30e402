#include "hawkesvol/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace hawkesvol;

TEST_CASE("normal cdf at tabulated points") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-2.326347874040841) == doctest::Approx(0.01).epsilon(1e-10));
    CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
}

TEST_CASE("Kolmogorov survival function at its critical values") {
    CHECK(kolmogorov_sf(1.2238478702170823) == doctest::Approx(0.10).epsilon(1e-6));
    CHECK(kolmogorov_sf(1.3580986393225505) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(kolmogorov_sf(1.6276236115189293) == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(kolmogorov_sf(0.0) == doctest::Approx(1.0));
    CHECK(kolmogorov_sf(5.0) < 1e-20);
}

TEST_CASE("KS statistic by hand") {
    // F(x) = 1 - exp(-x); with one point D = max(F, 1 - F)
    CHECK(ks_unit_exponential({1.0}).statistic == doctest::Approx(1.0 - std::exp(-1.0)));
    // {0.5, 2}: the largest gap is F(0.5) - 0 below the first step
    CHECK(ks_unit_exponential({2.0, 0.5}).statistic == doctest::Approx(1.0 - std::exp(-0.5)));
}

TEST_CASE("type 7 quantiles and moments") {
    const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
    CHECK(quantile_sorted(xs, 0.5) == doctest::Approx(2.5));
    CHECK(quantile_sorted(xs, 0.25) == doctest::Approx(1.75));
    CHECK(quantile_sorted(xs, 0.0) == 1.0);
    CHECK(quantile_sorted(xs, 1.0) == 4.0);
    CHECK(mean(xs) == doctest::Approx(2.5));
    CHECK(sample_variance(xs) == doctest::Approx(5.0 / 3.0));
}
