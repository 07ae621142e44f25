// POT-layer tests: threshold selection order statistics, exceedance
// extraction (raw and grouped/censored), and delta-method tail estimates
// against an analytic-gradient oracle.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "dex/dist.hpp"
#include "dex/mle.hpp"
#include "dex/pot.hpp"

using namespace dex;

TEST_CASE("select_threshold is the ceil(n p)-th order statistic") {
    std::vector<long long> v(100);
    std::iota(v.begin(), v.end(), 1);  // 1..100
    // 100 * 0.95 = 95 exactly: the floating-point guard must not bump to 96
    CHECK(select_threshold(std::span<const long long>(v), 0.95) == 95);
    CHECK(select_threshold(std::span<const long long>(v), 0.951) == 96);
    CHECK(select_threshold(std::span<const long long>(v), 0.001) == 1);
    CHECK(select_threshold(std::span<const long long>(v), 0.999) == 100);

    std::vector<long long> w{5, 1, 3, 2, 4};
    CHECK(select_threshold(std::span<const long long>(w), 0.5) == 3);

    // grouped form agrees with the span form
    GroupedCounts g = GroupedCounts::from_values(std::span<const long long>(v));
    CHECK(select_threshold(g, 0.95) == 95);
    CHECK(select_threshold(g, 0.3) == 30);
}

TEST_CASE("exceedances shift values and the censor cell") {
    std::vector<long long> v{0, 1, 3, 3, 4, 7, 2, 3};
    const ExceedanceSample e = exceedances(std::span<const long long>(v), 3);
    CHECK(e.threshold == 3);
    CHECK(e.n_total == 8);
    CHECK(e.exceedances.total() == 5);
    CHECK(e.p_u_hat == doctest::Approx(5.0 / 8.0));
    CHECK(e.exceedances.cells().at(0) == 3);
    CHECK(e.exceedances.cells().at(1) == 1);
    CHECK(e.exceedances.cells().at(4) == 1);

    GroupedCounts g;
    g.add(1, 10);
    g.add(2, 4);
    g.set_censor(5, 2);
    const ExceedanceSample eg = exceedances(g, 2);
    CHECK(eg.exceedances.cells().at(0) == 4);
    REQUIRE(eg.exceedances.censor().has_value());
    CHECK(eg.exceedances.censor()->threshold == 3);
    CHECK(eg.exceedances.censor()->count == 2);
    CHECK(eg.p_u_hat == doctest::Approx(6.0 / 16.0));

    // nothing reaches the threshold
    std::vector<long long> low{0, 1, 2};
    CHECK_THROWS(exceedances(std::span<const long long>(low), 10));
}

TEST_CASE("tail probability: point value and delta-method variance oracle") {
    // Build a FitResult by fitting simulated D-GPD exceedances, then check
    // the delta method against analytic derivatives of the D-GPD survival
    // S(k) = (1 + xi k / sigma)^(-1/xi).
    RngStream rng(8);
    GroupedCounts g;
    for (double v : sample(Family::dgpd(), {1.5, 0.4}, 6000, rng))
        g.add(static_cast<long long>(v));
    const FitResult fr = fit(Family::dgpd(), FitData::from_grouped(g));
    REQUIRE(fr.covariance_ok);

    ExceedanceSample sample;
    sample.threshold = 10;
    sample.exceedances = g;
    sample.n_total = 60000;
    sample.p_u_hat = 0.1;

    const long long m = 25;  // gap = 15
    const TailEstimate te = tail_probability(fr, sample, m, 0.90);
    const double sig = fr.estimates[0], xi = fr.estimates[1];
    const double gap = 15.0;
    const double s = std::pow(1.0 + xi * gap / sig, -1.0 / xi);
    CHECK(te.target == m);
    CHECK(te.p_e_hat == doctest::Approx(0.1 * s).epsilon(1e-12));

    // analytic gradient of S wrt (sigma, xi)
    const double a = 1.0 + xi * gap / sig;
    const double ds_dsig = s * (gap / (sig * sig * a));
    const double ds_dxi = s * (std::log(a) / (xi * xi) - gap / (xi * sig * a));
    const auto& c = fr.covariance;
    const double var_s = ds_dsig * ds_dsig * c[0][0] + 2.0 * ds_dsig * ds_dxi * c[0][1] +
                         ds_dxi * ds_dxi * c[1][1];
    CHECK(te.se == doctest::Approx(0.1 * std::sqrt(var_s)).epsilon(1e-4));

    // the normal interval around the estimate, clamped to [0,1]
    const double z = normal_quantile(0.95);
    CHECK(te.ci.lo == doctest::Approx(std::max(0.0, te.p_e_hat - z * te.se)));
    CHECK(te.ci.hi == doctest::Approx(std::min(1.0, te.p_e_hat + z * te.se)));

    // adding the threshold-frequency binomial term can only widen the band
    const TailEstimate tv = tail_probability(fr, sample, m, 0.90, true);
    CHECK(tv.se > te.se);
    CHECK(tv.p_e_hat == doctest::Approx(te.p_e_hat));

    // m at or below the threshold degrades to p_u itself
    const TailEstimate t0 = tail_probability(fr, sample, 10, 0.90);
    CHECK(t0.p_e_hat == doctest::Approx(0.1));
}

TEST_CASE("tail probability at gap works for the continuous benchmark") {
    RngStream rng(9);
    std::vector<double> y;
    for (int i = 0; i < 4000; ++i) y.push_back(gpd_quantile(rng.uniform(), 2.0, 0.3));
    const FitResult fr = fit(Family::gpd(0.0), FitData::from_raw(y));
    REQUIRE(fr.covariance_ok);
    const TailEstimate te = tail_probability_at_gap(fr, 0.05, 80000, 40, 0.90);
    const double s = gpd_sf(40.0, fr.estimates[0], fr.estimates[1]);
    CHECK(te.p_e_hat == doctest::Approx(0.05 * s).epsilon(1e-12));
    CHECK(te.ci.lo >= 0.0);
    CHECK(te.ci.hi <= 1.0);
    CHECK(te.ci.contains(te.p_e_hat));
}

TEST_CASE("confidence level controls the interval width") {
    RngStream rng(10);
    GroupedCounts g;
    for (double v : sample(Family::dgpd(), {1.0, 0.2}, 3000, rng))
        g.add(static_cast<long long>(v));
    const FitResult fr = fit(Family::dgpd(), FitData::from_grouped(g));
    ExceedanceSample sample;
    sample.threshold = 0;
    sample.exceedances = g;
    sample.n_total = 3000;
    sample.p_u_hat = 1.0;
    const TailEstimate a = tail_probability(fr, sample, 8, 0.90);
    const TailEstimate b = tail_probability(fr, sample, 8, 0.99);
    CHECK(b.ci.length() > a.ci.length());
    CHECK(a.se == doctest::Approx(b.se));
}
