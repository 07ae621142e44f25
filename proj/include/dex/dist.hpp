// dist.hpp
//
// Exact evaluation of the distribution families used throughout: the
// continuous generalized Pareto (GPD), its discrete counterpart (D-GPD,
// obtained by differencing the survival function at integers), the
// generalized Zipf distribution (GZD, a Zipf-Mandelbrot law for xi > 0
// and geometric for xi = 0), the classic discrete baselines, and the
// Hurwitz zeta function that normalizes the GZD.
//
// All probability mass is computed in log space; linear-scale values are
// exponentiated on demand. The xi = 0 branch is taken whenever
// |xi| < kXiZeroTol to avoid cancellation in (1 + xi x / sigma)^(-1/xi).

#pragma once

#include <cstdint>
#include <vector>

#include "dex/rng.hpp"
#include "dex/types.hpp"

namespace dex {

inline constexpr double kXiZeroTol = 1e-8;

// ---- continuous GPD (raw parameters; xi may be negative here, which the
// ---- unrestricted continuous fits need; the TailParams overloads below
// ---- enforce xi >= 0) ----

double gpd_log_sf(double x, double sigma, double xi);
double gpd_sf(double x, double sigma, double xi);
double gpd_log_pdf(double x, double sigma, double xi, double delta = 0.0);
double gpd_quantile(double u, double sigma, double xi);

double gpd_survival(double x, const TailParams& p);
double gpd_density(double x, const TailParams& p, double delta = 0.0);
double gpd_quantile(double u, const TailParams& p);

// ---- discrete GPD ----

double dgpd_log_pmf(long long k, double sigma, double xi);
double dgpd_pmf(long long k, const TailParams& p);
double dgpd_survival(long long k, const TailParams& p);
double dgpd_log_sf(long long k, double sigma, double xi);
long long dgpd_quantile(double u, const TailParams& p);

// ---- Hurwitz zeta H(s,q) = sum_{i>=0} (q+i)^(-s), s > 1, q > 0 ----

double hurwitz_zeta(double s, double q);
double log_hurwitz_zeta(double s, double q);

// ---- generalized Zipf ----

double gzd_log_pmf(long long k, double sigma, double xi);
double gzd_pmf(long long k, const TailParams& p);
double gzd_log_sf(long long k, double sigma, double xi);
double gzd_survival(long long k, const TailParams& p);
long long gzd_quantile(double u, const TailParams& p);

// ---- baseline discrete families ----

double geometric_log_pmf(long long k, double p);
double poisson_log_pmf(long long k, double lambda);
double neg_binomial_log_pmf(long long k, double r, double p);

// P(X >= k) for the baselines, by stable tail summation.
double geometric_log_sf(long long k, double p);
double poisson_log_sf(long long k, double lambda);
double neg_binomial_log_sf(long long k, double r, double p);

double baseline_pmf(const Family& family, const std::vector<double>& params, long long k);

// ---- family-generic discrete views (used by the POT pipeline and the
// ---- goodness-of-fit machinery; a continuous GPD is discretized as
// ---- P(X = k) = F(k+1) - F(k)) ----

double discrete_log_pmf(const Family& family, const std::vector<double>& params, long long k);
double discrete_sf(const Family& family, const std::vector<double>& params, long long k);
double discrete_cdf(const Family& family, const std::vector<double>& params, long long k);
long long discrete_quantile(const Family& family, const std::vector<double>& params, double u);

// ---- sampling ----
//
// Deterministic given the stream: GPD and D-GPD by quantile inversion of
// uniform draws (D-GPD as the floor of a GPD draw), GZD by bracketed
// quantile search, inverse gamma as beta over a gamma draw.
std::vector<double> sample(const Family& family, const std::vector<double>& params,
                           std::size_t n, RngStream& rng);

// Single discrete draw from a fitted discrete-view family.
long long sample_discrete(const Family& family, const std::vector<double>& params,
                          RngStream& rng);

// ---- invariance of the D-GPD under affine rounding ----
//
// With X = floor(lambda * Y + 1 - h) for a GPD(sigma, xi) variable Y, the
// conditional law of X - u given X >= u is D-GPD with scale
// lambda*sigma + xi*(u + h - 1) and shape xi. Returns the maximum
// absolute deviation between the two pmfs over k = 0..k_max.
double invariance_check(double sigma, double xi, double lambda, double h,
                        long long u, long long k_max);

}  // namespace dex
