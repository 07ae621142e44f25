// mle.hpp
//
// Maximum-likelihood fitting of the supported families to exceedance
// data (raw or grouped, optionally right-censored, optionally with a
// covariate-linear scale), plus covariance estimation via the observed
// information and normal-theory confidence intervals.

#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "dex/types.hpp"

namespace dex {

// Either a grouped integer sample or a raw sequence of observations.
// The raw form is required for continuous fits and for covariate models;
// the two representations of the same integer sample give identical
// likelihoods.
class FitData {
public:
    static FitData from_grouped(GroupedCounts g);
    static FitData from_raw(std::vector<double> values);

    bool is_grouped() const { return grouped_.has_value(); }
    const GroupedCounts& grouped() const { return *grouped_; }
    const std::vector<double>& raw() const { return raw_; }

    bool empty() const;
    double total_count() const;  // includes censored mass
    std::size_t distinct_values() const;

private:
    std::optional<GroupedCounts> grouped_;
    std::vector<double> raw_;
};

struct FitOptions {
    std::array<double, 2> start{1.0, 1.0};  // (sigma, xi) for tail families
    int max_iterations = 2000;
    double tolerance = 1e-10;  // relative NLL convergence
    // Per-observation covariate for the linear-scale model
    // sigma_i = sigma0 + sigma_t * c_i; must align with raw observations.
    std::vector<double> covariate;
};

struct FitResult {
    Family family;
    std::vector<double> estimates;               // natural coordinates
    std::vector<std::vector<double>> covariance;  // inverse observed information
    bool covariance_ok = false;
    double nll = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    double n = 0.0;  // effective sample size (total count incl. censored)
    bool converged = false;
    bool boundary_hit = false;    // sigma floor or xi = 0 boundary at the optimum
    bool degenerate_data = false; // fewer distinct values than free parameters

    double se(std::size_t j) const;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

// Negative log-likelihood. Infeasible parameter vectors yield +infinity
// (soft rejection) so the optimizer can retreat; empty data is an error.
double nll(const Family& family, const std::vector<double>& params,
           const FitData& data, const FitOptions& options = {});

FitResult fit(const Family& family, const FitData& data, const FitOptions& options = {});

// Finite-difference Hessian of the nll at `params` (natural coordinates).
std::vector<std::vector<double>> observed_information(
    const Family& family, const std::vector<double>& params, const FitData& data,
    const FitOptions& options = {});

// Central-difference Hessian of an arbitrary function; coordinates flagged
// in `one_sided` use forward differencing (parameters on a boundary).
std::vector<std::vector<double>> numerical_hessian(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, const std::vector<bool>& one_sided = {});

// theta_j +/- z * se_j; requires a converged covariance.
Interval confint(const FitResult& result, double level, std::size_t component);

// Inverse standard normal cdf (Wichura's AS241, ~1e-15 accurate).
double normal_quantile(double p);

}  // namespace dex
