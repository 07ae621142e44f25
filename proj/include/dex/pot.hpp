// pot.hpp
//
// Peaks-over-threshold pipeline: threshold selection by empirical
// percentile, exceedance extraction, and rare-event probability
// estimation with delta-method confidence intervals.

#pragma once

#include <span>
#include <vector>

#include "dex/mle.hpp"
#include "dex/types.hpp"

namespace dex {

struct ExceedanceSample {
    long long threshold = 0;
    GroupedCounts exceedances;  // grouped over k = x - u >= 0
    std::uint64_t n_total = 0;
    double p_u_hat = 0.0;  // empirical P(X >= u)
};

struct TailEstimate {
    long long target = 0;  // m
    double p_e_hat = 0.0;
    double se = 0.0;
    Interval ci;
    Family method;
};

// Order statistic x_(ceil(n * percentile)), 1-indexed ascending.
long long select_threshold(std::span<const long long> data, double percentile);
long long select_threshold(const GroupedCounts& data, double percentile);

ExceedanceSample exceedances(std::span<const long long> data, long long u);
// Grouped variant; a censor cell is shifted along with the values.
ExceedanceSample exceedances(const GroupedCounts& data, long long u);

// p_e = p_u * S(m - u) with S the fitted family's exceedance survival;
// the standard error propagates the parameter covariance through S by
// central differences. p_u is treated as fixed unless
// `include_threshold_variance` adds the binomial term.
TailEstimate tail_probability(const FitResult& fit, const ExceedanceSample& sample,
                              long long m, double level = 0.90,
                              bool include_threshold_variance = false);

// Core form for callers that track p_u themselves (e.g. continuous
// benchmark fits): gap = m - u.
TailEstimate tail_probability_at_gap(const FitResult& fit, double p_u_hat,
                                     std::uint64_t n_total, long long gap,
                                     double level = 0.90,
                                     bool include_threshold_variance = false);

}  // namespace dex
