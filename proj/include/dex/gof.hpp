// gof.hpp
//
// Goodness-of-fit machinery: a Kolmogorov-Smirnov test for discrete data
// with Monte Carlo p-values (parametric bootstrap), and QQ-plot point and
// envelope generation for discrete fits.

#pragma once

#include <cstdint>
#include <vector>

#include "dex/mle.hpp"
#include "dex/rng.hpp"
#include "dex/types.hpp"

namespace dex {

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::uint64_t mc_replicates = 0;
    bool refit = true;
    std::uint64_t n_nonconverged = 0;  // bootstrap refits that failed to converge
};

struct QqData {
    std::vector<double> positions;    // plotting positions i/(n+1)
    std::vector<double> empirical_q;  // sorted data
    std::vector<double> model_q;      // model quantiles at the positions
    std::vector<double> lo, hi;       // pointwise envelope (empty if n_sims = 0)
    std::uint64_t n_sims = 0;
    double level = 0.0;
};

// D = max over observed values and their predecessors of |F_n(k) - F(k)|,
// with F_n the right-continuous empirical cdf on the integers. A fitted
// continuous GPD is discretized as P(k) = F(k+1) - F(k).
double ks_statistic(const GroupedCounts& data, const Family& family,
                    const std::vector<double>& params);

// Parametric bootstrap: simulate B datasets of size n from the fitted
// model, optionally refit each, and return p = (1 + #{D_b >= D_obs})/(B+1).
// Deterministic under the stream; replicates may run in parallel on
// derived substreams and are aggregated in replicate order.
KsResult ks_pvalue(const GroupedCounts& data, const Family& family, const FitResult& fit,
                   std::uint64_t replicates, bool refit, const RngStream& rng);

// Model quantiles at i/(n+1) against sorted data, with a pointwise
// envelope from n_sims simulated samples of size n. The continuous GPD
// uses its continuous quantile function.
QqData qq_points(const GroupedCounts& data, const Family& family,
                 const std::vector<double>& params, std::uint64_t n_sims, double level,
                 const RngStream& rng);

}  // namespace dex
