// replication.hpp
//
// Scripted reproductions of the quantitative studies: the Poisson
// threshold example, the inverse-gamma rare-event experiment, the
// multiple-births analysis on the embedded frequency table, and a
// numeric check of the Zipf-Mandelbrot tail-ratio limit.

#pragma once

#include <string>
#include <vector>

#include "dex/mle.hpp"
#include "dex/pot.hpp"
#include "dex/rng.hpp"

namespace dex {

struct MethodSummary {
    std::string method;
    double mean_pe = 0.0;       // mean estimated tail probability
    double coverage_pe = 0.0;   // fraction of CIs containing the truth
    double mean_len_pe = 0.0;   // mean CI length
    double true_len_pe = 0.0;   // minimal symmetric width achieving 90% containment
    double mean_xi = 0.0;
    double coverage_xi = 0.0;
    double mean_len_xi = 0.0;
    double mean_sigma = 0.0;
    double mean_len_sigma = 0.0;
    std::uint64_t n_reps = 0;
    std::uint64_t n_failed = 0;  // fits without a usable covariance
};

struct ExperimentSummary {
    std::vector<MethodSummary> methods;
    double truth_pe = 0.0;
    long long target_m = 0;
    double true_xi = 0.0;
    std::uint64_t reps = 0;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
};

struct PoissonIntroRow {
    std::string method;
    double mean_sigma = 0.0;
    double mean_xi = 0.0;
    std::uint64_t n_failed = 0;
};

struct PoissonIntroResult {
    std::vector<PoissonIntroRow> rows;
    std::uint64_t seeds = 0;
};

struct BirthsRow {
    std::string method;
    FitResult fit;
};

// Multiple-births frequency table (single through quadruplet, with a
// right-censored "quintuplet or more" cell).
GroupedCounts births_fixture();

// Fits a GPD (delta = 0), D-GPD and GZD to exceedances above u of
// Poisson(lambda) samples, averaged over `seeds` independent datasets.
PoissonIntroResult poisson_intro_experiment(std::uint64_t n, double lambda, long long u,
                                            std::uint64_t seeds, const RngStream& rng);

// Inverse-gamma experiment: Y ~ IG(2,1), X = floor(Y); threshold at the
// given empirical percentile, five fitting methods, tail probability at
// m = floor(q_e) with 90% confidence intervals, aggregated over `reps`
// replications (deterministic given the stream, including in parallel).
ExperimentSummary table_experiment(std::uint64_t reps, std::uint64_t n, double percentile,
                                   const RngStream& rng);

// Right-censored fits of D-GPD, GZD, negative binomial and Poisson to the
// births exceedances above the twin level u = 2.
std::vector<BirthsRow> births_analysis();

// Max over k <= k_max of |P(X = k+u | X >= u) / p_GZD(k; xi*u, xi) - 1|
// for X Zipf-Mandelbrot(s, q=1) and xi = 1/(s-1), from exact zeta sums.
double theorem1_ratio_check(double s, long long u, long long k_max);

}  // namespace dex
