#include "dex/pot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dex/dist.hpp"

namespace dex {

long long select_threshold(std::span<const long long> data, double percentile) {
    if (data.empty()) throw std::domain_error("select_threshold: empty data");
    if (!(percentile > 0.0 && percentile < 1.0))
        throw std::domain_error("select_threshold: percentile must lie in (0,1)");
    std::vector<long long> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    // guard against n*p landing just above an integer in floating point
    auto rank = static_cast<std::size_t>(std::ceil(n * percentile - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

long long select_threshold(const GroupedCounts& data, double percentile) {
    if (data.empty()) throw std::domain_error("select_threshold: empty data");
    if (!(percentile > 0.0 && percentile < 1.0))
        throw std::domain_error("select_threshold: percentile must lie in (0,1)");
    const double n = static_cast<double>(data.total());
    auto rank = static_cast<std::uint64_t>(std::ceil(n * percentile - 1e-9));
    rank = std::max<std::uint64_t>(rank, 1);
    std::uint64_t cum = 0;
    for (const auto& [v, c] : data.cells()) {
        cum += c;
        if (cum >= rank) return v;
    }
    if (data.censor()) return data.censor()->threshold;
    return data.cells().rbegin()->first;
}

ExceedanceSample exceedances(std::span<const long long> data, long long u) {
    ExceedanceSample s;
    s.threshold = u;
    s.n_total = data.size();
    std::uint64_t n_exceed = 0;
    for (long long x : data) {
        if (x >= u) {
            s.exceedances.add(x - u);
            ++n_exceed;
        }
    }
    if (n_exceed == 0) throw std::domain_error("exceedances: no observation reaches u");
    s.p_u_hat = static_cast<double>(n_exceed) / static_cast<double>(s.n_total);
    return s;
}

ExceedanceSample exceedances(const GroupedCounts& data, long long u) {
    ExceedanceSample s;
    s.threshold = u;
    s.n_total = data.total();
    std::uint64_t n_exceed = 0;
    for (const auto& [v, c] : data.cells()) {
        if (v >= u) {
            s.exceedances.add(v - u, c);
            n_exceed += c;
        }
    }
    if (const auto& cen = data.censor(); cen && cen->count > 0) {
        if (cen->threshold < u)
            throw std::domain_error("exceedances: censor threshold below u");
        s.exceedances.set_censor(cen->threshold - u, cen->count);
        n_exceed += cen->count;
    }
    if (n_exceed == 0) throw std::domain_error("exceedances: no observation reaches u");
    s.p_u_hat = static_cast<double>(n_exceed) / static_cast<double>(s.n_total);
    return s;
}

namespace {

// Exceedance survival S(gap) of the fitted family.
double model_survival(const Family& family, const std::vector<double>& params, double gap) {
    switch (family.tag) {
        case FamilyTag::Dgpd:
        case FamilyTag::Gpd:
            // continuous survival at the integer gap; for the D-GPD this is
            // exact, for the GPD it is the fitted continuous law
            return gpd_sf(gap, params.at(0), params.at(1));
        case FamilyTag::Gzd:
            return std::exp(gzd_log_sf(static_cast<long long>(gap), params.at(0), params.at(1)));
        case FamilyTag::Geometric:
            return std::exp(geometric_log_sf(static_cast<long long>(gap), params.at(0)));
        case FamilyTag::Poisson:
            return std::exp(poisson_log_sf(static_cast<long long>(gap), params.at(0)));
        case FamilyTag::NegBinomial:
            return std::exp(
                neg_binomial_log_sf(static_cast<long long>(gap), params.at(0), params.at(1)));
        default:
            throw std::invalid_argument("tail_probability: unsupported family");
    }
}

// Survival evaluated with soft parameter clipping so finite-difference
// probes just outside the feasible region stay evaluable.
double survival_clipped(const Family& family, std::vector<double> params, double gap) {
    if (family.tag == FamilyTag::Dgpd || family.tag == FamilyTag::Gzd)
        params[1] = std::max(params[1], 0.0);
    if (!params.empty()) params[0] = std::max(params[0], 1e-12);
    return model_survival(family, params, gap);
}

}  // namespace

TailEstimate tail_probability_at_gap(const FitResult& fit, double p_u_hat,
                                     std::uint64_t n_total, long long gap,
                                     double level, bool include_threshold_variance) {
    if (gap < 0) throw std::domain_error("tail_probability: m must be >= u");
    if (fit.estimates.size() > 2)
        throw std::invalid_argument("tail_probability: covariate fits unsupported");
    if (!fit.covariance_ok)
        throw std::runtime_error("tail_probability: covariance unavailable");

    const double gap_d = static_cast<double>(gap);
    const double s_hat = model_survival(fit.family, fit.estimates, gap_d);

    TailEstimate est;
    est.method = fit.family;
    est.p_e_hat = p_u_hat * s_hat;

    // delta method: gradient of S by central differences
    const std::size_t d = fit.estimates.size();
    std::vector<double> grad(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double h = std::max(1e-5, 1e-5 * std::fabs(fit.estimates[j]));
        std::vector<double> up = fit.estimates, dn = fit.estimates;
        up[j] += h;
        dn[j] -= h;
        grad[j] = (survival_clipped(fit.family, up, gap_d) -
                   survival_clipped(fit.family, dn, gap_d)) / (2.0 * h);
    }
    double var = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            var += grad[i] * fit.covariance[i][j] * grad[j];
    var = std::max(var, 0.0) * p_u_hat * p_u_hat;
    if (include_threshold_variance && n_total > 0)
        var += s_hat * s_hat * p_u_hat * (1.0 - p_u_hat) / static_cast<double>(n_total);

    est.se = std::sqrt(var);
    const double z = level == 0.0 ? 0.0 : normal_quantile(0.5 * (1.0 + level));
    est.ci = Interval{std::clamp(est.p_e_hat - z * est.se, 0.0, 1.0),
                      std::clamp(est.p_e_hat + z * est.se, 0.0, 1.0)};
    return est;
}

TailEstimate tail_probability(const FitResult& fit, const ExceedanceSample& sample,
                              long long m, double level, bool include_threshold_variance) {
    if (m < sample.threshold) throw std::domain_error("tail_probability: m must be >= u");
    TailEstimate est = tail_probability_at_gap(fit, sample.p_u_hat, sample.n_total,
                                               m - sample.threshold, level,
                                               include_threshold_variance);
    est.target = m;
    return est;
}

}  // namespace dex
