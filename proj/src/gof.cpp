#include "dex/gof.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "dex/dist.hpp"
#include "parallel.hpp"

namespace dex {

double ks_statistic(const GroupedCounts& data, const Family& family,
                    const std::vector<double>& params) {
    if (data.empty()) throw std::domain_error("ks_statistic: empty data");
    if (data.censor() && data.censor()->count > 0)
        throw std::invalid_argument("ks_statistic: censored data unsupported");

    const double n = static_cast<double>(data.total());
    double d = 0.0;
    std::uint64_t cum = 0;
    for (const auto& [v, c] : data.cells()) {
        // predecessor: empirical cdf just below the jump at v
        const double fn_pred = static_cast<double>(cum) / n;
        d = std::max(d, std::fabs(fn_pred - discrete_cdf(family, params, v - 1)));
        cum += c;
        const double fn = static_cast<double>(cum) / n;
        d = std::max(d, std::fabs(fn - discrete_cdf(family, params, v)));
    }
    return d;
}

namespace {

GroupedCounts simulate_grouped(const Family& family, const std::vector<double>& params,
                               std::uint64_t n, RngStream& rng) {
    GroupedCounts g;
    for (std::uint64_t i = 0; i < n; ++i) g.add(sample_discrete(family, params, rng));
    return g;
}

}  // namespace

KsResult ks_pvalue(const GroupedCounts& data, const Family& family, const FitResult& fitres,
                   std::uint64_t replicates, bool refit, const RngStream& rng) {
    if (replicates < 1) throw std::domain_error("ks_pvalue: need at least one replicate");
    const std::uint64_t n = data.total();
    const double d_obs = ks_statistic(data, family, fitres.estimates);

    std::vector<double> d_boot(replicates);
    std::atomic<std::uint64_t> nonconverged{0};
    detail::parallel_for(replicates, [&](std::size_t b) {
        RngStream stream = rng.substream(b);
        const GroupedCounts sim = simulate_grouped(family, fitres.estimates, n, stream);
        std::vector<double> params = fitres.estimates;
        if (refit) {
            const FitResult rf = fit(family, FitData::from_grouped(sim));
            if (!rf.converged) nonconverged.fetch_add(1);
            params = rf.estimates;
        }
        d_boot[b] = ks_statistic(sim, family, params);
    });

    std::uint64_t count = 0;
    for (double db : d_boot)
        if (db >= d_obs) ++count;

    KsResult res;
    res.statistic = d_obs;
    res.p_value = static_cast<double>(1 + count) / static_cast<double>(replicates + 1);
    res.mc_replicates = replicates;
    res.refit = refit;
    res.n_nonconverged = nonconverged.load();
    return res;
}

namespace {

double model_quantile(const Family& family, const std::vector<double>& params, double u) {
    if (family.tag == FamilyTag::Gpd) return gpd_quantile(u, params.at(0), params.at(1));
    return static_cast<double>(discrete_quantile(family, params, u));
}

double model_draw(const Family& family, const std::vector<double>& params, RngStream& rng) {
    if (family.tag == FamilyTag::Gpd)
        return gpd_quantile(rng.uniform(), params.at(0), params.at(1));
    return static_cast<double>(sample_discrete(family, params, rng));
}

std::size_t envelope_rank(double q, std::size_t n_sims) {
    const double idx = q * static_cast<double>(n_sims - 1);
    return std::min<std::size_t>(n_sims - 1,
                                 static_cast<std::size_t>(std::llround(idx)));
}

}  // namespace

QqData qq_points(const GroupedCounts& data, const Family& family,
                 const std::vector<double>& params, std::uint64_t n_sims, double level,
                 const RngStream& rng) {
    if (!(level > 0.0 && level < 1.0))
        throw std::domain_error("qq_points: level must lie in (0,1)");
    std::vector<long long> values = data.expand();
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 0) throw std::domain_error("qq_points: empty data");

    QqData qq;
    qq.n_sims = n_sims;
    qq.level = level;
    qq.positions.resize(n);
    qq.empirical_q.resize(n);
    qq.model_q.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        qq.positions[i] = static_cast<double>(i + 1) / static_cast<double>(n + 1);
        qq.empirical_q[i] = static_cast<double>(values[i]);
        qq.model_q[i] = model_quantile(family, params, qq.positions[i]);
    }
    if (n_sims == 0) return qq;

    // sims x positions matrix of sorted simulated samples
    std::vector<double> sims(static_cast<std::size_t>(n_sims) * n);
    detail::parallel_for(n_sims, [&](std::size_t s) {
        RngStream stream = rng.substream(s);
        std::vector<double> draw(n);
        for (std::size_t i = 0; i < n; ++i) draw[i] = model_draw(family, params, stream);
        std::sort(draw.begin(), draw.end());
        std::copy(draw.begin(), draw.end(), sims.begin() + s * n);
    });

    const double alpha = 0.5 * (1.0 - level);
    const std::size_t lo_rank = envelope_rank(alpha, n_sims);
    const std::size_t hi_rank = envelope_rank(1.0 - alpha, n_sims);
    qq.lo.resize(n);
    qq.hi.resize(n);
    std::vector<double> column(n_sims);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < n_sims; ++s) column[s] = sims[s * n + i];
        std::sort(column.begin(), column.end());
        qq.lo[i] = column[lo_rank];
        qq.hi[i] = column[hi_rank];
    }
    return qq;
}

}  // namespace dex
