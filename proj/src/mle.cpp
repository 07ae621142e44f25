#include "dex/mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dex/dist.hpp"

namespace dex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSigmaFloor = 1e-8;   // lower bound for the continuous GPD scale
// log(xi + shift) reparameterization. The shift is large enough that the
// xi = 0 boundary sits at a finite optimizer coordinate (log kXiShift); past
// it the clamped map is exactly constant, so a simplex heading for the
// boundary terminates instead of drifting down an endless log-scale valley.
constexpr double kXiShift = 1e-4;
constexpr double kXiBoundaryTol = 1e-7;

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

// ---------------------------------------------------------------------------
// FitData

FitData FitData::from_grouped(GroupedCounts g) {
    g.validate();
    FitData d;
    d.grouped_ = std::move(g);
    return d;
}

FitData FitData::from_raw(std::vector<double> values) {
    FitData d;
    d.raw_ = std::move(values);
    return d;
}

bool FitData::empty() const {
    if (grouped_) return grouped_->empty();
    return raw_.empty();
}

double FitData::total_count() const {
    if (grouped_) return static_cast<double>(grouped_->total());
    return static_cast<double>(raw_.size());
}

std::size_t FitData::distinct_values() const {
    if (grouped_) return grouped_->distinct_values();
    std::vector<double> v = raw_;
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

// ---------------------------------------------------------------------------
// negative log-likelihood

namespace {

int n_free_params(const Family& family, bool covariate) {
    switch (family.tag) {
        case FamilyTag::Gpd:
        case FamilyTag::Dgpd:
        case FamilyTag::Gzd:
            return covariate ? 3 : 2;
        case FamilyTag::Geometric:
        case FamilyTag::Poisson:
            return 1;
        case FamilyTag::NegBinomial:
            return 2;
        default:
            throw std::invalid_argument("fit: unsupported family");
    }
}

// Soft feasibility; any violation makes the likelihood +inf.
bool params_feasible(const Family& family, const std::vector<double>& params) {
    if (!all_finite(params)) return false;
    switch (family.tag) {
        case FamilyTag::Gpd:
            return params[0] >= kSigmaFloor * (1.0 - 1e-12);
        case FamilyTag::Dgpd:
        case FamilyTag::Gzd:
            return params[0] > 0.0 && params[1] >= 0.0;
        case FamilyTag::Geometric:
            return params[0] > 0.0 && params[0] < 1.0;
        case FamilyTag::Poisson:
            return params[0] > 0.0;
        case FamilyTag::NegBinomial:
            return params[0] > 0.0 && params[1] > 0.0 && params[1] < 1.0;
        default:
            return false;
    }
}

// Per-observation log likelihood. `value` is integer-valued for the
// discrete families; the continuous GPD also accepts real exceedances.
double point_loglik(const Family& family, double sigma, double xi,
                    const std::vector<double>& params, double value) {
    switch (family.tag) {
        case FamilyTag::Gpd:
            return gpd_log_pdf(value, sigma, xi, family.delta);
        case FamilyTag::Dgpd:
            return dgpd_log_pmf(std::llround(value), sigma, xi);
        case FamilyTag::Gzd:
            return gzd_log_pmf(std::llround(value), sigma, xi);
        case FamilyTag::Geometric:
            return geometric_log_pmf(std::llround(value), params[0]);
        case FamilyTag::Poisson:
            return poisson_log_pmf(std::llround(value), params[0]);
        case FamilyTag::NegBinomial:
            return neg_binomial_log_pmf(std::llround(value), params[0], params[1]);
        default:
            throw std::invalid_argument("nll: unsupported family");
    }
}

double censor_loglik(const Family& family, double sigma, double xi,
                     const std::vector<double>& params, long long threshold) {
    switch (family.tag) {
        case FamilyTag::Gpd:
            return gpd_log_sf(static_cast<double>(threshold) + family.delta, sigma, xi);
        case FamilyTag::Dgpd:
            return dgpd_log_sf(threshold, sigma, xi);
        case FamilyTag::Gzd:
            return gzd_log_sf(threshold, sigma, xi);
        case FamilyTag::Geometric:
            return geometric_log_sf(threshold, params[0]);
        case FamilyTag::Poisson:
            return poisson_log_sf(threshold, params[0]);
        case FamilyTag::NegBinomial:
            return neg_binomial_log_sf(threshold, params[0], params[1]);
        default:
            throw std::invalid_argument("nll: unsupported family");
    }
}

bool is_tail_family(FamilyTag tag) {
    return tag == FamilyTag::Gpd || tag == FamilyTag::Dgpd || tag == FamilyTag::Gzd;
}

}  // namespace

double nll(const Family& family, const std::vector<double>& params,
           const FitData& data, const FitOptions& options) {
    if (data.empty()) throw std::domain_error("nll: empty data");
    const bool covariate = !options.covariate.empty();
    const int k = n_free_params(family, covariate);
    if (static_cast<int>(params.size()) != k)
        throw std::invalid_argument("nll: wrong parameter count for family");

    if (covariate) {
        if (!is_tail_family(family.tag))
            throw std::invalid_argument("nll: covariate model needs a tail family");
        if (data.is_grouped())
            throw std::invalid_argument("nll: covariate model requires raw data");
        if (options.covariate.size() != data.raw().size())
            throw std::invalid_argument("nll: covariate length mismatch");
        const double sigma0 = params[0], sigma_t = params[1], xi = params[2];
        if (!all_finite(params)) return kInf;
        if (family.tag != FamilyTag::Gpd && xi < 0.0) return kInf;
        double total = 0.0;
        for (std::size_t i = 0; i < data.raw().size(); ++i) {
            const double sigma_i = sigma0 + sigma_t * options.covariate[i];
            if (!(sigma_i > 0.0)) return kInf;  // soft rejection
            if (family.tag == FamilyTag::Gpd && sigma_i < kSigmaFloor) return kInf;
            const double ll = point_loglik(family, sigma_i, xi, params, data.raw()[i]);
            if (!(ll > -kInf)) return kInf;
            total -= ll;
        }
        return std::isfinite(total) ? total : kInf;
    }

    if (!params_feasible(family, params)) return kInf;
    const double sigma = params[0];
    const double xi = params.size() > 1 ? params[1] : 0.0;

    double total = 0.0;
    if (data.is_grouped()) {
        for (const auto& [v, c] : data.grouped().cells()) {
            const double ll = point_loglik(family, sigma, xi, params, static_cast<double>(v));
            if (!(ll > -kInf)) return kInf;
            total -= static_cast<double>(c) * ll;
        }
        if (const auto& cen = data.grouped().censor(); cen && cen->count > 0) {
            const double ls = censor_loglik(family, sigma, xi, params, cen->threshold);
            if (!(ls > -kInf)) return kInf;
            total -= static_cast<double>(cen->count) * ls;
        }
    } else {
        for (double v : data.raw()) {
            const double ll = point_loglik(family, sigma, xi, params, v);
            if (!(ll > -kInf)) return kInf;
            total -= ll;
        }
    }
    return std::isfinite(total) ? total : kInf;
}

// ---------------------------------------------------------------------------
// Nelder-Mead simplex (reflection 1, expansion 2, contraction 0.5, shrink 0.5)

namespace {

struct NmResult {
    std::vector<double> x;
    double f = kInf;
    int iterations = 0;
    bool converged = false;
};

NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& fn,
                     const std::vector<double>& x0, double step, int max_iter, double tol) {
    const std::size_t d = x0.size();
    const auto safe = [&](const std::vector<double>& x) {
        const double v = fn(x);
        return std::isnan(v) ? kInf : v;
    };

    std::vector<std::vector<double>> pts(d + 1, x0);
    std::vector<double> fv(d + 1);
    for (std::size_t i = 0; i < d; ++i)
        pts[i + 1][i] += step * std::max(std::fabs(x0[i]), 1.0);
    for (std::size_t i = 0; i <= d; ++i) fv[i] = safe(pts[i]);

    NmResult res;
    std::vector<std::size_t> order(d + 1);
    for (int iter = 0; iter < max_iter; ++iter) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order[0], worst = order[d], second = order[d - 1];
        res.iterations = iter + 1;

        const double spread = fv[worst] - fv[best];
        if (std::isfinite(fv[best]) &&
            (spread <= tol * (std::fabs(fv[best]) + tol))) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < d; ++j) centroid[j] += pts[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(d);

        const auto along = [&](double t) {
            std::vector<double> x(d);
            for (std::size_t j = 0; j < d; ++j)
                x[j] = centroid[j] + t * (centroid[j] - pts[worst][j]);
            return x;
        };

        const std::vector<double> xr = along(1.0);
        const double fr = safe(xr);
        if (fr < fv[best]) {
            const std::vector<double> xe = along(2.0);
            const double fe = safe(xe);
            if (fe < fr) { pts[worst] = xe; fv[worst] = fe; }
            else { pts[worst] = xr; fv[worst] = fr; }
        } else if (fr < fv[second]) {
            pts[worst] = xr;
            fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            const std::vector<double> xc = along(outside ? 0.5 : -0.5);
            const double fc = safe(xc);
            if (fc < std::min(fr, fv[worst])) {
                pts[worst] = xc;
                fv[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= d; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < d; ++j)
                        pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
                    fv[i] = safe(pts[i]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= d; ++i)
        if (fv[i] < fv[best]) best = i;
    res.x = pts[best];
    res.f = fv[best];
    return res;
}

// ---------------------------------------------------------------------------
// parameter-space transforms

struct Transform {
    std::vector<double> t0;  // start in optimizer coordinates
    std::function<std::vector<double>(const std::vector<double>&)> to_natural;
};

Transform make_transform(const Family& family, const FitOptions& options) {
    const bool covariate = !options.covariate.empty();
    Transform tr;
    switch (family.tag) {
        case FamilyTag::Dgpd:
        case FamilyTag::Gzd:
            if (covariate) {
                tr.t0 = {options.start[0], 0.0, std::log(options.start[1] + kXiShift)};
                tr.to_natural = [](const std::vector<double>& t) {
                    return std::vector<double>{
                        t[0], t[1], std::max(std::exp(t[2]) - kXiShift, 0.0)};
                };
            } else {
                tr.t0 = {std::log(options.start[0]), std::log(options.start[1] + kXiShift)};
                tr.to_natural = [](const std::vector<double>& t) {
                    return std::vector<double>{
                        std::exp(t[0]), std::max(std::exp(t[1]) - kXiShift, 0.0)};
                };
            }
            break;
        case FamilyTag::Gpd:
            // Natural coordinates with infeasibility rejection. The GPD
            // likelihood of integer data tied at zero is unbounded along a
            // sigma -> 0 ridge; the natural-coordinate simplex from the
            // standard start settles in the interpretable local optimum
            // when one exists, while a log-scale walk slides into the ridge.
            if (covariate) {
                tr.t0 = {options.start[0], 0.0, options.start[1]};
            } else {
                tr.t0 = {options.start[0], options.start[1]};
            }
            tr.to_natural = [](const std::vector<double>& t) { return t; };
            break;
        case FamilyTag::Poisson:
            tr.t0 = {std::log(options.start[0])};
            tr.to_natural = [](const std::vector<double>& t) {
                return std::vector<double>{std::exp(t[0])};
            };
            break;
        case FamilyTag::Geometric:
            tr.t0 = {0.0};  // logit(1/2)
            tr.to_natural = [](const std::vector<double>& t) {
                return std::vector<double>{1.0 / (1.0 + std::exp(-t[0]))};
            };
            break;
        case FamilyTag::NegBinomial:
            tr.t0 = {std::log(options.start[0]), 0.0};
            tr.to_natural = [](const std::vector<double>& t) {
                return std::vector<double>{std::exp(t[0]), 1.0 / (1.0 + std::exp(-t[1]))};
            };
            break;
        default:
            throw std::invalid_argument("fit: unsupported family");
    }
    return tr;
}

// Boundary mask in natural coordinates; boundary coordinates get one-sided
// differencing in the Hessian.
std::vector<bool> boundary_mask(const Family& family, const std::vector<double>& params) {
    std::vector<bool> mask(params.size(), false);
    switch (family.tag) {
        case FamilyTag::Dgpd:
        case FamilyTag::Gzd:
            mask.back() = params.back() < kXiBoundaryTol;
            break;
        case FamilyTag::Gpd:
            mask[0] = params[0] <= kSigmaFloor * (1.0 + 1e-6);
            break;
        default:
            break;
    }
    return mask;
}

// ---------------------------------------------------------------------------
// small dense Cholesky inverse

bool cholesky_inverse(const std::vector<std::vector<double>>& a,
                      std::vector<std::vector<double>>& inv) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            if (i == j) {
                if (!(s > 0.0) || !std::isfinite(s)) return false;
                l[i][i] = std::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // solve L L^T X = I column by column
    inv.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t col = 0; col < n; ++col) {
        std::vector<double> y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = (i == col) ? 1.0 : 0.0;
            for (std::size_t k = 0; k < i; ++k) s -= l[i][k] * y[k];
            y[i] = s / l[i][i];
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= l[k][ii] * inv[k][col];
            inv[ii][col] = s / l[ii][ii];
        }
    }
    // symmetrize against round-off
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const double m = 0.5 * (inv[i][j] + inv[j][i]);
            inv[i][j] = inv[j][i] = m;
        }
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::vector<double>> numerical_hessian(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, const std::vector<bool>& one_sided) {
    const std::size_t n = x.size();
    const auto sided = [&](std::size_t j) {
        return j < one_sided.size() && one_sided[j];
    };
    std::vector<double> h(n);
    for (std::size_t j = 0; j < n; ++j) h[j] = std::max(1e-5, 1e-5 * std::fabs(x[j]));

    const auto at = [&](std::vector<double> p) { return f(p); };
    const auto shifted = [&](std::size_t i, double di, std::size_t j, double dj) {
        std::vector<double> p = x;
        p[i] += di;
        p[j] += dj;
        return f(p);
    };

    const double f0 = at(x);
    std::vector<std::vector<double>> hess(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        if (sided(i)) {
            const double f1 = shifted(i, h[i], i, 0.0);
            const double f2 = shifted(i, 2.0 * h[i], i, 0.0);
            hess[i][i] = (f0 - 2.0 * f1 + f2) / (h[i] * h[i]);
        } else {
            const double fp = shifted(i, h[i], i, 0.0);
            const double fm = shifted(i, -h[i], i, 0.0);
            hess[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            // forward legs along boundary coordinates, central otherwise
            const double bi = sided(i) ? 0.0 : -h[i];
            const double bj = sided(j) ? 0.0 : -h[j];
            const double v = (shifted(i, h[i], j, h[j]) - shifted(i, h[i], j, bj) -
                              shifted(i, bi, j, h[j]) + shifted(i, bi, j, bj)) /
                             ((h[i] - bi) * (h[j] - bj));
            hess[i][j] = hess[j][i] = v;
        }
    }
    return hess;
}

std::vector<std::vector<double>> observed_information(
    const Family& family, const std::vector<double>& params, const FitData& data,
    const FitOptions& options) {
    const auto f = [&](const std::vector<double>& p) { return nll(family, p, data, options); };
    return numerical_hessian(f, params, boundary_mask(family, params));
}

FitResult fit(const Family& family, const FitData& data, const FitOptions& options) {
    if (data.empty()) throw std::domain_error("fit: empty data");

    FitResult res;
    res.family = family;
    res.n = data.total_count();

    const bool covariate = !options.covariate.empty();
    const int k = n_free_params(family, covariate);
    const Transform tr = make_transform(family, options);

    res.degenerate_data = data.distinct_values() < static_cast<std::size_t>(k > 1 ? 2 : 1);

    const auto objective = [&](const std::vector<double>& t) {
        return nll(family, tr.to_natural(t), data, options);
    };

    NmResult best;
    if (res.degenerate_data) {
        best.x = tr.t0;
        best.f = objective(tr.t0);
        best.converged = false;
    } else {
        best = nelder_mead(objective, tr.t0, 0.1, options.max_iterations, options.tolerance);
        // polish: restart from the optimum with a smaller simplex
        int budget = options.max_iterations - best.iterations;
        for (int r = 0; r < 2 && budget > 0 && best.converged; ++r) {
            NmResult again =
                nelder_mead(objective, best.x, 0.02, budget, options.tolerance);
            budget -= again.iterations;
            if (again.f >= best.f - options.tolerance * (std::fabs(best.f) + 1.0)) {
                best.x = again.f < best.f ? again.x : best.x;
                best.f = std::min(best.f, again.f);
                break;
            }
            again.converged = again.converged && best.converged;
            best = again;
        }
    }

    res.estimates = tr.to_natural(best.x);
    // Snap a xi estimate below the boundary tolerance to exactly zero. The
    // likelihood already treats such values via its xi -> 0 limit, and a
    // stray sub-tolerance offset at the base point makes the one-sided
    // Hessian stencil inconsistent with the shifted evaluations.
    if (family.tag == FamilyTag::Dgpd || family.tag == FamilyTag::Gzd) {
        double& xi = res.estimates.back();
        if (xi > 0.0 && xi < kXiBoundaryTol) xi = 0.0;
    }
    res.nll = nll(family, res.estimates, data, options);
    res.converged = best.converged && std::isfinite(res.nll) && !res.degenerate_data;
    res.aic = 2.0 * k + 2.0 * res.nll;
    res.bic = k * std::log(res.n) + 2.0 * res.nll;

    const std::vector<bool> mask = boundary_mask(family, res.estimates);
    res.boundary_hit = std::any_of(mask.begin(), mask.end(), [](bool b) { return b; });

    if (std::isfinite(res.nll)) {
        const auto info = observed_information(family, res.estimates, data, options);
        res.covariance_ok = cholesky_inverse(info, res.covariance);
        if (!res.covariance_ok) res.covariance.clear();
    }
    return res;
}

double FitResult::se(std::size_t j) const {
    if (!covariance_ok) throw std::runtime_error("FitResult::se: covariance unavailable");
    return std::sqrt(std::max(covariance.at(j).at(j), 0.0));
}

Interval confint(const FitResult& result, double level, std::size_t component) {
    if (!result.covariance_ok)
        throw std::runtime_error("confint: covariance unavailable");
    if (!(level >= 0.0 && level < 1.0))
        throw std::domain_error("confint: level must lie in [0,1)");
    const double z = level == 0.0 ? 0.0 : normal_quantile(0.5 * (1.0 + level));
    const double theta = result.estimates.at(component);
    const double se = result.se(component);
    return Interval{theta - z * se, theta + z * se};
}

// ---------------------------------------------------------------------------
// AS241 (Wichura) inverse normal cdf

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("normal_quantile: p must lie in (0,1)");
    static const double a[8] = {3.3871328727963666080e0,  1.3314166789178437745e2,
                                1.9715909503065514427e3,  1.3731693765509461125e4,
                                4.5921953931549871457e4,  6.7265770927008700853e4,
                                3.3430575583588128105e4,  2.5090809287301226727e3};
    static const double b[8] = {1.0,                      4.2313330701600911252e1,
                                6.8718700749205790830e2,  5.3941960214247511077e3,
                                2.1213794301586595867e4,  3.9307895800092710610e4,
                                2.8729085735721942674e4,  5.2264952788528545610e3};
    static const double c[8] = {1.42343711074968357734e0,  4.63033784615654529590e0,
                                5.76949722146069140550e0,  3.64784832476320460504e0,
                                1.27045825245236838258e0,  2.41780725177450611770e-1,
                                2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static const double dd[8] = {1.0,                      2.05319162663775882187e0,
                                 1.67638483018380384940e0, 6.89767334985100004550e-1,
                                 1.48103976427480074590e-1, 1.51986665636164571966e-2,
                                 5.47593808499534494600e-4, 1.05075007164441684324e-9};
    static const double e[8] = {6.65790464350110377720e0,  5.46378491116411436990e0,
                                1.78482653991729133580e0,  2.96560571828504891230e-1,
                                2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static const double ff[8] = {1.0,                      5.99832206555887937690e-1,
                                 1.36929880922735805310e-1, 1.48753612908506148525e-2,
                                 7.86869131145613259100e-4, 1.84631831751005468180e-5,
                                 1.42151175831644588870e-7, 2.04426310338993978564e-15};
    const auto poly = [](const double* coef, double x) {
        double v = coef[7];
        for (int i = 6; i >= 0; --i) v = v * x + coef[i];
        return v;
    };

    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * poly(a, r) / poly(b, r);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = poly(c, r) / poly(dd, r);
    } else {
        r -= 5.0;
        val = poly(e, r) / poly(ff, r);
    }
    return q < 0.0 ? -val : val;
}

}  // namespace dex
