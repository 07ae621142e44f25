#include "dex/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dex {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_scale(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::domain_error("gpd: sigma must be finite and > 0");
}

// log(1 - exp(d)) for d < 0, stable near both ends.
double log1mexp(double d) {
    if (!(d < 0.0)) throw std::domain_error("log1mexp: argument must be < 0");
    static const double kLn2 = 0.6931471805599453;
    return d > -kLn2 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d));
}

}  // namespace

// ---------------------------------------------------------------------------
// continuous GPD

double gpd_log_sf(double x, double sigma, double xi) {
    check_scale(sigma);
    if (!(x >= 0.0)) throw std::domain_error("gpd_log_sf: x must be >= 0");
    if (std::fabs(xi) < kXiZeroTol) return -x / sigma;
    const double arg = xi * x / sigma;
    if (arg <= -1.0) return kNegInf;  // beyond the upper endpoint when xi < 0
    return -std::log1p(arg) / xi;
}

double gpd_sf(double x, double sigma, double xi) {
    return std::exp(gpd_log_sf(x, sigma, xi));
}

double gpd_log_pdf(double x, double sigma, double xi, double delta) {
    check_scale(sigma);
    if (!(x >= 0.0)) throw std::domain_error("gpd_log_pdf: x must be >= 0");
    const double y = x + delta;
    if (std::fabs(xi) < kXiZeroTol) return -std::log(sigma) - y / sigma;
    const double arg = xi * y / sigma;
    if (arg <= -1.0) return kNegInf;
    return -std::log(sigma) - (1.0 / xi + 1.0) * std::log1p(arg);
}

double gpd_quantile(double u, double sigma, double xi) {
    check_scale(sigma);
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("gpd_quantile: u must lie in (0,1)");
    const double l = std::log1p(-u);  // log(1-u)
    if (std::fabs(xi) < kXiZeroTol) return -sigma * l;
    return sigma * std::expm1(-xi * l) / xi;
}

double gpd_survival(double x, const TailParams& p) { return gpd_sf(x, p.sigma, p.xi); }

double gpd_density(double x, const TailParams& p, double delta) {
    if (!(delta >= 0.0 && delta < 1.0))
        throw std::domain_error("gpd_density: delta must lie in [0,1)");
    return std::exp(gpd_log_pdf(x, p.sigma, p.xi, delta));
}

double gpd_quantile(double u, const TailParams& p) { return gpd_quantile(u, p.sigma, p.xi); }

// ---------------------------------------------------------------------------
// discrete GPD

double dgpd_log_pmf(long long k, double sigma, double xi) {
    if (k < 0) throw std::domain_error("dgpd_log_pmf: k must be >= 0");
    const double ls0 = gpd_log_sf(static_cast<double>(k), sigma, xi);
    const double ls1 = gpd_log_sf(static_cast<double>(k) + 1.0, sigma, xi);
    if (ls0 == kNegInf) return kNegInf;
    if (ls1 == kNegInf) return ls0;
    return ls0 + log1mexp(ls1 - ls0);
}

double dgpd_pmf(long long k, const TailParams& p) {
    return std::exp(dgpd_log_pmf(k, p.sigma, p.xi));
}

double dgpd_log_sf(long long k, double sigma, double xi) {
    if (k < 0) throw std::domain_error("dgpd_log_sf: k must be >= 0");
    return gpd_log_sf(static_cast<double>(k), sigma, xi);
}

double dgpd_survival(long long k, const TailParams& p) {
    return std::exp(dgpd_log_sf(k, p.sigma, p.xi));
}

long long dgpd_quantile(double u, const TailParams& p) {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("dgpd_quantile: u must lie in (0,1)");
    const auto cdf = [&](long long k) {
        return 1.0 - gpd_sf(static_cast<double>(k) + 1.0, p.sigma, p.xi);
    };
    const double qc = gpd_quantile(u, p.sigma, p.xi);
    long long k = std::max<long long>(0, static_cast<long long>(std::ceil(qc - 1.0)));
    while (k > 0 && cdf(k - 1) >= u) --k;
    while (cdf(k) < u) ++k;
    return k;
}

// ---------------------------------------------------------------------------
// Hurwitz zeta
//
// Leading terms summed directly (smallest first), then a fourth-order
// Euler-Maclaurin tail. Everything is scaled by q^s so the log form never
// overflows; the linear form exponentiates at the end.

double log_hurwitz_zeta(double s, double q) {
    if (!(s > 1.0)) throw std::domain_error("hurwitz_zeta: s must be > 1");
    if (!(q > 0.0)) throw std::domain_error("hurwitz_zeta: q must be > 0");
    const int n = std::max(50, static_cast<int>(std::ceil(10.0 - q)));
    double sum = 0.0;
    for (int i = n - 1; i >= 0; --i) sum += std::pow(1.0 + i / q, -s);
    const double r = (q + n) / q;
    const double rs = std::pow(r, -s);
    const double tail = q * r * rs / (s - 1.0)              // integral
                        + 0.5 * rs                          // half the boundary term
                        + s * rs / r / (12.0 * q)           // B2 correction
                        - s * (s + 1.0) * (s + 2.0) * rs / (r * r * r) / (720.0 * q * q * q);
    return -s * std::log(q) + std::log(sum + tail);
}

double hurwitz_zeta(double s, double q) { return std::exp(log_hurwitz_zeta(s, q)); }

// ---------------------------------------------------------------------------
// generalized Zipf

double gzd_log_pmf(long long k, double sigma, double xi) {
    if (k < 0) throw std::domain_error("gzd_log_pmf: k must be >= 0");
    check_scale(sigma);
    if (std::fabs(xi) < kXiZeroTol) {
        // geometric with success probability 1 - exp(-1/sigma)
        return std::log(-std::expm1(-1.0 / sigma)) - static_cast<double>(k) / sigma;
    }
    if (xi < 0.0) throw std::domain_error("gzd_log_pmf: xi must be >= 0");
    const double s = 1.0 + 1.0 / xi;
    const double q = sigma / xi;
    return -s * std::log(q + static_cast<double>(k)) - log_hurwitz_zeta(s, q);
}

double gzd_pmf(long long k, const TailParams& p) {
    return std::exp(gzd_log_pmf(k, p.sigma, p.xi));
}

double gzd_log_sf(long long k, double sigma, double xi) {
    if (k < 0) throw std::domain_error("gzd_log_sf: k must be >= 0");
    check_scale(sigma);
    if (std::fabs(xi) < kXiZeroTol) return -static_cast<double>(k) / sigma;
    if (xi < 0.0) throw std::domain_error("gzd_log_sf: xi must be >= 0");
    if (k == 0) return 0.0;
    const double s = 1.0 + 1.0 / xi;
    const double q = sigma / xi;
    return log_hurwitz_zeta(s, q + static_cast<double>(k)) - log_hurwitz_zeta(s, q);
}

double gzd_survival(long long k, const TailParams& p) {
    return std::exp(gzd_log_sf(k, p.sigma, p.xi));
}

long long gzd_quantile(double u, const TailParams& p) {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("gzd_quantile: u must lie in (0,1)");
    const auto cdf = [&](long long k) {
        return 1.0 - std::exp(gzd_log_sf(k + 1, p.sigma, p.xi));
    };
    if (p.xi < kXiZeroTol) {
        const long long k0 = static_cast<long long>(
            std::ceil(-p.sigma * std::log1p(-u) - 1.0));
        long long k = std::max<long long>(0, k0);
        while (k > 0 && cdf(k - 1) >= u) --k;
        while (cdf(k) < u) ++k;
        return k;
    }
    if (cdf(0) >= u) return 0;
    // exponential-growth bracketing, then binary search
    long long lo = 0, hi = 1;
    while (cdf(hi) < u) {
        lo = hi;
        if (hi > (1LL << 61)) throw std::runtime_error("gzd_quantile: bracket overflow");
        hi *= 2;
    }
    while (hi - lo > 1) {
        const long long mid = lo + (hi - lo) / 2;
        if (cdf(mid) < u) lo = mid; else hi = mid;
    }
    return hi;
}

// ---------------------------------------------------------------------------
// baselines

double geometric_log_pmf(long long k, double p) {
    if (k < 0) throw std::domain_error("geometric_log_pmf: k must be >= 0");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("geometric: p must lie in (0,1)");
    return std::log(p) + static_cast<double>(k) * std::log1p(-p);
}

double geometric_log_sf(long long k, double p) {
    if (k < 0) throw std::domain_error("geometric_log_sf: k must be >= 0");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("geometric: p must lie in (0,1)");
    return static_cast<double>(k) * std::log1p(-p);
}

double poisson_log_pmf(long long k, double lambda) {
    if (k < 0) throw std::domain_error("poisson_log_pmf: k must be >= 0");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::domain_error("poisson: lambda must be finite and > 0");
    const double kd = static_cast<double>(k);
    return kd * std::log(lambda) - lambda - std::lgamma(kd + 1.0);
}

double poisson_log_sf(long long k, double lambda) {
    if (k < 0) throw std::domain_error("poisson_log_sf: k must be >= 0");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::domain_error("poisson: lambda must be finite and > 0");
    if (k == 0) return 0.0;
    if (static_cast<double>(k) <= lambda) {
        // head is short; complement of the cdf below k
        double cdf = 0.0;
        for (long long j = k - 1; j >= 0; --j) cdf += std::exp(poisson_log_pmf(j, lambda));
        return std::log1p(-std::min(cdf, 1.0));
    }
    // tail sum scaled by the leading term, ratio lambda/(j+1) < 1
    double term = 1.0, total = 1.0;
    for (long long j = k; term > total * 1e-18; ++j) {
        term *= lambda / (static_cast<double>(j) + 1.0);
        total += term;
    }
    return poisson_log_pmf(k, lambda) + std::log(total);
}

double neg_binomial_log_pmf(long long k, double r, double p) {
    if (k < 0) throw std::domain_error("neg_binomial_log_pmf: k must be >= 0");
    if (!(r > 0.0) || !std::isfinite(r))
        throw std::domain_error("neg_binomial: r must be finite and > 0");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("neg_binomial: p must lie in (0,1)");
    const double kd = static_cast<double>(k);
    return std::lgamma(kd + r) - std::lgamma(r) - std::lgamma(kd + 1.0) +
           r * std::log(p) + kd * std::log1p(-p);
}

double neg_binomial_log_sf(long long k, double r, double p) {
    if (k < 0) throw std::domain_error("neg_binomial_log_sf: k must be >= 0");
    if (k == 0) {
        neg_binomial_log_pmf(0, r, p);  // parameter validation
        return 0.0;
    }
    const double mean = r * (1.0 - p) / p;
    if (static_cast<double>(k) <= mean + 1.0) {
        double cdf = 0.0;
        for (long long j = k - 1; j >= 0; --j)
            cdf += std::exp(neg_binomial_log_pmf(j, r, p));
        return std::log1p(-std::min(cdf, 1.0));
    }
    // ratio of consecutive pmf terms: (j+r)/(j+1) * (1-p)
    double term = 1.0, total = 1.0;
    for (long long j = k; term > total * 1e-18; ++j) {
        term *= (static_cast<double>(j) + r) / (static_cast<double>(j) + 1.0) * (1.0 - p);
        total += term;
    }
    return neg_binomial_log_pmf(k, r, p) + std::log(total);
}

double baseline_pmf(const Family& family, const std::vector<double>& params, long long k) {
    switch (family.tag) {
        case FamilyTag::Geometric:
            return std::exp(geometric_log_pmf(k, params.at(0)));
        case FamilyTag::Poisson:
            return std::exp(poisson_log_pmf(k, params.at(0)));
        case FamilyTag::NegBinomial:
            return std::exp(neg_binomial_log_pmf(k, params.at(0), params.at(1)));
        default:
            throw std::invalid_argument("baseline_pmf: not a baseline family");
    }
}

// ---------------------------------------------------------------------------
// family-generic discrete views

double discrete_log_pmf(const Family& family, const std::vector<double>& params, long long k) {
    switch (family.tag) {
        case FamilyTag::Dgpd:
            return dgpd_log_pmf(k, params.at(0), params.at(1));
        case FamilyTag::Gpd:
            // rounded realizations of the continuous fit: P(k) = F(k+1) - F(k)
            return dgpd_log_pmf(k, params.at(0), params.at(1));
        case FamilyTag::Gzd:
            return gzd_log_pmf(k, params.at(0), params.at(1));
        case FamilyTag::Geometric:
            return geometric_log_pmf(k, params.at(0));
        case FamilyTag::Poisson:
            return poisson_log_pmf(k, params.at(0));
        case FamilyTag::NegBinomial:
            return neg_binomial_log_pmf(k, params.at(0), params.at(1));
        default:
            throw std::invalid_argument("discrete_log_pmf: family is not discrete");
    }
}

double discrete_sf(const Family& family, const std::vector<double>& params, long long k) {
    if (k <= 0) return 1.0;
    switch (family.tag) {
        case FamilyTag::Dgpd:
        case FamilyTag::Gpd:
            return gpd_sf(static_cast<double>(k), params.at(0), params.at(1));
        case FamilyTag::Gzd:
            return std::exp(gzd_log_sf(k, params.at(0), params.at(1)));
        case FamilyTag::Geometric:
            return std::exp(geometric_log_sf(k, params.at(0)));
        case FamilyTag::Poisson:
            return std::exp(poisson_log_sf(k, params.at(0)));
        case FamilyTag::NegBinomial:
            return std::exp(neg_binomial_log_sf(k, params.at(0), params.at(1)));
        default:
            throw std::invalid_argument("discrete_sf: family is not discrete");
    }
}

double discrete_cdf(const Family& family, const std::vector<double>& params, long long k) {
    if (k < 0) return 0.0;
    return 1.0 - discrete_sf(family, params, k + 1);
}

long long discrete_quantile(const Family& family, const std::vector<double>& params, double u) {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("discrete_quantile: u must lie in (0,1)");
    const auto cdf = [&](long long k) { return discrete_cdf(family, params, k); };
    long long k = 0;
    switch (family.tag) {
        case FamilyTag::Dgpd:
        case FamilyTag::Gpd: {
            const double qc = gpd_quantile(u, params.at(0), params.at(1));
            k = std::max<long long>(0, static_cast<long long>(std::ceil(qc - 1.0)));
            break;
        }
        case FamilyTag::Gzd:
            return gzd_quantile(u, TailParams(params.at(0), params.at(1)));
        case FamilyTag::Geometric: {
            const double p = params.at(0);
            k = std::max<long long>(0, static_cast<long long>(
                std::ceil(std::log1p(-u) / std::log1p(-p) - 1.0)));
            break;
        }
        case FamilyTag::Poisson:
        case FamilyTag::NegBinomial: {
            // sequential inversion from the origin, pmf by recurrence
            double pmf = std::exp(discrete_log_pmf(family, params, 0));
            double acc = pmf;
            long long j = 0;
            while (acc < u) {
                ++j;
                if (family.tag == FamilyTag::Poisson)
                    pmf *= params[0] / static_cast<double>(j);
                else
                    pmf *= (static_cast<double>(j) - 1.0 + params[0]) * (1.0 - params[1]) /
                           static_cast<double>(j);
                acc += pmf;
                if (pmf < 1e-300) break;  // deep-tail underflow guard
            }
            return j;
        }
        default:
            throw std::invalid_argument("discrete_quantile: family is not discrete");
    }
    while (k > 0 && cdf(k - 1) >= u) --k;
    while (cdf(k) < u) ++k;
    return k;
}

// ---------------------------------------------------------------------------
// sampling

long long sample_discrete(const Family& family, const std::vector<double>& params,
                          RngStream& rng) {
    const double u = rng.uniform();
    switch (family.tag) {
        case FamilyTag::Dgpd:
        case FamilyTag::Gpd:
            return static_cast<long long>(
                std::floor(gpd_quantile(u, params.at(0), params.at(1))));
        default:
            return discrete_quantile(family, params, u);
    }
}

std::vector<double> sample(const Family& family, const std::vector<double>& params,
                           std::size_t n, RngStream& rng) {
    std::vector<double> out;
    out.reserve(n);
    switch (family.tag) {
        case FamilyTag::Gpd:
            for (std::size_t i = 0; i < n; ++i)
                out.push_back(gpd_quantile(rng.uniform(), params.at(0), params.at(1)));
            break;
        case FamilyTag::InverseGamma: {
            const double alpha = params.at(0), beta = params.at(1);
            if (!(alpha > 0.0 && beta > 0.0))
                throw std::domain_error("sample: inverse gamma needs alpha, beta > 0");
            for (std::size_t i = 0; i < n; ++i) out.push_back(beta / rng.gamma(alpha));
            break;
        }
        default:
            for (std::size_t i = 0; i < n; ++i)
                out.push_back(static_cast<double>(sample_discrete(family, params, rng)));
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// D-GPD rounding invariance

double invariance_check(double sigma, double xi, double lambda, double h,
                        long long u, long long k_max) {
    TailParams base(sigma, xi);  // validates sigma, xi
    if (!(lambda > 0.0)) throw std::domain_error("invariance_check: lambda must be > 0");
    if (!(h > 0.0 && h <= 1.0)) throw std::domain_error("invariance_check: h must lie in (0,1]");
    if (static_cast<double>(u) < 1.0 - h)
        throw std::domain_error("invariance_check: u must be >= 1 - h");

    const auto sf_x = [&](long long j) {
        return gpd_sf((static_cast<double>(j) - 1.0 + h) / lambda, sigma, xi);
    };
    const double denom = sf_x(u);
    const TailParams cond(lambda * sigma + xi * (static_cast<double>(u) + h - 1.0), xi);

    double max_dev = 0.0;
    for (long long k = 0; k <= k_max; ++k) {
        const double exact = (sf_x(u + k) - sf_x(u + k + 1)) / denom;
        max_dev = std::max(max_dev, std::fabs(exact - dgpd_pmf(k, cond)));
    }
    return max_dev;
}

}  // namespace dex
