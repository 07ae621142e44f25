// types.hpp
//
// Core value types shared across the library: tail parameter pairs,
// distribution family tags and grouped integer samples with optional
// right censoring.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dex {

// Scale/shape pair of a tail family. The xi < 0 case is rejected at
// construction; continuous GPD fits with unrestricted shape work on raw
// doubles instead (see gpd_sf and friends).
struct TailParams {
    double sigma;
    double xi;

    TailParams(double sigma_, double xi_) : sigma(sigma_), xi(xi_) {
        if (!std::isfinite(sigma) || !std::isfinite(xi))
            throw std::invalid_argument("TailParams: parameters must be finite");
        if (sigma <= 0.0)
            throw std::invalid_argument("TailParams: sigma must be > 0");
        if (xi < 0.0)
            throw std::invalid_argument("TailParams: xi must be >= 0");
    }
};

enum class FamilyTag {
    Gpd,          // continuous GPD, optional continuity shift delta
    Dgpd,         // discrete GPD (differenced survival)
    Gzd,          // generalized Zipf (Zipf-Mandelbrot for xi > 0)
    Geometric,    // success probability p
    Poisson,      // rate lambda
    NegBinomial,  // successes r, success probability p
    InverseGamma  // alpha, beta
};

// Family tag plus the continuity shift for the GPD. Numeric parameters
// (sigma/xi, p, lambda, r, alpha, beta) travel separately as vectors so
// that fitting and reporting can treat all families uniformly.
struct Family {
    FamilyTag tag = FamilyTag::Dgpd;
    double delta = 0.0;  // continuity shift in [0,1), Gpd only

    static Family gpd(double delta_ = 0.0) {
        if (!(delta_ >= 0.0 && delta_ < 1.0))
            throw std::invalid_argument("Family: delta must lie in [0,1)");
        return Family{FamilyTag::Gpd, delta_};
    }
    static Family dgpd() { return Family{FamilyTag::Dgpd, 0.0}; }
    static Family gzd() { return Family{FamilyTag::Gzd, 0.0}; }
    static Family geometric() { return Family{FamilyTag::Geometric, 0.0}; }
    static Family poisson() { return Family{FamilyTag::Poisson, 0.0}; }
    static Family neg_binomial() { return Family{FamilyTag::NegBinomial, 0.0}; }
    static Family inverse_gamma() { return Family{FamilyTag::InverseGamma, 0.0}; }
};

const char* family_name(FamilyTag tag);
std::optional<FamilyTag> family_from_name(std::string_view name);

// "count observations with value >= threshold"
struct CensorCell {
    long long threshold = 0;
    std::uint64_t count = 0;
};

// Integer-valued sample stored as value -> count, with an optional
// right-censoring cell. Counts can reach 1e8, hence 64-bit.
class GroupedCounts {
public:
    GroupedCounts() = default;

    static GroupedCounts from_values(std::span<const long long> values);

    // Adds `count` observations equal to `value`.
    void add(long long value, std::uint64_t count = 1);
    void set_censor(long long threshold, std::uint64_t count);

    const std::map<long long, std::uint64_t>& cells() const { return cells_; }
    const std::optional<CensorCell>& censor() const { return censor_; }

    std::uint64_t total() const;
    bool empty() const { return cells_.empty() && !censor_; }
    std::size_t distinct_values() const { return cells_.size(); }

    // Expands explicit cells into a sorted vector of values. Throws if a
    // censor cell is present (censored observations have no exact value).
    std::vector<long long> expand() const;

    // Checks the structural invariants; throws std::invalid_argument.
    void validate() const;

private:
    std::map<long long, std::uint64_t> cells_;
    std::optional<CensorCell> censor_;
};

}  // namespace dex
