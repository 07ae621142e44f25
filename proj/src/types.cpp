#include "dex/types.hpp"

#include <algorithm>

namespace dex {

const char* family_name(FamilyTag tag) {
    switch (tag) {
        case FamilyTag::Gpd: return "gpd";
        case FamilyTag::Dgpd: return "dgpd";
        case FamilyTag::Gzd: return "gzd";
        case FamilyTag::Geometric: return "geometric";
        case FamilyTag::Poisson: return "poisson";
        case FamilyTag::NegBinomial: return "negbinomial";
        case FamilyTag::InverseGamma: return "inversegamma";
    }
    return "unknown";
}

std::optional<FamilyTag> family_from_name(std::string_view name) {
    if (name == "gpd") return FamilyTag::Gpd;
    if (name == "dgpd") return FamilyTag::Dgpd;
    if (name == "gzd") return FamilyTag::Gzd;
    if (name == "geometric") return FamilyTag::Geometric;
    if (name == "poisson") return FamilyTag::Poisson;
    if (name == "negbinomial") return FamilyTag::NegBinomial;
    if (name == "inversegamma") return FamilyTag::InverseGamma;
    return std::nullopt;
}

GroupedCounts GroupedCounts::from_values(std::span<const long long> values) {
    GroupedCounts g;
    for (long long v : values) g.add(v);
    return g;
}

void GroupedCounts::add(long long value, std::uint64_t count) {
    if (value < 0)
        throw std::invalid_argument("GroupedCounts: values must be non-negative");
    if (count == 0)
        throw std::invalid_argument("GroupedCounts: counts must be positive");
    if (censor_ && value >= censor_->threshold)
        throw std::invalid_argument(
            "GroupedCounts: explicit value not below censor threshold");
    cells_[value] += count;
}

void GroupedCounts::set_censor(long long threshold, std::uint64_t count) {
    if (threshold <= 0)
        throw std::invalid_argument("GroupedCounts: censor threshold must be positive");
    if (!cells_.empty() && cells_.rbegin()->first >= threshold)
        throw std::invalid_argument(
            "GroupedCounts: censor threshold must exceed every explicit value");
    censor_ = CensorCell{threshold, count};
}

std::uint64_t GroupedCounts::total() const {
    std::uint64_t n = 0;
    for (const auto& [v, c] : cells_) n += c;
    if (censor_) n += censor_->count;
    return n;
}

std::vector<long long> GroupedCounts::expand() const {
    if (censor_ && censor_->count > 0)
        throw std::invalid_argument("GroupedCounts: cannot expand censored data");
    std::vector<long long> out;
    out.reserve(static_cast<std::size_t>(total()));
    for (const auto& [v, c] : cells_)
        out.insert(out.end(), static_cast<std::size_t>(c), v);
    return out;
}

void GroupedCounts::validate() const {
    for (const auto& [v, c] : cells_) {
        if (v < 0) throw std::invalid_argument("GroupedCounts: negative value");
        if (c == 0) throw std::invalid_argument("GroupedCounts: zero count cell");
        if (censor_ && v >= censor_->threshold)
            throw std::invalid_argument("GroupedCounts: value above censor threshold");
    }
}

}  // namespace dex
