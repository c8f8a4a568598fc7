#pragma once

// Radial intensity profiles and the sub-pixel radius/width extraction used
// for both the SPDC ring and the focal ring.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "spdcring/errors.hpp"

namespace spdcring {

struct RingProfile {
    double radius_m = 0.0;
    double width_fwhm_m = 0.0;
    // (r, intensity), sorted by r, peak normalized to 1
    std::vector<std::pair<double, double>> samples;
};

struct RadialStats {
    double radius_m = 0.0;
    double width_fwhm_m = 0.0;
};

// Radius: midpoint of the interpolated half-max crossings around the global
// peak (sub-pixel). A profile peaking in the first bin is a central lobe:
// radius 0, width twice the outer half-max crossing.
inline RadialStats radial_stats(
    const std::vector<std::pair<double, double>>& s) {
    if (s.size() < 3) throw NumericError("radial_stats: too few samples");
    std::size_t pk = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i].second > s[pk].second) pk = i;
    const double half = s[pk].second / 2.0;

    std::size_t i0 = pk, i1 = pk;
    while (i0 > 0 && s[i0 - 1].second >= half) --i0;
    while (i1 + 1 < s.size() && s[i1 + 1].second >= half) ++i1;

    auto cross = [&](std::size_t in, std::size_t out) {
        // linear interpolation between the inside (>= half) and outside sample
        const double d = s[in].second - s[out].second;
        if (d <= 0.0) return s[in].first;
        const double f = (s[in].second - half) / d;
        return s[in].first + f * (s[out].first - s[in].first);
    };
    const double hi = (i1 + 1 < s.size()) ? cross(i1, i1 + 1) : s[i1].first;

    if (pk == 0) {
        return {0.0, 2.0 * hi};
    }
    const double lo = (i0 > 0) ? cross(i0, i0 - 1) : s[i0].first;
    return {0.5 * (lo + hi), hi - lo};
}

inline void normalize_peak(std::vector<std::pair<double, double>>& s) {
    double pk = 0.0;
    for (const auto& [r, v] : s) pk = std::max(pk, v);
    if (pk <= 0.0) throw NumericError("profile: all-zero intensity");
    for (auto& [r, v] : s) v /= pk;
}

inline RingProfile make_profile(std::vector<std::pair<double, double>> s) {
    normalize_peak(s);
    RadialStats st = radial_stats(s);
    return {st.radius_m, st.width_fwhm_m, std::move(s)};
}

// Linear interpolation of the profile; zero outside the sampled range.
inline double profile_value_at(const RingProfile& p, double r) {
    const auto& s = p.samples;
    if (s.empty() || r < s.front().first || r > s.back().first) return 0.0;
    const auto it = std::lower_bound(
        s.begin(), s.end(), r,
        [](const std::pair<double, double>& a, double b) {
            return a.first < b;
        });
    if (it == s.begin()) return it->second;
    const auto prev = it - 1;
    const double dr = it->first - prev->first;
    if (dr <= 0.0) return it->second;
    const double f = (r - prev->first) / dr;
    return prev->second + f * (it->second - prev->second);
}

}  // namespace spdcring
