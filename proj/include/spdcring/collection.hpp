#pragma once

// Fiber-collection model: coupling overlap of an azimuthally symmetric ring
// with a fiber placed on the ring, and the coincidence rate versus crystal
// temperature for collection at the collimator plane or behind the ring
// transform.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "spdcring/errors.hpp"
#include "spdcring/perfectring.hpp"
#include "spdcring/phasematch.hpp"
#include "spdcring/profile.hpp"

namespace spdcring {

enum class FiberKind { single_mode, multi_mode };
enum class CollectionPlane { collimator, transformed };

struct FiberConfig {
    FiberKind kind = FiberKind::single_mode;
    double mode_radius_m = 180e-6;      // amplitude 1/e radius (single mode)
    double aperture_radius_m = 400e-6;  // core radius (multi mode)
    double center_radius_m = 0.0;       // 0 = align to the ring automatically

    void validate() const {
        if (kind == FiberKind::single_mode && !(mode_radius_m > 0.0))
            throw ConfigError("fiber: mode radius must be > 0");
        if (kind == FiberKind::multi_mode && !(aperture_radius_m > 0.0))
            throw ConfigError("fiber: aperture radius must be > 0");
        if (center_radius_m < 0.0)
            throw ConfigError("fiber: center radius must be >= 0");
    }

    double capture_scale_m() const {
        return kind == FiberKind::single_mode ? mode_radius_m
                                              : aperture_radius_m;
    }
};

namespace detail {

constexpr int kAzimuthalPoints = 256;

template <typename F>
inline void polar_integrate(const RingProfile& prof, F&& accumulate) {
    const auto& s = prof.samples;
    const double dphi = 2.0 * std::numbers::pi / kAzimuthalPoints;
    for (size_t i = 0; i < s.size(); ++i) {
        const double r = s[i].first;
        const double lo = (i == 0) ? r : 0.5 * (s[i - 1].first + r);
        const double hi =
            (i + 1 == s.size()) ? r : 0.5 * (r + s[i + 1].first);
        const double dr = hi - lo;
        if (dr <= 0.0) continue;
        const double intensity = s[i].second;
        for (int j = 0; j < kAzimuthalPoints; ++j) {
            const double phi = (j + 0.5) * dphi;
            accumulate(r, phi, intensity, r * dr * dphi);
        }
    }
}

}  // namespace detail

// Power-coupling efficiency of the full 2D plane field into the fiber, the
// fiber axis at polar point (center_radius, 0). Single mode: amplitude
// overlap with the Gaussian mode, squared. Multi mode: intensity fraction
// inside the core. Two matched Gaussian modes displaced by one mode radius
// couple at exp(-1).
inline double coupling_efficiency(const RingProfile& prof,
                                  const FiberConfig& fiber) {
    fiber.validate();
    if (prof.samples.empty())
        throw ConfigError("coupling: empty profile");
    const double rc = fiber.center_radius_m;

    if (fiber.kind == FiberKind::single_mode) {
        const double wm = fiber.mode_radius_m;
        double cross = 0.0, ptot = 0.0, mode = 0.0;
        detail::polar_integrate(prof, [&](double r, double phi,
                                          double intensity, double da) {
            const double dx = r * std::cos(phi) - rc;
            const double dy = r * std::sin(phi);
            const double g = std::exp(-(dx * dx + dy * dy) / (wm * wm));
            cross += std::sqrt(std::max(intensity, 0.0)) * g * da;
            ptot += intensity * da;
            mode += g * g * da;
        });
        if (!(ptot > 0.0) || !(mode > 0.0))
            throw NumericError("coupling: degenerate overlap integral");
        return cross * cross / (ptot * mode);
    }

    const double ra = fiber.aperture_radius_m;
    double inside = 0.0, ptot = 0.0;
    detail::polar_integrate(prof, [&](double r, double phi, double intensity,
                                      double da) {
        const double dx = r * std::cos(phi) - rc;
        const double dy = r * std::sin(phi);
        ptot += intensity * da;
        if (dx * dx + dy * dy <= ra * ra) inside += intensity * da;
    });
    if (!(ptot > 0.0)) throw NumericError("coupling: profile has no power");
    return inside / ptot;
}

// Coupling along the radial cross-section only, ignoring the azimuthal
// extent of the ring. This is the per-photon factor that enters the pair
// rate squared; the azimuthal subtense enters once because the two photons
// of a pair sit at exactly opposite azimuths.
inline double radial_coupling(const RingProfile& prof,
                              const FiberConfig& fiber) {
    fiber.validate();
    if (prof.samples.size() < 3)
        throw ConfigError("coupling: profile too short");
    const auto& s = prof.samples;
    const double rc = fiber.center_radius_m;

    auto dr_at = [&](size_t i) {
        const double lo = (i == 0) ? s[i].first
                                   : 0.5 * (s[i - 1].first + s[i].first);
        const double hi = (i + 1 == s.size())
                              ? s[i].first
                              : 0.5 * (s[i].first + s[i + 1].first);
        return std::max(hi - lo, 0.0);
    };

    if (fiber.kind == FiberKind::single_mode) {
        const double wm = fiber.mode_radius_m;
        double cross = 0.0, ptot = 0.0, mode = 0.0;
        for (size_t i = 0; i < s.size(); ++i) {
            const double dr = dr_at(i);
            const double d = (s[i].first - rc) / wm;
            const double g = std::exp(-d * d);
            cross += std::sqrt(std::max(s[i].second, 0.0)) * g * dr;
            ptot += s[i].second * dr;
            mode += g * g * dr;
        }
        if (!(ptot > 0.0) || !(mode > 0.0))
            throw NumericError("coupling: degenerate radial overlap");
        return cross * cross / (ptot * mode);
    }

    const double ra = fiber.aperture_radius_m;
    double inside = 0.0, ptot = 0.0;
    for (size_t i = 0; i < s.size(); ++i) {
        const double dr = dr_at(i);
        ptot += s[i].second * dr;
        if (std::abs(s[i].first - rc) <= ra) inside += s[i].second * dr;
    }
    if (!(ptot > 0.0)) throw NumericError("coupling: profile has no power");
    return inside / ptot;
}

struct CollectionConfig {
    CollectionPlane plane = CollectionPlane::collimator;
    FiberConfig fiber;
    double anchor_temperature_c = 25.0;
    double acceptance_sigma_c = 0.0;  // 0 disables the Gaussian envelope
    double arm_efficiency = 0.0736;   // detection-path efficiency per arm

    void validate() const {
        fiber.validate();
        if (acceptance_sigma_c < 0.0)
            throw ConfigError("collection: acceptance sigma must be >= 0");
        if (arm_efficiency < 0.0 || arm_efficiency > 1.0)
            throw ConfigError("collection: arm efficiency must be in [0,1]");
    }
};

struct CollectionCurve {
    std::vector<double> temperature_c;
    std::vector<double> rate;          // peak-normalized
    double fiber_center_m = 0.0;       // resolved fiber position
    double peak_temperature_c = 0.0;
    double peak_rate_raw = 0.0;        // before normalization
};

// Synthetic ring cross-section behind the transform: Gaussian annulus at
// the analytic radius with the width-model FWHM at the given detuning.
inline RingProfile transformed_plane_profile(
    const RingTransformConfig& transform, const WidthModel& widths,
    double detuning_c) {
    const double rho = analytic_ring_radius(transform);
    const double w = widths.width_at_detuning(detuning_c);
    const double sigma = w / 2.3548200450309493;
    const int n = 1500;
    const double rmax = rho + 8.0 * sigma;
    std::vector<std::pair<double, double>> samples(n);
    for (int i = 0; i < n; ++i) {
        const double r = rmax * i / (n - 1);
        const double d = (r - rho) / sigma;
        samples[i] = {r, std::exp(-0.5 * d * d)};
    }
    return make_profile(std::move(samples));
}

// Coincidence rate versus crystal temperature, peak-normalized. Per
// temperature: band-integrated generation strength, times the azimuthal
// capture (once), times the radial coupling squared, times the optional
// acceptance envelope squared.
inline CollectionCurve collection_rate_curve(
    const CrystalConfig& crystal, const DispersionModel& disp,
    const PumpConfig& pump, double f1_m, double filter_fwhm_nm,
    const RingTransformConfig& transform, const WidthModel& widths,
    const CollectionConfig& coll, const std::vector<double>& temperatures) {
    coll.validate();
    if (temperatures.size() < 3)
        throw ConfigError("collection: need at least 3 temperatures");

    const double t0 =
        collinear_degenerate_temperature(crystal, disp, pump);
    const double scale = coll.fiber.capture_scale_m();

    // resolve the fiber position once, at the anchor temperature
    FiberConfig fiber = coll.fiber;
    if (fiber.center_radius_m == 0.0) {
        if (coll.plane == CollectionPlane::transformed) {
            fiber.center_radius_m = analytic_ring_radius(transform);
        } else {
            const RingProfile anchor_prof = ring_profile_at_collimator(
                crystal, disp, pump, coll.anchor_temperature_c, f1_m,
                filter_fwhm_nm);
            fiber.center_radius_m = radial_stats(anchor_prof.samples).radius_m;
        }
        if (!(fiber.center_radius_m > 0.0))
            throw NumericError("collection: auto alignment found no ring");
    }

    CollectionCurve out;
    out.temperature_c = temperatures;
    out.rate.resize(temperatures.size());
    out.fiber_center_m = fiber.center_radius_m;

    for (size_t i = 0; i < temperatures.size(); ++i) {
        const double t = temperatures[i];
        const double g =
            generation_weight(crystal, disp, pump, t, f1_m, filter_fwhm_nm);

        RingProfile prof;
        double ring_r;
        if (coll.plane == CollectionPlane::transformed) {
            prof = transformed_plane_profile(transform, widths,
                                             std::max(t0 - t, 0.0));
            ring_r = analytic_ring_radius(transform);
        } else {
            prof = ring_profile_at_collimator(crystal, disp, pump, t, f1_m,
                                              filter_fwhm_nm);
            ring_r = radial_stats(prof.samples).radius_m;
        }

        const double azimuthal = scale / std::max(ring_r, scale);
        const double c_rad = radial_coupling(prof, fiber);
        double envelope = 1.0;
        if (coll.acceptance_sigma_c > 0.0) {
            const double d =
                (t - coll.anchor_temperature_c) / coll.acceptance_sigma_c;
            envelope = std::exp(-0.5 * d * d);
        }
        out.rate[i] = g * azimuthal * c_rad * c_rad * envelope * envelope;
    }

    const auto peak = std::max_element(out.rate.begin(), out.rate.end());
    if (!(*peak > 0.0)) throw NumericError("collection: zero rate curve");
    out.peak_rate_raw = *peak;
    out.peak_temperature_c =
        out.temperature_c[static_cast<size_t>(peak - out.rate.begin())];
    for (auto& r : out.rate) r /= out.peak_rate_raw;
    return out;
}

// Coincidence-to-singles ratio seen on one arm: the azimuthal subtense
// cancels because the partner photon sits at the opposite azimuth with
// certainty, leaving the partner-arm radial coupling times the path
// efficiency.
inline double heralding_ratio(double arm_efficiency,
                              double partner_radial_coupling) {
    if (arm_efficiency < 0.0 || arm_efficiency > 1.0)
        throw ConfigError("heralding: arm efficiency must be in [0,1]");
    if (partner_radial_coupling < 0.0 || partner_radial_coupling > 1.0)
        throw ConfigError("heralding: coupling must be in [0,1]");
    return arm_efficiency * partner_radial_coupling;
}

namespace detail {

inline size_t curve_peak_index(const std::vector<double>& rate) {
    return static_cast<size_t>(
        std::max_element(rate.begin(), rate.end()) - rate.begin());
}

// Linear-interpolated crossing of `level` between adjacent samples,
// scanning outward from the peak. Returns false when the flank never
// drops through the level inside the data.
inline bool flank_crossing(const std::vector<double>& t,
                           const std::vector<double>& y, size_t peak,
                           double level, bool rightward, double& t_cross) {
    if (rightward) {
        for (size_t i = peak; i + 1 < y.size(); ++i) {
            if (y[i] >= level && y[i + 1] < level) {
                const double f = (y[i] - level) / (y[i] - y[i + 1]);
                t_cross = t[i] + f * (t[i + 1] - t[i]);
                return true;
            }
        }
        return false;
    }
    for (size_t i = peak; i > 0; --i) {
        if (y[i] >= level && y[i - 1] < level) {
            const double f = (y[i] - level) / (y[i] - y[i - 1]);
            t_cross = t[i] + f * (t[i - 1] - t[i]);
            return true;
        }
    }
    return false;
}

}  // namespace detail

// Full width at half maximum of a sampled curve. Throws NumericError
// naming the missing flank when a half-max crossing lies outside the data.
inline double curve_fwhm(const std::vector<double>& temperature,
                         const std::vector<double>& rate) {
    if (temperature.size() != rate.size() || rate.size() < 3)
        throw ConfigError("fwhm: need matched arrays of at least 3 points");
    const size_t p = detail::curve_peak_index(rate);
    const double level = 0.5 * rate[p];
    double left = 0.0, right = 0.0;
    if (!detail::flank_crossing(temperature, rate, p, level, false, left))
        throw NumericError("fwhm: left flank does not reach half maximum");
    if (!detail::flank_crossing(temperature, rate, p, level, true, right))
        throw NumericError("fwhm: right flank does not reach half maximum");
    return right - left;
}

// Largest symmetric excursion from the peak that keeps the rate above
// (1 - drop_fraction) of the peak: the smaller of the two one-sided
// distances. drop_fraction = 1 measures distance to the nearer data edge.
inline double stability_range(const std::vector<double>& temperature,
                              const std::vector<double>& rate,
                              double drop_fraction) {
    if (temperature.size() != rate.size() || rate.size() < 3)
        throw ConfigError("stability: need matched arrays of at least 3 points");
    if (drop_fraction <= 0.0 || drop_fraction > 1.0)
        throw ConfigError("stability: drop fraction must be in (0,1]");
    const size_t p = detail::curve_peak_index(rate);
    if (drop_fraction == 1.0)
        return std::min(temperature[p] - temperature.front(),
                        temperature.back() - temperature[p]);
    const double level = (1.0 - drop_fraction) * rate[p];
    double left = 0.0, right = 0.0;
    const bool has_left =
        detail::flank_crossing(temperature, rate, p, level, false, left);
    const bool has_right =
        detail::flank_crossing(temperature, rate, p, level, true, right);
    if (!has_left && !has_right)
        throw NumericError("stability: curve never drops to the level");
    const double dl =
        has_left ? temperature[p] - left : temperature[p] - temperature.front();
    const double dr =
        has_right ? right - temperature[p] : temperature.back() - temperature[p];
    return std::min(dl, dr);
}

// Rate at an arbitrary temperature by linear interpolation.
inline double curve_value_at(const std::vector<double>& temperature,
                             const std::vector<double>& rate, double t) {
    if (temperature.size() != rate.size() || rate.size() < 2)
        throw ConfigError("curve: need matched arrays of at least 2 points");
    if (t <= temperature.front()) return rate.front();
    if (t >= temperature.back()) return rate.back();
    const auto it =
        std::lower_bound(temperature.begin(), temperature.end(), t);
    const size_t i = static_cast<size_t>(it - temperature.begin());
    const double f =
        (t - temperature[i - 1]) / (temperature[i] - temperature[i - 1]);
    return rate[i - 1] + f * (rate[i] - rate[i - 1]);
}

}  // namespace spdcring
