#pragma once

// Axicon-plus-lens ring transform: maps any input annulus radius to one
// fixed output radius. Includes the incoherent source model (random phase
// patches around the ring), the empirical ring-width law, and metrology for
// extracting radius and width from a sampled image.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "spdcring/errors.hpp"
#include "spdcring/fourier.hpp"
#include "spdcring/profile.hpp"

namespace spdcring {

struct RingTransformConfig {
    double apex_angle_deg = 178.4;
    double axicon_index = 1.4533;
    double f2_m = 0.100;
    double magnification = 1.0;       // relay after the transform
    double axicon_to_lens_m = 0.100;  // physical separation
    bool propagate_gap = false;       // model the axicon-lens gap explicitly

    void validate() const {
        if (!(f2_m > 0.0)) throw ConfigError("transform: f2 must be > 0");
        if (!(magnification > 0.0))
            throw ConfigError("transform: magnification must be > 0");
        if (!(apex_angle_deg > 0.0 && apex_angle_deg < 180.0))
            throw ConfigError("transform: apex angle must be in (0, 180)");
        if (!(axicon_index > 1.0))
            throw ConfigError("transform: axicon index must exceed 1");
    }
};

// Analytic output-ring radius M * f2 * (n-1) tan(beta); independent of the
// input annulus radius.
inline double analytic_ring_radius(const RingTransformConfig& cfg) {
    return cfg.magnification * cfg.f2_m *
           axicon_deflection(cfg.apex_angle_deg, cfg.axicon_index);
}

// Empirical focal-plane ring width versus vortex order:
// w(l) = w0 * sqrt(1 + c*l).
struct WidthModel {
    double base_width_m = 200e-6;
    double order_coeff = 0.0522;
    double order_per_degc = 50.0 / 7.0;

    double width_at_order(double l) const {
        if (l < 0.0) throw ConfigError("width model: order must be >= 0");
        return base_width_m * std::sqrt(1.0 + order_coeff * l);
    }
    double width_at_detuning(double dt_c) const {
        return width_at_order(order_per_degc * std::max(dt_c, 0.0));
    }
};

struct PerfectRingResult {
    ScalarField field;      // last realization, output plane
    RingProfile profile;    // azimuthally averaged intensity, all realizations
    double radius_m = 0.0;
    double width_fwhm_m = 0.0;
};

namespace detail {

// Azimuthal average by radial binning: every pixel lands in the bin
// floor(dist/pitch), bin centers at (k+0.5)*pitch.
inline RingProfile azimuthal_average(const ScalarField& f, double cx,
                                     double cy) {
    const int nbins = f.n / 2;
    std::vector<double> sum(nbins, 0.0);
    std::vector<long> cnt(nbins, 0);
    for (int iy = 0; iy < f.n; ++iy) {
        const double y = f.coord(iy) - cy;
        for (int ix = 0; ix < f.n; ++ix) {
            const double x = f.coord(ix) - cx;
            const int b = static_cast<int>(std::hypot(x, y) / f.pitch_m);
            if (b < nbins) {
                sum[b] += std::norm(f.at(ix, iy));
                cnt[b] += 1;
            }
        }
    }
    std::vector<std::pair<double, double>> samples;
    samples.reserve(nbins);
    for (int b = 0; b < nbins; ++b)
        if (cnt[b] > 0)
            samples.emplace_back((b + 0.5) * f.pitch_m, sum[b] / cnt[b]);
    return make_profile(std::move(samples));
}

inline void centroid(const std::vector<double>& intensity, int n,
                     double pitch, double& cx, double& cy) {
    double sx = 0.0, sy = 0.0, s = 0.0;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const double v = intensity[static_cast<size_t>(iy) * n + ix];
            sx += v * (ix - n / 2) * pitch;
            sy += v * (iy - n / 2) * pitch;
            s += v;
        }
    if (!(s > 0.0)) throw NumericError("metrology: image has no power");
    cx = sx / s;
    cy = sy / s;
}

}  // namespace detail

// Radius and width from an intensity image: centroid, azimuthal average,
// then the shared radial statistics. Rejects featureless images where the
// radial peak is under twice the radial median.
struct RingMetrology {
    RingProfile profile;
    double radius_m = 0.0;
    double width_fwhm_m = 0.0;
};

inline RingMetrology analyze_ring_image(const ScalarField& f) {
    std::vector<double> intensity(f.u.size());
    for (size_t i = 0; i < f.u.size(); ++i) intensity[i] = std::norm(f.u[i]);
    double cx = 0.0, cy = 0.0;
    detail::centroid(intensity, f.n, f.pitch_m, cx, cy);
    RingProfile prof = detail::azimuthal_average(f, cx, cy);

    std::vector<double> values;
    values.reserve(prof.samples.size());
    for (const auto& [r, v] : prof.samples) values.push_back(v);
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    const double peak = sorted.back();
    if (peak < 2.0 * median)
        throw NumericError("metrology: no ring feature in image");

    const RadialStats stats = radial_stats(prof.samples);
    return {std::move(prof), stats.radius_m, stats.width_fwhm_m};
}

// Incoherent ring source: the annulus split into azimuthal patches of
// independent phase, one realization per draw, intensities accumulated.
// The patch count is capped so each patch arc stays at least one intensity
// FWHM long; below that the source is effectively coherent along the arc
// and the cap collapses small rings toward a single patch.
inline int effective_patch_count(int requested, double radius_m,
                                 double fwhm_m) {
    if (requested < 1) throw ConfigError("patches: count must be >= 1");
    const double arc = 2.0 * std::numbers::pi * radius_m;
    const int cap = std::max(1, static_cast<int>(arc / fwhm_m));
    return std::min(requested, cap);
}

inline PerfectRingResult simulate_perfect_ring(
    const RingTransformConfig& cfg, int grid_n, double extent_m,
    double wavelength_m, double input_radius_m, double input_fwhm_m,
    int patches = 64, int realizations = 32, uint64_t seed = 1) {
    cfg.validate();
    const int n_eff =
        effective_patch_count(patches, input_radius_m, input_fwhm_m);
    const int n_real = (n_eff == 1) ? 1 : realizations;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uphase(0.0,
                                                  2.0 * std::numbers::pi);

    const ScalarField base = make_annulus(grid_n, extent_m, wavelength_m,
                                          input_radius_m, input_fwhm_m);
    std::vector<double> accum(base.u.size(), 0.0);
    ScalarField out_last;

    for (int rreal = 0; rreal < n_real; ++rreal) {
        ScalarField f = base;
        if (n_eff > 1) {
            std::vector<double> phases(n_eff);
            for (auto& p : phases) p = uphase(rng);
            for (int iy = 0; iy < f.n; ++iy) {
                const double y = f.coord(iy);
                for (int ix = 0; ix < f.n; ++ix) {
                    const double x = f.coord(ix);
                    double phi = std::atan2(y, x);
                    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
                    int patch = static_cast<int>(
                        phi / (2.0 * std::numbers::pi) * n_eff);
                    if (patch >= n_eff) patch = n_eff - 1;
                    const double ph = phases[patch];
                    f.at(ix, iy) *=
                        std::complex<double>(std::cos(ph), std::sin(ph));
                }
            }
        }
        apply_axicon(f, cfg.apex_angle_deg, cfg.axicon_index);
        if (cfg.propagate_gap && cfg.axicon_to_lens_m != cfg.f2_m)
            f = propagate(f, cfg.axicon_to_lens_m - cfg.f2_m);
        ScalarField o = lens_fourier_transform(f, cfg.f2_m);
        for (size_t i = 0; i < o.u.size(); ++i) accum[i] += std::norm(o.u[i]);
        if (rreal == n_real - 1) out_last = std::move(o);
    }

    // fold accumulated intensity back into a field with flat phase so the
    // metrology path sees the averaged image
    ScalarField mean = out_last;
    for (size_t i = 0; i < mean.u.size(); ++i)
        mean.u[i] = std::sqrt(accum[i] / n_real);
    mean.pitch_m *= cfg.magnification;

    RingMetrology m = analyze_ring_image(mean);
    return {std::move(mean), std::move(m.profile), m.radius_m,
            m.width_fwhm_m};
}

}  // namespace spdcring
