#pragma once

// Quasi-phase-matched type-0 SPDC geometry for a periodically poled crystal:
// longitudinal mismatch, collinear degeneracy temperature, ring opening
// angle, and the band-integrated radial profile behind the collimating lens.

#include <cmath>
#include <numbers>
#include <vector>

#include "spdcring/dispersion.hpp"
#include "spdcring/errors.hpp"
#include "spdcring/profile.hpp"

namespace spdcring {

struct CrystalConfig {
    double length_m = 0.020;
    double grating_period_m = 3.425e-6;
    int poling_order = 1;
    double temperature_c = 25.0;
    // grating expansion Lambda(T) = Lambda*(1 + a*(T-25) + b*(T-25)^2)
    double expansion_alpha = 6.7e-6;
    double expansion_beta = 11e-9;
    bool expansion_enabled = true;
    double qpm_offset_rad_per_m = 0.0;

    void validate() const {
        if (!(length_m > 0.0))
            throw ConfigError("crystal.length must be > 0");
        if (!(grating_period_m > 0.0))
            throw ConfigError("crystal.grating_period must be > 0");
        if (poling_order < 1)
            throw ConfigError("crystal.poling_order must be >= 1");
        if (!std::isfinite(qpm_offset_rad_per_m))
            throw ConfigError("crystal.qpm_offset must be finite");
    }
};

struct PumpConfig {
    double wavelength_nm = 405.13;
    double power_mw = 1.0;

    void validate() const {
        if (wavelength_nm < 380.0 || wavelength_nm > 430.0)
            throw ConfigError("pump.wavelength outside 380..430 nm");
        if (power_mw < 0.0) throw ConfigError("pump.power must be >= 0");
    }
};

inline double grating_period_at(const CrystalConfig& c, double t_c) {
    if (!c.expansion_enabled) return c.grating_period_m;
    const double d = t_c - 25.0;
    return c.grating_period_m *
           (1.0 + c.expansion_alpha * d + c.expansion_beta * d * d);
}

namespace detail {
inline double wavevector(const DispersionModel& m, double lambda_m,
                         double t_c) {
    const double n = refractive_index(m, Axis::z, lambda_m * 1e6, t_c);
    return 2.0 * std::numbers::pi * n / lambda_m;
}
}  // namespace detail

// Longitudinal mismatch dk_z at the crystal temperature. The idler angle is
// fixed by transverse momentum conservation; energy conservation fixes its
// wavelength. Throws NumericError when no transverse solution exists.
inline double qpm_longitudinal_mismatch(const CrystalConfig& crystal,
                                        const DispersionModel& disp,
                                        const PumpConfig& pump,
                                        double signal_wavelength_nm,
                                        double internal_half_angle_rad) {
    const double t = crystal.temperature_c;
    const double lp = pump.wavelength_nm * 1e-9;
    const double ls = signal_wavelength_nm * 1e-9;
    const double inv_li = 1.0 / lp - 1.0 / ls;
    if (inv_li <= 0.0)
        throw NumericError("phasematch: signal wavelength below the pump");
    const double li = 1.0 / inv_li;

    const double kp = detail::wavevector(disp, lp, t);
    const double ks = detail::wavevector(disp, ls, t);
    const double ki = detail::wavevector(disp, li, t);

    const double ss = std::sin(internal_half_angle_rad);
    const double arg = ks * ss / ki;
    if (std::abs(arg) > 1.0)
        throw NumericError("phasematch: no transverse-momentum solution");
    const double theta_i = std::asin(arg);

    const double grating =
        2.0 * std::numbers::pi * crystal.poling_order / grating_period_at(crystal, t);
    return kp - ks * std::cos(internal_half_angle_rad) -
           ki * std::cos(theta_i) - grating + crystal.qpm_offset_rad_per_m;
}

inline double collinear_degenerate_mismatch(const CrystalConfig& crystal,
                                            const DispersionModel& disp,
                                            const PumpConfig& pump,
                                            double t_c) {
    CrystalConfig c = crystal;
    c.temperature_c = t_c;
    return qpm_longitudinal_mismatch(c, disp, pump,
                                     2.0 * pump.wavelength_nm, 0.0);
}

// Temperature where the degenerate collinear mismatch crosses zero,
// bisection over [0, 120] degC to 1e-3.
inline double collinear_degenerate_temperature(const CrystalConfig& crystal,
                                               const DispersionModel& disp,
                                               const PumpConfig& pump) {
    double lo = 0.0, hi = 120.0;
    double flo = collinear_degenerate_mismatch(crystal, disp, pump, lo);
    double fhi = collinear_degenerate_mismatch(crystal, disp, pump, hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw NumericError("phasematch: no collinear degeneracy in 0..120 C");
    while (hi - lo > 1e-3) {
        const double mid = 0.5 * (lo + hi);
        const double f = collinear_degenerate_mismatch(crystal, disp, pump, mid);
        if (f == 0.0) return mid;
        if ((f > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = f;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Additive offset that zeroes the degenerate collinear mismatch at the
// anchor; stored on the crystal. Calibrating twice is a no-op.
inline double calibrate_qpm_offset(CrystalConfig& crystal,
                                   const DispersionModel& disp,
                                   const PumpConfig& pump,
                                   double anchor_t0_c) {
    const double residual =
        collinear_degenerate_mismatch(crystal, disp, pump, anchor_t0_c);
    if (!std::isfinite(residual))
        throw NumericError("phasematch: non-finite mismatch at anchor");
    crystal.qpm_offset_rad_per_m -= residual;
    return crystal.qpm_offset_rad_per_m;
}

struct OpeningAngle {
    double internal_rad = 0.0;
    double external_rad = 0.0;
};

// Degenerate emission half-angle at temperature T. Zero on the collinear
// side (T >= T0). The mismatch is monotone in the angle, so bisection on
// (0, 0.2 rad) finds the unique root.
inline OpeningAngle degenerate_opening_angles(const CrystalConfig& crystal,
                                              const DispersionModel& disp,
                                              const PumpConfig& pump,
                                              double t_c) {
    CrystalConfig c = crystal;
    c.temperature_c = t_c;
    const double ls_nm = 2.0 * pump.wavelength_nm;
    const double at0 = qpm_longitudinal_mismatch(c, disp, pump, ls_nm, 0.0);
    if (at0 >= 0.0) return {0.0, 0.0};

    double lo = 0.0, hi = 0.2;
    if (qpm_longitudinal_mismatch(c, disp, pump, ls_nm, hi) < 0.0)
        throw NumericError("phasematch: opening angle exceeds 0.2 rad bracket");
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (qpm_longitudinal_mismatch(c, disp, pump, ls_nm, mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double internal = 0.5 * (lo + hi);
    const double n = refractive_index(disp, Axis::z, ls_nm * 1e-3, t_c);
    const double s = n * std::sin(internal);
    if (s >= 1.0)
        throw NumericError("phasematch: total internal reflection at exit");
    return {internal, std::asin(s)};
}

inline double degenerate_opening_angle(const CrystalConfig& crystal,
                                       const DispersionModel& disp,
                                       const PumpConfig& pump, double t_c) {
    return degenerate_opening_angles(crystal, disp, pump, t_c).external_rad;
}

// Radial intensity at the collimator plane (crystal at the front focal plane
// of a lens f1), integrated over the filter band with Gaussian quadrature
// weights. Filter centered at twice the pump wavelength.
inline RingProfile ring_profile_at_collimator(
    const CrystalConfig& crystal, const DispersionModel& disp,
    const PumpConfig& pump, double t_c, double f1_m, double filter_fwhm_nm,
    int n_radial = 1400, double r_max_m = 7e-3, int n_lambda = 25) {
    if (n_lambda < 21) n_lambda = 21;  // quadrature floor for band coverage
    CrystalConfig c = crystal;
    c.temperature_c = t_c;
    const double l0 = 2.0 * pump.wavelength_nm;
    const double sigma_l = filter_fwhm_nm / 2.3548200450309493;
    const double span = 2.2 * sigma_l;

    std::vector<std::pair<double, double>> samples(n_radial);
    for (int i = 0; i < n_radial; ++i)
        samples[i] = {r_max_m * i / (n_radial - 1), 0.0};

    for (int j = 0; j < n_lambda; ++j) {
        const double ls =
            l0 - span + 2.0 * span * j / (n_lambda - 1);
        const double w = std::exp(-0.5 * ((ls - l0) / sigma_l) *
                                  ((ls - l0) / sigma_l));
        const double ns =
            refractive_index(disp, Axis::z, ls * 1e-3, t_c);
        for (auto& [r, acc] : samples) {
            const double theta_ext = std::atan(r / f1_m);
            const double sin_int = std::sin(theta_ext) / ns;
            if (std::abs(sin_int) >= 1.0) continue;
            const double theta_int = std::asin(sin_int);
            double dk;
            try {
                dk = qpm_longitudinal_mismatch(c, disp, pump, ls, theta_int);
            } catch (const NumericError&) {
                continue;
            }
            const double x = dk * c.length_m / 2.0;
            const double sinc = (std::abs(x) < 1e-9) ? 1.0 : std::sin(x) / x;
            acc += w * sinc * sinc;
        }
    }
    return make_profile(std::move(samples));
}

// Band-integrated generation strength, integral of I(r) r dr over the same
// profile before normalization. Used as the temperature weight of the
// coincidence-rate model.
inline double generation_weight(const CrystalConfig& crystal,
                                const DispersionModel& disp,
                                const PumpConfig& pump, double t_c,
                                double f1_m, double filter_fwhm_nm,
                                int n_radial = 700, double r_max_m = 7e-3,
                                int n_lambda = 25) {
    CrystalConfig c = crystal;
    c.temperature_c = t_c;
    const double l0 = 2.0 * pump.wavelength_nm;
    const double sigma_l = filter_fwhm_nm / 2.3548200450309493;
    const double span = 2.2 * sigma_l;
    const double dr = r_max_m / (n_radial - 1);

    double total = 0.0;
    for (int j = 0; j < n_lambda; ++j) {
        const double ls = l0 - span + 2.0 * span * j / (n_lambda - 1);
        const double w =
            std::exp(-0.5 * ((ls - l0) / sigma_l) * ((ls - l0) / sigma_l));
        const double ns = refractive_index(disp, Axis::z, ls * 1e-3, t_c);
        for (int i = 0; i < n_radial; ++i) {
            const double r = dr * i;
            const double theta_ext = std::atan(r / f1_m);
            const double sin_int = std::sin(theta_ext) / ns;
            if (std::abs(sin_int) >= 1.0) continue;
            double dk;
            try {
                dk = qpm_longitudinal_mismatch(c, disp, pump, ls,
                                               std::asin(sin_int));
            } catch (const NumericError&) {
                continue;
            }
            const double x = dk * c.length_m / 2.0;
            const double sinc = (std::abs(x) < 1e-9) ? 1.0 : std::sin(x) / x;
            const double trap = (i == 0 || i == n_radial - 1) ? 0.5 : 1.0;
            total += trap * w * sinc * sinc * r * dr;
        }
    }
    return total;
}

// Bright-ring radius of a Laguerre-Gauss mode of the given order.
inline double vortex_ring_radius(double order, double waist_m) {
    if (!(waist_m > 0.0)) throw ConfigError("vortex: waist must be > 0");
    if (order < 0.0) throw ConfigError("vortex: order must be >= 0");
    return waist_m * std::sqrt(order / 2.0);
}

// Least-squares waist for r = w*sqrt(order/2) with order = scale*dT.
// The product w^2*scale is all the data determines, so the order scale is
// supplied and the waist fitted (closed form).
inline double fit_vortex_waist(
    const std::vector<std::pair<double, double>>& samples,
    double order_per_degc = 1.0) {
    if (samples.size() < 3)
        throw ConfigError("fit_vortex_waist: need at least 3 samples");
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [dt, r] : samples) {
        if (!(r > 0.0))
            throw ConfigError("fit_vortex_waist: radii must be > 0");
        const double x = std::sqrt(order_per_degc * std::max(dt, 0.0) / 2.0);
        sxy += r * x;
        sxx += x * x;
    }
    if (sxx <= 0.0)
        throw ConfigError("fit_vortex_waist: degenerate sample set");
    return sxy / sxx;
}

}  // namespace spdcring
