#pragma once

// Scalar-field container plus the two propagators used by the ring
// transform: an exact thin-lens Fourier transform between focal planes and
// an angular-spectrum propagator for free space.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "spdcring/errors.hpp"

namespace spdcring {

struct ScalarField {
    int n = 0;               // grid is n x n
    double pitch_m = 0.0;    // sample spacing
    double wavelength_m = 0.0;
    std::vector<std::complex<double>> u;  // row-major, u[iy*n+ix]

    ScalarField() = default;
    ScalarField(int n_, double pitch, double lambda)
        : n(n_), pitch_m(pitch), wavelength_m(lambda),
          u(static_cast<size_t>(n_) * n_) {
        if (n_ < 2 || (n_ & (n_ - 1)) != 0)
            throw ConfigError("field: grid size must be a power of two >= 2");
        if (!(pitch > 0.0)) throw ConfigError("field: pitch must be > 0");
        if (!(lambda > 0.0)) throw ConfigError("field: wavelength must be > 0");
    }

    double extent_m() const { return n * pitch_m; }
    // coordinate of sample i, grid centered so that i = n/2 sits at zero
    double coord(int i) const { return (i - n / 2) * pitch_m; }

    std::complex<double>& at(int ix, int iy) {
        return u[static_cast<size_t>(iy) * n + ix];
    }
    const std::complex<double>& at(int ix, int iy) const {
        return u[static_cast<size_t>(iy) * n + ix];
    }

    double power() const {
        double p = 0.0;
        for (const auto& v : u) p += std::norm(v);
        return p * pitch_m * pitch_m;
    }

    void scale(double s) {
        for (auto& v : u) v *= s;
    }
};

namespace detail {

inline void fft2_inplace(ScalarField& f, int sign) {
    fftw_complex* data = reinterpret_cast<fftw_complex*>(f.u.data());
    fftw_plan plan = fftw_plan_dft_2d(f.n, f.n, data, data, sign,
                                      FFTW_ESTIMATE);
    if (!plan) throw NumericError("fft: plan creation failed");
    fftw_execute(plan);
    fftw_destroy_plan(plan);
}

// Multiply by (-1)^(ix+iy); swaps the DC corner with the grid center so a
// plain FFT acts as a centered transform.
inline void checkerboard(ScalarField& f) {
    for (int iy = 0; iy < f.n; ++iy)
        for (int ix = 0; ix < f.n; ++ix)
            if ((ix + iy) & 1) f.at(ix, iy) = -f.at(ix, iy);
}

}  // namespace detail

// Field at the back focal plane of an ideal lens, front focal plane input.
// Output pitch is lambda*f/(N*pitch_in).
inline ScalarField lens_fourier_transform(const ScalarField& in,
                                          double focal_m) {
    if (!(focal_m > 0.0)) throw ConfigError("lens: focal length must be > 0");
    ScalarField out = in;
    detail::checkerboard(out);
    detail::fft2_inplace(out, FFTW_FORWARD);
    detail::checkerboard(out);
    const double scale =
        in.pitch_m * in.pitch_m / (in.wavelength_m * focal_m);
    out.scale(scale);
    out.pitch_m = in.wavelength_m * focal_m / (in.n * in.pitch_m);
    return out;
}

// Angular-spectrum propagation over a signed distance. Evanescent
// components are zeroed. propagate(z) then propagate(-z) restores the
// input up to roundoff for propagating fields.
inline ScalarField propagate(const ScalarField& in, double distance_m) {
    ScalarField out = in;
    if (distance_m == 0.0) return out;
    detail::fft2_inplace(out, FFTW_FORWARD);

    const int n = out.n;
    const double k = 2.0 * std::numbers::pi / out.wavelength_m;
    const double df = 1.0 / (n * out.pitch_m);
    std::vector<double> freq(n);
    for (int i = 0; i < n; ++i)
        freq[i] = (i < (n + 1) / 2 ? i : i - n) * df;

    for (int iy = 0; iy < n; ++iy) {
        const double fy = freq[iy];
        for (int ix = 0; ix < n; ++ix) {
            const double fx = freq[ix];
            const double kt2 = 4.0 * std::numbers::pi * std::numbers::pi *
                               (fx * fx + fy * fy);
            const double kz2 = k * k - kt2;
            if (kz2 <= 0.0) {
                out.at(ix, iy) = 0.0;
                continue;
            }
            const double phase = distance_m * std::sqrt(kz2);
            out.at(ix, iy) *=
                std::complex<double>(std::cos(phase), std::sin(phase));
        }
    }
    detail::fft2_inplace(out, FFTW_BACKWARD);
    out.scale(1.0 / (static_cast<double>(n) * n));
    return out;
}

// Gaussian annulus amplitude exp(-(r-R)^2/(2 sigma^2)), power-normalized
// to 1. fwhm_m is the INTENSITY full width at half maximum, so
// sigma = fwhm / (2 sqrt(ln 2)). R = 0 degenerates to a Gaussian blob.
inline ScalarField make_annulus(int n, double extent_m, double wavelength_m,
                                double radius_m, double fwhm_m) {
    if (!(fwhm_m > 0.0)) throw ConfigError("annulus: fwhm must be > 0");
    if (radius_m < 0.0) throw ConfigError("annulus: radius must be >= 0");
    const double sigma = fwhm_m / 1.6651092223153954;
    if (radius_m + 3.0 * sigma >= extent_m / 2.0)
        throw ConfigError("annulus: ring does not fit inside the grid");
    ScalarField f(n, extent_m / n, wavelength_m);
    for (int iy = 0; iy < n; ++iy) {
        const double y = f.coord(iy);
        for (int ix = 0; ix < n; ++ix) {
            const double x = f.coord(ix);
            const double r = std::hypot(x, y);
            const double d = (r - radius_m) / sigma;
            f.at(ix, iy) = std::exp(-0.5 * d * d);
        }
    }
    const double p = f.power();
    if (!(p > 0.0)) throw NumericError("annulus: zero power");
    f.scale(1.0 / std::sqrt(p));
    return f;
}

// Conical phase of a thin axicon, exp(-i k (n-1) tan(beta) r) with beta the
// base angle from the apex angle. Throws when the phase gradient aliases on
// the current grid.
inline void apply_axicon(ScalarField& f, double apex_angle_deg,
                         double refractive_index) {
    if (!(apex_angle_deg > 0.0 && apex_angle_deg < 180.0))
        throw ConfigError("axicon: apex angle must be in (0, 180) deg");
    if (!(refractive_index > 1.0))
        throw ConfigError("axicon: index must exceed 1");
    const double base =
        (180.0 - apex_angle_deg) / 2.0 * std::numbers::pi / 180.0;
    const double k = 2.0 * std::numbers::pi / f.wavelength_m;
    const double slope = k * (refractive_index - 1.0) * std::tan(base);
    if (slope * f.pitch_m >= std::numbers::pi)
        throw NumericError("axicon: phase slope aliases on this grid");
    for (int iy = 0; iy < f.n; ++iy) {
        const double y = f.coord(iy);
        for (int ix = 0; ix < f.n; ++ix) {
            const double x = f.coord(ix);
            const double phase = -slope * std::hypot(x, y);
            f.at(ix, iy) *=
                std::complex<double>(std::cos(phase), std::sin(phase));
        }
    }
}

// Deflection strength (n-1) tan(beta) of the axicon, radians of ray tilt.
inline double axicon_deflection(double apex_angle_deg,
                                double refractive_index) {
    const double base =
        (180.0 - apex_angle_deg) / 2.0 * std::numbers::pi / 180.0;
    return (refractive_index - 1.0) * std::tan(base);
}

}  // namespace spdcring
