#pragma once

// KTP refractive index versus wavelength and temperature:
// two-pole Sellmeier per crystal axis plus a cubic-in-1/lambda thermo-optic
// polynomial, both from Kato and Takaoka, Appl. Opt. 41, 5040 (2002).

#include <array>
#include <cmath>
#include <string>

#include "spdcring/errors.hpp"

namespace spdcring {

enum class Axis { x, y, z };

struct AxisTable {
    // n^2 = s[0] + s[1]/(l^2 - s[2]) + s[3]/(l^2 - s[4]),  l in um
    std::array<double, 5> sellmeier{};
    // dn/dT = (t[0]/l^3 + t[1]/l^2 + t[2]/l + t[3]) * 1e-5 per degC
    std::array<double, 4> thermo{};
};

struct DispersionModel {
    std::string name = "ktp-kato-takaoka-2002";
    AxisTable x, y, z;
    double valid_um_lo = 0.43;
    double valid_um_hi = 3.54;
    double t_ref_c = 20.0;

    static DispersionModel builtin() {
        DispersionModel m;
        m.x.sellmeier = {3.29100, 0.04140, 0.03978, 9.35522, 31.45571};
        m.x.thermo = {0.1717, -0.5353, 0.8416, 0.1627};
        m.y.sellmeier = {3.45018, 0.04341, 0.04597, 16.98825, 39.43799};
        m.y.thermo = {0.1997, -0.4063, 0.5154, 0.5425};
        m.z.sellmeier = {4.59423, 0.06206, 0.04763, 110.80672, 86.12171};
        m.z.thermo = {0.9221, -2.9220, 3.6677, -0.1897};
        return m;
    }

    const AxisTable& table(Axis a) const {
        switch (a) {
            case Axis::x: return x;
            case Axis::y: return y;
            case Axis::z: return z;
        }
        throw ConfigError("dispersion: unknown axis");
    }
};

// n(lambda, T); lambda in um, T in degC. Sets *extrapolated (when given)
// if lambda falls outside the model's fitted window; the value is still
// returned, since downstream calibration absorbs the residual.
inline double refractive_index(const DispersionModel& m, Axis axis,
                               double lambda_um, double temperature_c,
                               bool* extrapolated = nullptr) {
    if (!std::isfinite(lambda_um) || !std::isfinite(temperature_c) ||
        lambda_um <= 0.0)
        throw ConfigError("dispersion: non-finite or non-positive input");
    const AxisTable& t = m.table(axis);
    const double l2 = lambda_um * lambda_um;
    const double n2 = t.sellmeier[0] + t.sellmeier[1] / (l2 - t.sellmeier[2]) +
                      t.sellmeier[3] / (l2 - t.sellmeier[4]);
    if (n2 <= 0.0)
        throw NumericError("dispersion: Sellmeier pole at this wavelength");
    const double l = lambda_um;
    const double dndt =
        (t.thermo[0] / (l * l * l) + t.thermo[1] / (l * l) + t.thermo[2] / l +
         t.thermo[3]) *
        1e-5;
    if (extrapolated)
        *extrapolated = (lambda_um < m.valid_um_lo || lambda_um > m.valid_um_hi);
    return std::sqrt(n2) + dndt * (temperature_c - m.t_ref_c);
}

}  // namespace spdcring
