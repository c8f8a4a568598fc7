#pragma once

// Run configuration: one JSON file describing the source, optics, fibers,
// polarization state, grids and seeds. Parsing fills defaults, validates,
// and exposes a canonical serialization whose hash names the output files.

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>

#include "spdcring/collection.hpp"
#include "spdcring/dispersion.hpp"
#include "spdcring/errors.hpp"
#include "spdcring/perfectring.hpp"
#include "spdcring/phasematch.hpp"
#include "spdcring/timetag.hpp"

namespace spdcring {

struct CalibrationConfig {
    bool enabled = true;
    double pump_wavelength_nm = 405.13;  // wavelength the anchor was taken at
    double anchor_t0_c = 28.0;           // measured degeneracy temperature
};

struct OpticsConfig {
    double f1_m = 0.150;
    double filter_fwhm_nm = 3.2;

    void validate() const {
        if (!(f1_m > 0.0)) throw ConfigError("optics: f1 must be > 0");
        if (!(filter_fwhm_nm > 0.0))
            throw ConfigError("optics: filter width must be > 0");
    }
};

struct PolarizationConfig {
    double werner_p = 0.938;
    double phase_rad = std::numbers::pi;
    double pair_flux_hz_per_mw = 22580.0;

    void validate() const {
        if (werner_p < 0.0 || werner_p > 1.0)
            throw ConfigError("polarization: werner_p must be in [0,1]");
        if (!(pair_flux_hz_per_mw >= 0.0))
            throw ConfigError("polarization: pair flux must be >= 0");
    }
};

struct GridConfig {
    int n = 2048;
    double extent_m = 0.020;

    void validate() const {
        if (n < 2 || (n & (n - 1)) != 0)
            throw ConfigError("grid: n must be a power of two >= 2");
        if (!(extent_m > 0.0)) throw ConfigError("grid: extent must be > 0");
    }
};

struct TimetagDefaults {
    int64_t window_ps = 1600;
    double pair_rate_hz = 1e5;
    double efficiency = 0.07;
    double duration_s = 10.0;
    double jitter_sigma_ps = 0.0;

    void validate() const {
        if (window_ps <= 0) throw ConfigError("timetag: window must be > 0");
        if (!(pair_rate_hz > 0.0))
            throw ConfigError("timetag: pair rate must be > 0");
        if (efficiency < 0.0 || efficiency > 1.0)
            throw ConfigError("timetag: efficiency must be in [0,1]");
        if (!(duration_s > 0.0))
            throw ConfigError("timetag: duration must be > 0");
        if (jitter_sigma_ps < 0.0)
            throw ConfigError("timetag: jitter must be >= 0");
    }
};

struct CollectionSet {
    double anchor_temperature_c = 25.0;
    CollectionConfig direct_smf;
    CollectionConfig perfect_smf;
    CollectionConfig perfect_mmf;
};

struct RunConfig {
    CrystalConfig crystal;
    PumpConfig pump;
    CalibrationConfig calibration;
    OpticsConfig optics;
    RingTransformConfig transform;
    WidthModel widths;
    CollectionSet collection;
    PolarizationConfig polarization;
    GridConfig grid;
    TimetagDefaults timetag;
    uint64_t seed = 1;

    void validate() const {
        crystal.validate();
        pump.validate();
        optics.validate();
        transform.validate();
        polarization.validate();
        grid.validate();
        timetag.validate();
        collection.direct_smf.validate();
        collection.perfect_smf.validate();
        collection.perfect_mmf.validate();
        if (calibration.pump_wavelength_nm < 380.0 ||
            calibration.pump_wavelength_nm > 430.0)
            throw ConfigError("calibration: wavelength outside 380..430 nm");
        if (!(widths.base_width_m > 0.0))
            throw ConfigError("width model: base width must be > 0");
        if (widths.order_coeff < 0.0)
            throw ConfigError("width model: order coefficient must be >= 0");
        if (!(widths.order_per_degc > 0.0))
            throw ConfigError("width model: order scale must be > 0");
    }
};

namespace detail {

template <typename T>
T field(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config: bad value for '") + key + "'");
    }
}

inline const nlohmann::json& section(const nlohmann::json& j,
                                     const char* key,
                                     const nlohmann::json& empty) {
    if (!j.contains(key)) return empty;
    const auto& s = j.at(key);
    if (!s.is_object())
        throw ConfigError(std::string("config: '") + key +
                          "' must be an object");
    return s;
}

inline CollectionConfig parse_collection_block(const nlohmann::json& j,
                                               CollectionPlane plane,
                                               FiberKind kind,
                                               double anchor_c,
                                               double default_mode_radius_m) {
    CollectionConfig c;
    c.plane = plane;
    c.fiber.kind = kind;
    c.anchor_temperature_c = anchor_c;
    c.fiber.mode_radius_m = default_mode_radius_m;
    c.fiber.mode_radius_m = field(j, "mode_radius_m", c.fiber.mode_radius_m);
    c.fiber.aperture_radius_m =
        field(j, "aperture_radius_m", c.fiber.aperture_radius_m);
    c.fiber.center_radius_m =
        field(j, "coupler_radius_m", c.fiber.center_radius_m);
    c.acceptance_sigma_c =
        field(j, "acceptance_sigma_c", c.acceptance_sigma_c);
    c.arm_efficiency = field(j, "arm_efficiency", c.arm_efficiency);
    return c;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: root must be an object");
    static const nlohmann::json empty = nlohmann::json::object();
    RunConfig c;

    {
        const auto& s = detail::section(j, "crystal", empty);
        c.crystal.length_m = detail::field(s, "length_m", c.crystal.length_m);
        c.crystal.grating_period_m =
            detail::field(s, "grating_period_m", c.crystal.grating_period_m);
        c.crystal.poling_order =
            detail::field(s, "poling_order", c.crystal.poling_order);
        c.crystal.temperature_c =
            detail::field(s, "temperature_c", c.crystal.temperature_c);
        c.crystal.expansion_alpha =
            detail::field(s, "expansion_alpha", c.crystal.expansion_alpha);
        c.crystal.expansion_beta =
            detail::field(s, "expansion_beta", c.crystal.expansion_beta);
        c.crystal.expansion_enabled =
            detail::field(s, "expansion_enabled", c.crystal.expansion_enabled);
        c.crystal.qpm_offset_rad_per_m =
            detail::field(s, "qpm_offset_rad_per_m",
                          c.crystal.qpm_offset_rad_per_m);
    }
    {
        const auto& s = detail::section(j, "pump", empty);
        c.pump.wavelength_nm =
            detail::field(s, "wavelength_nm", c.pump.wavelength_nm);
        c.pump.power_mw = detail::field(s, "power_mw", c.pump.power_mw);
    }
    {
        const auto& s = detail::section(j, "calibration", empty);
        c.calibration.enabled =
            detail::field(s, "enabled", c.calibration.enabled);
        c.calibration.pump_wavelength_nm = detail::field(
            s, "pump_wavelength_nm", c.calibration.pump_wavelength_nm);
        c.calibration.anchor_t0_c =
            detail::field(s, "anchor_t0_c", c.calibration.anchor_t0_c);
    }
    {
        const auto& s = detail::section(j, "optics", empty);
        c.optics.f1_m = detail::field(s, "f1_m", c.optics.f1_m);
        c.optics.filter_fwhm_nm =
            detail::field(s, "filter_fwhm_nm", c.optics.filter_fwhm_nm);
    }
    {
        const auto& s = detail::section(j, "transform", empty);
        c.transform.apex_angle_deg =
            detail::field(s, "apex_angle_deg", c.transform.apex_angle_deg);
        c.transform.axicon_index =
            detail::field(s, "axicon_index", c.transform.axicon_index);
        c.transform.f2_m = detail::field(s, "f2_m", c.transform.f2_m);
        c.transform.magnification =
            detail::field(s, "magnification", c.transform.magnification);
        c.transform.axicon_to_lens_m = detail::field(
            s, "axicon_to_lens_m", c.transform.axicon_to_lens_m);
        c.transform.propagate_gap =
            detail::field(s, "propagate_gap", c.transform.propagate_gap);
    }
    {
        const auto& s = detail::section(j, "width_model", empty);
        c.widths.base_width_m =
            detail::field(s, "base_width_m", c.widths.base_width_m);
        c.widths.order_coeff =
            detail::field(s, "order_coeff", c.widths.order_coeff);
        c.widths.order_per_degc =
            detail::field(s, "order_per_degc", c.widths.order_per_degc);
    }
    {
        const auto& s = detail::section(j, "collection", empty);
        c.collection.anchor_temperature_c =
            detail::field(s, "anchor_temperature_c",
                          c.collection.anchor_temperature_c);
        const double anchor = c.collection.anchor_temperature_c;
        c.collection.direct_smf = detail::parse_collection_block(
            detail::section(s, "direct_smf", empty),
            CollectionPlane::collimator, FiberKind::single_mode, anchor,
            450e-6);
        c.collection.perfect_smf = detail::parse_collection_block(
            detail::section(s, "perfect_smf", empty),
            CollectionPlane::transformed, FiberKind::single_mode, anchor,
            180e-6);
        c.collection.perfect_mmf = detail::parse_collection_block(
            detail::section(s, "perfect_mmf", empty),
            CollectionPlane::transformed, FiberKind::multi_mode, anchor,
            180e-6);
    }
    {
        const auto& s = detail::section(j, "polarization", empty);
        c.polarization.werner_p =
            detail::field(s, "werner_p", c.polarization.werner_p);
        c.polarization.phase_rad =
            detail::field(s, "phase_rad", c.polarization.phase_rad);
        c.polarization.pair_flux_hz_per_mw =
            detail::field(s, "pair_flux_hz_per_mw",
                          c.polarization.pair_flux_hz_per_mw);
    }
    {
        const auto& s = detail::section(j, "grid", empty);
        c.grid.n = detail::field(s, "n", c.grid.n);
        c.grid.extent_m = detail::field(s, "extent_m", c.grid.extent_m);
    }
    {
        const auto& s = detail::section(j, "timetag", empty);
        c.timetag.window_ps =
            detail::field(s, "window_ps", c.timetag.window_ps);
        c.timetag.pair_rate_hz =
            detail::field(s, "pair_rate_hz", c.timetag.pair_rate_hz);
        c.timetag.efficiency =
            detail::field(s, "efficiency", c.timetag.efficiency);
        c.timetag.duration_s =
            detail::field(s, "duration_s", c.timetag.duration_s);
        c.timetag.jitter_sigma_ps =
            detail::field(s, "jitter_sigma_ps", c.timetag.jitter_sigma_ps);
    }
    c.seed = detail::field(j, "seed", c.seed);

    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: parse failure: ") + e.what());
    }
    return parse_config(j);
}

// Full effective configuration, defaults included, with sorted keys. This
// is what gets hashed and echoed next to every output file.
inline nlohmann::json canonical_config_json(const RunConfig& c) {
    nlohmann::json j;
    j["crystal"] = {
        {"length_m", c.crystal.length_m},
        {"grating_period_m", c.crystal.grating_period_m},
        {"poling_order", c.crystal.poling_order},
        {"temperature_c", c.crystal.temperature_c},
        {"expansion_alpha", c.crystal.expansion_alpha},
        {"expansion_beta", c.crystal.expansion_beta},
        {"expansion_enabled", c.crystal.expansion_enabled},
        {"qpm_offset_rad_per_m", c.crystal.qpm_offset_rad_per_m},
    };
    j["pump"] = {
        {"wavelength_nm", c.pump.wavelength_nm},
        {"power_mw", c.pump.power_mw},
    };
    j["calibration"] = {
        {"enabled", c.calibration.enabled},
        {"pump_wavelength_nm", c.calibration.pump_wavelength_nm},
        {"anchor_t0_c", c.calibration.anchor_t0_c},
    };
    j["optics"] = {
        {"f1_m", c.optics.f1_m},
        {"filter_fwhm_nm", c.optics.filter_fwhm_nm},
    };
    j["transform"] = {
        {"apex_angle_deg", c.transform.apex_angle_deg},
        {"axicon_index", c.transform.axicon_index},
        {"f2_m", c.transform.f2_m},
        {"magnification", c.transform.magnification},
        {"axicon_to_lens_m", c.transform.axicon_to_lens_m},
        {"propagate_gap", c.transform.propagate_gap},
    };
    j["width_model"] = {
        {"base_width_m", c.widths.base_width_m},
        {"order_coeff", c.widths.order_coeff},
        {"order_per_degc", c.widths.order_per_degc},
    };
    auto coll = [](const CollectionConfig& cc) {
        nlohmann::json b = {
            {"coupler_radius_m", cc.fiber.center_radius_m},
            {"acceptance_sigma_c", cc.acceptance_sigma_c},
            {"arm_efficiency", cc.arm_efficiency},
        };
        if (cc.fiber.kind == FiberKind::single_mode)
            b["mode_radius_m"] = cc.fiber.mode_radius_m;
        else
            b["aperture_radius_m"] = cc.fiber.aperture_radius_m;
        return b;
    };
    j["collection"] = {
        {"anchor_temperature_c", c.collection.anchor_temperature_c},
        {"direct_smf", coll(c.collection.direct_smf)},
        {"perfect_smf", coll(c.collection.perfect_smf)},
        {"perfect_mmf", coll(c.collection.perfect_mmf)},
    };
    j["polarization"] = {
        {"werner_p", c.polarization.werner_p},
        {"phase_rad", c.polarization.phase_rad},
        {"pair_flux_hz_per_mw", c.polarization.pair_flux_hz_per_mw},
    };
    j["grid"] = {
        {"n", c.grid.n},
        {"extent_m", c.grid.extent_m},
    };
    j["timetag"] = {
        {"window_ps", c.timetag.window_ps},
        {"pair_rate_hz", c.timetag.pair_rate_hz},
        {"efficiency", c.timetag.efficiency},
        {"duration_s", c.timetag.duration_s},
        {"jitter_sigma_ps", c.timetag.jitter_sigma_ps},
    };
    j["seed"] = c.seed;
    return j;
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (const unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

// First eight hex digits of the FNV-1a hash of the canonical form; used to
// tag output filenames so reruns with the same effective config collide.
inline std::string config_hash8(const RunConfig& c) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(
                      fnv1a64(canonical_config_json(c).dump())));
    return std::string(buf, 8);
}

// Calibrate the grating offset so the model reproduces the measured
// degeneracy temperature at the calibration wavelength. The offset then
// applies unchanged at any pump wavelength.
inline void apply_calibration(RunConfig& c, const DispersionModel& disp) {
    if (!c.calibration.enabled) return;
    PumpConfig anchor_pump = c.pump;
    anchor_pump.wavelength_nm = c.calibration.pump_wavelength_nm;
    c.crystal.qpm_offset_rad_per_m = 0.0;
    calibrate_qpm_offset(c.crystal, disp, anchor_pump,
                         c.calibration.anchor_t0_c);
}

}  // namespace spdcring
