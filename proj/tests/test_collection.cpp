#include <catch2/catch_amalgamated.hpp>

#include <spdcring/collection.hpp>

#include <cmath>
#include <vector>

using namespace spdcring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

RingProfile gaussian_spot(double mode_radius_m) {
    std::vector<std::pair<double, double>> s;
    const int n = 2000;
    const double rmax = 6.0 * mode_radius_m;
    for (int i = 0; i < n; ++i) {
        const double r = rmax * i / (n - 1);
        s.emplace_back(r, std::exp(-2.0 * r * r /
                                   (mode_radius_m * mode_radius_m)));
    }
    return make_profile(std::move(s));
}

RingProfile uniform_disk(double disk_radius_m) {
    std::vector<std::pair<double, double>> s;
    const int n = 4000;
    const double rmax = 1.2 * disk_radius_m;
    for (int i = 0; i < n; ++i) {
        const double r = rmax * i / (n - 1);
        s.emplace_back(r, r <= disk_radius_m ? 1.0 : 0.0);
    }
    return make_profile(std::move(s));
}

struct CurveSetup {
    CrystalConfig crystal;
    PumpConfig pump;
    DispersionModel disp = DispersionModel::builtin();
    RingTransformConfig transform;
    WidthModel widths;
    std::vector<double> temps;
    CollectionCurve direct_smf;
    CollectionCurve perfect_smf;
    CollectionCurve perfect_mmf;
};

const CurveSetup& curves() {
    static const CurveSetup s = [] {
        CurveSetup c;
        c.crystal.length_m = 0.020;
        c.crystal.grating_period_m = 3.425e-6;
        c.pump.wavelength_nm = 405.13;
        calibrate_qpm_offset(c.crystal, c.disp, c.pump, 28.0);
        c.transform.magnification = 4.31;
        for (double t = 21.0; t <= 31.0 + 1e-9; t += 0.1) {
            c.temps.push_back(t);
        }

        CollectionConfig direct;
        direct.plane = CollectionPlane::collimator;
        direct.fiber.kind = FiberKind::single_mode;
        direct.fiber.mode_radius_m = 450e-6;
        direct.anchor_temperature_c = 25.0;
        c.direct_smf = collection_rate_curve(c.crystal, c.disp, c.pump,
                                             0.150, 3.2, c.transform,
                                             c.widths, direct, c.temps);

        CollectionConfig psmf;
        psmf.plane = CollectionPlane::transformed;
        psmf.fiber.kind = FiberKind::single_mode;
        psmf.fiber.mode_radius_m = 180e-6;
        psmf.anchor_temperature_c = 25.0;
        psmf.acceptance_sigma_c = 2.0;
        c.perfect_smf = collection_rate_curve(c.crystal, c.disp, c.pump,
                                              0.150, 3.2, c.transform,
                                              c.widths, psmf, c.temps);

        CollectionConfig pmmf;
        pmmf.plane = CollectionPlane::transformed;
        pmmf.fiber.kind = FiberKind::multi_mode;
        pmmf.fiber.aperture_radius_m = 400e-6;
        pmmf.anchor_temperature_c = 25.0;
        pmmf.acceptance_sigma_c = 4.0;
        c.perfect_mmf = collection_rate_curve(c.crystal, c.disp, c.pump,
                                              0.150, 3.2, c.transform,
                                              c.widths, pmmf, c.temps);
        return c;
    }();
    return s;
}

}  // namespace

TEST_CASE("matched Gaussian mode couples with unit efficiency") {
    FiberConfig f;
    f.kind = FiberKind::single_mode;
    f.mode_radius_m = 200e-6;
    f.center_radius_m = 0.0;
    REQUIRE_THAT(coupling_efficiency(gaussian_spot(200e-6), f),
                 WithinAbs(1.0, 1e-4));
}

TEST_CASE("mode displaced by one mode radius couples at 1/e") {
    FiberConfig f;
    f.kind = FiberKind::single_mode;
    f.mode_radius_m = 200e-6;
    f.center_radius_m = 200e-6;
    REQUIRE_THAT(coupling_efficiency(gaussian_spot(200e-6), f),
                 WithinAbs(std::exp(-1.0), 5e-3));
}

TEST_CASE("multimode aperture collects the enclosed power fraction") {
    FiberConfig f;
    f.kind = FiberKind::multi_mode;
    f.aperture_radius_m = 200e-6;
    f.center_radius_m = 0.0;
    REQUIRE_THAT(coupling_efficiency(uniform_disk(400e-6), f),
                 WithinAbs(0.25, 0.01));
    f.aperture_radius_m = 600e-6;
    REQUIRE_THAT(coupling_efficiency(uniform_disk(400e-6), f),
                 WithinAbs(1.0, 1e-6));
}

TEST_CASE("radial coupling of the transformed ring") {
    RingTransformConfig tc;
    tc.magnification = 4.31;
    WidthModel wm;
    FiberConfig f;
    f.kind = FiberKind::single_mode;
    f.mode_radius_m = 180e-6;
    f.center_radius_m = analytic_ring_radius(tc);

    // two-Gaussian overlap 2*sqrt(a*b)/(a+b) with a = 1/(4 sigma^2),
    // b = 1/wm^2; at zero detuning the 200 um ring gives 0.99832
    const auto at_peak = transformed_plane_profile(tc, wm, 0.0);
    REQUIRE_THAT(radial_coupling(at_peak, f), WithinAbs(0.99832, 5e-4));

    // the 25 C anchor sits 3 C below the calibrated degeneracy
    // temperature, so the operating ring is 291 um wide
    const auto at_anchor = transformed_plane_profile(tc, wm, 3.0);
    REQUIRE_THAT(radial_coupling(at_anchor, f), WithinAbs(0.9517, 0.003));
}

TEST_CASE("heralding ratio from arm efficiency and partner coupling") {
    REQUIRE_THAT(heralding_ratio(0.0736, 0.952), WithinAbs(0.070, 0.001));
    REQUIRE_THROWS_AS(heralding_ratio(1.5, 0.9), ConfigError);
    REQUIRE_THROWS_AS(heralding_ratio(0.5, -0.1), ConfigError);
}

TEST_CASE("synthetic transformed-plane ring matches the width model") {
    RingTransformConfig tc;
    tc.magnification = 4.31;
    WidthModel wm;
    for (double dt : {0.0, 3.0, 7.0}) {
        const auto prof = transformed_plane_profile(tc, wm, dt);
        const auto stats = radial_stats(prof.samples);
        REQUIRE_THAT(stats.radius_m,
                     WithinRel(analytic_ring_radius(tc), 1e-3));
        REQUIRE_THAT(stats.width_fwhm_m,
                     WithinRel(wm.width_at_detuning(dt), 0.01));
    }
}

TEST_CASE("temperature bandwidth of the three collection geometries") {
    const auto& c = curves();
    const double f_direct = curve_fwhm(c.temps, c.direct_smf.rate);
    const double f_psmf = curve_fwhm(c.temps, c.perfect_smf.rate);
    const double f_pmmf = curve_fwhm(c.temps, c.perfect_mmf.rate);
    REQUIRE_THAT(f_direct, WithinAbs(0.956, 0.05));
    REQUIRE_THAT(f_psmf, WithinAbs(3.297, 0.08));
    REQUIRE_THAT(f_pmmf, WithinAbs(6.099, 0.10));
    REQUIRE(f_psmf / f_direct > 2.5);
    REQUIRE(f_pmmf / f_direct > 5.0);
}

TEST_CASE("stability range at a ten percent drop") {
    const auto& c = curves();
    REQUIRE_THAT(stability_range(c.temps, c.direct_smf.rate, 0.10),
                 WithinAbs(0.156, 0.02));
    REQUIRE_THAT(stability_range(c.temps, c.perfect_smf.rate, 0.10),
                 WithinAbs(0.644, 0.03));
    REQUIRE_THAT(stability_range(c.temps, c.perfect_mmf.rate, 0.10),
                 WithinAbs(1.267, 0.03));
}

TEST_CASE("transformed-plane curves are flat near the anchor") {
    const auto& c = curves();
    for (double t : {24.0, 26.0}) {
        REQUIRE(curve_value_at(c.temps, c.perfect_smf.rate, t) >= 0.7);
        REQUIRE(curve_value_at(c.temps, c.perfect_mmf.rate, t) >= 0.7);
        REQUIRE(curve_value_at(c.temps, c.direct_smf.rate, t) <= 0.2);
    }
}

TEST_CASE("curves are peak normalized") {
    const auto& c = curves();
    for (const auto* curve :
         {&c.direct_smf, &c.perfect_smf, &c.perfect_mmf}) {
        double peak = 0.0;
        for (double r : curve->rate) peak = std::max(peak, r);
        REQUIRE_THAT(peak, WithinRel(1.0, 1e-12));
        REQUIRE(curve->peak_rate_raw > 0.0);
    }
}

TEST_CASE("fwhm reports which flank is missing") {
    const std::vector<double> t = {0, 1, 2, 3, 4};
    const std::vector<double> rising = {0.1, 0.3, 0.5, 0.8, 1.0};
    REQUIRE_THROWS_MATCHES(
        curve_fwhm(t, rising), NumericError,
        Catch::Matchers::MessageMatches(
            Catch::Matchers::ContainsSubstring("right flank")));
    const std::vector<double> falling = {1.0, 0.8, 0.5, 0.3, 0.1};
    REQUIRE_THROWS_MATCHES(
        curve_fwhm(t, falling), NumericError,
        Catch::Matchers::MessageMatches(
            Catch::Matchers::ContainsSubstring("left flank")));
}

TEST_CASE("stability range on a triangular curve") {
    std::vector<double> t;
    std::vector<double> y;
    for (int i = 0; i <= 10; ++i) {
        t.push_back(i);
        y.push_back(std::max(0.0, 1.0 - std::abs(i - 3.0) / 4.0));
    }
    REQUIRE_THAT(stability_range(t, y, 0.4), WithinAbs(1.6, 1e-12));
    REQUIRE_THAT(stability_range(t, y, 1.0), WithinAbs(3.0, 1e-12));
    REQUIRE_THROWS_AS(stability_range(t, y, 0.0), ConfigError);
    REQUIRE_THROWS_AS(stability_range(t, y, 1.5), ConfigError);
}

TEST_CASE("curve interpolation clamps to the data edges") {
    const std::vector<double> t = {0, 1, 2};
    const std::vector<double> y = {0.2, 1.0, 0.4};
    REQUIRE_THAT(curve_value_at(t, y, 0.5), WithinAbs(0.6, 1e-12));
    REQUIRE_THAT(curve_value_at(t, y, -5.0), WithinAbs(0.2, 1e-12));
    REQUIRE_THAT(curve_value_at(t, y, 9.0), WithinAbs(0.4, 1e-12));
}

TEST_CASE("collection configuration validation") {
    CollectionConfig c;
    c.arm_efficiency = 1.5;
    REQUIRE_THROWS_AS(c.validate(), ConfigError);
    c = CollectionConfig{};
    c.acceptance_sigma_c = -1.0;
    REQUIRE_THROWS_AS(c.validate(), ConfigError);
    c = CollectionConfig{};
    c.fiber.mode_radius_m = 0.0;
    REQUIRE_THROWS_AS(c.validate(), ConfigError);
    RingProfile tiny;
    tiny.samples = {{0.0, 1.0}};
    FiberConfig f;
    REQUIRE_THROWS_AS(radial_coupling(tiny, f), ConfigError);
}
