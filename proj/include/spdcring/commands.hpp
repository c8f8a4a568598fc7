#pragma once

// Implementations of the command-line subcommands. Each command reads the
// shared run configuration, writes its data files into the output
// directory as <command>-<confighash>.<ext> plus a config echo, and prints
// a short summary to stdout.

#include <cinttypes>
#include <cstdio>
#include <string>
#include <vector>

#include "spdcring/collection.hpp"
#include "spdcring/config.hpp"
#include "spdcring/dispersion.hpp"
#include "spdcring/errors.hpp"
#include "spdcring/fourier.hpp"
#include "spdcring/io.hpp"
#include "spdcring/perfectring.hpp"
#include "spdcring/phasematch.hpp"
#include "spdcring/polarization.hpp"
#include "spdcring/profile.hpp"
#include "spdcring/timetag.hpp"

namespace spdcring {

struct CommandContext {
    RunConfig cfg;
    DispersionModel disp = DispersionModel::builtin();
    std::string out_dir = "out";
    std::string hash;

    // Apply calibration, freeze the effective config hash, create the
    // output directory. Call once after all flag overrides.
    void finalize() {
        cfg.validate();
        apply_calibration(cfg, disp);
        hash = config_hash8(cfg);
        ensure_directory(out_dir);
    }

    OutputHeader header(std::vector<std::string> notes = {}) const {
        return {std::string(kVersion), hash, std::move(notes)};
    }

    std::string path(const std::string& command,
                     const std::string& ext) const {
        return out_dir + "/" + command + "-" + hash + "." + ext;
    }

    void write_echo(const std::string& command) const {
        write_text_file(path(command, "config.json"),
                        canonical_config_json(cfg).dump(2) + "\n");
    }
};

namespace detail {

inline void print_kv(const char* key, const std::string& value) {
    std::printf("%s = %s\n", key, value.c_str());
}

inline std::vector<double> temperature_grid(double tmin, double tmax,
                                            double tstep) {
    if (!(tstep > 0.0) || !(tmax > tmin))
        throw ConfigError("sweep: need tmax > tmin and tstep > 0");
    std::vector<double> out;
    const int n = static_cast<int>(std::round((tmax - tmin) / tstep));
    out.reserve(n + 1);
    for (int i = 0; i <= n; ++i) out.push_back(tmin + i * tstep);
    return out;
}

inline std::vector<double> image_from_profile(const RingProfile& prof,
                                              int n, double pitch_m) {
    std::vector<double> img(static_cast<size_t>(n) * n);
    for (int iy = 0; iy < n; ++iy) {
        const double y = (iy - n / 2) * pitch_m;
        for (int ix = 0; ix < n; ++ix) {
            const double x = (ix - n / 2) * pitch_m;
            img[static_cast<size_t>(iy) * n + ix] =
                profile_value_at(prof, std::hypot(x, y));
        }
    }
    return img;
}

}  // namespace detail

// ---------------------------------------------------------------------

inline int cmd_sweep_temperature(CommandContext& ctx, double tmin,
                                 double tmax, double tstep) {
    const auto temps = detail::temperature_grid(tmin, tmax, tstep);
    const double t0 = collinear_degenerate_temperature(ctx.cfg.crystal,
                                                       ctx.disp, ctx.cfg.pump);
    const double rho = analytic_ring_radius(ctx.cfg.transform);

    std::vector<std::vector<std::string>> rows;
    rows.reserve(temps.size());
    for (const double t : temps) {
        const RingProfile prof = ring_profile_at_collimator(
            ctx.cfg.crystal, ctx.disp, ctx.cfg.pump, t, ctx.cfg.optics.f1_m,
            ctx.cfg.optics.filter_fwhm_nm);
        const double pw =
            ctx.cfg.widths.width_at_detuning(std::max(t0 - t, 0.0));
        rows.push_back({format_double(t), format_double(prof.radius_m),
                        format_double(prof.width_fwhm_m),
                        format_double(rho), format_double(pw)});
    }
    write_csv(ctx.path("sweep-temperature", "csv"),
              ctx.header({"degeneracy_temperature_c " + format_double(t0)}),
              {"T_C", "ring_radius_m", "ring_width_m", "perfect_radius_m",
               "perfect_width_m"},
              rows);
    ctx.write_echo("sweep-temperature");
    detail::print_kv("degeneracy_temperature_c", format_double(t0));
    detail::print_kv("rows", std::to_string(rows.size()));
    detail::print_kv("output", ctx.path("sweep-temperature", "csv"));
    return 0;
}

inline int cmd_sweep_wavelength(CommandContext& ctx, double lmin_nm,
                                double lmax_nm, double lstep_nm) {
    if (!(lstep_nm > 0.0) || !(lmax_nm > lmin_nm))
        throw ConfigError("sweep: need lmax > lmin and lstep > 0");
    std::vector<std::vector<std::string>> rows;
    const int n = static_cast<int>(std::round((lmax_nm - lmin_nm) / lstep_nm));
    for (int i = 0; i <= n; ++i) {
        const double l = lmin_nm + i * lstep_nm;
        PumpConfig pump = ctx.cfg.pump;
        pump.wavelength_nm = l;
        pump.validate();
        const double t0 = collinear_degenerate_temperature(ctx.cfg.crystal,
                                                           ctx.disp, pump);
        const RingProfile prof = ring_profile_at_collimator(
            ctx.cfg.crystal, ctx.disp, pump, ctx.cfg.crystal.temperature_c,
            ctx.cfg.optics.f1_m, ctx.cfg.optics.filter_fwhm_nm);
        rows.push_back({format_double(l), format_double(t0),
                        format_double(prof.radius_m),
                        format_double(prof.width_fwhm_m)});
    }
    write_csv(ctx.path("sweep-wavelength", "csv"),
              ctx.header({"crystal_temperature_c " +
                          format_double(ctx.cfg.crystal.temperature_c)}),
              {"lambda_p_nm", "t0_c", "ring_radius_m", "ring_width_m"}, rows);
    ctx.write_echo("sweep-wavelength");
    detail::print_kv("rows", std::to_string(rows.size()));
    detail::print_kv("output", ctx.path("sweep-wavelength", "csv"));
    return 0;
}

inline int cmd_ring_image(CommandContext& ctx) {
    const RingProfile prof = ring_profile_at_collimator(
        ctx.cfg.crystal, ctx.disp, ctx.cfg.pump,
        ctx.cfg.crystal.temperature_c, ctx.cfg.optics.f1_m,
        ctx.cfg.optics.filter_fwhm_nm);
    const int n = ctx.cfg.grid.n;
    const double pitch = ctx.cfg.grid.extent_m / n;
    const auto img = detail::image_from_profile(prof, n, pitch);
    write_pgm16(ctx.path("ring-image", "pgm"), img, n, pitch,
                ctx.header({"plane collimator",
                            "temperature_c " +
                                format_double(ctx.cfg.crystal.temperature_c)}));

    std::vector<std::vector<std::string>> rows;
    rows.reserve(prof.samples.size());
    for (const auto& [r, v] : prof.samples)
        rows.push_back({format_double(r), format_double(v)});
    write_csv(ctx.path("ring-image", "csv"),
              ctx.header({"radius_m " + format_double(prof.radius_m),
                          "width_fwhm_m " + format_double(prof.width_fwhm_m)}),
              {"r_m", "intensity"}, rows);
    ctx.write_echo("ring-image");
    detail::print_kv("ring_radius_m", format_double(prof.radius_m));
    detail::print_kv("ring_width_m", format_double(prof.width_fwhm_m));
    detail::print_kv("output", ctx.path("ring-image", "pgm"));
    return 0;
}

inline int cmd_perfect_ring_image(CommandContext& ctx, double radius_mm,
                                  double fwhm_um, int patches,
                                  int realizations) {
    double r_in = radius_mm * 1e-3;
    double w_in = fwhm_um * 1e-6;
    if (radius_mm < 0.0 || fwhm_um < 0.0)
        throw ConfigError("perfect-ring: radius and fwhm must be >= 0");
    if (r_in == 0.0 && w_in == 0.0) {
        // default input: the physical ring at the operating temperature
        const RingProfile prof = ring_profile_at_collimator(
            ctx.cfg.crystal, ctx.disp, ctx.cfg.pump,
            ctx.cfg.crystal.temperature_c, ctx.cfg.optics.f1_m,
            ctx.cfg.optics.filter_fwhm_nm);
        r_in = prof.radius_m;
        w_in = prof.width_fwhm_m;
    } else if (w_in == 0.0) {
        throw ConfigError("perfect-ring: explicit radius needs --fwhm-um");
    }

    const double signal_wavelength_m = 2.0 * ctx.cfg.pump.wavelength_nm * 1e-9;
    const PerfectRingResult res = simulate_perfect_ring(
        ctx.cfg.transform, ctx.cfg.grid.n, ctx.cfg.grid.extent_m,
        signal_wavelength_m, r_in, w_in, patches, realizations,
        ctx.cfg.seed);

    std::vector<double> img(res.field.u.size());
    for (size_t i = 0; i < img.size(); ++i) img[i] = std::norm(res.field.u[i]);
    write_pgm16(ctx.path("perfect-ring-image", "pgm"), img, res.field.n,
                res.field.pitch_m,
                ctx.header({"plane transform_output",
                            "input_radius_m " + format_double(r_in),
                            "input_fwhm_m " + format_double(w_in)}));

    std::vector<std::vector<std::string>> rows;
    rows.reserve(res.profile.samples.size());
    for (const auto& [r, v] : res.profile.samples)
        rows.push_back({format_double(r), format_double(v)});
    write_csv(
        ctx.path("perfect-ring-image", "csv"),
        ctx.header(
            {"radius_m " + format_double(res.radius_m),
             "width_fwhm_m " + format_double(res.width_fwhm_m),
             "analytic_radius_m " +
                 format_double(analytic_ring_radius(ctx.cfg.transform))}),
        {"r_m", "intensity"}, rows);
    ctx.write_echo("perfect-ring-image");
    detail::print_kv("ring_radius_m", format_double(res.radius_m));
    detail::print_kv("ring_width_m", format_double(res.width_fwhm_m));
    detail::print_kv("analytic_radius_m",
                     format_double(analytic_ring_radius(ctx.cfg.transform)));
    detail::print_kv("output", ctx.path("perfect-ring-image", "pgm"));
    return 0;
}

namespace detail {

struct ThreeCurves {
    std::vector<double> temps;
    CollectionCurve direct_smf;
    CollectionCurve perfect_smf;
    CollectionCurve perfect_mmf;
};

inline ThreeCurves collection_curves(const CommandContext& ctx, double tmin,
                                     double tmax, double tstep) {
    ThreeCurves c;
    c.temps = temperature_grid(tmin, tmax, tstep);
    const auto& cfg = ctx.cfg;
    c.direct_smf = collection_rate_curve(
        cfg.crystal, ctx.disp, cfg.pump, cfg.optics.f1_m,
        cfg.optics.filter_fwhm_nm, cfg.transform, cfg.widths,
        cfg.collection.direct_smf, c.temps);
    c.perfect_smf = collection_rate_curve(
        cfg.crystal, ctx.disp, cfg.pump, cfg.optics.f1_m,
        cfg.optics.filter_fwhm_nm, cfg.transform, cfg.widths,
        cfg.collection.perfect_smf, c.temps);
    c.perfect_mmf = collection_rate_curve(
        cfg.crystal, ctx.disp, cfg.pump, cfg.optics.f1_m,
        cfg.optics.filter_fwhm_nm, cfg.transform, cfg.widths,
        cfg.collection.perfect_mmf, c.temps);
    return c;
}

inline void write_curves_csv(const CommandContext& ctx,
                             const std::string& command,
                             const ThreeCurves& c,
                             std::vector<std::string> notes) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(c.temps.size());
    for (size_t i = 0; i < c.temps.size(); ++i)
        rows.push_back({format_double(c.temps[i]),
                        format_double(c.direct_smf.rate[i]),
                        format_double(c.perfect_smf.rate[i]),
                        format_double(c.perfect_mmf.rate[i])});
    write_csv(ctx.path(command, "csv"), ctx.header(std::move(notes)),
              {"T_C", "rate_direct_smf", "rate_perfect_smf",
               "rate_perfect_mmf"},
              rows);
}

}  // namespace detail

inline int cmd_bandwidth(CommandContext& ctx, double tmin, double tmax,
                         double tstep) {
    const auto c = detail::collection_curves(ctx, tmin, tmax, tstep);
    const double f_direct = curve_fwhm(c.temps, c.direct_smf.rate);
    const double f_psmf = curve_fwhm(c.temps, c.perfect_smf.rate);
    const double f_pmmf = curve_fwhm(c.temps, c.perfect_mmf.rate);
    detail::write_curves_csv(
        ctx, "bandwidth", c,
        {"fwhm_direct_smf_c " + format_double(f_direct),
         "fwhm_perfect_smf_c " + format_double(f_psmf),
         "fwhm_perfect_mmf_c " + format_double(f_pmmf)});
    ctx.write_echo("bandwidth");
    detail::print_kv("fwhm_direct_smf_c", format_double(f_direct));
    detail::print_kv("fwhm_perfect_smf_c", format_double(f_psmf));
    detail::print_kv("fwhm_perfect_mmf_c", format_double(f_pmmf));
    detail::print_kv("enhancement_perfect_smf",
                     format_double(f_psmf / f_direct));
    detail::print_kv("enhancement_perfect_mmf",
                     format_double(f_pmmf / f_direct));
    detail::print_kv("output", ctx.path("bandwidth", "csv"));
    return 0;
}

inline int cmd_stability(CommandContext& ctx, double tmin, double tmax,
                         double tstep, double drop_fraction) {
    const auto c = detail::collection_curves(ctx, tmin, tmax, tstep);
    const double s_direct =
        stability_range(c.temps, c.direct_smf.rate, drop_fraction);
    const double s_psmf =
        stability_range(c.temps, c.perfect_smf.rate, drop_fraction);
    const double s_pmmf =
        stability_range(c.temps, c.perfect_mmf.rate, drop_fraction);
    detail::write_curves_csv(
        ctx, "stability", c,
        {"drop_fraction " + format_double(drop_fraction),
         "stability_direct_smf_c " + format_double(s_direct),
         "stability_perfect_smf_c " + format_double(s_psmf),
         "stability_perfect_mmf_c " + format_double(s_pmmf)});
    ctx.write_echo("stability");
    detail::print_kv("drop_fraction", format_double(drop_fraction));
    detail::print_kv("stability_direct_smf_c", format_double(s_direct));
    detail::print_kv("stability_perfect_smf_c", format_double(s_psmf));
    detail::print_kv("stability_perfect_mmf_c", format_double(s_pmmf));
    detail::print_kv("output", ctx.path("stability", "csv"));
    return 0;
}

inline int cmd_fringes(CommandContext& ctx, double fixed_deg, double dwell_s,
                       double step_deg) {
    if (!(step_deg > 0.0) || step_deg > 30.0)
        throw ConfigError("fringes: step must be in (0, 30] degrees");
    const Matrix4cd rho = werner_state(ctx.cfg.polarization.werner_p,
                                       ctx.cfg.polarization.phase_rad);
    FringeScanConfig scan;
    scan.pair_flux_hz_per_mw = ctx.cfg.polarization.pair_flux_hz_per_mw;
    scan.pump_power_mw = ctx.cfg.pump.power_mw;
    scan.dwell_s = dwell_s;
    scan.fixed_arm_angle_rad = fixed_deg * std::numbers::pi / 180.0;

    std::vector<double> angles;
    for (double a = 0.0; a <= 180.0 + 1e-9; a += step_deg)
        angles.push_back(a);
    const auto points = fringe_scan(rho, scan, angles, ctx.cfg.seed);
    const FringeFit fit = fit_fringe(points);
    const double period = fit_fringe_period_deg(points);

    std::vector<std::vector<std::string>> rows;
    rows.reserve(points.size());
    for (const auto& p : points)
        rows.push_back({format_double(p.angle_deg), format_double(p.counts)});
    write_csv(
        ctx.path("fringes", "csv"),
        ctx.header({"analyzer: polarizer angle in degrees, period 180 deg",
                    "fixed_arm_deg " + format_double(fixed_deg),
                    "dwell_s " + format_double(dwell_s),
                    "visibility " + format_double(fit.visibility),
                    "fit_mean " + format_double(fit.mean),
                    "fit_phase_deg " +
                        format_double(fit.phase_rad * 180.0 / std::numbers::pi),
                    "fit_period_deg " + format_double(period)}),
        {"angle_deg", "counts"}, rows);
    ctx.write_echo("fringes");
    detail::print_kv("visibility", format_double(fit.visibility));
    detail::print_kv("fit_period_deg", format_double(period));
    detail::print_kv("output", ctx.path("fringes", "csv"));
    return 0;
}

inline int cmd_chsh(CommandContext& ctx, double counts_per_pair,
                    int resamples) {
    const Matrix4cd rho = werner_state(ctx.cfg.polarization.werner_p,
                                       ctx.cfg.polarization.phase_rad);
    const ChshSettings settings;
    const ChshMeasurement m =
        simulate_chsh(rho, settings, counts_per_pair, ctx.cfg.seed, resamples);
    const double exact = chsh_value(rho, settings);

    static const char* pair_names[4] = {"ab", "abp", "apb", "apbp"};
    static const char* outcome_names[4] = {"pp", "pm", "mp", "mm"};
    std::vector<std::vector<std::string>> rows;
    for (int p = 0; p < 4; ++p)
        for (int o = 0; o < 4; ++o)
            rows.push_back({pair_names[p], outcome_names[o],
                            format_double(m.counts[p][o])});
    write_csv(
        ctx.path("chsh", "csv"),
        ctx.header(
            {"analyzer: polarizer angle in degrees, period 180 deg",
             "settings a=0 ap=-45 b=22.5 bp=67.5 deg",
             "s_estimate " + format_double(m.s),
             "s_sigma " + format_double(m.sigma_s),
             "s_exact " + format_double(exact)}),
        {"pair", "outcome", "counts"}, rows);
    ctx.write_echo("chsh");
    detail::print_kv("s_estimate", format_double(m.s));
    detail::print_kv("s_sigma", format_double(m.sigma_s));
    detail::print_kv("s_exact", format_double(exact));
    detail::print_kv("violation_sigmas",
                     format_double((m.s - 2.0) / m.sigma_s));
    detail::print_kv("output", ctx.path("chsh", "csv"));
    return 0;
}

inline int cmd_tomography_simulate(CommandContext& ctx, double duration_s,
                                   bool noiseless) {
    const Matrix4cd rho = werner_state(ctx.cfg.polarization.werner_p,
                                       ctx.cfg.polarization.phase_rad);
    const double flux = ctx.cfg.polarization.pair_flux_hz_per_mw *
                        ctx.cfg.pump.power_mw;
    const auto records = simulate_tomography(rho, flux, duration_s,
                                             ctx.cfg.seed, !noiseless);
    write_count_records(
        ctx.path("tomography-simulate", "csv"), records,
        ctx.header({"analyzer: polarizer angle in degrees, period 180 deg",
                    "bases H,V,D,R per arm",
                    "pair_flux_hz " + format_double(flux),
                    noiseless ? std::string("noise none")
                              : std::string("noise poisson")}));
    ctx.write_echo("tomography-simulate");
    detail::print_kv("records", std::to_string(records.size()));
    detail::print_kv("output", ctx.path("tomography-simulate", "csv"));
    return 0;
}

inline int cmd_tomography_analyze(CommandContext& ctx,
                                  const std::string& counts_path,
                                  bool no_project) {
    const auto records = read_count_records(counts_path);
    const Matrix4cd rho = linear_inversion(records, !no_project);
    const Vector4cd target = bell_phi_ket(ctx.cfg.polarization.phase_rad);
    const double fid = fidelity_with_pure(rho, target);
    const double pur = purity(rho);
    const double smax = chsh_maximum(rho);

    write_density_matrix(
        ctx.path("tomography-analyze", "csv"), rho,
        ctx.header({"fidelity_to_target " + format_double(fid),
                    "purity " + format_double(pur),
                    "chsh_maximum " + format_double(smax)}));
    ctx.write_echo("tomography-analyze");
    detail::print_kv("fidelity_to_target", format_double(fid));
    detail::print_kv("purity", format_double(pur));
    detail::print_kv("chsh_maximum", format_double(smax));
    detail::print_kv("output", ctx.path("tomography-analyze", "csv"));
    return 0;
}

inline int cmd_timetag_count(CommandContext& ctx, const std::string& a_path,
                             const std::string& b_path,
                             const std::string& pairs_path, int64_t window_ps,
                             int64_t delay_ps, int64_t scan_halfspan_ps,
                             int64_t scan_step_ps) {
    TagStream a, b;
    if (!pairs_path.empty()) {
        if (!a_path.empty() || !b_path.empty())
            throw ConfigError(
                "timetag-count: give either --pairs or --a/--b, not both");
        read_two_column_stream(pairs_path, a, b);
    } else {
        if (a_path.empty() || b_path.empty())
            throw ConfigError(
                "timetag-count: need --a and --b, or a two-column --pairs");
        a = read_tag_stream(a_path);
        b = read_tag_stream(b_path);
    }
    if (window_ps <= 0) window_ps = ctx.cfg.timetag.window_ps;

    const CoincidenceSummary s =
        summarize_coincidences(a, b, window_ps, delay_ps);
    const double ratio =
        s.singles_a > 0
            ? static_cast<double>(s.coincidences) / s.singles_a
            : 0.0;

    std::vector<std::vector<std::string>> rows = {
        {std::to_string(s.coincidences), std::to_string(s.singles_a),
         std::to_string(s.singles_b), format_double(s.rate_a_hz),
         format_double(s.rate_b_hz), format_double(s.coincidence_rate_hz),
         format_double(s.accidental_rate_hz), format_double(ratio)}};
    write_csv(ctx.path("timetag-count", "csv"),
              ctx.header({"window_ps " + std::to_string(window_ps),
                          "delay_ps " + std::to_string(delay_ps)}),
              {"coincidences", "singles_a", "singles_b", "rate_a_hz",
               "rate_b_hz", "coincidence_rate_hz", "accidental_rate_hz",
               "coincidences_per_single_a"},
              rows);

    if (scan_step_ps > 0 && scan_halfspan_ps > 0) {
        std::vector<int64_t> delays;
        for (int64_t d = -scan_halfspan_ps; d <= scan_halfspan_ps;
             d += scan_step_ps)
            delays.push_back(delay_ps + d);
        const auto scan = delay_scan(a, b, window_ps, delays);
        std::vector<std::vector<std::string>> srows;
        srows.reserve(scan.size());
        for (const auto& [d, n] : scan)
            srows.push_back({std::to_string(d), std::to_string(n)});
        write_csv(ctx.path("timetag-scan", "csv"),
                  ctx.header({"window_ps " + std::to_string(window_ps)}),
                  {"delay_ps", "coincidences"}, srows);
        detail::print_kv("scan_output", ctx.path("timetag-scan", "csv"));
    }

    ctx.write_echo("timetag-count");
    detail::print_kv("coincidences", std::to_string(s.coincidences));
    detail::print_kv("singles_a", std::to_string(s.singles_a));
    detail::print_kv("singles_b", std::to_string(s.singles_b));
    detail::print_kv("coincidences_per_single_a", format_double(ratio));
    detail::print_kv("accidental_rate_hz",
                     format_double(s.accidental_rate_hz));
    detail::print_kv("output", ctx.path("timetag-count", "csv"));
    return 0;
}

inline int cmd_timetag_synth(CommandContext& ctx) {
    PairStreamConfig pcfg;
    pcfg.pair_rate_hz = ctx.cfg.timetag.pair_rate_hz;
    pcfg.duration_s = ctx.cfg.timetag.duration_s;
    pcfg.efficiency_a = ctx.cfg.timetag.efficiency;
    pcfg.efficiency_b = ctx.cfg.timetag.efficiency;
    pcfg.jitter_sigma_ps = ctx.cfg.timetag.jitter_sigma_ps;
    const PairStreams streams = synthesize_pair_streams(pcfg, ctx.cfg.seed);

    write_tag_stream(ctx.path("timetag-synth", "a.txt"), streams.a,
                     ctx.header({"arm a, picoseconds, ascending"}));
    write_tag_stream(ctx.path("timetag-synth", "b.txt"), streams.b,
                     ctx.header({"arm b, picoseconds, ascending"}));
    ctx.write_echo("timetag-synth");
    detail::print_kv("singles_a", std::to_string(streams.a.size()));
    detail::print_kv("singles_b", std::to_string(streams.b.size()));
    detail::print_kv("pairs_emitted", std::to_string(streams.pairs_emitted));
    detail::print_kv("output_a", ctx.path("timetag-synth", "a.txt"));
    detail::print_kv("output_b", ctx.path("timetag-synth", "b.txt"));
    return 0;
}

}  // namespace spdcring
