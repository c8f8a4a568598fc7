#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "spdcring/commands.hpp"

namespace {

constexpr const char* kDescription =
    "Simulator and analysis toolkit for a temperature-insensitive "
    "entangled-photon ring source";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{kDescription};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    uint64_t seed = 0;
    int grid_n = 0;
    bool no_calibrate = false;

    auto* config_opt =
        app.add_option("--config", config_path, "Run configuration (JSON)");
    app.add_option("--out", out_dir, "Output directory (default ./out)");
    auto* seed_opt =
        app.add_option("--seed", seed, "Override the configured RNG seed");
    app.add_flag("--no-calibrate", no_calibrate,
                 "Skip the grating-offset calibration step");
    auto* grid_opt = app.add_option(
        "--grid", grid_n, "Override the grid size (power of two)");

    // sweeps and images
    double tmin = 21.0, tmax = 31.0, tstep = 0.25;
    auto* sweep_t = app.add_subcommand(
        "sweep-temperature", "Ring radius and width versus temperature");
    sweep_t->add_option("--tmin", tmin, "Lowest temperature (C)");
    sweep_t->add_option("--tmax", tmax, "Highest temperature (C)");
    sweep_t->add_option("--tstep", tstep, "Temperature step (C)");

    double lmin = 404.5, lmax = 405.5, lstep = 0.05;
    auto* sweep_l = app.add_subcommand(
        "sweep-wavelength",
        "Degeneracy temperature and ring geometry versus pump wavelength");
    sweep_l->add_option("--lmin", lmin, "Lowest pump wavelength (nm)");
    sweep_l->add_option("--lmax", lmax, "Highest pump wavelength (nm)");
    sweep_l->add_option("--lstep", lstep, "Wavelength step (nm)");

    auto* ring_image = app.add_subcommand(
        "ring-image", "Collimator-plane ring image (16-bit PGM)");

    double pr_radius_mm = 0.0, pr_fwhm_um = 0.0;
    int pr_patches = 64, pr_realizations = 32;
    auto* perfect_image = app.add_subcommand(
        "perfect-ring-image",
        "Ring image behind the axicon transform (16-bit PGM)");
    perfect_image->add_option("--radius-mm", pr_radius_mm,
                              "Input annulus radius (default: physical ring)");
    perfect_image->add_option("--fwhm-um", pr_fwhm_um,
                              "Input annulus intensity FWHM");
    perfect_image->add_option("--patches", pr_patches,
                              "Azimuthal phase patches before arc capping");
    perfect_image->add_option("--realizations", pr_realizations,
                              "Incoherent realizations to average");

    double bw_tmin = 21.0, bw_tmax = 31.0, bw_tstep = 0.05;
    auto* bandwidth = app.add_subcommand(
        "bandwidth", "Temperature FWHM of the three collection paths");
    bandwidth->add_option("--tmin", bw_tmin, "Lowest temperature (C)");
    bandwidth->add_option("--tmax", bw_tmax, "Highest temperature (C)");
    bandwidth->add_option("--tstep", bw_tstep, "Temperature step (C)");

    double st_tmin = 21.0, st_tmax = 31.0, st_tstep = 0.05, st_drop = 0.10;
    auto* stability = app.add_subcommand(
        "stability", "Temperature excursion tolerated at a given rate drop");
    stability->add_option("--tmin", st_tmin, "Lowest temperature (C)");
    stability->add_option("--tmax", st_tmax, "Highest temperature (C)");
    stability->add_option("--tstep", st_tstep, "Temperature step (C)");
    stability->add_option("--drop", st_drop,
                          "Fractional rate drop defining the range");

    double fr_fixed_deg = 0.0, fr_dwell = 1.0, fr_step = 5.0;
    auto* fringes = app.add_subcommand(
        "fringes", "Polarization fringe scan with Poisson counts");
    fringes->add_option("--fixed-deg", fr_fixed_deg,
                        "Fixed-arm analyzer angle (deg)");
    fringes->add_option("--dwell", fr_dwell, "Dwell time per angle (s)");
    fringes->add_option("--step-deg", fr_step, "Analyzer step (deg)");

    double chsh_counts = 2400.0;
    int chsh_resamples = 1000;
    auto* chsh = app.add_subcommand(
        "chsh", "CHSH estimate with Poisson counts and resampled sigma");
    chsh->add_option("--counts", chsh_counts,
                     "Expected counts per setting pair");
    chsh->add_option("--resamples", chsh_resamples,
                     "Poisson resamples for the uncertainty");

    double tomo_duration = 1.0;
    bool tomo_noiseless = false;
    auto* tomo_sim = app.add_subcommand(
        "tomography-simulate",
        "Simulated 16-projector coincidence table (H,V,D,R per arm)");
    tomo_sim->add_option("--duration", tomo_duration,
                         "Dwell time per projector (s)");
    tomo_sim->add_flag("--noiseless", tomo_noiseless,
                       "Write expected counts instead of Poisson draws");

    std::string tomo_in;
    bool tomo_no_project = false;
    auto* tomo_ana = app.add_subcommand(
        "tomography-analyze",
        "Density matrix by linear inversion of a coincidence table");
    tomo_ana->add_option("--in", tomo_in, "Coincidence table (CSV)")
        ->required();
    tomo_ana->add_flag("--no-project", tomo_no_project,
                       "Skip the physical-state projection");

    std::string tt_a, tt_b, tt_pairs;
    int64_t tt_window = 0, tt_delay = 0, tt_scan_halfspan = 0,
            tt_scan_step = 0;
    auto* tt_count = app.add_subcommand(
        "timetag-count", "Coincidences between two time-tag streams");
    tt_count->add_option("--a", tt_a, "Arm-a stream (one ps timestamp/line)");
    tt_count->add_option("--b", tt_b, "Arm-b stream (one ps timestamp/line)");
    tt_count->add_option("--pairs", tt_pairs,
                         "Two-column stream (channel, timestamp)");
    tt_count->add_option("--window", tt_window,
                         "Coincidence window (ps, default from config)");
    tt_count->add_option("--delay", tt_delay, "Arm-b delay (ps)");
    tt_count->add_option("--scan-halfspan", tt_scan_halfspan,
                         "Also scan delays +- this halfspan (ps)");
    tt_count->add_option("--scan-step", tt_scan_step,
                         "Delay-scan step (ps)");

    auto* tt_synth = app.add_subcommand(
        "timetag-synth", "Synthesize a correlated pair of tag streams");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (config_opt->count() == 0)
            throw spdcring::ConfigError("--config is required");

        spdcring::CommandContext ctx;
        ctx.cfg = spdcring::load_config(config_path);
        ctx.out_dir = out_dir;
        if (seed_opt->count() > 0) ctx.cfg.seed = seed;
        if (grid_opt->count() > 0) ctx.cfg.grid.n = grid_n;
        if (no_calibrate) ctx.cfg.calibration.enabled = false;
        ctx.finalize();

        if (app.got_subcommand(sweep_t))
            return spdcring::cmd_sweep_temperature(ctx, tmin, tmax, tstep);
        if (app.got_subcommand(sweep_l))
            return spdcring::cmd_sweep_wavelength(ctx, lmin, lmax, lstep);
        if (app.got_subcommand(ring_image))
            return spdcring::cmd_ring_image(ctx);
        if (app.got_subcommand(perfect_image))
            return spdcring::cmd_perfect_ring_image(
                ctx, pr_radius_mm, pr_fwhm_um, pr_patches, pr_realizations);
        if (app.got_subcommand(bandwidth))
            return spdcring::cmd_bandwidth(ctx, bw_tmin, bw_tmax, bw_tstep);
        if (app.got_subcommand(stability))
            return spdcring::cmd_stability(ctx, st_tmin, st_tmax, st_tstep,
                                           st_drop);
        if (app.got_subcommand(fringes))
            return spdcring::cmd_fringes(ctx, fr_fixed_deg, fr_dwell,
                                         fr_step);
        if (app.got_subcommand(chsh))
            return spdcring::cmd_chsh(ctx, chsh_counts, chsh_resamples);
        if (app.got_subcommand(tomo_sim))
            return spdcring::cmd_tomography_simulate(ctx, tomo_duration,
                                                     tomo_noiseless);
        if (app.got_subcommand(tomo_ana))
            return spdcring::cmd_tomography_analyze(ctx, tomo_in,
                                                    tomo_no_project);
        if (app.got_subcommand(tt_count))
            return spdcring::cmd_timetag_count(ctx, tt_a, tt_b, tt_pairs,
                                               tt_window, tt_delay,
                                               tt_scan_halfspan, tt_scan_step);
        if (app.got_subcommand(tt_synth))
            return spdcring::cmd_timetag_synth(ctx);

        std::fprintf(stderr, "error: no subcommand dispatched\n");
        return 2;
    } catch (const spdcring::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const spdcring::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const spdcring::NumericError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
