#include <catch2/catch_amalgamated.hpp>

#include <spdcring/polarization.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace spdcring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> scan_angles() {
    std::vector<double> a;
    for (double d = 0.0; d <= 180.0 + 1e-9; d += 5.0) a.push_back(d);
    return a;
}

}  // namespace

TEST_CASE("Werner state basics") {
    const auto rho = werner_state(0.938, kPi);
    REQUIRE_THAT(std::abs(rho.trace()), WithinRel(1.0, 1e-12));
    REQUIRE_THAT((rho - rho.adjoint()).norm(), WithinAbs(0.0, 1e-14));
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(rho);
    REQUIRE(es.eigenvalues().minCoeff() > -1e-14);
    REQUIRE_THROWS_AS(werner_state(-0.1, kPi), ConfigError);
    REQUIRE_THROWS_AS(werner_state(1.1, kPi), ConfigError);
}

TEST_CASE("purity and fidelity follow the closed forms") {
    for (double p : {0.5, 0.938, 0.9383}) {
        const auto rho = werner_state(p, kPi);
        REQUIRE_THAT(purity(rho), WithinAbs((1 + 3 * p * p) / 4.0, 1e-12));
        REQUIRE_THAT(fidelity_with_pure(rho, bell_phi_ket(kPi)),
                     WithinAbs((1 + 3 * p) / 4.0, 1e-12));
    }
    REQUIRE_THAT(fidelity_with_pure(werner_state(0.938, kPi),
                                    bell_phi_ket(kPi)),
                 WithinAbs(0.9535, 1e-12));
    REQUIRE_THAT(fidelity_with_pure(werner_state(0.9383, kPi),
                                    bell_phi_ket(kPi)),
                 WithinAbs(0.953725, 1e-12));
    REQUIRE_THAT(purity(werner_state(0.938, kPi)),
                 WithinAbs(0.909883, 1e-6));
}

TEST_CASE("trace distance between extreme Werner states") {
    const auto pure = werner_state(1.0, kPi);
    const auto mixed = werner_state(0.0, kPi);
    REQUIRE_THAT(trace_distance(pure, mixed), WithinAbs(0.75, 1e-12));
    REQUIRE_THAT(trace_distance(pure, pure), WithinAbs(0.0, 1e-14));
}

TEST_CASE("polarization correlation is p cos 2(a+b)") {
    const double p = 0.938;
    const auto rho = werner_state(p, kPi);
    const double rad = kPi / 180.0;
    for (auto [a, b] : std::vector<std::pair<double, double>>{
             {0.0, 0.0}, {0.0, 22.5}, {-45.0, 22.5}, {30.0, 10.0}}) {
        REQUIRE_THAT(correlation(rho, a * rad, b * rad),
                     WithinAbs(p * std::cos(2 * (a + b) * rad), 1e-12));
    }
}

TEST_CASE("projector probabilities in the rotated bases") {
    const double p = 0.938;
    const auto rho = werner_state(p, kPi);
    const auto d = basis_ket('D');
    const auto r = basis_ket('R');
    const auto dd = two_qubit_ket(d, d);
    const auto dr = two_qubit_ket(d, r);
    REQUIRE_THAT(std::real(dd.dot(rho * dd)),
                 WithinAbs((1 - p) / 4.0, 1e-12));
    REQUIRE_THAT(std::real(dr.dot(rho * dr)), WithinAbs(0.25, 1e-12));
    // circular bases form an orthonormal pair
    REQUIRE_THAT(std::abs(basis_ket('R').dot(basis_ket('L'))),
                 WithinAbs(0.0, 1e-14));
    REQUIRE_THROWS_AS(basis_ket('X'), ConfigError);
}

TEST_CASE("fringe extrema at the configured pair flux") {
    const double p = 0.938;
    const auto rho = werner_state(p, kPi);
    FringeScanConfig cfg;
    cfg.poisson = false;
    const double max =
        fringe_expected_counts(rho, cfg, 0.0);
    const double min =
        fringe_expected_counts(rho, cfg, kPi / 2.0);
    REQUIRE_THAT(max, WithinAbs(2.0 * 22580.0 * (1 + p) / 4.0, 1e-6));
    REQUIRE_THAT(min, WithinAbs(2.0 * 22580.0 * (1 - p) / 4.0, 1e-6));
    REQUIRE_THAT(min / max, WithinRel((1 - p) / (1 + p), 1e-12));
}

TEST_CASE("noiseless fringe fit recovers the Werner visibility exactly") {
    const double p = 0.9383;
    const auto rho = werner_state(p, kPi);
    FringeScanConfig cfg;
    cfg.poisson = false;
    const auto pts = fringe_scan(rho, cfg, scan_angles());
    const auto fit = fit_fringe(pts);
    REQUIRE_THAT(fit.visibility, WithinAbs(p, 1e-10));
    REQUIRE_THAT(fit.mean, WithinRel(22580.0 / 2.0, 1e-9));
    REQUIRE_THAT(fit_fringe_period_deg(pts), WithinAbs(180.0, 0.05));
}

TEST_CASE("Poisson fringe fit stays near the true visibility") {
    const double p = 0.9383;
    const auto rho = werner_state(p, kPi);
    const auto angles = scan_angles();
    FringeScanConfig probe;
    probe.poisson = false;
    double total = 0.0;
    for (double d : angles) {
        total += fringe_expected_counts(rho, probe, d * kPi / 180.0);
    }
    FringeScanConfig cfg;
    cfg.dwell_s = 1e6 / total;
    const auto pts = fringe_scan(rho, cfg, angles, 7);
    const auto fit = fit_fringe(pts);
    REQUIRE_THAT(fit.visibility, WithinAbs(p, 5e-3));
}

TEST_CASE("fringe fit input validation") {
    std::vector<FringePoint> few = {{0, 1}, {10, 2}, {20, 3}, {30, 4}};
    REQUIRE_THROWS_AS(fit_fringe(few), ConfigError);
    REQUIRE_THROWS_AS(fit_fringe_period_deg(few), ConfigError);
}

TEST_CASE("CHSH value of the Werner state") {
    for (double p : {0.938, 0.9383}) {
        REQUIRE_THAT(chsh_value(werner_state(p, kPi)),
                     WithinAbs(2.0 * std::sqrt(2.0) * p, 1e-12));
    }
    // 2 sqrt(2) * 0.9383 sits inside the 2.654 +- 0.005 window
    REQUIRE_THAT(chsh_value(werner_state(0.9383, kPi)),
                 WithinAbs(2.654, 0.005));
}

TEST_CASE("simulated CHSH run with Poisson counts") {
    const auto rho = werner_state(0.9383, kPi);
    const auto m = simulate_chsh(rho, ChshSettings{}, 2400.0, 1);
    REQUIRE_THAT(m.s, WithinAbs(2.0 * std::sqrt(2.0) * 0.9383, 0.15));
    REQUIRE(m.sigma_s > 0.02);
    REQUIRE(m.sigma_s < 0.045);
    for (int pr = 0; pr < 4; ++pr) {
        double tot = 0.0;
        for (int o = 0; o < 4; ++o) tot += m.counts[pr][o];
        REQUIRE_THAT(tot, WithinRel(2400.0, 0.15));
    }
    REQUIRE_THROWS_AS(simulate_chsh(rho, ChshSettings{}, 0.0, 1),
                      ConfigError);
    REQUIRE_THROWS_AS(simulate_chsh(rho, ChshSettings{}, 2400.0, 1, 500),
                      ConfigError);
}

TEST_CASE("noiseless tomography inverts exactly") {
    const auto rho = werner_state(0.938, kPi);
    const auto rec = simulate_tomography(rho, 1000.0, 1.0, 1, false);
    REQUIRE(rec.size() == 16);
    const auto back = linear_inversion(rec, false);
    REQUIRE(trace_distance(back, rho) < 1e-9);

    std::mt19937_64 rng(11);
    for (int i = 0; i < 20; ++i) {
        const auto state = random_density_matrix(rng);
        const auto r = simulate_tomography(state, 1000.0, 1.0, 1, false);
        REQUIRE(trace_distance(linear_inversion(r, false), state) < 1e-9);
    }
}

TEST_CASE("tomography with Poisson noise recovers the fidelity") {
    const auto rho = werner_state(0.938, kPi);
    const auto rec = simulate_tomography(rho, 25000.0, 1.0, 3, true);
    const auto back = linear_inversion(rec, true);
    REQUIRE_THAT(fidelity_with_pure(back, bell_phi_ket(kPi)),
                 WithinAbs(0.9535, 0.02));
    REQUIRE_THAT(std::abs(back.trace()), WithinRel(1.0, 1e-9));
}

TEST_CASE("tomography record validation") {
    const auto rho = werner_state(0.938, kPi);
    auto rec = simulate_tomography(rho, 1000.0, 1.0, 1, false);
    rec.pop_back();
    REQUIRE_THROWS_AS(linear_inversion(rec, false), ConfigError);
    rec = simulate_tomography(rho, 1000.0, 1.0, 1, false);
    rec[15].setting_a = rec[0].setting_a;
    rec[15].setting_b = rec[0].setting_b;
    REQUIRE_THROWS_AS(linear_inversion(rec, false), ConfigError);
}

TEST_CASE("projection to the physical cone is idempotent") {
    const auto rho = werner_state(0.938, kPi);
    const auto rec = simulate_tomography(rho, 200.0, 1.0, 5, true);
    const auto raw = linear_inversion(rec, false);
    const auto once = psd_project(raw);
    const auto twice = psd_project(once);
    REQUIRE(trace_distance(once, twice) < 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(once);
    REQUIRE(es.eigenvalues().minCoeff() > -1e-14);
    REQUIRE_THAT(std::abs(once.trace()), WithinRel(1.0, 1e-12));
}

TEST_CASE("maximum CHSH over settings") {
    for (double p : {0.3, 0.938, 1.0}) {
        REQUIRE_THAT(chsh_maximum(werner_state(p, kPi)),
                     WithinAbs(2.0 * std::sqrt(2.0) * p, 1e-9));
    }
    const double bound = 2.0 * std::sqrt(2.0) + 1e-9;
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
        const auto rho = random_density_matrix(rng);
        REQUIRE(chsh_maximum(rho) <= bound);
        REQUIRE(std::abs(chsh_value(rho)) <= bound);
    }
}

TEST_CASE("random density matrices are physical") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 50; ++i) {
        const auto rho = random_density_matrix(rng);
        REQUIRE_THAT(std::abs(rho.trace()), WithinRel(1.0, 1e-12));
        Eigen::SelfAdjointEigenSolver<Matrix4cd> es(rho);
        REQUIRE(es.eigenvalues().minCoeff() > -1e-12);
    }
}
