#include <catch2/catch_amalgamated.hpp>

#include <spdcring/timetag.hpp>

#include <chrono>
#include <cmath>
#include <random>

using namespace spdcring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("coincidence window matching on handcrafted streams") {
    // window 1600 ps means +-800 ps around each tag
    REQUIRE(count_coincidences({0, 1000, 2000}, {100, 2900}, 1600) == 1);
    REQUIRE(count_coincidences({0}, {900}, 1600) == 0);
    REQUIRE(count_coincidences({0}, {800}, 1600) == 1);
    // each tag pairs at most once
    REQUIRE(count_coincidences({0}, {-100, 100}, 1600) == 1);
    REQUIRE(count_coincidences({0, 100}, {150}, 1600) == 1);
    // the counter histograms a - b, so a b-tag 5000 ps late matches at -5000
    REQUIRE(count_coincidences({0}, {5000}, 1600, -5000) == 1);
    REQUIRE(count_coincidences({5000}, {0}, 1600, 5000) == 1);
    REQUIRE(count_coincidences({0}, {5000}, 1600, 0) == 0);
}

TEST_CASE("counting is symmetric under stream exchange") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int64_t> gap(1, 20000);
    TagStream a, b;
    int64_t ta = 0, tb = 137;
    for (int i = 0; i < 3000; ++i) {
        ta += gap(rng);
        tb += gap(rng);
        a.push_back(ta);
        b.push_back(tb);
    }
    for (int64_t d : {-3000LL, 0LL, 1234LL}) {
        REQUIRE(count_coincidences(a, b, 1600, d) ==
                count_coincidences(b, a, 1600, -d));
    }
}

TEST_CASE("input validation of the counter") {
    REQUIRE_THROWS_AS(count_coincidences({10, 5}, {0, 1}, 1600), ConfigError);
    REQUIRE_THROWS_AS(count_coincidences({0, 1}, {10, 5}, 1600), ConfigError);
    REQUIRE_THROWS_AS(count_coincidences({0, 1}, {0, 1}, 0), ConfigError);
    REQUIRE_THROWS_AS(count_coincidences({0, 1}, {0, 1}, -5), ConfigError);
}

TEST_CASE("pair streams reproduce the configured rates") {
    PairStreamConfig cfg;  // 1e5 Hz, 10 s, 7% per arm, no jitter
    const auto s = synthesize_pair_streams(cfg, 1);
    const auto sum = summarize_coincidences(s.a, s.b, 1600);
    REQUIRE_THAT(sum.rate_a_hz, WithinRel(7000.0, 0.05));
    REQUIRE_THAT(sum.rate_b_hz, WithinRel(7000.0, 0.05));
    // with zero jitter every surviving pair lands inside the window;
    // a few accidental matches between unpaired singles may add on top
    REQUIRE(sum.coincidences >= s.pairs_emitted);
    REQUIRE(sum.coincidences <= s.pairs_emitted + 10);
    const double ratio =
        static_cast<double>(sum.coincidences) / sum.singles_a;
    REQUIRE_THAT(ratio, WithinAbs(0.070, 0.005));
}

TEST_CASE("timing jitter reduces the matched fraction per the erf law") {
    REQUIRE_THAT(expected_matched_fraction(1600.0, 1000.0),
                 WithinAbs(0.42839, 1e-5));
    REQUIRE_THAT(expected_matched_fraction(1600.0, 0.0),
                 WithinAbs(1.0, 1e-15));

    PairStreamConfig cfg;
    cfg.pair_rate_hz = 1e5;
    cfg.duration_s = 20.0;
    cfg.efficiency_a = 0.25;
    cfg.efficiency_b = 0.25;
    cfg.jitter_sigma_ps = 1000.0;
    const auto s = synthesize_pair_streams(cfg, 5);
    const long long n = count_coincidences(s.a, s.b, 1600);
    const double frac = static_cast<double>(n) / s.pairs_emitted;
    REQUIRE_THAT(frac, WithinAbs(0.42839, 0.01));
}

TEST_CASE("delay scan recovers an inserted offset") {
    PairStreamConfig cfg;
    cfg.duration_s = 2.0;
    cfg.delay_b_ps = 5000;
    const auto s = synthesize_pair_streams(cfg, 9);
    // the counter histograms a - b, so a b-stream delayed by +5000 ps
    // peaks at scan delay -5000 ps
    const auto scan =
        delay_scan(s.a, s.b, 1600, {-10000, -5000, 0, 5000});
    long long best = -1;
    int64_t best_delay = 0;
    for (const auto& [d, n] : scan) {
        if (n > best) {
            best = n;
            best_delay = d;
        }
    }
    REQUIRE(best_delay == -5000);
    REQUIRE(best >= s.pairs_emitted);
}

TEST_CASE("accidental rate of independent streams follows r1 r2 tau") {
    const auto a = synthesize_poisson_stream(1e5, 10.0, 21);
    const auto b = synthesize_poisson_stream(1e5, 10.0, 22);
    const double formula = accidental_rate_hz(a, b, 1600);
    REQUIRE_THAT(formula, WithinRel(1e5 * 1e5 * 1.6e-9, 0.05));
    // measure far from zero delay so only accidentals contribute
    const long long n = count_coincidences(a, b, 1600, 1000000);
    const double measured = n / stream_span_s(a);
    REQUIRE_THAT(measured, WithinRel(formula, 0.25));
}

TEST_CASE("summary bundles rates and the accidental estimate") {
    const auto a = synthesize_poisson_stream(5e4, 5.0, 31);
    const auto b = synthesize_poisson_stream(7e4, 5.0, 32);
    const auto sum = summarize_coincidences(a, b, 1600);
    REQUIRE(sum.singles_a == static_cast<long long>(a.size()));
    REQUIRE(sum.singles_b == static_cast<long long>(b.size()));
    REQUIRE_THAT(sum.rate_a_hz, WithinRel(5e4, 0.05));
    REQUIRE_THAT(sum.rate_b_hz, WithinRel(7e4, 0.05));
    REQUIRE_THAT(sum.accidental_rate_hz,
                 WithinRel(sum.rate_a_hz * sum.rate_b_hz * 1.6e-9, 1e-9));
}

TEST_CASE("stream configuration validation") {
    PairStreamConfig cfg;
    cfg.pair_rate_hz = -1.0;
    REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
    cfg = PairStreamConfig{};
    cfg.efficiency_a = 1.5;
    REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
    cfg = PairStreamConfig{};
    cfg.duration_s = 0.0;
    REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("ten million tags are counted in under a second") {
    const auto a = synthesize_poisson_stream(5e5, 10.0, 41);
    const auto b = synthesize_poisson_stream(5e5, 10.0, 42);
    REQUIRE(a.size() + b.size() > 9000000);
    const auto t0 = std::chrono::steady_clock::now();
    const long long n = count_coincidences(a, b, 1600);
    const auto t1 = std::chrono::steady_clock::now();
    REQUIRE(n > 0);
    REQUIRE(std::chrono::duration<double>(t1 - t0).count() < 1.0);
}
