#pragma once

// Time-tag processing: greedy coincidence counting between two sorted
// picosecond streams, accidental-rate estimation, delay scans, and
// synthetic stream generation for end-to-end checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "spdcring/errors.hpp"

namespace spdcring {

using TagStream = std::vector<int64_t>;  // timestamps in picoseconds

inline void require_sorted(const TagStream& s, const char* name) {
    if (!std::is_sorted(s.begin(), s.end()))
        throw ConfigError(std::string("timetag: stream ") + name +
                          " is not time ordered");
}

// Greedy earliest-match pairing: tags match when
// |t_a - (t_b + delay)| <= window/2, and each tag is used at most once.
inline long long count_coincidences(const TagStream& a, const TagStream& b,
                                    int64_t window_ps, int64_t delay_ps = 0) {
    if (window_ps <= 0) throw ConfigError("timetag: window must be > 0");
    require_sorted(a, "a");
    require_sorted(b, "b");
    const int64_t half = window_ps / 2;
    size_t i = 0, j = 0;
    long long count = 0;
    while (i < a.size() && j < b.size()) {
        const int64_t diff = a[i] - (b[j] + delay_ps);
        if (diff > half) {
            ++j;
        } else if (diff < -half) {
            ++i;
        } else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

inline double stream_span_s(const TagStream& s) {
    if (s.size() < 2) return 0.0;
    return static_cast<double>(s.back() - s.front()) * 1e-12;
}

inline double stream_rate_hz(const TagStream& s) {
    const double span = stream_span_s(s);
    if (!(span > 0.0))
        throw NumericError("timetag: stream span too short for a rate");
    return static_cast<double>(s.size()) / span;
}

// Expected accidental coincidence rate of two independent streams,
// r_a * r_b * window.
inline double accidental_rate_hz(const TagStream& a, const TagStream& b,
                                 int64_t window_ps) {
    if (window_ps <= 0) throw ConfigError("timetag: window must be > 0");
    return stream_rate_hz(a) * stream_rate_hz(b) *
           (static_cast<double>(window_ps) * 1e-12);
}

struct CoincidenceSummary {
    long long coincidences = 0;
    size_t singles_a = 0;
    size_t singles_b = 0;
    double rate_a_hz = 0.0;
    double rate_b_hz = 0.0;
    double coincidence_rate_hz = 0.0;
    double accidental_rate_hz = 0.0;
};

inline CoincidenceSummary summarize_coincidences(const TagStream& a,
                                                 const TagStream& b,
                                                 int64_t window_ps,
                                                 int64_t delay_ps = 0) {
    CoincidenceSummary s;
    s.coincidences = count_coincidences(a, b, window_ps, delay_ps);
    s.singles_a = a.size();
    s.singles_b = b.size();
    s.rate_a_hz = stream_rate_hz(a);
    s.rate_b_hz = stream_rate_hz(b);
    const double span = std::max(stream_span_s(a), stream_span_s(b));
    s.coincidence_rate_hz = s.coincidences / span;
    s.accidental_rate_hz =
        s.rate_a_hz * s.rate_b_hz * (static_cast<double>(window_ps) * 1e-12);
    return s;
}

inline std::vector<std::pair<int64_t, long long>> delay_scan(
    const TagStream& a, const TagStream& b, int64_t window_ps,
    const std::vector<int64_t>& delays_ps) {
    std::vector<std::pair<int64_t, long long>> out;
    out.reserve(delays_ps.size());
    for (const int64_t d : delays_ps)
        out.emplace_back(d, count_coincidences(a, b, window_ps, d));
    return out;
}

// Fraction of true pairs that survive the window when each tag carries
// independent Gaussian jitter of the given sigma.
inline double expected_matched_fraction(double window_ps,
                                        double jitter_sigma_ps) {
    if (!(window_ps > 0.0)) throw ConfigError("timetag: window must be > 0");
    if (jitter_sigma_ps <= 0.0) return 1.0;
    return std::erf(window_ps / (4.0 * jitter_sigma_ps));
}

struct PairStreamConfig {
    double pair_rate_hz = 1e5;
    double duration_s = 10.0;
    double efficiency_a = 0.07;
    double efficiency_b = 0.07;
    double jitter_sigma_ps = 0.0;
    int64_t delay_b_ps = 0;  // constant offset added to arm b

    void validate() const {
        if (!(pair_rate_hz > 0.0))
            throw ConfigError("timetag: pair rate must be > 0");
        if (!(duration_s > 0.0))
            throw ConfigError("timetag: duration must be > 0");
        if (efficiency_a < 0.0 || efficiency_a > 1.0 || efficiency_b < 0.0 ||
            efficiency_b > 1.0)
            throw ConfigError("timetag: efficiencies must be in [0,1]");
        if (jitter_sigma_ps < 0.0)
            throw ConfigError("timetag: jitter must be >= 0");
    }
};

struct PairStreams {
    TagStream a;
    TagStream b;
    long long pairs_emitted = 0;  // pairs that survived both arms
};

// Poisson pair source: exponential inter-pair gaps, independent Bernoulli
// survival per arm, per-photon Gaussian jitter rounded to 1 ps. Streams
// come out sorted with non-negative timestamps.
inline PairStreams synthesize_pair_streams(const PairStreamConfig& cfg,
                                           uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(cfg.pair_rate_hz);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, cfg.jitter_sigma_ps);

    PairStreams out;
    double t_s = 0.0;
    while (true) {
        t_s += gap(rng);
        if (t_s >= cfg.duration_s) break;
        const double t_ps = t_s * 1e12;
        const bool in_a = coin(rng) < cfg.efficiency_a;
        const bool in_b = coin(rng) < cfg.efficiency_b;
        if (in_a) {
            const double j = cfg.jitter_sigma_ps > 0.0 ? jitter(rng) : 0.0;
            out.a.push_back(std::max<int64_t>(0, std::llround(t_ps + j)));
        }
        if (in_b) {
            const double j = cfg.jitter_sigma_ps > 0.0 ? jitter(rng) : 0.0;
            out.b.push_back(std::max<int64_t>(
                0, std::llround(t_ps + j) + cfg.delay_b_ps));
        }
        if (in_a && in_b) ++out.pairs_emitted;
    }
    std::sort(out.a.begin(), out.a.end());
    std::sort(out.b.begin(), out.b.end());
    return out;
}

// Independent Poisson stream, for accidental-rate checks.
inline TagStream synthesize_poisson_stream(double rate_hz, double duration_s,
                                           uint64_t seed) {
    if (!(rate_hz > 0.0) || !(duration_s > 0.0))
        throw ConfigError("timetag: rate and duration must be > 0");
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(rate_hz);
    TagStream out;
    out.reserve(static_cast<size_t>(rate_hz * duration_s * 1.2) + 16);
    double t_s = 0.0;
    while (true) {
        t_s += gap(rng);
        if (t_s >= duration_s) break;
        out.push_back(std::llround(t_s * 1e12));
    }
    return out;
}

}  // namespace spdcring
