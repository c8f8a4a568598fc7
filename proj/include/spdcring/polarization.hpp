#pragma once

// Two-qubit polarization toolbox: Werner-like source state, polarizer
// fringe scans with Poisson statistics, CHSH estimation with resampled
// uncertainty, and projective tomography with linear inversion.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "spdcring/errors.hpp"

namespace spdcring {

using Matrix4cd = Eigen::Matrix4cd;
using Matrix2cd = Eigen::Matrix2cd;
using Vector4cd = Eigen::Vector4cd;
using Vector2cd = Eigen::Vector2cd;

// Basis order throughout: HH, HV, VH, VV.

inline Vector4cd bell_phi_ket(double phase_rad) {
    Vector4cd k = Vector4cd::Zero();
    k(0) = 1.0 / std::numbers::sqrt2;
    k(3) = std::complex<double>(std::cos(phase_rad), std::sin(phase_rad)) /
           std::numbers::sqrt2;
    return k;
}

// p * |psi(phase)><psi| + (1-p)/4 * I
inline Matrix4cd werner_state(double p, double phase_rad) {
    if (p < 0.0 || p > 1.0)
        throw ConfigError("state: mixing parameter must be in [0,1]");
    const Vector4cd k = bell_phi_ket(phase_rad);
    return p * (k * k.adjoint()) +
           (1.0 - p) / 4.0 * Matrix4cd::Identity();
}

inline Vector2cd polarizer_ket(double angle_rad) {
    return Vector2cd(std::cos(angle_rad), std::sin(angle_rad));
}

inline Vector4cd two_qubit_ket(const Vector2cd& a, const Vector2cd& b) {
    Vector4cd k;
    k(0) = a(0) * b(0);
    k(1) = a(0) * b(1);
    k(2) = a(1) * b(0);
    k(3) = a(1) * b(1);
    return k;
}

// Probability that both photons pass polarizers at the given angles.
inline double coincidence_probability(const Matrix4cd& rho,
                                      double angle_a_rad,
                                      double angle_b_rad) {
    const Vector4cd k =
        two_qubit_ket(polarizer_ket(angle_a_rad), polarizer_ket(angle_b_rad));
    const double p = std::real(k.dot(rho * k));
    return std::max(p, 0.0);
}

// Polarization correlation E(a,b) from the four transmit/reflect outcomes.
inline double correlation(const Matrix4cd& rho, double angle_a_rad,
                          double angle_b_rad) {
    const double quarter = std::numbers::pi / 2.0;
    const double pp = coincidence_probability(rho, angle_a_rad, angle_b_rad);
    const double pm =
        coincidence_probability(rho, angle_a_rad, angle_b_rad + quarter);
    const double mp =
        coincidence_probability(rho, angle_a_rad + quarter, angle_b_rad);
    const double mm = coincidence_probability(rho, angle_a_rad + quarter,
                                              angle_b_rad + quarter);
    const double total = pp + pm + mp + mm;
    if (!(total > 0.0)) throw NumericError("correlation: zero total rate");
    return (pp + mm - pm - mp) / total;
}

inline double purity(const Matrix4cd& rho) {
    return std::real((rho * rho).trace());
}

inline double fidelity_with_pure(const Matrix4cd& rho, const Vector4cd& ket) {
    return std::real(ket.dot(rho * ket));
}

inline double trace_distance(const Matrix4cd& a, const Matrix4cd& b) {
    const Matrix4cd d = a - b;
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(d);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// ---------------------------------------------------------------------
// fringe scans

struct FringeScanConfig {
    double pair_flux_hz_per_mw = 22580.0;
    double pump_power_mw = 1.0;
    double dwell_s = 1.0;
    double fixed_arm_angle_rad = 0.0;
    bool poisson = true;
};

struct FringePoint {
    double angle_deg = 0.0;
    double counts = 0.0;
};

// Expected coincidence counts with one analyzer fixed and one scanned. The
// factor two folds in the pair of symmetric output ports summed by the
// counting electronics.
inline double fringe_expected_counts(const Matrix4cd& rho,
                                     const FringeScanConfig& cfg,
                                     double scan_angle_rad) {
    const double prob =
        coincidence_probability(rho, cfg.fixed_arm_angle_rad, scan_angle_rad);
    return cfg.pair_flux_hz_per_mw * cfg.pump_power_mw * cfg.dwell_s * prob *
           2.0;
}

inline std::vector<FringePoint> fringe_scan(
    const Matrix4cd& rho, const FringeScanConfig& cfg,
    const std::vector<double>& scan_angles_deg, uint64_t seed = 1) {
    if (scan_angles_deg.size() < 5)
        throw ConfigError("fringes: need at least 5 scan angles");
    std::mt19937_64 rng(seed);
    std::vector<FringePoint> out;
    out.reserve(scan_angles_deg.size());
    for (const double deg : scan_angles_deg) {
        const double mean = fringe_expected_counts(
            rho, cfg, deg * std::numbers::pi / 180.0);
        double counts = mean;
        if (cfg.poisson) {
            std::poisson_distribution<long long> draw(mean);
            counts = static_cast<double>(draw(rng));
        }
        out.push_back({deg, counts});
    }
    return out;
}

struct FringeFit {
    double mean = 0.0;        // fitted offset A
    double visibility = 0.0;  // V in A*(1 + V*cos(2(theta-theta0)))
    double phase_rad = 0.0;   // theta0
};

// Linear least squares on a + b*cos(2 theta) + c*sin(2 theta).
inline FringeFit fit_fringe(const std::vector<FringePoint>& points) {
    if (points.size() < 5)
        throw ConfigError("fringes: need at least 5 points to fit");
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (const auto& pt : points) {
        const double th = pt.angle_deg * std::numbers::pi / 180.0;
        const Eigen::Vector3d row(1.0, std::cos(2.0 * th),
                                  std::sin(2.0 * th));
        m += row * row.transpose();
        v += row * pt.counts;
    }
    const Eigen::Vector3d sol = m.ldlt().solve(v);
    if (!(sol(0) > 0.0))
        throw NumericError("fringes: fit offset is not positive");
    FringeFit fit;
    fit.mean = sol(0);
    fit.visibility = std::hypot(sol(1), sol(2)) / sol(0);
    fit.phase_rad = 0.5 * std::atan2(sol(2), sol(1));
    return fit;
}

// Best-fitting fringe period in degrees, golden-section search on the
// least-squares residual over [170, 190]. An ideal polarizer fringe sits
// at 180.
inline double fit_fringe_period_deg(const std::vector<FringePoint>& points,
                                    double lo_deg = 170.0,
                                    double hi_deg = 190.0) {
    if (points.size() < 7)
        throw ConfigError("fringes: need at least 7 points for period fit");
    auto residual = [&](double period_deg) {
        Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
        Eigen::Vector3d v = Eigen::Vector3d::Zero();
        const double w = 2.0 * std::numbers::pi / period_deg;
        for (const auto& pt : points) {
            const Eigen::Vector3d row(1.0, std::cos(w * pt.angle_deg),
                                      std::sin(w * pt.angle_deg));
            m += row * row.transpose();
            v += row * pt.counts;
        }
        const Eigen::Vector3d sol = m.ldlt().solve(v);
        double ss = 0.0;
        for (const auto& pt : points) {
            const double model = sol(0) + sol(1) * std::cos(w * pt.angle_deg) +
                                 sol(2) * std::sin(w * pt.angle_deg);
            ss += (pt.counts - model) * (pt.counts - model);
        }
        return ss;
    };
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo_deg, b = hi_deg;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = residual(c), fd = residual(d);
    while (b - a > 1e-4) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = residual(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = residual(d);
        }
    }
    return 0.5 * (a + b);
}

// ---------------------------------------------------------------------
// CHSH

struct ChshSettings {
    double a_deg = 0.0;
    double a_prime_deg = -45.0;
    double b_deg = 22.5;
    double b_prime_deg = 67.5;
};

// S = E(a,b) - E(a,b') + E(a',b) + E(a',b')
inline double chsh_value(const Matrix4cd& rho,
                         const ChshSettings& s = {}) {
    const double rad = std::numbers::pi / 180.0;
    return correlation(rho, s.a_deg * rad, s.b_deg * rad) -
           correlation(rho, s.a_deg * rad, s.b_prime_deg * rad) +
           correlation(rho, s.a_prime_deg * rad, s.b_deg * rad) +
           correlation(rho, s.a_prime_deg * rad, s.b_prime_deg * rad);
}

struct ChshMeasurement {
    // counts[pair][outcome], pairs (a,b),(a,b'),(a',b),(a',b'),
    // outcomes ++, +-, -+, --
    std::array<std::array<double, 4>, 4> counts{};
    std::array<double, 4> correlations{};
    double s = 0.0;
    double sigma_s = 0.0;  // spread of S over Poisson resamples
};

namespace detail {

inline double chsh_from_counts(
    const std::array<std::array<double, 4>, 4>& counts) {
    double s = 0.0;
    const double sign[4] = {1.0, -1.0, 1.0, 1.0};
    for (int p = 0; p < 4; ++p) {
        const auto& c = counts[p];
        const double tot = c[0] + c[1] + c[2] + c[3];
        if (!(tot > 0.0))
            throw NumericError("chsh: setting pair has no counts");
        s += sign[p] * (c[0] + c[3] - c[1] - c[2]) / tot;
    }
    return s;
}

}  // namespace detail

// Simulated CHSH run: Poisson counts at all four outcome combinations of
// each setting pair, with the uncertainty taken as the standard deviation
// of S over Poisson resamples of the observed counts.
inline ChshMeasurement simulate_chsh(const Matrix4cd& rho,
                                     const ChshSettings& settings,
                                     double expected_counts_per_pair,
                                     uint64_t seed, int resamples = 1000) {
    if (!(expected_counts_per_pair > 0.0))
        throw ConfigError("chsh: expected counts must be > 0");
    if (resamples < 1000)
        throw ConfigError("chsh: need at least 1000 resamples");
    const double rad = std::numbers::pi / 180.0;
    const double quarter = std::numbers::pi / 2.0;
    const std::array<std::pair<double, double>, 4> pairs = {{
        {settings.a_deg * rad, settings.b_deg * rad},
        {settings.a_deg * rad, settings.b_prime_deg * rad},
        {settings.a_prime_deg * rad, settings.b_deg * rad},
        {settings.a_prime_deg * rad, settings.b_prime_deg * rad},
    }};

    std::mt19937_64 rng(seed);
    ChshMeasurement m;
    for (int p = 0; p < 4; ++p) {
        const auto [ta, tb] = pairs[p];
        const double probs[4] = {
            coincidence_probability(rho, ta, tb),
            coincidence_probability(rho, ta, tb + quarter),
            coincidence_probability(rho, ta + quarter, tb),
            coincidence_probability(rho, ta + quarter, tb + quarter),
        };
        const double norm = probs[0] + probs[1] + probs[2] + probs[3];
        for (int o = 0; o < 4; ++o) {
            const double mean =
                expected_counts_per_pair * probs[o] / norm;
            std::poisson_distribution<long long> draw(mean);
            m.counts[p][o] = static_cast<double>(draw(rng));
        }
    }
    m.s = detail::chsh_from_counts(m.counts);
    for (int p = 0; p < 4; ++p) {
        const auto& c = m.counts[p];
        const double tot = c[0] + c[1] + c[2] + c[3];
        m.correlations[p] = (c[0] + c[3] - c[1] - c[2]) / tot;
    }

    // parametric bootstrap around the observed counts
    double sum = 0.0, sum2 = 0.0;
    int used = 0;
    for (int r = 0; r < resamples; ++r) {
        std::array<std::array<double, 4>, 4> re{};
        for (int p = 0; p < 4; ++p)
            for (int o = 0; o < 4; ++o) {
                std::poisson_distribution<long long> draw(
                    std::max(m.counts[p][o], 0.0));
                re[p][o] = static_cast<double>(draw(rng));
            }
        double sv;
        try {
            sv = detail::chsh_from_counts(re);
        } catch (const NumericError&) {
            continue;
        }
        sum += sv;
        sum2 += sv * sv;
        ++used;
    }
    if (used < 2) throw NumericError("chsh: resampling failed");
    const double mean = sum / used;
    m.sigma_s = std::sqrt(std::max(sum2 / used - mean * mean, 0.0) * used /
                          (used - 1.0));
    return m;
}

// ---------------------------------------------------------------------
// tomography

// Single-photon analysis kets: horizontal, vertical, diagonal, and right
// circular (H - iV)/sqrt(2).
inline Vector2cd basis_ket(char label) {
    const std::complex<double> i(0.0, 1.0);
    switch (label) {
        case 'H': return Vector2cd(1.0, 0.0);
        case 'V': return Vector2cd(0.0, 1.0);
        case 'D':
            return Vector2cd(1.0 / std::numbers::sqrt2,
                             1.0 / std::numbers::sqrt2);
        case 'A':
            return Vector2cd(1.0 / std::numbers::sqrt2,
                             -1.0 / std::numbers::sqrt2);
        case 'R':
            return Vector2cd(1.0 / std::numbers::sqrt2,
                             -i / std::numbers::sqrt2);
        case 'L':
            return Vector2cd(1.0 / std::numbers::sqrt2,
                             i / std::numbers::sqrt2);
        default:
            throw ConfigError(std::string("tomography: unknown basis '") +
                              label + "'");
    }
}

struct CoincidenceRecord {
    std::string setting_a;
    std::string setting_b;
    double counts = 0.0;
    double duration_s = 1.0;
};

inline const std::array<char, 4>& tomography_bases() {
    static const std::array<char, 4> b = {'H', 'V', 'D', 'R'};
    return b;
}

// Expected 16-record tomography run over {H,V,D,R} x {H,V,D,R} with
// counts_per_unit total pairs per unit time shared across each projector.
inline std::vector<CoincidenceRecord> simulate_tomography(
    const Matrix4cd& rho, double pair_flux_hz, double duration_s,
    uint64_t seed = 1, bool poisson = true) {
    if (!(pair_flux_hz > 0.0) || !(duration_s > 0.0))
        throw ConfigError("tomography: flux and duration must be > 0");
    std::mt19937_64 rng(seed);
    std::vector<CoincidenceRecord> out;
    out.reserve(16);
    for (const char a : tomography_bases())
        for (const char b : tomography_bases()) {
            const Vector4cd k = two_qubit_ket(basis_ket(a), basis_ket(b));
            const double prob = std::max(std::real(k.dot(rho * k)), 0.0);
            const double mean = pair_flux_hz * duration_s * prob;
            double counts = mean;
            if (poisson) {
                std::poisson_distribution<long long> draw(mean);
                counts = static_cast<double>(draw(rng));
            }
            out.push_back({std::string(1, a), std::string(1, b), counts,
                           duration_s});
        }
    return out;
}

namespace detail {

inline Matrix2cd pauli(int i) {
    const std::complex<double> im(0.0, 1.0);
    Matrix2cd m;
    switch (i) {
        case 0: m << 1, 0, 0, 1; break;
        case 1: m << 0, 1, 1, 0; break;
        case 2: m << 0, -im, im, 0; break;
        default: m << 1, 0, 0, -1; break;
    }
    return m;
}

inline Matrix4cd kron2(const Matrix2cd& a, const Matrix2cd& b) {
    Matrix4cd out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

}  // namespace detail

// Clip negative eigenvalues to zero and renormalize the trace. Applying it
// twice gives the same matrix.
inline Matrix4cd psd_project(const Matrix4cd& rho) {
    Matrix4cd h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(h);
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
    const double tr = ev.sum();
    if (!(tr > 0.0))
        throw NumericError("tomography: projected state has zero trace");
    ev /= tr;
    return es.eigenvectors() * ev.asDiagonal() *
           es.eigenvectors().adjoint();
}

// Density matrix by linear inversion of the 16 projective coincidence
// rates. The {H,V} block fixes the total pair number; probabilities are
// solved against the Pauli expansion and optionally projected back onto
// physical states.
inline Matrix4cd linear_inversion(
    const std::vector<CoincidenceRecord>& records, bool project = true) {
    if (records.size() != 16)
        throw ConfigError("tomography: need exactly 16 records");

    auto rate_of = [](const CoincidenceRecord& r) {
        if (!(r.duration_s > 0.0))
            throw ConfigError("tomography: record duration must be > 0");
        if (r.counts < 0.0)
            throw ConfigError("tomography: negative counts");
        return r.counts / r.duration_s;
    };

    double rate[4][4];
    bool seen[4][4] = {};
    auto index_of = [](const std::string& s) {
        if (s.size() != 1)
            throw ConfigError("tomography: settings must be single letters");
        switch (s[0]) {
            case 'H': return 0;
            case 'V': return 1;
            case 'D': return 2;
            case 'R': return 3;
            default:
                throw ConfigError("tomography: settings must be H, V, D or R");
        }
    };
    for (const auto& r : records) {
        const int a = index_of(r.setting_a);
        const int b = index_of(r.setting_b);
        if (seen[a][b])
            throw ConfigError("tomography: duplicate setting pair");
        seen[a][b] = true;
        rate[a][b] = rate_of(r);
    }

    const double total =
        rate[0][0] + rate[0][1] + rate[1][0] + rate[1][1];
    if (!(total > 0.0))
        throw NumericError("tomography: no counts in the H/V block");

    Eigen::Matrix<double, 16, 16> a_mat;
    Eigen::Matrix<double, 16, 1> p_vec;
    int row = 0;
    for (int ia = 0; ia < 4; ++ia)
        for (int ib = 0; ib < 4; ++ib) {
            const Vector4cd k =
                two_qubit_ket(basis_ket(tomography_bases()[ia]),
                              basis_ket(tomography_bases()[ib]));
            const Matrix4cd proj = k * k.adjoint();
            int col = 0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    const Matrix4cd basis =
                        detail::kron2(detail::pauli(i), detail::pauli(j));
                    a_mat(row, col) =
                        std::real((proj * basis).trace()) / 4.0;
                    ++col;
                }
            p_vec(row) = rate[ia][ib] / total;
            ++row;
        }

    const Eigen::Matrix<double, 16, 1> c =
        a_mat.colPivHouseholderQr().solve(p_vec);
    Matrix4cd rho = Matrix4cd::Zero();
    int col = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            rho += c(col) / 4.0 *
                   detail::kron2(detail::pauli(i), detail::pauli(j));
            ++col;
        }
    rho = 0.5 * (rho + rho.adjoint());
    return project ? psd_project(rho) : rho;
}

// ---------------------------------------------------------------------
// bounds and random states

// Largest CHSH value any setting choice can extract from the state,
// 2*sqrt(m1+m2) with m1, m2 the two largest eigenvalues of T^T T built
// from the correlation matrix T_ij = tr[rho sigma_i x sigma_j].
inline double chsh_maximum(const Matrix4cd& rho) {
    Eigen::Matrix3d t;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            t(i, j) = std::real(
                (rho *
                 detail::kron2(detail::pauli(i + 1), detail::pauli(j + 1)))
                    .trace());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(t.transpose() * t);
    const Eigen::Vector3d ev = es.eigenvalues();
    return 2.0 * std::sqrt(ev(2) + ev(1));
}

// Random density matrix from a complex Ginibre draw, G G† / tr.
inline Matrix4cd random_density_matrix(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix4cd g;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            g(i, j) = std::complex<double>(gauss(rng), gauss(rng));
    Matrix4cd rho = g * g.adjoint();
    rho /= rho.trace();
    return rho;
}

}  // namespace spdcring
