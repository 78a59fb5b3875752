#ifndef HSVD_TESTS_SUPPORT_HPP
#define HSVD_TESTS_SUPPORT_HPP

#include <hsvd/hsvd.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace hsvd::testing {

inline Eigen::MatrixXcd to_eigen(const linalg::CMatrix& m) {
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
        }
    }
    return out;
}

inline linalg::CMatrix from_eigen(const Eigen::MatrixXcd& m) {
    linalg::CMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
        }
    }
    return out;
}

inline linalg::CMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::normal_distribution<double> g;
    linalg::CMatrix                  m(rows, cols);
    for (auto& v : m.entries()) {
        v = {g(rng), g(rng)};
    }
    return m;
}

inline std::vector<Complex> random_samples(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g;
    std::vector<Complex>             s(n);
    for (auto& v : s) {
        v = {g(rng), g(rng)};
    }
    return s;
}

// relative Frobenius distance ||a - b|| / ||b||
inline double rel_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).norm() / b.norm(); }

// Pairs every expected value with a distinct nearest actual value; returns the largest distance.
inline double multiset_distance(std::vector<Complex> expected, std::vector<Complex> actual) {
    if (expected.size() != actual.size()) {
        return std::numeric_limits<double>::infinity();
    }
    double worst = 0;
    for (const auto& e : expected) {
        auto best = std::min_element(actual.begin(), actual.end(), [&](Complex a, Complex b) { return std::abs(a - e) < std::abs(b - e); });
        worst     = std::max(worst, std::abs(*best - e));
        actual.erase(best);
    }
    return worst;
}

inline Acquisition test_acquisition(double dwell = 1e-3) { return Acquisition{dwell, 123.2, 4.7}; }

inline double relative_error(double actual, double expected) { return std::abs(actual - expected) / std::abs(expected); }

inline double phase_error(double actual, double expected) { return std::abs(wrap_phase(actual - expected)); }

// Random well-separated damped sinusoids: amplitudes in [0.5, 2], damping*dt in
// [-0.1, -0.001], |f| in [1/(N dt), 0.45/dt), pairwise separation >= 4/(N dt).
inline std::vector<HarmonicComponent> random_components(std::mt19937_64& rng, std::size_t k, std::size_t n, double dt) {
    const double                           resolution = 1.0 / (static_cast<double>(n) * dt);
    std::uniform_real_distribution<double> amp(0.5, 2.0);
    std::uniform_real_distribution<double> damp(-0.1 / dt, -0.001 / dt);
    std::uniform_real_distribution<double> freq(-0.45 / dt, 0.45 / dt);
    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);

    std::vector<HarmonicComponent> out;
    while (out.size() < k) {
        const double f  = freq(rng);
        bool         ok = std::abs(f) >= resolution;
        for (const auto& c : out) {
            ok = ok && std::abs(c.frequency - f) >= 4.0 * resolution;
        }
        if (ok) {
            out.push_back({amp(rng), damp(rng), f, wrap_phase(phase(rng))});
        }
    }
    return out;
}

// For each truth component, the fitted component nearest in frequency.
inline std::vector<const HarmonicComponent*> match_by_frequency(const std::vector<HarmonicComponent>& truth, const std::vector<HarmonicComponent>& fitted) {
    std::vector<const HarmonicComponent*> out;
    for (const auto& t : truth) {
        const HarmonicComponent* best = nullptr;
        for (const auto& f : fitted) {
            if (best == nullptr || std::abs(f.frequency - t.frequency) < std::abs(best->frequency - t.frequency)) {
                best = &f;
            }
        }
        out.push_back(best);
    }
    return out;
}

struct RecoveryError {
    double amplitude = 0;
    double damping   = 0;
    double frequency = 0;
    double phase     = 0;

    [[nodiscard]] double worst_relative() const { return std::max({amplitude, damping, frequency}); }
};

inline RecoveryError recovery_error(const std::vector<HarmonicComponent>& truth, const std::vector<HarmonicComponent>& fitted) {
    RecoveryError e;
    const auto    matched = match_by_frequency(truth, fitted);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto& t = truth[i];
        const auto& f = *matched[i];
        e.amplitude   = std::max(e.amplitude, relative_error(f.amplitude, t.amplitude));
        e.damping     = std::max(e.damping, relative_error(f.damping, t.damping));
        e.frequency   = std::max(e.frequency, relative_error(f.frequency, t.frequency));
        e.phase       = std::max(e.phase, phase_error(f.phase, t.phase));
    }
    return e;
}

inline double distance_energy(std::span<const Complex> a, std::span<const Complex> b) {
    double e = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        e += std::norm(a[i] - b[i]);
    }
    return e;
}

inline double max_abs(std::span<const Complex> a) {
    double m = 0;
    for (const auto& v : a) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

// Adds circular white noise with E|n|^2 = sigma^2.
inline Fid add_noise(const Fid& fid, double sigma, std::uint64_t seed) {
    io::NoiseGenerator   noise(seed, sigma);
    std::vector<Complex> s(fid.samples().begin(), fid.samples().end());
    for (auto& v : s) {
        v += noise();
    }
    return fid.with_samples(std::move(s));
}

// Energy of the bins whose ppm lies inside the band.
inline double band_energy(const Spectrum& spec, const PpmBand& band) {
    double e = 0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (band.contains(spec.ppm_axis[i])) {
            e += std::norm(spec.bins[i]);
        }
    }
    return e;
}

} // namespace hsvd::testing

#endif // HSVD_TESTS_SUPPORT_HPP
