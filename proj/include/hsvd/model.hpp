#ifndef HSVD_MODEL_HPP
#define HSVD_MODEL_HPP

#include <hsvd/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hsvd {

using Complex = std::complex<double>;

/// Acquisition metadata shared by a FID and everything derived from it.
struct Acquisition {
    double dwell_time       = 0; /// seconds per sample
    double transmitter_freq = 0; /// MHz
    double reference_ppm    = 0; /// chemical shift assigned to the 0 Hz offset

    friend bool operator==(const Acquisition&, const Acquisition&) = default;
};

/// Converts a frequency offset to chemical shift. Offsets grow toward lower ppm.
[[nodiscard]] inline double hz_to_ppm(double hz, const Acquisition& acq) { return acq.reference_ppm - hz / acq.transmitter_freq; }

[[nodiscard]] inline double ppm_to_hz(double ppm, const Acquisition& acq) { return (acq.reference_ppm - ppm) * acq.transmitter_freq; }

/// Uniformly sampled complex free induction decay.
class Fid {
public:
    Fid(std::vector<Complex> samples, Acquisition acq) : _samples(std::move(samples)), _acq(acq) {
        if (_samples.size() < 2) {
            throw InvalidInput("Fid: at least 2 samples required, got " + std::to_string(_samples.size()));
        }
        if (!(_acq.dwell_time > 0) || !std::isfinite(_acq.dwell_time)) {
            throw InvalidInput("Fid: dwell_time must be positive");
        }
        if (!(_acq.transmitter_freq > 0) || !std::isfinite(_acq.transmitter_freq)) {
            throw InvalidInput("Fid: transmitter_freq must be positive");
        }
        if (!std::isfinite(_acq.reference_ppm)) {
            throw InvalidInput("Fid: reference_ppm must be finite");
        }
        for (std::size_t n = 0; n < _samples.size(); ++n) {
            if (!std::isfinite(_samples[n].real()) || !std::isfinite(_samples[n].imag())) {
                throw InvalidInput("Fid: sample " + std::to_string(n) + " is not finite");
            }
        }
    }

    [[nodiscard]] std::span<const Complex> samples() const noexcept { return _samples; }
    [[nodiscard]] std::size_t              size() const noexcept { return _samples.size(); }
    [[nodiscard]] const Complex&           operator[](std::size_t n) const noexcept { return _samples[n]; }
    [[nodiscard]] const Acquisition&       acquisition() const noexcept { return _acq; }
    [[nodiscard]] double                   dwell_time() const noexcept { return _acq.dwell_time; }

    /// Same metadata, new samples.
    [[nodiscard]] Fid with_samples(std::vector<Complex> samples) const { return Fid(std::move(samples), _acq); }

    [[nodiscard]] double energy() const noexcept {
        double e = 0;
        for (const auto& s : _samples) {
            e += std::norm(s);
        }
        return e;
    }

    friend bool operator==(const Fid&, const Fid&) = default;

private:
    std::vector<Complex> _samples;
    Acquisition          _acq;
};

/// One exponentially damped complex sinusoid: a * exp((d + j 2 pi f) t + j phi).
struct HarmonicComponent {
    double amplitude = 0; /// >= 0, signal units
    double damping   = 0; /// 1/s, negative for a decaying component
    double frequency = 0; /// Hz offset from the transmitter
    double phase     = 0; /// radians in (-pi, pi]

    friend bool operator==(const HarmonicComponent&, const HarmonicComponent&) = default;
};

/// Maps an angle into (-pi, pi].
[[nodiscard]] inline double wrap_phase(double radians) {
    double r = std::remainder(radians, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) {
        r += 2.0 * std::numbers::pi;
    }
    return r;
}

/// Descending amplitude, then ascending frequency, then ascending damping.
[[nodiscard]] inline bool fit_order(const HarmonicComponent& a, const HarmonicComponent& b) {
    if (a.amplitude != b.amplitude) {
        return a.amplitude > b.amplitude;
    }
    if (a.frequency != b.frequency) {
        return a.frequency < b.frequency;
    }
    return a.damping < b.damping;
}

/// Result of a harmonic decomposition.
struct ModelFit {
    std::vector<HarmonicComponent> components;      /// ordered by fit_order
    std::vector<double>            singular_values; /// the retained (leading) singular values
    double                         residual_energy = 0; /// sum |data - model|^2
    std::size_t                    dropped_poles   = 0; /// poles at the origin removed from the fit
};

inline void sort_components(std::vector<HarmonicComponent>& components) { std::stable_sort(components.begin(), components.end(), fit_order); }

namespace detail {

inline void require_finite_component(const HarmonicComponent& c, std::size_t index) {
    if (!std::isfinite(c.amplitude) || !std::isfinite(c.damping) || !std::isfinite(c.frequency) || !std::isfinite(c.phase)) {
        throw InvalidInput("component " + std::to_string(index) + " has non-finite parameters");
    }
}

} // namespace detail

/// Sum of damped sinusoids sampled at t = n * dwell_time. Terms are added in list order.
[[nodiscard]] inline Fid synthesize(std::span<const HarmonicComponent> components, std::size_t n_samples, const Acquisition& acq) {
    if (n_samples < 2) {
        throw InvalidInput("synthesize: at least 2 samples required");
    }
    if (!(acq.dwell_time > 0)) {
        throw InvalidInput("synthesize: dwell_time must be positive");
    }
    for (std::size_t k = 0; k < components.size(); ++k) {
        detail::require_finite_component(components[k], k);
    }

    std::vector<Complex> samples(n_samples);
    for (const auto& c : components) {
        if (c.amplitude == 0.0) {
            continue;
        }
        const Complex rate(c.damping, 2.0 * std::numbers::pi * c.frequency);
        for (std::size_t n = 0; n < n_samples; ++n) {
            const double  t    = static_cast<double>(n) * acq.dwell_time;
            const Complex expo = rate * t + Complex(0.0, c.phase);
            Complex       term = c.amplitude * std::exp(expo);
            if (!std::isfinite(term.real()) || !std::isfinite(term.imag())) {
                // growing term with a tiny amplitude: fold the amplitude into the exponent
                term = std::exp(expo + std::log(c.amplitude));
            }
            samples[n] += term;
        }
    }
    return Fid(std::move(samples), acq);
}

/// Per-sample multiplier z = exp((d + j 2 pi f) dwell_time).
[[nodiscard]] inline Complex pole_of(const HarmonicComponent& c, double dwell_time) {
    if (!(dwell_time > 0)) {
        throw InvalidInput("pole_of: dwell_time must be positive");
    }
    detail::require_finite_component(c, 0);
    return std::exp(Complex(c.damping, 2.0 * std::numbers::pi * c.frequency) * dwell_time);
}

/// Inverts pole_of for the pole and recovers amplitude/phase from c = a exp(j phi).
/// Frequencies land in (-1/(2 dwell), 1/(2 dwell)].
[[nodiscard]] inline HarmonicComponent params_of(Complex pole, Complex amplitude, double dwell_time) {
    if (!(dwell_time > 0)) {
        throw InvalidInput("params_of: dwell_time must be positive");
    }
    if (pole == Complex{}) {
        throw InvalidInput("params_of: pole at the origin carries no frequency information");
    }
    HarmonicComponent c;
    c.damping   = std::log(std::abs(pole)) / dwell_time;
    c.frequency = wrap_phase(std::arg(pole)) / (2.0 * std::numbers::pi * dwell_time);
    c.amplitude = std::abs(amplitude);
    c.phase     = wrap_phase(std::arg(amplitude));
    return c;
}

/// Frequency window on the chemical-shift axis.
struct PpmBand {
    double center     = 0;
    double half_width = 0;

    PpmBand() = default;
    PpmBand(double c, double hw) : center(c), half_width(hw) {
        if (!std::isfinite(c) || !(hw > 0) || !std::isfinite(hw)) {
            throw InvalidInput("PpmBand: half_width must be positive and finite");
        }
    }

    [[nodiscard]] bool        contains(double ppm) const noexcept { return std::abs(ppm - center) <= half_width; }
    [[nodiscard]] std::string to_string() const {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%g +/- %g ppm", center, half_width);
        return buf;
    }
};

} // namespace hsvd

#endif // HSVD_MODEL_HPP
