#ifndef HSVD_SPECTRUM_HPP
#define HSVD_SPECTRUM_HPP

#include <hsvd/error.hpp>
#include <hsvd/model.hpp>

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace hsvd {

/// Centered frequency-domain view of a FID. Zero frequency sits at bin n/2.
struct Spectrum {
    std::vector<Complex> bins;
    std::vector<double>  freq_axis; /// Hz, ascending
    std::vector<double>  ppm_axis;  /// ppm, descending
    Acquisition          acq;
    std::size_t          source_length = 0; /// samples in the FID before zero filling

    [[nodiscard]] std::size_t size() const noexcept { return bins.size(); }
    [[nodiscard]] double      bin_width() const noexcept { return 1.0 / (static_cast<double>(bins.size()) * acq.dwell_time); }
};

namespace detail {

// Planner calls are not re-entrant in FFTW; execution on distinct buffers is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline FftwBuffer fftw_buffer(std::size_t n) {
    auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (p == nullptr) {
        throw std::bad_alloc();
    }
    return FftwBuffer(p);
}

// Unnormalized DFT of `data` (length n), sign -1 forward / +1 backward.
inline std::vector<Complex> dft(const std::vector<Complex>& data, int sign) {
    const std::size_t n   = data.size();
    auto              in  = fftw_buffer(n);
    auto              out = fftw_buffer(n);
    fftw_plan         plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), in.get(), out.get(), sign, FFTW_ESTIMATE);
    }
    if (plan == nullptr) {
        throw NumericalError("FFTW could not plan a transform of length " + std::to_string(n));
    }
    // std::complex<double> is layout-compatible with fftw_complex
    std::copy_n(data.begin(), n, reinterpret_cast<Complex*>(in.get()));
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    const auto* first = reinterpret_cast<const Complex*>(out.get());
    return std::vector<Complex>(first, first + n);
}

inline std::vector<double> frequency_axis(std::size_t n, double dwell_time) {
    std::vector<double> axis(n);
    const double        half = static_cast<double>(n / 2);
    for (std::size_t i = 0; i < n; ++i) {
        axis[i] = (static_cast<double>(i) - half) / (static_cast<double>(n) * dwell_time);
    }
    return axis;
}

} // namespace detail

/// Zero-fills to `zero_fill` points (default: next power of two), transforms
/// forward without normalization and centers zero frequency.
[[nodiscard]] inline Spectrum to_spectrum(const Fid& fid, std::optional<std::size_t> zero_fill = std::nullopt) {
    const std::size_t n = zero_fill ? *zero_fill : std::bit_ceil(fid.size());
    if (n < fid.size()) {
        throw InvalidInput("to_spectrum: zero_fill " + std::to_string(n) + " is shorter than the signal (" + std::to_string(fid.size()) + " samples)");
    }

    std::vector<Complex> padded(n);
    std::copy(fid.samples().begin(), fid.samples().end(), padded.begin());
    const auto raw = detail::dft(padded, FFTW_FORWARD);

    Spectrum spec;
    spec.acq           = fid.acquisition();
    spec.source_length = fid.size();
    spec.bins.resize(n);
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        spec.bins[i] = raw[(i + n - half) % n];
    }
    spec.freq_axis = detail::frequency_axis(n, fid.dwell_time());
    spec.ppm_axis.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        spec.ppm_axis[i] = hz_to_ppm(spec.freq_axis[i], spec.acq);
    }
    return spec;
}

/// Inverse of to_spectrum. Returns all n_fft samples; the zero-filled tail comes back as ~0.
[[nodiscard]] inline Fid to_fid(const Spectrum& spec) {
    const std::size_t n = spec.bins.size();
    if (n < 2 || spec.freq_axis.size() != n || spec.ppm_axis.size() != n) {
        throw InvalidInput("to_fid: spectrum bins and axes must have equal length >= 2");
    }
    const auto   expected = detail::frequency_axis(n, spec.acq.dwell_time);
    const double step     = spec.bin_width();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(std::abs(spec.freq_axis[i] - expected[i]) <= 1e-9 * step)) {
            throw InvalidInput("to_fid: frequency axis is not the uniform grid of a transformed FID (bin " + std::to_string(i) + ")");
        }
    }

    std::vector<Complex> raw(n);
    const std::size_t    half = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        raw[(i + n - half) % n] = spec.bins[i];
    }
    auto         samples = detail::dft(raw, FFTW_BACKWARD);
    const double scale   = 1.0 / static_cast<double>(n);
    for (auto& s : samples) {
        s *= scale;
    }
    return Fid(std::move(samples), spec.acq);
}

struct Peak {
    std::size_t index  = 0;
    double      ppm    = 0;
    double      height = 0; /// real part at the peak
};

/// Largest real part among bins inside `band`. Ties resolve to the lowest bin index.
[[nodiscard]] inline Peak peak_at(const Spectrum& spec, const PpmBand& band) {
    std::optional<Peak> best;
    for (std::size_t i = 0; i < spec.bins.size(); ++i) {
        if (!band.contains(spec.ppm_axis[i])) {
            continue;
        }
        if (!best || spec.bins[i].real() > best->height) {
            best = Peak{i, spec.ppm_axis[i], spec.bins[i].real()};
        }
    }
    if (!best) {
        throw InvalidInput("peak_at: band " + band.to_string() + " does not overlap the ppm axis");
    }
    return *best;
}

} // namespace hsvd

#endif // HSVD_SPECTRUM_HPP
