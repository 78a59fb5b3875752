#ifndef HSVD_PREPROCESS_HPP
#define HSVD_PREPROCESS_HPP

#include <hsvd/decompose.hpp>
#include <hsvd/error.hpp>
#include <hsvd/linalg.hpp>
#include <hsvd/model.hpp>
#include <hsvd/spectrum.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace hsvd {

/// Keeps the k-component model of a signal and discards the rest.
[[nodiscard]] inline Fid filter_rank(const Fid& fid, std::size_t k) { return reconstruct(decompose(fid, k), fid.size(), fid.acquisition()); }

struct CadzowResult {
    Fid                 fid;
    std::size_t         iterations = 0;
    bool                converged  = false;
    std::vector<double> rank_ratio; /// sigma[k]/sigma[0] of the input, then after each pass
};

namespace detail {

// sigma[k] / sigma[j], zero when the numerator vanishes
inline double sigma_ratio(const std::vector<double>& sigma, std::size_t k, std::size_t j) { return sigma[k] == 0.0 ? 0.0 : sigma[k] / sigma[j]; }

// Rank-k projection H V_k V_k^H followed by an arithmetic mean over each antidiagonal.
inline std::vector<Complex> truncate_and_average(const linalg::CMatrix& h, const linalg::CMatrix& vh, std::size_t k) {
    const std::size_t l = h.rows();
    const std::size_t m = h.cols();

    linalg::CMatrix coeff(l, k); // H V_k
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t c = 0; c < k; ++c) {
            Complex acc{};
            for (std::size_t j = 0; j < m; ++j) {
                acc += h(i, j) * std::conj(vh(c, j));
            }
            coeff(i, c) = acc;
        }
    }

    std::vector<Complex> sums(l + m - 1);
    std::vector<double>  counts(l + m - 1);
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            Complex v{};
            for (std::size_t c = 0; c < k; ++c) {
                v += coeff(i, c) * vh(c, j);
            }
            sums[i + j] += v;
            counts[i + j] += 1.0;
        }
    }
    for (std::size_t s = 0; s < sums.size(); ++s) {
        sums[s] /= counts[s];
    }
    return sums;
}

} // namespace detail

/// Cadzow denoising: alternate rank-k truncation of the Hankel matrix with
/// antidiagonal averaging until sigma[k]/sigma[k-1] < tol or max_iters passes.
/// Stopping on the iteration cap is reported through `converged`, not thrown.
[[nodiscard]] inline CadzowResult cadzow(const Fid& fid, std::size_t k, std::size_t max_iters, double tol) {
    if (k == 0) {
        throw InvalidInput("cadzow: model order must be at least 1");
    }
    if (max_iters == 0) {
        throw InvalidInput("cadzow: max_iters must be at least 1");
    }
    if (!(tol > 0) || !std::isfinite(tol)) {
        throw InvalidInput("cadzow: tol must be positive");
    }
    const HankelDims dims = default_dims(fid.size(), k);
    validate_dims(dims, fid.size(), k);

    linalg::SvdOptions<double> opts;
    opts.vectors = linalg::SvdVectors::right_only;
    opts.leading = k;

    CadzowResult result{fid, 0, false, {}};
    auto         h   = hankel(fid, dims);
    auto         dec = linalg::svd(h, opts);
    result.rank_ratio.push_back(detail::sigma_ratio(dec.sigma, k, 0));

    while (result.iterations < max_iters) {
        result.fid = fid.with_samples(detail::truncate_and_average(h, dec.vh, k));
        ++result.iterations;
        h   = hankel(result.fid, dims);
        dec = linalg::svd(h, opts);
        result.rank_ratio.push_back(detail::sigma_ratio(dec.sigma, k, 0));
        if (detail::sigma_ratio(dec.sigma, k, k - 1) < tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

/// Zero-order phase rotation: every sample times exp(j phi).
[[nodiscard]] inline Fid phase_correct(const Fid& fid, double phi) {
    if (!std::isfinite(phi)) {
        throw InvalidInput("phase_correct: angle must be finite");
    }
    const Complex        rot = std::polar(1.0, phi);
    std::vector<Complex> out(fid.samples().begin(), fid.samples().end());
    for (auto& s : out) {
        s *= rot;
    }
    return fid.with_samples(std::move(out));
}

/// Angle that makes the strongest component inside `band` absorptive.
/// Equal amplitudes resolve toward the band center.
[[nodiscard]] inline double auto_phase(const Fid& fid, const PpmBand& band, std::size_t order = default_model_order) {
    const auto fit = decompose(fid, order);

    const HarmonicComponent* pick     = nullptr;
    double                   pickDist = 0;
    for (const auto& c : fit.components) {
        const double ppm = hz_to_ppm(c.frequency, fid.acquisition());
        if (!band.contains(ppm)) {
            continue;
        }
        const double dist = std::abs(ppm - band.center);
        if (pick == nullptr || c.amplitude > pick->amplitude || (c.amplitude == pick->amplitude && dist < pickDist)) {
            pick     = &c;
            pickDist = dist;
        }
    }
    if (pick == nullptr) {
        throw InvalidInput("auto_phase: no fitted component in band " + band.to_string());
    }
    return wrap_phase(-pick->phase);
}

enum class BaselineSmoothing { linear, cubic };

struct BaselineAnchors {
    std::vector<std::size_t> indices; /// strictly ascending bin indices
    BaselineSmoothing        smoothing = BaselineSmoothing::linear;
};

/// Interpolant through the real part of the anchor bins, evaluated on every bin.
/// Cubic is a natural spline; both kinds extend linearly beyond the outer anchors.
[[nodiscard]] inline std::vector<double> baseline_curve(const Spectrum& spec, const BaselineAnchors& anchors) {
    const auto& idx = anchors.indices;
    if (idx.size() < 2) {
        throw InvalidInput("baseline: at least 2 anchors required, got " + std::to_string(idx.size()));
    }
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= spec.size()) {
            throw InvalidInput("baseline: anchor " + std::to_string(idx[i]) + " is outside the spectrum (" + std::to_string(spec.size()) + " bins)");
        }
        if (i > 0 && idx[i] <= idx[i - 1]) {
            throw InvalidInput("baseline: anchors must be strictly ascending");
        }
    }

    const std::size_t   na = idx.size();
    std::vector<double> x(na);
    std::vector<double> y(na);
    for (std::size_t i = 0; i < na; ++i) {
        x[i] = static_cast<double>(idx[i]);
        y[i] = spec.bins[idx[i]].real();
    }

    // second derivatives at the knots; all zero for the linear kind
    std::vector<double> m2(na, 0.0);
    if (anchors.smoothing == BaselineSmoothing::cubic && na > 2) {
        // tridiagonal system for interior knots, Thomas algorithm
        const std::size_t   n = na - 2;
        std::vector<double> diag(n), upper(n), rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double h0 = x[i + 1] - x[i];
            const double h1 = x[i + 2] - x[i + 1];
            diag[i]         = 2.0 * (h0 + h1);
            upper[i]        = h1;
            rhs[i]          = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
        }
        for (std::size_t i = 1; i < n; ++i) {
            const double w = (x[i + 1] - x[i]) / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m2[n] = rhs[n - 1] / diag[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) {
            m2[i + 1] = (rhs[i] - upper[i] * m2[i + 2]) / diag[i];
        }
    }

    // value at offset t into segment s (x[s] + t)
    const auto segment = [&](std::size_t s, double t) {
        const double h     = x[s + 1] - x[s];
        const double slope = (y[s + 1] - y[s]) / h - h * (2.0 * m2[s] + m2[s + 1]) / 6.0;
        return y[s] + t * (slope + t * (m2[s] / 2.0 + t * (m2[s + 1] - m2[s]) / (6.0 * h)));
    };
    const double h0        = x[1] - x[0];
    const double slopeLeft = (y[1] - y[0]) / h0 - h0 * (2.0 * m2[0] + m2[1]) / 6.0;
    const double hl        = x[na - 1] - x[na - 2];
    const double slopeRight = (y[na - 1] - y[na - 2]) / hl + hl * (m2[na - 2] + 2.0 * m2[na - 1]) / 6.0;

    std::vector<double> curve(spec.size());
    std::size_t         s = 0;
    for (std::size_t b = 0; b < spec.size(); ++b) {
        const double xb = static_cast<double>(b);
        if (b < idx.front()) {
            curve[b] = y[0] + slopeLeft * (xb - x[0]);
        } else if (b >= idx.back()) {
            curve[b] = y[na - 1] + slopeRight * (xb - x[na - 1]);
        } else {
            while (idx[s + 1] <= b) {
                ++s;
            }
            curve[b] = segment(s, xb - x[s]);
        }
    }
    return curve;
}

/// Subtracts the anchor interpolant from the real part; the imaginary part is untouched.
[[nodiscard]] inline Spectrum baseline_correct(const Spectrum& spec, const BaselineAnchors& anchors) {
    const auto curve = baseline_curve(spec, anchors);
    Spectrum   out   = spec;
    for (std::size_t b = 0; b < out.size(); ++b) {
        out.bins[b] = Complex(spec.bins[b].real() - curve[b], spec.bins[b].imag());
    }
    return out;
}

struct EddyResult {
    Fid         fid;
    std::size_t patched = 0; /// reference samples at exactly zero whose phase came from a neighbor
};

/// Removes time-dependent phase: s[n] * exp(-j arg(w[n])) with w the unsuppressed-water reference.
[[nodiscard]] inline EddyResult eddy_correct(const Fid& fid, const Fid& water_reference) {
    if (fid.size() != water_reference.size()) {
        throw InvalidInput("eddy_correct: signal has " + std::to_string(fid.size()) + " samples, reference has " + std::to_string(water_reference.size()));
    }
    if (fid.dwell_time() != water_reference.dwell_time()) {
        throw InvalidInput("eddy_correct: signal and reference dwell times differ");
    }
    const std::size_t n = fid.size();

    // nearest nonzero reference sample for each index, earlier one on ties
    std::vector<std::size_t> source(n);
    std::optional<std::size_t> last;
    for (std::size_t i = 0; i < n; ++i) {
        if (water_reference[i] != Complex{}) {
            last = i;
        }
        source[i] = last.value_or(n);
    }
    if (!last) {
        throw InvalidInput("eddy_correct: water reference is identically zero");
    }
    std::optional<std::size_t> next;
    EddyResult                 result{fid, 0};
    for (std::size_t i = n; i-- > 0;) {
        if (water_reference[i] != Complex{}) {
            next = i;
            continue;
        }
        ++result.patched;
        if (next && (source[i] == n || *next - i < i - source[i])) {
            source[i] = *next;
        }
    }

    std::vector<Complex> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Complex w    = water_reference[source[i]];
        const Complex unit = std::conj(w) / std::abs(w);
        out[i]             = fid[i] * unit;
    }
    result.fid = fid.with_samples(std::move(out));
    return result;
}

/// Default residual-water window.
[[nodiscard]] inline PpmBand default_water_band() { return PpmBand(4.7, 0.3); }

struct WaterRemoval {
    Fid                            fid;
    std::vector<HarmonicComponent> removed; /// fitted components inside the band, empty when nothing matched
    ModelFit                       fit;
};

/// Fits the signal, then subtracts the synthesized sum of every component inside `band`.
[[nodiscard]] inline WaterRemoval remove_water(const Fid& fid, const PpmBand& band = default_water_band(), std::size_t k = default_model_order) {
    WaterRemoval result{fid, {}, decompose(fid, k)};
    for (const auto& c : result.fit.components) {
        if (band.contains(hz_to_ppm(c.frequency, fid.acquisition()))) {
            result.removed.push_back(c);
        }
    }
    if (result.removed.empty()) {
        return result;
    }
    const auto           water = synthesize(result.removed, fid.size(), fid.acquisition());
    std::vector<Complex> out(fid.size());
    for (std::size_t n = 0; n < fid.size(); ++n) {
        out[n] = fid[n] - water[n];
    }
    result.fid = fid.with_samples(std::move(out));
    return result;
}

} // namespace hsvd

#endif // HSVD_PREPROCESS_HPP
