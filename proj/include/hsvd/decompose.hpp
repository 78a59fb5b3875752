#ifndef HSVD_DECOMPOSE_HPP
#define HSVD_DECOMPOSE_HPP

#include <hsvd/error.hpp>
#include <hsvd/linalg.hpp>
#include <hsvd/model.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hsvd {

/// Model order used when the caller does not choose one.
inline constexpr std::size_t default_model_order = 32;

/// Shape of the Hankel data matrix: l rows, m columns, l + m = n + 1.
struct HankelDims {
    std::size_t l = 0;
    std::size_t m = 0;

    friend bool operator==(const HankelDims&, const HankelDims&) = default;
};

/// Checks the sizing rules for a signal of n samples and model order k:
/// l + m = n + 1, 0.5 <= l/m <= 2 and both sides larger than k.
inline void validate_dims(const HankelDims& dims, std::size_t n_samples, std::size_t k) {
    const auto describe = [&] { return std::to_string(dims.l) + "x" + std::to_string(dims.m); };
    if (dims.l == 0 || dims.m == 0 || dims.l + dims.m != n_samples + 1) {
        throw InvalidInput("Hankel dims " + describe() + " do not satisfy l + m = n + 1 for n = " + std::to_string(n_samples));
    }
    if (2 * dims.l < dims.m || dims.l > 2 * dims.m) {
        throw InvalidInput("Hankel dims " + describe() + " violate 0.5 <= l/m <= 2");
    }
    if (dims.l <= k || dims.m <= k) {
        throw InvalidInput("model order " + std::to_string(k) + " is not below min(l, m) for Hankel dims " + describe());
    }
}

/// As square as possible: l = ceil((n+1)/2), m = n + 1 - l.
[[nodiscard]] inline HankelDims default_dims(std::size_t n_samples, std::size_t k) {
    if (n_samples < 2 * k + 2) {
        throw InvalidInput("signal of " + std::to_string(n_samples) + " samples is too short for model order " + std::to_string(k) + " (need at least " + std::to_string(2 * k + 2) + ")");
    }
    HankelDims dims;
    dims.l = (n_samples + 2) / 2;
    dims.m = n_samples + 1 - dims.l;
    return dims;
}

/// Hankel arrangement: entry (i, j) = samples[i + j].
[[nodiscard]] inline linalg::CMatrix hankel(std::span<const Complex> samples, const HankelDims& dims) {
    if (dims.l == 0 || dims.m == 0 || dims.l + dims.m != samples.size() + 1) {
        throw InvalidInput("hankel: dims " + std::to_string(dims.l) + "x" + std::to_string(dims.m) + " do not match a signal of " + std::to_string(samples.size()) + " samples");
    }
    linalg::CMatrix h(dims.l, dims.m);
    for (std::size_t i = 0; i < dims.l; ++i) {
        for (std::size_t j = 0; j < dims.m; ++j) {
            h(i, j) = samples[i + j];
        }
    }
    return h;
}

[[nodiscard]] inline linalg::CMatrix hankel(const Fid& fid, const HankelDims& dims) { return hankel(fid.samples(), dims); }

namespace detail {

// Least-squares complex amplitudes c of samples[n] ~ sum_k c_k z_k^n over all samples.
// Each Vandermonde column is scaled to unit norm (in log space for growing poles) before solving.
inline std::vector<Complex> vandermonde_amplitudes(std::span<const Complex> samples, std::span<const Complex> poles) {
    const std::size_t n = samples.size();
    const std::size_t k = poles.size();

    linalg::CMatrix     basis(n, k);
    std::vector<double> logScale(k);
    for (std::size_t c = 0; c < k; ++c) {
        const Complex logZ = std::log(poles[c]);
        // largest |z^t| over the window, in log form
        const double peak = std::max(0.0, logZ.real() * static_cast<double>(n - 1));
        double       sq   = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const Complex v = std::exp(logZ * static_cast<double>(t) - peak);
            basis(t, c)     = v;
            sq += std::norm(v);
        }
        const double nrm = std::sqrt(sq);
        for (std::size_t t = 0; t < n; ++t) {
            basis(t, c) /= nrm;
        }
        logScale[c] = peak + std::log(nrm);
    }

    // Minimum-norm solve by SVD. Besides tiny singular values, directions whose data
    // projection is at rounding level are skipped: near-coincident spurious poles (an
    // overmodeled noiseless fit) would otherwise get large, mutually cancelling amplitudes.
    const auto   dec      = linalg::svd(basis);
    const double cutoff   = static_cast<double>(n) * dec.sigma.front() * 1e-12;
    double       dataNorm = 0;
    for (const auto& v : samples) {
        dataNorm += std::norm(v);
    }
    const double         floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * std::sqrt(dataNorm);
    std::vector<Complex> solution(k);
    for (std::size_t d = 0; d < dec.sigma.size() && dec.sigma[d] > cutoff; ++d) {
        Complex proj{};
        for (std::size_t t = 0; t < n; ++t) {
            proj += std::conj(dec.u(t, d)) * samples[t];
        }
        if (std::abs(proj) <= floor) {
            continue;
        }
        proj /= dec.sigma[d];
        for (std::size_t c = 0; c < k; ++c) {
            solution[c] += std::conj(dec.vh(d, c)) * proj;
        }
    }

    std::vector<Complex> amplitudes(k);
    for (std::size_t c = 0; c < k; ++c) {
        amplitudes[c] = solution[c] * std::exp(-logScale[c]);
    }
    return amplitudes;
}

} // namespace detail

/// Decomposes a FID into k damped sinusoids by the Hankel SVD method.
///
/// The Hankel matrix is factored by SVD and truncated to its k leading right
/// singular vectors V_k. The shift relation V_top X = V_bottom (V_k without its
/// last / first row) is solved in the least-squares sense; the eigenvalues of
/// X^H are the signal poles. Complex amplitudes then come from a Vandermonde
/// least-squares fit over every sample.
[[nodiscard]] inline ModelFit decompose(const Fid& fid, std::size_t k, std::optional<HankelDims> dims = std::nullopt) {
    if (k == 0) {
        throw InvalidInput("decompose: model order must be at least 1");
    }
    const HankelDims d = dims ? *dims : default_dims(fid.size(), k);
    validate_dims(d, fid.size(), k);
    if (fid.energy() == 0.0) {
        throw InvalidInput("decompose: zero signal");
    }

    linalg::SvdOptions<double> opts;
    opts.vectors = linalg::SvdVectors::right_only;
    opts.leading = k;
    const auto dec = linalg::svd(hankel(fid, d), opts);

    // V_k (m x k) split into its shifted halves
    linalg::CMatrix top(d.m - 1, k);
    linalg::CMatrix bottom(d.m - 1, k);
    for (std::size_t j = 0; j + 1 < d.m; ++j) {
        for (std::size_t c = 0; c < k; ++c) {
            top(j, c)    = std::conj(dec.vh(c, j));
            bottom(j, c) = std::conj(dec.vh(c, j + 1));
        }
    }
    const auto shift = linalg::lstsq(top, bottom);
    auto       poles = linalg::eigenvalues(shift.adjoint());

    ModelFit fit;
    fit.singular_values.assign(dec.sigma.begin(), dec.sigma.begin() + static_cast<std::ptrdiff_t>(k));
    fit.dropped_poles = std::erase_if(poles, [](const Complex& z) { return z == Complex{}; });
    if (poles.empty()) {
        throw NumericalError("decompose: every pole estimate is at the origin");
    }

    const auto amplitudes = detail::vandermonde_amplitudes(fid.samples(), poles);
    fit.components.reserve(poles.size());
    for (std::size_t c = 0; c < poles.size(); ++c) {
        fit.components.push_back(params_of(poles[c], amplitudes[c], fid.dwell_time()));
    }
    sort_components(fit.components);

    const auto model = synthesize(fit.components, fid.size(), fid.acquisition());
    for (std::size_t n = 0; n < fid.size(); ++n) {
        fit.residual_energy += std::norm(fid[n] - model[n]);
    }
    return fit;
}

/// Model signal of a fit (delegates to synthesize).
[[nodiscard]] inline Fid reconstruct(const ModelFit& fit, std::size_t n_samples, const Acquisition& acq) { return synthesize(fit.components, n_samples, acq); }

} // namespace hsvd

#endif // HSVD_DECOMPOSE_HPP
