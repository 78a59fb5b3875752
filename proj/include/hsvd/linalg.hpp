#ifndef HSVD_LINALG_HPP
#define HSVD_LINALG_HPP

#include <hsvd/error.hpp>

#include <Eigen/Core>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hsvd::linalg {

/// Dense complex matrix, row-major.
template<std::floating_point T>
class ComplexMatrix {
public:
    using value_type = std::complex<T>;

    ComplexMatrix() = default;

    ComplexMatrix(std::size_t rows, std::size_t cols, value_type fill = value_type{}) : _rows(rows), _cols(cols), _data(rows * cols, fill) {
        if (rows == 0 || cols == 0) {
            throw InvalidInput("ComplexMatrix: dimensions must be at least 1x1, got " + std::to_string(rows) + "x" + std::to_string(cols));
        }
    }

    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<value_type> entries) : _rows(rows), _cols(cols), _data(std::move(entries)) {
        if (rows == 0 || cols == 0) {
            throw InvalidInput("ComplexMatrix: dimensions must be at least 1x1, got " + std::to_string(rows) + "x" + std::to_string(cols));
        }
        if (_data.size() != rows * cols) {
            throw InvalidInput("ComplexMatrix: " + std::to_string(_data.size()) + " entries do not fill a " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
        }
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = value_type{1};
        }
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return _rows; }
    [[nodiscard]] std::size_t cols() const noexcept { return _cols; }
    [[nodiscard]] bool        empty() const noexcept { return _data.empty(); }

    value_type&       operator()(std::size_t i, std::size_t j) noexcept { return _data[i * _cols + j]; }
    const value_type& operator()(std::size_t i, std::size_t j) const noexcept { return _data[i * _cols + j]; }

    [[nodiscard]] std::span<value_type>       entries() noexcept { return _data; }
    [[nodiscard]] std::span<const value_type> entries() const noexcept { return _data; }

    [[nodiscard]] ComplexMatrix adjoint() const {
        ComplexMatrix r(_cols, _rows);
        for (std::size_t i = 0; i < _rows; ++i) {
            for (std::size_t j = 0; j < _cols; ++j) {
                r(j, i) = std::conj((*this)(i, j));
            }
        }
        return r;
    }

    /// Rows [first, first + count) as a new matrix.
    [[nodiscard]] ComplexMatrix row_block(std::size_t first, std::size_t count) const {
        if (first + count > _rows) {
            throw InvalidInput("ComplexMatrix::row_block: rows out of range");
        }
        return ComplexMatrix(count, _cols, std::vector<value_type>(_data.begin() + static_cast<std::ptrdiff_t>(first * _cols), _data.begin() + static_cast<std::ptrdiff_t>((first + count) * _cols)));
    }

    /// Columns [first, first + count) as a new matrix.
    [[nodiscard]] ComplexMatrix col_block(std::size_t first, std::size_t count) const {
        if (first + count > _cols) {
            throw InvalidInput("ComplexMatrix::col_block: columns out of range");
        }
        ComplexMatrix r(_rows, count);
        for (std::size_t i = 0; i < _rows; ++i) {
            std::copy_n(_data.begin() + static_cast<std::ptrdiff_t>(i * _cols + first), count, r._data.begin() + static_cast<std::ptrdiff_t>(i * count));
        }
        return r;
    }

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t             _rows = 0;
    std::size_t             _cols = 0;
    std::vector<value_type> _data;
};

using CMatrix = ComplexMatrix<double>;

template<std::floating_point T>
ComplexMatrix<T> operator*(const ComplexMatrix<T>& a, const ComplexMatrix<T>& b) {
    if (a.cols() != b.rows()) {
        throw InvalidInput("matrix product: inner dimensions differ (" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + ")");
    }
    ComplexMatrix<T> r(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const auto aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                r(i, j) += aik * b(k, j);
            }
        }
    }
    return r;
}

template<std::floating_point T>
T frobenius_norm(const ComplexMatrix<T>& m) {
    T scale = 0;
    for (const auto& v : m.entries()) {
        scale = std::max({scale, std::abs(v.real()), std::abs(v.imag())});
    }
    if (scale == T{0}) {
        return T{0};
    }
    T sum = 0;
    for (const auto& v : m.entries()) {
        sum += std::norm(v / scale);
    }
    return scale * std::sqrt(sum);
}

enum class SvdVectors {
    both,      /// u and vh
    right_only /// vh only; u is left empty
};

enum class SvdMethod {
    automatic,         /// Jacobi up to jacobi_size_limit, divide and conquer above
    jacobi,            /// one-sided Jacobi rotations
    divide_and_conquer /// Householder bidiagonalization + divide and conquer
};

/// Largest min(rows, cols) that SvdMethod::automatic hands to the Jacobi kernel.
inline constexpr std::size_t jacobi_size_limit = 256;

template<std::floating_point T>
struct SvdOptions {
    SvdVectors  vectors    = SvdVectors::both;
    SvdMethod   method     = SvdMethod::automatic;
    std::size_t leading    = 0;        /// 0 = all min(rows, cols) singular vectors, >0 = only the first `leading`
    T           tolerance  = T(1e-14); /// a column pair is rotated while |cos angle| exceeds this
    std::size_t max_sweeps = 30;
};

/// Thin SVD: m = u * diag(sigma) * vh with p = min(rows, cols) singular values.
/// With SvdOptions::leading set, u and vh hold only that many vectors; sigma is always complete.
template<std::floating_point T>
struct SvdResult {
    ComplexMatrix<T> u;     /// rows x p, orthonormal columns
    std::vector<T>   sigma; /// p values, descending, nonnegative
    ComplexMatrix<T> vh;    /// p x cols, orthonormal rows
    std::size_t      sweeps = 0; /// Jacobi sweeps used, 0 for divide and conquer
};

namespace detail {

template<typename T>
void require_finite(const ComplexMatrix<T>& m, const char* who) {
    for (const auto& v : m.entries()) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw InvalidInput(std::string(who) + ": matrix contains non-finite entries");
        }
    }
}

// Column-major split-complex storage for the Jacobi kernel. Keeping real and
// imaginary parts in separate contiguous arrays lets the inner loops vectorize.
template<typename T>
struct SplitColumns {
    std::size_t    rows = 0;
    std::size_t    cols = 0;
    std::vector<T> re;
    std::vector<T> im;

    SplitColumns(std::size_t r, std::size_t c) : rows(r), cols(c), re(r * c, T{0}), im(r * c, T{0}) {}

    T*       re_col(std::size_t j) noexcept { return re.data() + j * rows; }
    T*       im_col(std::size_t j) noexcept { return im.data() + j * rows; }
    const T* re_col(std::size_t j) const noexcept { return re.data() + j * rows; }
    const T* im_col(std::size_t j) const noexcept { return im.data() + j * rows; }
};

template<typename T>
T column_norm_sq(const T* __restrict re, const T* __restrict im, std::size_t n) {
    T s = 0;
#pragma omp simd reduction(+ : s)
    for (std::size_t k = 0; k < n; ++k) {
        s += re[k] * re[k] + im[k] * im[k];
    }
    return s;
}

// x_i^H x_j, with independent partial sums so the FMA chains overlap
template<typename T>
std::complex<T> column_dot(const T* __restrict ri, const T* __restrict ii, const T* __restrict rj, const T* __restrict ij, std::size_t n) {
    constexpr std::size_t lanes = 32;
    T                     sr[lanes] = {};
    T                     si[lanes] = {};
    std::size_t           k         = 0;
    for (; k + lanes <= n; k += lanes) {
#pragma omp simd
        for (std::size_t l = 0; l < lanes; ++l) {
            sr[l] += ri[k + l] * rj[k + l] + ii[k + l] * ij[k + l];
            si[l] += ri[k + l] * ij[k + l] - ii[k + l] * rj[k + l];
        }
    }
    T tr = 0;
    T ti = 0;
    for (; k < n; ++k) {
        tr += ri[k] * rj[k] + ii[k] * ij[k];
        ti += ri[k] * ij[k] - ii[k] * rj[k];
    }
    for (std::size_t l = 0; l < lanes; ++l) {
        tr += sr[l];
        ti += si[l];
    }
    return {tr, ti};
}

// x_i <- c x_i - s e x_j ;  x_j <- s x_i + c e x_j   (c, s real, |e| = 1)
template<typename T>
void rotate_columns(T* __restrict ri, T* __restrict ii, T* __restrict rj, T* __restrict ij, std::size_t n, T c, T s, std::complex<T> e) {
    const T er = e.real();
    const T ei = e.imag();
#pragma omp simd
    for (std::size_t k = 0; k < n; ++k) {
        const T xr = ri[k];
        const T xi = ii[k];
        const T yr = er * rj[k] - ei * ij[k];
        const T yi = er * ij[k] + ei * rj[k];
        ri[k]      = c * xr - s * yr;
        ii[k]      = c * xi - s * yi;
        rj[k]      = s * xr + c * yr;
        ij[k]      = s * xi + c * yi;
    }
}

// rotate_columns fused with the dot product x_i'^H x_next of the updated x_i,
// which is what the next pair in the sweep needs.
template<typename T>
std::complex<T> rotate_columns_dot(T* __restrict ri, T* __restrict ii, T* __restrict rj, T* __restrict ij, const T* __restrict rn, const T* __restrict in, std::size_t n, T c, T s, std::complex<T> e) {
    constexpr std::size_t lanes = 16;
    T                     sr[lanes] = {};
    T                     si[lanes] = {};
    const T               er        = e.real();
    const T               ei        = e.imag();
    std::size_t           k         = 0;
    for (; k + lanes <= n; k += lanes) {
#pragma omp simd
        for (std::size_t l = 0; l < lanes; ++l) {
            const T xr  = ri[k + l];
            const T xi  = ii[k + l];
            const T yr  = er * rj[k + l] - ei * ij[k + l];
            const T yi  = er * ij[k + l] + ei * rj[k + l];
            const T nxr = c * xr - s * yr;
            const T nxi = c * xi - s * yi;
            ri[k + l]   = nxr;
            ii[k + l]   = nxi;
            rj[k + l]   = s * xr + c * yr;
            ij[k + l]   = s * xi + c * yi;
            sr[l] += nxr * rn[k + l] + nxi * in[k + l];
            si[l] += nxr * in[k + l] - nxi * rn[k + l];
        }
    }
    T tr = 0;
    T ti = 0;
    for (; k < n; ++k) {
        const T xr  = ri[k];
        const T xi  = ii[k];
        const T yr  = er * rj[k] - ei * ij[k];
        const T yi  = er * ij[k] + ei * rj[k];
        const T nxr = c * xr - s * yr;
        const T nxi = c * xi - s * yi;
        ri[k]       = nxr;
        ii[k]       = nxi;
        rj[k]       = s * xr + c * yr;
        ij[k]       = s * xi + c * yi;
        tr += nxr * rn[k] + nxi * in[k];
        ti += nxr * in[k] - nxi * rn[k];
    }
    for (std::size_t l = 0; l < lanes; ++l) {
        tr += sr[l];
        ti += si[l];
    }
    return {tr, ti};
}

struct JacobiOutcome {
    std::size_t sweeps    = 0;
    bool        converged = false;
};

// One-sided Jacobi: rotates column pairs of `w` until all columns are mutually
// orthogonal. When `accum` is non-null the same rotations are applied to it,
// so that w_in * accum = w_out. Columns are visited in order of decreasing
// norm, refreshed every sweep.
template<typename T>
JacobiOutcome orthogonalize_columns(SplitColumns<T>& w, SplitColumns<T>* accum, T tolerance, std::size_t max_sweeps, std::vector<T>& norms) {
    const std::size_t n = w.cols;
    norms.assign(n, T{0});
    T total = 0;
    for (std::size_t j = 0; j < n; ++j) {
        norms[j] = column_norm_sq(w.re_col(j), w.im_col(j), w.rows);
        total += norms[j];
    }
    // columns below this are numerically zero relative to the whole matrix
    const T negligible = std::numeric_limits<T>::epsilon() * std::numeric_limits<T>::epsilon() * total;

    const std::size_t colBytes = (w.rows + (accum != nullptr ? accum->rows : 0)) * 2 * sizeof(T);
    const std::size_t block    = std::clamp<std::size_t>((std::size_t{1} << 18) / std::max<std::size_t>(colBytes, 1), 4, 64);

    JacobiOutcome out;
    if (total == T{0} || n < 2) {
        out.converged = true;
        return out;
    }

    std::vector<std::size_t> order(n);
    while (out.sweeps < max_sweeps) {
        ++out.sweeps;
        // the analytic norm updates drift; refresh once per sweep
        for (std::size_t j = 0; j < n; ++j) {
            norms[j] = column_norm_sq(w.re_col(j), w.im_col(j), w.rows);
        }
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

        std::size_t rotations = 0;
        // pairs (order[p], order[q]) for q in [qBegin, qEnd); the dot for the next q rides along with each rotation
        auto sweepSegment = [&](std::size_t p, std::size_t qBegin, std::size_t qEnd) {
            if (qBegin >= qEnd) {
                return;
            }
            const std::size_t i = order[p];
            std::complex<T>   g = column_dot(w.re_col(i), w.im_col(i), w.re_col(order[qBegin]), w.im_col(order[qBegin]), w.rows);
            for (std::size_t q = qBegin; q < qEnd; ++q) {
                const std::size_t j       = order[q];
                const bool        hasNext = q + 1 < qEnd;
                const std::size_t next    = hasNext ? order[q + 1] : j;
                const T           a       = norms[i];
                const T           b       = norms[j];
                const T           absG    = std::abs(g);
                if (a <= negligible || b <= negligible || absG <= tolerance * std::sqrt(a) * std::sqrt(b)) {
                    if (hasNext) {
                        g = column_dot(w.re_col(i), w.im_col(i), w.re_col(next), w.im_col(next), w.rows);
                    }
                    continue;
                }
                ++rotations;

                const T zeta = (b - a) / (T{2} * absG);
                T       t    = T{1} / (std::abs(zeta) + std::sqrt(T{1} + zeta * zeta));
                if (zeta < T{0}) {
                    t = -t;
                }
                const T               c = T{1} / std::sqrt(T{1} + t * t);
                const T               s = c * t;
                const std::complex<T> e = std::conj(g) / absG;

                if (hasNext) {
                    g = rotate_columns_dot(w.re_col(i), w.im_col(i), w.re_col(j), w.im_col(j), w.re_col(next), w.im_col(next), w.rows, c, s, e);
                } else {
                    rotate_columns(w.re_col(i), w.im_col(i), w.re_col(j), w.im_col(j), w.rows, c, s, e);
                }
                if (accum != nullptr) {
                    rotate_columns(accum->re_col(i), accum->im_col(i), accum->re_col(j), accum->im_col(j), accum->rows, c, s, e);
                }
                norms[i] = std::max(a - t * absG, T{0});
                norms[j] = b + t * absG;
            }
        };

        // block-cyclic ordering over the sorted positions keeps two column blocks in cache
        for (std::size_t bi = 0; bi < n; bi += block) {
            const std::size_t ei = std::min(bi + block, n);
            for (std::size_t bj = bi; bj < n; bj += block) {
                const std::size_t ej = std::min(bj + block, n);
                for (std::size_t p = bi; p < ei; ++p) {
                    sweepSegment(p, std::max(p + 1, bj), ej);
                }
            }
        }
        if (rotations == 0) {
            out.converged = true;
            break;
        }
    }
    return out;
}

// Orthonormalizes `col` against the first `count` columns of `basis` (rows x *), twice.
template<typename T>
bool orthonormalize_against(std::vector<std::complex<T>>& col, const std::vector<std::vector<std::complex<T>>>& basis) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) {
            std::complex<T> proj{};
            for (std::size_t k = 0; k < col.size(); ++k) {
                proj += std::conj(q[k]) * col[k];
            }
            for (std::size_t k = 0; k < col.size(); ++k) {
                col[k] -= proj * q[k];
            }
        }
    }
    T nrm = 0;
    for (const auto& v : col) {
        nrm += std::norm(v);
    }
    nrm = std::sqrt(nrm);
    if (!(nrm > T(1e-8))) {
        return false;
    }
    for (auto& v : col) {
        v /= nrm;
    }
    return true;
}

// Normalizes the leading `p` columns of `q` (sorted by `order`) into orthonormal
// vectors. Columns whose norm is negligible are replaced by an orthonormal completion.
template<typename T>
std::vector<std::vector<std::complex<T>>> normalized_columns(const SplitColumns<T>& q, const std::vector<std::size_t>& order, const std::vector<T>& sigma, std::size_t p) {
    const T floor = sigma.empty() ? T{0} : sigma.front() * std::numeric_limits<T>::epsilon() * static_cast<T>(std::max(q.rows, q.cols));

    std::vector<std::vector<std::complex<T>>> cols;
    cols.reserve(p);
    std::size_t k = 0;
    for (; k < p && sigma[k] > floor; ++k) {
        const std::size_t             j = order[k];
        std::vector<std::complex<T>> col(q.rows);
        for (std::size_t r = 0; r < q.rows; ++r) {
            col[r] = std::complex<T>(q.re_col(j)[r], q.im_col(j)[r]) / sigma[k];
        }
        cols.push_back(std::move(col));
    }
    // numerically null directions: complete the orthonormal basis with unit vectors
    std::size_t unit = 0;
    for (; k < p; ++k) {
        std::vector<std::complex<T>> col(q.rows);
        bool                         placed = false;
        while (!placed && unit < q.rows) {
            std::fill(col.begin(), col.end(), std::complex<T>{});
            col[unit++] = std::complex<T>{1};
            placed      = orthonormalize_against(col, cols);
        }
        cols.push_back(std::move(col));
    }
    return cols;
}

} // namespace detail

namespace detail {

// The kernel orthogonalizes the columns of either the matrix or its adjoint,
// whichever needs fewer column rotations for the requested vectors.
template<std::floating_point T>
SvdResult<T> jacobi_svd(const ComplexMatrix<T>& m, const SvdOptions<T>& options) {
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    const std::size_t p    = std::min(rows, cols);
    const bool        wantU = options.vectors == SvdVectors::both;

    // Working on m itself yields U directly and V through accumulation;
    // working on m^H yields V directly and U through accumulation.
    bool onAdjoint = false;
    if (wantU) {
        onAdjoint = rows < cols;
    } else {
        const double direct  = static_cast<double>(cols) * static_cast<double>(cols) * static_cast<double>(rows + cols);
        const double adjoint = static_cast<double>(rows) * static_cast<double>(rows) * static_cast<double>(cols);
        onAdjoint            = adjoint <= direct;
    }

    const std::size_t wRows = onAdjoint ? cols : rows;
    const std::size_t wCols = onAdjoint ? rows : cols;

    SplitColumns<T> w(wRows, wCols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const auto v = m(i, j);
            if (onAdjoint) {
                w.re_col(i)[j] = v.real();
                w.im_col(i)[j] = -v.imag();
            } else {
                w.re_col(j)[i] = v.real();
                w.im_col(j)[i] = v.imag();
            }
        }
    }

    // accumulation is needed for the side not delivered by the columns themselves
    const bool                              accumulate = onAdjoint ? wantU : true;
    std::optional<SplitColumns<T>> acc;
    if (accumulate) {
        acc.emplace(wCols, wCols);
        for (std::size_t j = 0; j < wCols; ++j) {
            acc->re_col(j)[j] = T{1};
        }
    }

    std::vector<T> norms;
    const auto     outcome = orthogonalize_columns(w, acc ? &*acc : nullptr, options.tolerance, options.max_sweeps, norms);
    if (!outcome.converged) {
        throw NumericalError("svd: Jacobi iteration did not converge within " + std::to_string(options.max_sweeps) + " sweeps for a " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
    }

    std::vector<std::size_t> order(wCols);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

    SvdResult<T> result;
    result.sweeps = outcome.sweeps;
    result.sigma.resize(p);
    for (std::size_t k = 0; k < p; ++k) {
        result.sigma[k] = std::sqrt(norms[order[k]]);
    }

    const std::size_t count = options.leading == 0 ? p : std::min(options.leading, p);

    // columns of w (normalized) are the singular vectors of the working side
    const auto direct          = normalized_columns(w, order, result.sigma, count);
    auto       fromAccumulated = [&](std::size_t k, std::size_t r) { return std::complex<T>(acc->re_col(order[k])[r], acc->im_col(order[k])[r]); };

    result.vh = ComplexMatrix<T>(count, cols);
    if (wantU) {
        result.u = ComplexMatrix<T>(rows, count);
    }
    for (std::size_t k = 0; k < count; ++k) {
        if (onAdjoint) {
            // m^H = V S U^H: V from the columns, U accumulated
            for (std::size_t c = 0; c < cols; ++c) {
                result.vh(k, c) = std::conj(direct[k][c]);
            }
            if (wantU) {
                for (std::size_t r = 0; r < rows; ++r) {
                    result.u(r, k) = fromAccumulated(k, r);
                }
            }
        } else {
            // m = U S V^H: U from the columns, V accumulated
            for (std::size_t c = 0; c < cols; ++c) {
                result.vh(k, c) = std::conj(fromAccumulated(k, c));
            }
            if (wantU) {
                for (std::size_t r = 0; r < rows; ++r) {
                    result.u(r, k) = direct[k][r];
                }
            }
        }
    }
    return result;
}

template<std::floating_point T>
SvdResult<T> divide_and_conquer_svd(const ComplexMatrix<T>& m, const SvdOptions<T>& options) {
    using EigenMatrix = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic>;

    const auto  rows  = static_cast<Eigen::Index>(m.rows());
    const auto  cols  = static_cast<Eigen::Index>(m.cols());
    const bool  wantU = options.vectors == SvdVectors::both;
    EigenMatrix a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            a(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
    }

    unsigned int flags = Eigen::ComputeThinV;
    if (wantU) {
        flags |= Eigen::ComputeThinU;
    }
    Eigen::BDCSVD<EigenMatrix> dec(a, flags);
    if (dec.info() != Eigen::Success) {
        throw NumericalError("svd: divide and conquer failed for a " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + " matrix");
    }

    const std::size_t p     = std::min(m.rows(), m.cols());
    const std::size_t count = options.leading == 0 ? p : std::min(options.leading, p);

    SvdResult<T> result;
    result.sigma.resize(p);
    for (std::size_t k = 0; k < p; ++k) {
        result.sigma[k] = dec.singularValues()(static_cast<Eigen::Index>(k));
    }
    const auto& v = dec.matrixV();
    result.vh     = ComplexMatrix<T>(count, m.cols());
    for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            result.vh(k, c) = std::conj(v(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)));
        }
    }
    if (wantU) {
        const auto& u = dec.matrixU();
        result.u      = ComplexMatrix<T>(m.rows(), count);
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t k = 0; k < count; ++k) {
                result.u(r, k) = u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k));
            }
        }
    }
    return result;
}

} // namespace detail

/// Thin singular value decomposition.
///
/// Matrices with min(rows, cols) up to jacobi_size_limit use one-sided Jacobi
/// rotations, larger ones divide and conquer. Throws NumericalError when the
/// Jacobi kernel misses its tolerance within `max_sweeps` sweeps.
template<std::floating_point T>
SvdResult<T> svd(const ComplexMatrix<T>& m, const SvdOptions<T>& options = {}) {
    if (m.empty()) {
        throw InvalidInput("svd: empty matrix");
    }
    detail::require_finite(m, "svd");

    const bool useJacobi = options.method == SvdMethod::jacobi || (options.method == SvdMethod::automatic && std::min(m.rows(), m.cols()) <= jacobi_size_limit);
    return useJacobi ? detail::jacobi_svd(m, options) : detail::divide_and_conquer_svd(m, options);
}

/// Least-squares solution X of a * X ~= b (minimum-norm when a is rank deficient).
///
/// Singular values below max(rows, cols) * sigma_max * 1e-12 are treated as zero.
template<std::floating_point T>
ComplexMatrix<T> lstsq(const ComplexMatrix<T>& a, const ComplexMatrix<T>& b) {
    if (a.rows() != b.rows()) {
        throw InvalidInput("lstsq: a has " + std::to_string(a.rows()) + " rows but b has " + std::to_string(b.rows()));
    }
    if (a.rows() < a.cols()) {
        throw InvalidInput("lstsq: system is underdetermined (" + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ")");
    }
    detail::require_finite(b, "lstsq");

    const auto        dec    = svd(a);
    const std::size_t p      = dec.sigma.size();
    const T           cutoff = static_cast<T>(std::max(a.rows(), a.cols())) * dec.sigma.front() * T(1e-12);

    // X = V diag(1/sigma) U^H b, skipping negligible singular values
    ComplexMatrix<T> x(a.cols(), b.cols());
    for (std::size_t k = 0; k < p; ++k) {
        if (!(dec.sigma[k] > cutoff)) {
            break;
        }
        for (std::size_t c = 0; c < b.cols(); ++c) {
            std::complex<T> proj{};
            for (std::size_t r = 0; r < a.rows(); ++r) {
                proj += std::conj(dec.u(r, k)) * b(r, c);
            }
            proj /= dec.sigma[k];
            for (std::size_t i = 0; i < a.cols(); ++i) {
                x(i, c) += std::conj(dec.vh(k, i)) * proj;
            }
        }
    }
    return x;
}

namespace detail {

// Unitary Givens rotation G = [c s; -conj(s) c] with G [x; y] = [r; 0].
template<typename T>
struct Givens {
    T               c;
    std::complex<T> s;

    static Givens zeroing(std::complex<T> x, std::complex<T> y) {
        const T ay = std::abs(y);
        if (ay == T{0}) {
            return {T{1}, {}};
        }
        const T ax = std::abs(x);
        if (ax == T{0}) {
            return {T{0}, std::complex<T>{1}};
        }
        const T r = std::hypot(ax, ay);
        return {ax / r, (x / ax) * std::conj(y) / r};
    }
};

// Householder reduction to upper Hessenberg form, in place.
template<typename T>
void reduce_to_hessenberg(ComplexMatrix<T>& h) {
    const std::size_t n = h.rows();
    std::vector<std::complex<T>> v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        T tail = 0;
        for (std::size_t i = k + 2; i < n; ++i) {
            tail += std::norm(h(i, k));
        }
        if (tail == T{0}) {
            continue;
        }
        const std::complex<T> x0    = h(k + 1, k);
        const T               alpha = std::sqrt(std::norm(x0) + tail);
        const std::complex<T> phase = std::abs(x0) > T{0} ? x0 / std::abs(x0) : std::complex<T>{1};

        // v = x + phase*alpha*e1, H = I - 2 v v^H / (v^H v)
        std::fill(v.begin(), v.end(), std::complex<T>{});
        v[k + 1] = x0 + phase * alpha;
        for (std::size_t i = k + 2; i < n; ++i) {
            v[i] = h(i, k);
        }
        T vnorm = 0;
        for (std::size_t i = k + 1; i < n; ++i) {
            vnorm += std::norm(v[i]);
        }
        const T beta = T{2} / vnorm;

        // left: h <- (I - beta v v^H) h
        for (std::size_t j = k; j < n; ++j) {
            std::complex<T> s{};
            for (std::size_t i = k + 1; i < n; ++i) {
                s += std::conj(v[i]) * h(i, j);
            }
            s *= beta;
            for (std::size_t i = k + 1; i < n; ++i) {
                h(i, j) -= v[i] * s;
            }
        }
        // right: h <- h (I - beta v v^H)
        for (std::size_t i = 0; i < n; ++i) {
            std::complex<T> s{};
            for (std::size_t j = k + 1; j < n; ++j) {
                s += h(i, j) * v[j];
            }
            s *= beta;
            for (std::size_t j = k + 1; j < n; ++j) {
                h(i, j) -= s * std::conj(v[j]);
            }
        }
        for (std::size_t i = k + 2; i < n; ++i) {
            h(i, k) = std::complex<T>{};
        }
    }
}

} // namespace detail

/// All eigenvalues of a square complex matrix (with multiplicity, unordered).
///
/// Hessenberg reduction followed by single-shift QR with Wilkinson shifts and
/// deflation. At most 100 * side QR steps are taken before NumericalError.
template<std::floating_point T>
std::vector<std::complex<T>> eigenvalues(const ComplexMatrix<T>& m) {
    if (m.empty() || m.rows() != m.cols()) {
        throw InvalidInput("eigenvalues: matrix must be square, got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    if (m.rows() > 256) {
        throw InvalidInput("eigenvalues: side " + std::to_string(m.rows()) + " exceeds the supported maximum of 256");
    }
    detail::require_finite(m, "eigenvalues");

    const std::size_t n = m.rows();
    ComplexMatrix<T>  h = m;
    detail::reduce_to_hessenberg(h);

    std::vector<std::complex<T>> eig(n);
    const std::size_t            cap   = 100 * n;
    std::size_t                  steps = 0;
    std::size_t                  sinceDeflation = 0;
    std::vector<detail::Givens<T>> rot(n);

    constexpr T eps = std::numeric_limits<T>::epsilon();
    std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(n) - 1;
    while (hi >= 0) {
        const auto uhi = static_cast<std::size_t>(hi);
        // find the start of the active unreduced block
        std::size_t lo = uhi;
        while (lo > 0) {
            const T scale = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
            if (std::abs(h(lo, lo - 1)) <= eps * (scale > T{0} ? scale : T{1})) {
                h(lo, lo - 1) = std::complex<T>{};
                break;
            }
            --lo;
        }
        if (lo == uhi) {
            eig[uhi] = h(uhi, uhi);
            --hi;
            sinceDeflation = 0;
            continue;
        }
        if (++steps > cap) {
            throw NumericalError("eigenvalues: QR iteration did not converge within " + std::to_string(cap) + " steps for a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
        }
        ++sinceDeflation;

        // Wilkinson shift from the trailing 2x2 block; ad hoc shift every 10 stalled steps
        const auto            a = h(uhi - 1, uhi - 1);
        const auto            b = h(uhi - 1, uhi);
        const auto            c = h(uhi, uhi - 1);
        const auto            d = h(uhi, uhi);
        std::complex<T>       mu;
        if (sinceDeflation % 10 == 0) {
            mu = d + std::complex<T>(std::abs(c.real()) + std::abs(c.imag()), 0);
        } else {
            const auto half = (a - d) / T{2};
            const auto disc = std::sqrt(half * half + b * c);
            const auto m1   = d - b * c / (half + disc);
            const auto m2   = d - b * c / (half - disc);
            const bool ok1  = std::isfinite(m1.real()) && std::isfinite(m1.imag());
            const bool ok2  = std::isfinite(m2.real()) && std::isfinite(m2.imag());
            if (ok1 && ok2) {
                mu = std::abs(m1 - d) <= std::abs(m2 - d) ? m1 : m2;
            } else {
                mu = ok1 ? m1 : (ok2 ? m2 : d);
            }
        }

        // explicit shifted QR step on the block [lo, hi]
        for (std::size_t k = lo; k <= uhi; ++k) {
            h(k, k) -= mu;
        }
        for (std::size_t k = lo; k < uhi; ++k) {
            const auto g = detail::Givens<T>::zeroing(h(k, k), h(k + 1, k));
            rot[k]       = g;
            for (std::size_t j = k; j <= uhi; ++j) {
                const auto x = h(k, j);
                const auto y = h(k + 1, j);
                h(k, j)      = g.c * x + g.s * y;
                h(k + 1, j)  = -std::conj(g.s) * x + g.c * y;
            }
        }
        for (std::size_t k = lo; k < uhi; ++k) {
            const auto&       g    = rot[k];
            const std::size_t last = std::min(k + 2, uhi);
            for (std::size_t i = lo; i <= last; ++i) {
                const auto x = h(i, k);
                const auto y = h(i, k + 1);
                h(i, k)      = g.c * x + std::conj(g.s) * y;
                h(i, k + 1)  = -g.s * x + g.c * y;
            }
        }
        for (std::size_t k = lo; k <= uhi; ++k) {
            h(k, k) += mu;
        }
    }
    return eig;
}

} // namespace hsvd::linalg

#endif // HSVD_LINALG_HPP
