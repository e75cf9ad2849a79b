#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "biasprobe/errors.hpp"

namespace biasprobe {

using Vec = std::vector<double>;

/// Dense row-major matrix, just big enough for the library's needs.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec matvec(const Matrix& m, const Vec& x) {
    if (m.cols != x.size()) throw DimensionMismatch("matvec: dimension mismatch");
    Vec y(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double s = 0.0;
        const double* row = m.data.data() + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
    return y;
}

inline Vec matvec_t(const Matrix& m, const Vec& x) {
    if (m.rows != x.size()) throw DimensionMismatch("matvec_t: dimension mismatch");
    Vec y(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* row = m.data.data() + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) y[j] += row[j] * x[i];
    }
    return y;
}

/// Orthonormalize the columns of m in place (modified Gram-Schmidt).
/// Requires rows >= cols and numerically independent columns.
inline void orthonormalize_columns(Matrix& m) {
    for (std::size_t j = 0; j < m.cols; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double proj = 0.0;
            for (std::size_t i = 0; i < m.rows; ++i) proj += m(i, k) * m(i, j);
            for (std::size_t i = 0; i < m.rows; ++i) m(i, j) -= proj * m(i, k);
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < m.rows; ++i) nrm += m(i, j) * m(i, j);
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12) throw DegenerateCovariance("orthonormalize: dependent columns");
        for (std::size_t i = 0; i < m.rows; ++i) m(i, j) /= nrm;
    }
}

/// Solve A x = b for symmetric positive definite A, in-place Cholesky.
inline Vec cholesky_solve(Matrix a, Vec b) {
    const std::size_t n = a.rows;
    if (a.cols != n || b.size() != n) throw DimensionMismatch("cholesky_solve: shape mismatch");
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (d <= 0.0) throw DegenerateCovariance("cholesky: matrix not positive definite");
        d = std::sqrt(d);
        a(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / d;
        }
    }
    // forward then backward substitution on the lower factor
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * b[k];
        b[i] = s / a(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= a(k, ii) * b[k];
        b[ii] = s / a(ii, ii);
    }
    return b;
}

/// Leading eigenpair of a symmetric PSD matrix by power iteration.
inline std::pair<double, Vec> power_iteration(const Matrix& m, int iters = 500) {
    Vec v(m.rows, 1.0);
    // fixed deterministic start, decorrelated across coordinates
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
    double lambda = 0.0;
    for (int it = 0; it < iters; ++it) {
        Vec w = matvec(m, v);
        double nrm = norm2(w);
        if (nrm < 1e-300) return {0.0, v};
        for (auto& x : w) x /= nrm;
        lambda = nrm;
        v = std::move(w);
    }
    return {lambda, v};
}

} // namespace biasprobe
