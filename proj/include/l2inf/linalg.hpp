// Dense row-major linear algebra. All reductions accumulate left to right in
// index order so repeated runs are bit-identical; no BLAS, no threads.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "l2inf/errors.hpp"

namespace l2inf {

using Vector = std::vector<double>;

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // row-major, rows*cols entries

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const double& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    bool empty() const { return rows == 0 || cols == 0; }
};

inline double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vector& a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
}

// y += alpha * x
inline void axpy(double alpha, const Vector& x, Vector& y) {
    if (x.size() != y.size()) throw DimensionError("axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vector l2_row_norms(const Matrix& m) {
    if (m.empty()) throw DimensionError("l2_row_norms: empty matrix");
    Vector out(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double s = 0.0;
        const double* r = m.row(i);
        for (std::size_t j = 0; j < m.cols; ++j) s += r[j] * r[j];
        out[i] = std::sqrt(s);
    }
    return out;
}

// Maximum Euclidean norm over the rows of m.
inline double l2_inf_norm(const Matrix& m) {
    const Vector norms = l2_row_norms(m);
    double best = 0.0;
    for (double v : norms)
        if (v > best) best = v;
    return best;
}

// Rescale every row whose norm exceeds c back to norm exactly c; rows at or
// under the bound (including zero rows) pass through unchanged.
inline Matrix project_rows(Matrix m, double c) {
    if (!(c > 0.0)) throw ConfigError("project_rows: bound c must be positive");
    for (std::size_t i = 0; i < m.rows; ++i) {
        double s = 0.0;
        double* r = m.row(i);
        for (std::size_t j = 0; j < m.cols; ++j) s += r[j] * r[j];
        const double norm = std::sqrt(s);
        if (norm > c) {
            const double scale = c / norm;
            for (std::size_t j = 0; j < m.cols; ++j) r[j] *= scale;
        }
    }
    return m;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw DimensionError("matmul: inner dimensions differ");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double av = arow[k];
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

inline Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols != x.size()) throw DimensionError("matvec: shape mismatch");
    Vector y(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) s += arow[j] * x[j];
        y[i] = s;
    }
    return y;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

inline bool all_finite(const Matrix& m) {
    for (double v : m.data)
        if (!std::isfinite(v)) return false;
    return true;
}

inline bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace l2inf
