// expm.hpp — Dense matrix exponential for the small fixed-size systems used by
// the exact segment propagator. Pade(13) with scaling and squaring (Higham 2005).

#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "lindblad/errors.hpp"

namespace lindblad::detail {

template <std::size_t N>
struct Mat {
    std::array<double, N * N> a{};

    double& operator()(std::size_t i, std::size_t j) { return a[i * N + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * N + j]; }

    static Mat identity() {
        Mat r;
        for (std::size_t i = 0; i < N; ++i) r(i, i) = 1.0;
        return r;
    }
};

template <std::size_t N>
Mat<N> mat_mul(const Mat<N>& x, const Mat<N>& y) {
    Mat<N> r;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = 0; k < N; ++k) {
            const double xik = x(i, k);
            for (std::size_t j = 0; j < N; ++j) r(i, j) += xik * y(k, j);
        }
    return r;
}

template <std::size_t N>
Mat<N> mat_add(const Mat<N>& x, const Mat<N>& y) {
    Mat<N> r;
    for (std::size_t i = 0; i < N * N; ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
}

template <std::size_t N>
Mat<N> mat_scale(const Mat<N>& x, double s) {
    Mat<N> r;
    for (std::size_t i = 0; i < N * N; ++i) r.a[i] = x.a[i] * s;
    return r;
}

// Column-sum norm.
template <std::size_t N>
double mat_norm1(const Mat<N>& x) {
    double best = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < N; ++i) col += std::abs(x(i, j));
        best = std::max(best, col);
    }
    return best;
}

// Solve A X = B with partial pivoting; returns X.
template <std::size_t N>
Mat<N> mat_solve(Mat<N> a, Mat<N> b) {
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < N; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (a(piv, col) == 0.0) throw StepFailure("expm: singular Pade denominator");
        if (piv != col)
            for (std::size_t j = 0; j < N; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(b(piv, j), b(col, j));
            }
        const double inv = 1.0 / a(col, col);
        for (std::size_t r = 0; r < N; ++r) {
            if (r == col) continue;
            const double f = a(r, col) * inv;
            if (f == 0.0) continue;
            for (std::size_t j = col; j < N; ++j) a(r, j) -= f * a(col, j);
            for (std::size_t j = 0; j < N; ++j) b(r, j) -= f * b(col, j);
        }
    }
    for (std::size_t r = 0; r < N; ++r) {
        const double inv = 1.0 / a(r, r);
        for (std::size_t j = 0; j < N; ++j) b(r, j) *= inv;
    }
    return b;
}

template <std::size_t N>
Mat<N> expm(Mat<N> x) {
    static const double pade_b[14] = {64764752532480000.0,
                                      32382376266240000.0,
                                      7771770303897600.0,
                                      1187353796428800.0,
                                      129060195264000.0,
                                      10559470521600.0,
                                      670442572800.0,
                                      33522128640.0,
                                      1323241920.0,
                                      40840800.0,
                                      960960.0,
                                      16380.0,
                                      182.0,
                                      1.0};
    static const double theta13 = 5.371920351148152;

    int squarings = 0;
    const double norm = mat_norm1(x);
    if (norm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
        x = mat_scale(x, std::ldexp(1.0, -squarings));
    }

    const Mat<N> id = Mat<N>::identity();
    const Mat<N> x2 = mat_mul(x, x);
    const Mat<N> x4 = mat_mul(x2, x2);
    const Mat<N> x6 = mat_mul(x4, x2);

    // U = X*(X6*(b13 X6 + b11 X4 + b9 X2) + b7 X6 + b5 X4 + b3 X2 + b1 I)
    Mat<N> tmp = mat_add(mat_scale(x6, pade_b[13]),
                         mat_add(mat_scale(x4, pade_b[11]), mat_scale(x2, pade_b[9])));
    tmp = mat_mul(x6, tmp);
    tmp = mat_add(tmp, mat_add(mat_scale(x6, pade_b[7]),
                               mat_add(mat_scale(x4, pade_b[5]),
                                       mat_add(mat_scale(x2, pade_b[3]),
                                               mat_scale(id, pade_b[1])))));
    const Mat<N> u = mat_mul(x, tmp);

    // V = X6*(b12 X6 + b10 X4 + b8 X2) + b6 X6 + b4 X4 + b2 X2 + b0 I
    tmp = mat_add(mat_scale(x6, pade_b[12]),
                  mat_add(mat_scale(x4, pade_b[10]), mat_scale(x2, pade_b[8])));
    tmp = mat_mul(x6, tmp);
    const Mat<N> v = mat_add(
        tmp, mat_add(mat_scale(x6, pade_b[6]),
                     mat_add(mat_scale(x4, pade_b[4]),
                             mat_add(mat_scale(x2, pade_b[2]), mat_scale(id, pade_b[0])))));

    // (V - U) R = (V + U)
    Mat<N> r = mat_solve(mat_add(v, mat_scale(u, -1.0)), mat_add(v, u));
    for (int i = 0; i < squarings; ++i) r = mat_mul(r, r);
    return r;
}

}  // namespace lindblad::detail
