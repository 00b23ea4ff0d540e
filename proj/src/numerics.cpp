// SPDX-License-Identifier: Apache-2.0
//
// abtrack: auxiliary-beam-pair angle tracking for mobile mmWave arrays
// Copyright (C) 2026 abtrack contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "abtrack/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace abt {

cvec kron(const cvec &a, const cvec &b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("kron: empty operand");
    cvec out(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
    }
    return out;
}

cxd vdot(const cvec &a, const cvec &b) {
    if (a.size() != b.size()) throw std::invalid_argument("vdot: length mismatch");
    cxd s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double norm2(const cvec &v) {
    double s = 0.0;
    for (const cxd &x : v) s += std::norm(x);
    return std::sqrt(s);
}

cvec matvec(const CMat &A, const cvec &x) {
    if (A.cols() != x.size()) throw std::invalid_argument("matvec: dimension mismatch");
    cvec y(A.rows(), cxd(0.0));
    for (std::size_t i = 0; i < A.rows(); ++i) {
        cxd s = 0.0;
        for (std::size_t j = 0; j < A.cols(); ++j) s += A(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

double fejer_power(std::size_t M, double x) {
    const double h = std::sin(0.5 * x);
    const double m = static_cast<double>(M);
    if (std::abs(h) < 1e-12) return m * m;
    const double n = std::sin(0.5 * m * x);
    return (n * n) / (h * h);
}

double bessel_j0(double x) { return std::cyl_bessel_j(0.0, std::abs(x)); }

namespace {

// Partial-pivot elimination on an augmented in-place system.
cvec solve_square(CMat &A, cvec &y) {
    const std::size_t n = A.rows();
    double max_piv = 0.0;
    double min_piv = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        double best = std::abs(A(c, c));
        for (std::size_t r = c + 1; r < n; ++r) {
            const double v = std::abs(A(r, c));
            if (v > best) {
                best = v;
                p = r;
            }
        }
        max_piv = std::max(max_piv, best);
        min_piv = std::min(min_piv, best);
        if (best <= 1e-13 * std::max(1.0, max_piv)) {
            const double cond = max_piv / std::max(best, 1e-300);
            throw std::runtime_error(
                "solve_linear: singular or rank-deficient system, pivot condition estimate " +
                std::to_string(cond));
        }
        if (p != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A(p, j), A(c, j));
            std::swap(y[p], y[c]);
        }
        for (std::size_t r = c + 1; r < n; ++r) {
            const cxd f = A(r, c) / A(c, c);
            A(r, c) = 0.0;
            for (std::size_t j = c + 1; j < n; ++j) A(r, j) -= f * A(c, j);
            y[r] -= f * y[c];
        }
    }
    cvec x(n);
    for (std::size_t i = n; i-- > 0;) {
        cxd s = y[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
        x[i] = s / A(i, i);
    }
    return x;
}

} // namespace

cvec solve_linear(CMat A, cvec y) {
    if (A.rows() != y.size()) throw std::invalid_argument("solve_linear: dimension mismatch");
    if (A.rows() == 0 || A.cols() == 0) throw std::invalid_argument("solve_linear: empty system");
    if (A.rows() < A.cols()) throw std::invalid_argument("solve_linear: underdetermined system");
    if (A.rows() == A.cols()) return solve_square(A, y);

    const std::size_t n = A.cols();
    CMat G(n, n);
    cvec rhs(n, cxd(0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            cxd s = 0.0;
            for (std::size_t r = 0; r < A.rows(); ++r) s += std::conj(A(r, i)) * A(r, j);
            G(i, j) = s;
            if (j != i) G(j, i) = std::conj(s);
        }
        cxd s = 0.0;
        for (std::size_t r = 0; r < A.rows(); ++r) s += std::conj(A(r, i)) * y[r];
        rhs[i] = s;
    }
    return solve_square(G, rhs);
}

void fft_pow2(cvec &x, bool inverse) {
    const std::size_t n = x.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_pow2: length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    const double sgn = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sgn * 2.0 * std::numbers::pi / static_cast<double>(len);
        const cxd wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cxd w(1.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cxd u = x[i + k];
                const cxd v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (cxd &v : x) v *= inv;
    }
}

} // namespace abt
