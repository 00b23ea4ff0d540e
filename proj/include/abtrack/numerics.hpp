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

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace abt {

using cxd = std::complex<double>;
using cvec = std::vector<cxd>;

// Dense row-major complex matrix. Dimensions are fixed at construction.
class CMat {
  public:
    CMat() = default;
    CMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cxd &operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const cxd &operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    cxd *data() { return a_.data(); }
    const cxd *data() const { return a_.data(); }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<cxd> a_;
};

// Kronecker product of two vectors; out[i * b.size() + j] = a[i] * b[j].
cvec kron(const cvec &a, const cvec &b);

// Inner product conjugating the first argument: sum conj(a[i]) * b[i].
cxd vdot(const cvec &a, const cvec &b);

// Euclidean norm.
double norm2(const cvec &v);

cvec matvec(const CMat &A, const cvec &x);

// Squared magnitude of the geometric phase sum |sum_{m=0}^{M-1} e^{-j m x}|^2.
// The removable singularity at x = 0 (mod 2 pi) takes the limit value M^2;
// the switch happens when |sin(x/2)| < 1e-12.
double fejer_power(std::size_t M, double x);

// Zeroth-order Bessel function of the first kind.
double bessel_j0(double x);

// Solves A x = y. Square systems use partial-pivot Gaussian elimination;
// tall systems are solved in the least-squares sense through the normal
// equations. Throws std::runtime_error with a pivot-based condition estimate
// when the system is singular or rank deficient, std::invalid_argument for
// shape mismatches and underdetermined systems.
cvec solve_linear(CMat A, cvec y);

// In-place radix-2 FFT. Length must be a power of two. The forward transform
// is unnormalized; the inverse scales by 1/N.
void fft_pow2(cvec &x, bool inverse);

} // namespace abt
