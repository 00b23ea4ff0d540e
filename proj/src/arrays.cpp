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

#include "abtrack/arrays.hpp"

#include "abtrack/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace abt {

ArrayGeometry make_ula(std::size_t m_tot, double spacing) {
    if (m_tot == 0) throw std::invalid_argument("make_ula: zero elements");
    ArrayGeometry g;
    g.kind = ArrayKind::ULA;
    g.n_x = 1;
    g.n_y = m_tot;
    g.spacing_x = spacing;
    g.spacing_y = spacing;
    return g;
}

ArrayGeometry make_upa(std::size_t n_x, std::size_t n_y, double spacing_x, double spacing_y) {
    if (n_x == 0 || n_y == 0) throw std::invalid_argument("make_upa: zero elements on an axis");
    ArrayGeometry g;
    g.kind = ArrayKind::UPA;
    g.n_x = n_x;
    g.n_y = n_y;
    g.spacing_x = spacing_x;
    g.spacing_y = spacing_y;
    return g;
}

namespace {

cvec steering_axis(std::size_t n, double freq) {
    cvec a(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t m = 0; m < n; ++m) {
        const double ph = freq * static_cast<double>(m);
        a[m] = cxd(std::cos(ph), std::sin(ph)) * scale;
    }
    return a;
}

} // namespace

cvec steering_ula(const ArrayGeometry &g, double nu) {
    if (g.kind != ArrayKind::ULA) throw std::invalid_argument("steering_ula: geometry is not a ULA");
    return steering_axis(g.n_y, nu);
}

cvec steering_upa(const ArrayGeometry &g, double theta, double psi) {
    return kron(steering_axis(g.n_x, theta), steering_axis(g.n_y, psi));
}

SpatialPair angles_to_spatial(double mu, double phi, const ArrayGeometry &g) {
    const double s = std::sin(mu);
    SpatialPair out;
    out.theta = 2.0 * std::numbers::pi * g.spacing_x * s * std::cos(phi);
    out.psi = 2.0 * std::numbers::pi * g.spacing_y * s * std::sin(phi);
    return out;
}

PhysicalPair spatial_to_angles(double theta, double psi, const ArrayGeometry &g) {
    const double u = theta / (2.0 * std::numbers::pi * g.spacing_x);
    const double w = psi / (2.0 * std::numbers::pi * g.spacing_y);
    const double s = std::hypot(u, w);
    if (s <= 0.0 || s > 1.0 + 1e-12)
        throw std::domain_error("spatial_to_angles: no preimage on the principal sector");
    if (u <= 0.0)
        throw std::domain_error("spatial_to_angles: azimuth outside (-pi/2, pi/2)");
    PhysicalPair out;
    out.mu = std::asin(std::min(s, 1.0));
    out.phi = std::atan2(w, u);
    return out;
}

ImpairmentModel ImpairmentModel::ideal(const ArrayGeometry &g) {
    ImpairmentModel m;
    m.phase_el.assign(g.n_x, 0.0);
    m.phase_az.assign(g.n_y, 0.0);
    m.amp_el.assign(g.n_x, 1.0);
    m.amp_az.assign(g.n_y, 1.0);
    m.c_diag.assign(g.total(), cxd(1.0));
    return m;
}

ImpairmentModel ImpairmentModel::draw(const ArrayGeometry &g, double variance_phase,
                                      double variance_amp, std::uint64_t seed) {
    if (variance_phase < 0.0 || variance_amp < 0.0)
        throw std::invalid_argument("ImpairmentModel::draw: negative variance");
    ImpairmentModel m;
    m.variance_phase = variance_phase;
    m.variance_amp = variance_amp;
    m.seed = seed;
    RngStream rng(seed, "impairments");
    const double sp = std::sqrt(variance_phase);
    const double sa = std::sqrt(variance_amp);
    m.phase_el.resize(g.n_x);
    m.amp_el.resize(g.n_x);
    for (std::size_t i = 0; i < g.n_x; ++i) {
        m.phase_el[i] = sp * rng.normal();
        m.amp_el[i] = std::max(1.0 + sa * rng.normal(), 0.05);
    }
    m.phase_az.resize(g.n_y);
    m.amp_az.resize(g.n_y);
    for (std::size_t i = 0; i < g.n_y; ++i) {
        m.phase_az[i] = sp * rng.normal();
        m.amp_az[i] = std::max(1.0 + sa * rng.normal(), 0.05);
    }
    m.c_diag.resize(g.total());
    for (std::size_t ix = 0; ix < g.n_x; ++ix) {
        for (std::size_t iy = 0; iy < g.n_y; ++iy) {
            const double amp = m.amp_el[ix] * m.amp_az[iy];
            const double ph = m.phase_el[ix] + m.phase_az[iy];
            m.c_diag[ix * g.n_y + iy] = amp * cxd(std::cos(ph), std::sin(ph));
        }
    }
    return m;
}

cvec apply_impairment(const ImpairmentModel &c, const cvec &w) {
    if (c.c_diag.size() != w.size())
        throw std::invalid_argument("apply_impairment: dimension mismatch");
    cvec out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = c.c_diag[i] * w[i];
    return out;
}

} // namespace abt
