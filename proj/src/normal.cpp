// SPDX-License-Identifier: Apache-2.0
//
// obdoa: one-bit off-grid DOA estimation for sparse linear arrays
// Copyright (C) 2026 The obdoa authors
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

#include "obdoa/normal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace obdoa {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kContinuedFractionBelow = -4.0;

// Modified Lentz evaluation of s + 1/(s + 2/(s + 3/(s + ...))).
double reciprocal_mills_ratio(double s) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-17;
    double f = s;
    double c = f;
    double d = 0.0;
    for (int k = 1; k < 5000; ++k) {
        const double a = k;
        d = s + a * d;
        if (std::abs(d) < tiny) d = tiny;
        c = s + a / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    return f;
}

}  // namespace

double normal_cdf(double t) { return 0.5 * std::erfc(-t * kInvSqrt2); }

double pdf_over_cdf(double t) {
    if (std::isnan(t)) throw std::domain_error("pdf_over_cdf: NaN argument");
    if (t < kContinuedFractionBelow) {
        if (std::isinf(t)) return std::numeric_limits<double>::infinity();
        return reciprocal_mills_ratio(-t);
    }
    return kInvSqrt2Pi * std::exp(-0.5 * t * t) / normal_cdf(t);
}

std::complex<double> i_prime(std::complex<double> d) {
    if (std::isnan(d.real()) || std::isnan(d.imag()))
        throw std::domain_error("i_prime: NaN argument");
    return {-pdf_over_cdf(d.real()), -pdf_over_cdf(d.imag())};
}

}  // namespace obdoa
