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

#pragma once

#include <complex>

namespace obdoa {

/// Standard normal CDF.
double normal_cdf(double t);

/// phi(t) / Phi(t) for the standard normal, finite for every finite t.
///
/// For t >= -4 the ratio is evaluated directly through erfc. Below that, Phi
/// loses relative accuracy long before it underflows (near t = -38), so the
/// reciprocal Mills ratio is evaluated with Laplace's continued fraction
///   phi(t)/Phi(t) = s + 1/(s + 2/(s + 3/(s + ...))),  s = -t,
/// which behaves like s + 1/s for large s.
double pdf_over_cdf(double t);

/// Derivative kernel of log Phi applied component-wise:
///   I'(d) = -phi(Re d)/Phi(Re d) - j phi(Im d)/Phi(Im d).
/// Throws std::domain_error on NaN input.
std::complex<double> i_prime(std::complex<double> d);

}  // namespace obdoa
