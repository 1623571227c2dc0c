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

#include "obdoa/geometry.hpp"

#include <vector>

namespace obdoa {

/// Grid spectrum with per-bin off-grid corrections, shared by both estimators.
struct SpectrumEstimate {
    RVector grid_deg;
    RVector magnitudes;  // max-normalized, in [0, 1]
    RVector beta_deg;    // within half a grid interval
    std::vector<double> doas_deg;

    Eigen::Index size() const { return magnitudes.size(); }
};

inline constexpr double kBceEpsilon = 1e-7;

/// |x| / max|x|; all zeros when x is identically zero.
inline RVector normalized_magnitudes(const CVector& x) {
    RVector mag = x.cwiseAbs();
    const double peak = mag.size() > 0 ? mag.maxCoeff() : 0.0;
    if (peak > 0.0) mag /= peak;
    return mag;
}

/// Clamp into (eps, 1 - eps) before a binary cross-entropy.
inline RVector clamp_for_bce(const RVector& p) {
    return p.cwiseMax(kBceEpsilon).cwiseMin(1.0 - kBceEpsilon);
}

}  // namespace obdoa
