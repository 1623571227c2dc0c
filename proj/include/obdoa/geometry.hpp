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

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace obdoa {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;

inline constexpr double deg_to_rad(double deg) { return deg * kDegToRad; }
inline constexpr double rad_to_deg(double rad) { return rad / kDegToRad; }

/// sin/cos of an angle in degrees, exact at 0 and +-90.
double sin_deg(double deg);
double cos_deg(double deg);

/// Linear array element positions in half-wavelength units. The first element
/// is the phase reference and sits at 0.
class ArrayGeometry {
public:
    ArrayGeometry(std::vector<double> positions, std::string name = {});

    const std::vector<double>& positions() const { return positions_; }
    const std::string& name() const { return name_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(positions_.size()); }

    /// Preset name (`sla18`, `sla10`, `ula:N`) or comma-separated positions.
    std::string describe() const;

    friend bool operator==(const ArrayGeometry& a, const ArrayGeometry& b) {
        return a.positions_ == b.positions_;
    }

private:
    std::vector<double> positions_;
    std::string name_;
};

ArrayGeometry make_geometry(std::vector<double> positions);
ArrayGeometry ula(int elements);

/// Resolves `sla18`, `sla10`, `ula:<N>` / `ula(<N>)`, or a comma-separated
/// list of half-wavelength positions.
ArrayGeometry make_geometry(std::string_view spec);

/// Equispaced angular grid in degrees. `step_deg` is the grid interval r.
class GridSpec {
public:
    GridSpec(double fov_min_deg = -60.0, double fov_max_deg = 60.0, double step_deg = 2.0);

    double fov_min_deg() const { return fov_min_; }
    double fov_max_deg() const { return fov_max_; }
    double step_deg() const { return step_; }
    double half_step_deg() const { return 0.5 * step_; }
    Eigen::Index size() const { return count_; }

    double point(Eigen::Index m) const { return fov_min_ + static_cast<double>(m) * step_; }
    RVector points() const;

    /// Index of the grid point closest to `theta_deg`; ties go to the lower index.
    Eigen::Index nearest_index(double theta_deg) const;
    bool contains(double theta_deg) const;

    /// Parses `min:step:max`.
    static GridSpec parse(std::string_view text);
    std::string describe() const;

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.fov_min_ == b.fov_min_ && a.fov_max_ == b.fov_max_ && a.step_ == b.step_;
    }

private:
    double fov_min_;
    double fov_max_;
    double step_;
    Eigen::Index count_;
};

GridSpec evaluation_grid();  // [-90, 90] in 2 degree steps, 91 points

/// Element-wise exp(j*pi*p_n*sin(theta)).
CVector steering_vector(const ArrayGeometry& geom, double theta_deg);

/// d a / d theta with theta in radians: j*pi*p_n*cos(theta) * a_n.
CVector steering_derivative(const ArrayGeometry& geom, double theta_deg);

struct DictionaryPair {
    CMatrix A;  // N x M steering dictionary
    CMatrix B;  // N x M derivative dictionary
    GridSpec grid;
    ArrayGeometry geometry;

    Eigen::Index rows() const { return A.rows(); }
    Eigen::Index cols() const { return A.cols(); }
};

DictionaryPair build_dictionary(const ArrayGeometry& geom, const GridSpec& grid);

/// C(beta) = A + B diag(beta), beta in degrees and converted to radians here.
/// Every |beta_m| must stay within half a grid interval.
CMatrix effective_dictionary(const DictionaryPair& dict, const RVector& beta_deg);

/// Thread-safe memo of dictionaries keyed by (positions, grid).
class DictionaryCache {
public:
    std::shared_ptr<const DictionaryPair> get(const ArrayGeometry& geom, const GridSpec& grid);
    std::size_t size() const;

private:
    using Key = std::pair<std::vector<double>, std::array<double, 3>>;
    mutable std::mutex mutex_;
    std::map<Key, std::shared_ptr<const DictionaryPair>> cache_;
};

}  // namespace obdoa
