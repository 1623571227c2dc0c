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

#include "obdoa/geometry.hpp"

#include "obdoa/text.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace obdoa {

namespace {

const std::vector<double> kSla18 = {0, 1, 2, 3, 4, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
const std::vector<double> kSla10 = {0, 3, 4, 5, 6, 7, 11, 16, 18, 19};

void check_angle(double theta_deg) {
    if (!(std::abs(theta_deg) <= 90.0))
        throw std::invalid_argument("angle " + format_double(theta_deg) + " deg is outside [-90, 90]");
}

}  // namespace

double sin_deg(double deg) {
    if (deg == 0.0) return 0.0;
    if (deg == 90.0) return 1.0;
    if (deg == -90.0) return -1.0;
    return std::sin(deg_to_rad(deg));
}

double cos_deg(double deg) {
    if (deg == 0.0) return 1.0;
    if (std::abs(deg) == 90.0) return 0.0;
    return std::cos(deg_to_rad(deg));
}

ArrayGeometry::ArrayGeometry(std::vector<double> positions, std::string name)
    : positions_(std::move(positions)), name_(std::move(name)) {
    if (positions_.size() < 2)
        throw std::invalid_argument("array geometry needs at least 2 elements");
    if (positions_.front() != 0.0)
        throw std::invalid_argument("first element position must be 0, got " +
                                    format_double(positions_.front()));
    for (std::size_t n = 1; n < positions_.size(); ++n) {
        if (!std::isfinite(positions_[n]) || !(positions_[n] > positions_[n - 1]))
            throw std::invalid_argument("element positions must be strictly increasing (index " +
                                        std::to_string(n) + ")");
    }
}

std::string ArrayGeometry::describe() const {
    if (!name_.empty()) return name_;
    return join_doubles(positions_, ",");
}

ArrayGeometry make_geometry(std::vector<double> positions) {
    return ArrayGeometry(std::move(positions));
}

ArrayGeometry ula(int elements) {
    if (elements < 2) throw std::invalid_argument("ula needs at least 2 elements");
    std::vector<double> p(static_cast<std::size_t>(elements));
    for (int n = 0; n < elements; ++n) p[static_cast<std::size_t>(n)] = n;
    return ArrayGeometry(std::move(p), "ula:" + std::to_string(elements));
}

ArrayGeometry make_geometry(std::string_view spec) {
    const std::string s = trim(spec);
    if (s == "sla18") return ArrayGeometry(kSla18, "sla18");
    if (s == "sla10") return ArrayGeometry(kSla10, "sla10");
    if (s.rfind("ula", 0) == 0) {
        std::string rest = s.substr(3);
        if (!rest.empty() && (rest.front() == ':' || rest.front() == '(')) rest.erase(0, 1);
        if (!rest.empty() && rest.back() == ')') rest.pop_back();
        return ula(parse_int(rest));
    }
    return ArrayGeometry(parse_double_list(s));
}

GridSpec::GridSpec(double fov_min_deg, double fov_max_deg, double step_deg)
    : fov_min_(fov_min_deg), fov_max_(fov_max_deg), step_(step_deg) {
    if (!(fov_min_ < fov_max_))
        throw std::invalid_argument("grid requires fov_min < fov_max");
    if (!(step_ > 0.0)) throw std::invalid_argument("grid step must be positive");
    if (fov_min_ < -90.0 || fov_max_ > 90.0)
        throw std::invalid_argument("grid field of view must lie within [-90, 90]");
    // Tolerate representation error so that e.g. 120/2 gives 61 points.
    count_ = static_cast<Eigen::Index>(std::floor((fov_max_ - fov_min_) / step_ + 1e-9)) + 1;
}

RVector GridSpec::points() const {
    RVector p(count_);
    for (Eigen::Index m = 0; m < count_; ++m) p[m] = point(m);
    return p;
}

Eigen::Index GridSpec::nearest_index(double theta_deg) const {
    const double pos = (theta_deg - fov_min_) / step_;
    auto m = static_cast<Eigen::Index>(std::floor(pos));
    if (pos - static_cast<double>(m) > 0.5) ++m;
    if (m < 0) m = 0;
    if (m >= count_) m = count_ - 1;
    return m;
}

bool GridSpec::contains(double theta_deg) const {
    return theta_deg >= fov_min_ && theta_deg <= fov_max_;
}

GridSpec GridSpec::parse(std::string_view text) {
    const auto parts = split(trim(text), ':');
    if (parts.size() != 3) throw std::invalid_argument("grid must be given as min:step:max");
    return GridSpec(parse_double(parts[0]), parse_double(parts[2]), parse_double(parts[1]));
}

std::string GridSpec::describe() const {
    return format_double(fov_min_) + ":" + format_double(step_) + ":" + format_double(fov_max_);
}

GridSpec evaluation_grid() { return GridSpec(-90.0, 90.0, 2.0); }

CVector steering_vector(const ArrayGeometry& geom, double theta_deg) {
    check_angle(theta_deg);
    const double s = sin_deg(theta_deg);
    const auto& p = geom.positions();
    CVector a(geom.size());
    for (Eigen::Index n = 0; n < a.size(); ++n)
        a[n] = std::polar(1.0, kPi * p[static_cast<std::size_t>(n)] * s);
    return a;
}

CVector steering_derivative(const ArrayGeometry& geom, double theta_deg) {
    check_angle(theta_deg);
    const double c = cos_deg(theta_deg);
    const CVector a = steering_vector(geom, theta_deg);
    const auto& p = geom.positions();
    CVector b(geom.size());
    for (Eigen::Index n = 0; n < b.size(); ++n)
        b[n] = cplx(0.0, kPi * p[static_cast<std::size_t>(n)] * c) * a[n];
    return b;
}

DictionaryPair build_dictionary(const ArrayGeometry& geom, const GridSpec& grid) {
    const Eigen::Index n_elem = geom.size();
    const Eigen::Index n_grid = grid.size();
    CMatrix A(n_elem, n_grid);
    CMatrix B(n_elem, n_grid);
    for (Eigen::Index m = 0; m < n_grid; ++m) {
        A.col(m) = steering_vector(geom, grid.point(m));
        B.col(m) = steering_derivative(geom, grid.point(m));
    }
    return DictionaryPair{std::move(A), std::move(B), grid, geom};
}

CMatrix effective_dictionary(const DictionaryPair& dict, const RVector& beta_deg) {
    if (beta_deg.size() != dict.cols())
        throw std::invalid_argument("beta length " + std::to_string(beta_deg.size()) +
                                    " does not match grid size " + std::to_string(dict.cols()));
    const double limit = dict.grid.half_step_deg() * (1.0 + 1e-12);
    CMatrix C = dict.A;
    for (Eigen::Index m = 0; m < dict.cols(); ++m) {
        const double b = beta_deg[m];
        if (!(std::abs(b) <= limit))
            throw std::invalid_argument("off-grid gap " + format_double(b) + " deg at index " +
                                        std::to_string(m) + " exceeds half a grid interval");
        if (b != 0.0) C.col(m) += dict.B.col(m) * deg_to_rad(b);
    }
    return C;
}

std::shared_ptr<const DictionaryPair> DictionaryCache::get(const ArrayGeometry& geom,
                                                           const GridSpec& grid) {
    Key key{geom.positions(), {grid.fov_min_deg(), grid.fov_max_deg(), grid.step_deg()}};
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    auto dict = std::make_shared<const DictionaryPair>(build_dictionary(geom, grid));
    cache_.emplace(std::move(key), dict);
    return dict;
}

std::size_t DictionaryCache::size() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

}  // namespace obdoa
