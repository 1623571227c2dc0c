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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace obdoa {

/// K far-field sources with complex amplitudes and the per-entry complex noise
/// standard deviation (each of Re/Im carries sigma^2 / 2).
struct SourceScene {
    std::vector<double> doas_deg;
    std::vector<cplx> coeffs;
    double sigma = 0.0;

    std::size_t num_sources() const { return doas_deg.size(); }
    void validate(const ArrayGeometry& geom) const;
};

/// Quantized single snapshot, entries in {+-1 +-j}.
class OneBitSnapshot {
public:
    explicit OneBitSnapshot(CVector y, std::optional<SourceScene> scene = std::nullopt);

    const CVector& y() const { return y_; }
    const std::optional<SourceScene>& scene() const { return scene_; }
    Eigen::Index size() const { return y_.size(); }

    OneBitSnapshot negated() const;

private:
    CVector y_;
    std::optional<SourceScene> scene_;
};

struct LabeledSample {
    OneBitSnapshot y;
    RVector s_star;     // |s_k| at the nearest grid index, 0 elsewhere
    RVector beta_star;  // signed theta_k - grid point (degrees) at the same indices
    double snr_db = 0.0;
};

/// sign(Re) + j sign(Im) with sign(0) = +1.
CVector csgn(const CVector& z);

/// sigma = 10^(-snr/20), SNR referenced to a unit-amplitude source.
double snr_to_sigma(double snr_db);

/// Unit-variance circular noise draws: Re and Im ~ N(0, 1) each.
CVector draw_unit_noise(Eigen::Index n, std::uint64_t seed);

/// A(theta) s + sigma/sqrt(2) * unit_noise, before quantization.
CVector unquantized_snapshot(const ArrayGeometry& geom, const SourceScene& scene,
                             const CVector& unit_noise);

OneBitSnapshot simulate_snapshot(const ArrayGeometry& geom, const SourceScene& scene,
                                 std::uint64_t seed);

struct Labels {
    RVector s_star;
    RVector beta_star;
};

Labels label_sample(const SourceScene& scene, const GridSpec& grid);

struct DatasetConfig {
    ArrayGeometry geometry = make_geometry("sla18");
    GridSpec grid{};
    int sources = 2;
    std::vector<double> snr_set_db = {0, 5, 10, 15, 20, 25, 30};
    std::uint64_t count = 100000;
    double split = 0.9;
    double offset_max_deg = 1.0;
    double coeff_min = 0.5;
    double coeff_max = 1.0;

    void validate() const;
    std::uint64_t train_count() const;
};

/// Deterministic sample `index` of the dataset identified by `seed`.
LabeledSample make_sample(const DatasetConfig& cfg, std::uint64_t seed, std::uint64_t index);

struct DatasetSummary {
    std::filesystem::path train_path;
    std::filesystem::path val_path;
    std::uint64_t train_count = 0;
    std::uint64_t val_count = 0;
};

/// Writes `train.obdoa` (first train_count samples) and `val.obdoa` into `out_dir`.
DatasetSummary generate_dataset(const DatasetConfig& cfg, std::uint64_t seed,
                                const std::filesystem::path& out_dir, unsigned jobs = 1);

}  // namespace obdoa
