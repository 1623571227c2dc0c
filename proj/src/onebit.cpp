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

#include "obdoa/onebit.hpp"

#include "obdoa/dataset_io.hpp"
#include "obdoa/parallel.hpp"
#include "obdoa/rng.hpp"
#include "obdoa/text.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace obdoa {

void SourceScene::validate(const ArrayGeometry& geom) const {
    if (doas_deg.empty()) throw std::invalid_argument("scene needs at least one source");
    if (doas_deg.size() != coeffs.size())
        throw std::invalid_argument("scene has " + std::to_string(doas_deg.size()) + " DOAs but " +
                                    std::to_string(coeffs.size()) + " coefficients");
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("noise sigma must be finite and non-negative");
    if (static_cast<Eigen::Index>(doas_deg.size()) >= geom.size())
        throw std::invalid_argument("scene needs fewer sources than array elements");
    for (std::size_t k = 0; k < doas_deg.size(); ++k) {
        if (!(std::abs(doas_deg[k]) <= 90.0))
            throw std::invalid_argument("DOA " + format_double(doas_deg[k]) + " outside [-90, 90]");
        for (std::size_t j = 0; j < k; ++j)
            if (doas_deg[j] == doas_deg[k])
                throw std::invalid_argument("scene DOAs must be pairwise distinct");
    }
}

OneBitSnapshot::OneBitSnapshot(CVector y, std::optional<SourceScene> scene)
    : y_(std::move(y)), scene_(std::move(scene)) {
    for (Eigen::Index n = 0; n < y_.size(); ++n) {
        if (std::abs(y_[n].real()) != 1.0 || std::abs(y_[n].imag()) != 1.0)
            throw std::invalid_argument("one-bit snapshot entry " + std::to_string(n) +
                                        " is not in {+-1 +-j}");
    }
}

OneBitSnapshot OneBitSnapshot::negated() const { return OneBitSnapshot(-y_, scene_); }

CVector csgn(const CVector& z) {
    CVector out(z.size());
    for (Eigen::Index n = 0; n < z.size(); ++n)
        out[n] = cplx(z[n].real() >= 0.0 ? 1.0 : -1.0, z[n].imag() >= 0.0 ? 1.0 : -1.0);
    return out;
}

double snr_to_sigma(double snr_db) { return std::pow(10.0, -snr_db / 20.0); }

CVector draw_unit_noise(Eigen::Index n, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    CVector g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        g[i] = cplx(re, im);
    }
    return g;
}

CVector unquantized_snapshot(const ArrayGeometry& geom, const SourceScene& scene,
                             const CVector& unit_noise) {
    scene.validate(geom);
    if (unit_noise.size() != geom.size())
        throw std::invalid_argument("noise length does not match the array");
    CVector z = CVector::Zero(geom.size());
    for (std::size_t k = 0; k < scene.num_sources(); ++k)
        z += steering_vector(geom, scene.doas_deg[k]) * scene.coeffs[k];
    if (scene.sigma > 0.0) z += unit_noise * (scene.sigma / std::sqrt(2.0));
    return z;
}

OneBitSnapshot simulate_snapshot(const ArrayGeometry& geom, const SourceScene& scene,
                                 std::uint64_t seed) {
    const CVector noise = draw_unit_noise(geom.size(), seed);
    return OneBitSnapshot(csgn(unquantized_snapshot(geom, scene, noise)), scene);
}

Labels label_sample(const SourceScene& scene, const GridSpec& grid) {
    Labels labels{RVector::Zero(grid.size()), RVector::Zero(grid.size())};
    std::vector<bool> taken(static_cast<std::size_t>(grid.size()), false);
    for (std::size_t k = 0; k < scene.num_sources(); ++k) {
        const double theta = scene.doas_deg[k];
        if (!grid.contains(theta))
            throw std::invalid_argument("DOA " + format_double(theta) + " outside the grid field of view");
        const Eigen::Index m = grid.nearest_index(theta);
        if (taken[static_cast<std::size_t>(m)])
            throw std::invalid_argument("two sources map to grid index " + std::to_string(m));
        taken[static_cast<std::size_t>(m)] = true;
        labels.s_star[m] = std::abs(scene.coeffs[k]);
        labels.beta_star[m] = theta - grid.point(m);
    }
    return labels;
}

void DatasetConfig::validate() const {
    if (sources < 1 || sources >= geometry.size())
        throw std::invalid_argument("source count must be in [1, N)");
    if (sources > grid.size()) throw std::invalid_argument("more sources than grid points");
    if (snr_set_db.empty()) throw std::invalid_argument("SNR set is empty");
    if (count < 1) throw std::invalid_argument("dataset count must be positive");
    if (!(split >= 0.0 && split <= 1.0)) throw std::invalid_argument("split must be in [0, 1]");
    if (!(offset_max_deg >= 0.0)) throw std::invalid_argument("offset range must be non-negative");
    if (!(coeff_min <= coeff_max)) throw std::invalid_argument("coefficient range is empty");
}

std::uint64_t DatasetConfig::train_count() const {
    return static_cast<std::uint64_t>(std::llround(static_cast<double>(count) * split));
}

LabeledSample make_sample(const DatasetConfig& cfg, std::uint64_t seed, std::uint64_t index) {
    Rng rng(derive_seed(seed, {index, 0}));
    const GridSpec& grid = cfg.grid;
    const double offset = std::min(cfg.offset_max_deg, grid.half_step_deg());
    std::uniform_int_distribution<Eigen::Index> pick_index(0, grid.size() - 1);
    std::uniform_real_distribution<double> pick_offset(-offset, offset);
    std::uniform_real_distribution<double> pick_coeff(cfg.coeff_min, cfg.coeff_max);
    std::uniform_int_distribution<std::size_t> pick_snr(0, cfg.snr_set_db.size() - 1);

    const auto k_count = static_cast<std::size_t>(cfg.sources);
    SourceScene scene;
    // Distinct grid indices, each source jittered around its grid point and
    // kept inside the field of view; redraw until labels are collision-free.
    while (true) {
        scene.doas_deg.clear();
        std::vector<Eigen::Index> used;
        while (used.size() < k_count) {
            const Eigen::Index m = pick_index(rng);
            if (std::find(used.begin(), used.end(), m) != used.end()) continue;
            double theta = 0.0;
            do {
                theta = grid.point(m) + pick_offset(rng);
            } while (!grid.contains(theta));
            used.push_back(m);
            scene.doas_deg.push_back(theta);
        }
        std::vector<Eigen::Index> labels;
        for (double theta : scene.doas_deg) labels.push_back(grid.nearest_index(theta));
        std::sort(labels.begin(), labels.end());
        if (std::adjacent_find(labels.begin(), labels.end()) == labels.end()) break;
    }
    scene.coeffs.clear();
    for (std::size_t k = 0; k < k_count; ++k) {
        const double re = pick_coeff(rng);
        const double im = pick_coeff(rng);
        scene.coeffs.emplace_back(re, im);
    }
    const double snr = cfg.snr_set_db[pick_snr(rng)];
    scene.sigma = snr_to_sigma(snr);

    OneBitSnapshot y = simulate_snapshot(cfg.geometry, scene, derive_seed(seed, {index, 1}));
    Labels labels = label_sample(scene, grid);
    return LabeledSample{std::move(y), std::move(labels.s_star), std::move(labels.beta_star), snr};
}

DatasetSummary generate_dataset(const DatasetConfig& cfg, std::uint64_t seed,
                                const std::filesystem::path& out_dir, unsigned jobs) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    DatasetSummary summary;
    summary.train_count = cfg.train_count();
    summary.val_count = cfg.count - summary.train_count;
    summary.train_path = out_dir / "train.obdoa";
    summary.val_path = out_dir / "val.obdoa";

    DatasetWriter train(summary.train_path,
                        make_dataset_header(cfg.geometry, cfg.grid, cfg.sources, summary.train_count));
    DatasetWriter val(summary.val_path,
                      make_dataset_header(cfg.geometry, cfg.grid, cfg.sources, summary.val_count));

    constexpr std::uint64_t kChunk = 4096;
    std::vector<std::optional<LabeledSample>> chunk;
    for (std::uint64_t start = 0; start < cfg.count; start += kChunk) {
        const std::uint64_t n = std::min(kChunk, cfg.count - start);
        chunk.assign(n, std::nullopt);
        parallel_for(n, jobs, [&](std::size_t i) { chunk[i] = make_sample(cfg, seed, start + i); });
        for (std::uint64_t i = 0; i < n; ++i) {
            if (start + i < summary.train_count)
                train.write(*chunk[i]);
            else
                val.write(*chunk[i]);
        }
    }
    train.close();
    val.close();
    return summary;
}

}  // namespace obdoa
