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

// Reference outputs from the training side, one row per dataset record:
//
//   sample_id,mag_0,...,mag_{M-1},beta_0,...,beta_{M-1}
//
// sample_id indexes the OBDOA1 file the outputs were computed from;
// magnitudes are max-normalized and gaps are in degrees.

#include "obdoa/dataset_io.hpp"
#include "obdoa/unrolled.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace obdoa {

struct ParityRow {
    std::uint64_t sample_id = 0;
    RVector magnitudes;
    RVector beta_deg;
};

std::vector<ParityRow> read_parity_csv(const std::filesystem::path& path);
void write_parity_csv(const std::vector<ParityRow>& rows, const std::filesystem::path& path);

struct ParityReport {
    std::size_t rows = 0;
    double max_abs_magnitude = 0.0;
    double max_abs_beta_deg = 0.0;
    std::uint64_t worst_sample = 0;

    double max_abs() const { return std::max(max_abs_magnitude, max_abs_beta_deg); }
};

/// Runs forward() on each referenced record and records the largest deviations.
ParityReport check_parity(const std::vector<ParityRow>& reference, DatasetReader& dataset,
                          const WeightBundle& weights);

}  // namespace obdoa
