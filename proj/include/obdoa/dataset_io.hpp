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

// OBDOA1 dataset container.
//
// Header (little-endian):
//   magic "OBDOA1" (6 bytes) | version u16 | N u32 | M u32 | K u32 |
//   fov_min f64 | fov_max f64 | step f64 | sample count u64 |
//   element positions N x f64
// Records, fixed size 2N + 8M + 4 + 8K bytes:
//   y as N x (i8 Re, i8 Im) | s_star M x f32 | beta_star M x f32 |
//   snr_db f32 | true DOAs K x f64

#include "obdoa/onebit.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

namespace obdoa {

inline constexpr std::uint16_t kDatasetVersion = 1;

struct DatasetHeader {
    std::uint16_t version = kDatasetVersion;
    std::uint32_t elements = 0;
    std::uint32_t grid_points = 0;
    std::uint32_t sources = 0;
    GridSpec grid{};
    std::uint64_t count = 0;
    std::vector<double> positions;

    ArrayGeometry geometry() const { return ArrayGeometry(positions); }
    std::size_t header_bytes() const;
    std::size_t record_bytes() const;
};

DatasetHeader make_dataset_header(const ArrayGeometry& geom, const GridSpec& grid, int sources,
                                  std::uint64_t count);

class DatasetWriter {
public:
    DatasetWriter(const std::filesystem::path& path, const DatasetHeader& header);
    void write(const LabeledSample& sample);
    /// Flushes and verifies that exactly header.count records were written.
    void close();

private:
    std::filesystem::path path_;
    DatasetHeader header_;
    std::ofstream out_;
    std::uint64_t written_ = 0;
};

class DatasetReader {
public:
    explicit DatasetReader(const std::filesystem::path& path);

    const DatasetHeader& header() const { return header_; }
    std::uint64_t size() const { return header_.count; }
    LabeledSample read(std::uint64_t index);
    std::vector<LabeledSample> read_all();

private:
    std::filesystem::path path_;
    std::ifstream in_;
    DatasetHeader header_;
    GridSpec grid_;
};

}  // namespace obdoa
