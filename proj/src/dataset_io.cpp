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

#include "obdoa/dataset_io.hpp"

#include "obdoa/binary.hpp"

#include <stdexcept>

namespace obdoa {

namespace {

constexpr std::string_view kMagic = "OBDOA1";

std::int8_t unit_sign(double v) { return v >= 0.0 ? 1 : -1; }

}  // namespace

std::size_t DatasetHeader::header_bytes() const {
    return kMagic.size() + 2 + 3 * 4 + 3 * 8 + 8 + 8 * positions.size();
}

std::size_t DatasetHeader::record_bytes() const {
    return 2 * std::size_t{elements} + 8 * std::size_t{grid_points} + 4 + 8 * std::size_t{sources};
}

DatasetHeader make_dataset_header(const ArrayGeometry& geom, const GridSpec& grid, int sources,
                                  std::uint64_t count) {
    DatasetHeader h;
    h.elements = static_cast<std::uint32_t>(geom.size());
    h.grid_points = static_cast<std::uint32_t>(grid.size());
    h.sources = static_cast<std::uint32_t>(sources);
    h.grid = grid;
    h.count = count;
    h.positions = geom.positions();
    return h;
}

DatasetWriter::DatasetWriter(const std::filesystem::path& path, const DatasetHeader& header)
    : path_(path), header_(header), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open dataset file for writing: " + path.string());
    ByteWriter w;
    w.bytes(kMagic);
    w.uint(header_.version);
    w.uint(header_.elements);
    w.uint(header_.grid_points);
    w.uint(header_.sources);
    w.f64(header_.grid.fov_min_deg());
    w.f64(header_.grid.fov_max_deg());
    w.f64(header_.grid.step_deg());
    w.uint(header_.count);
    for (double p : header_.positions) w.f64(p);
    out_.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
}

void DatasetWriter::write(const LabeledSample& s) {
    if (written_ >= header_.count)
        throw std::runtime_error("dataset " + path_.string() + " already holds its declared count");
    const auto& y = s.y.y();
    if (y.size() != header_.elements || s.s_star.size() != header_.grid_points ||
        s.beta_star.size() != header_.grid_points)
        throw std::invalid_argument("sample shape does not match the dataset header");
    if (!s.y.scene() || s.y.scene()->num_sources() != header_.sources)
        throw std::invalid_argument("sample needs a ground-truth scene with K sources");

    ByteWriter w;
    for (Eigen::Index n = 0; n < y.size(); ++n) {
        w.i8(unit_sign(y[n].real()));
        w.i8(unit_sign(y[n].imag()));
    }
    for (Eigen::Index m = 0; m < s.s_star.size(); ++m) w.f32(static_cast<float>(s.s_star[m]));
    for (Eigen::Index m = 0; m < s.beta_star.size(); ++m) w.f32(static_cast<float>(s.beta_star[m]));
    w.f32(static_cast<float>(s.snr_db));
    for (double doa : s.y.scene()->doas_deg) w.f64(doa);
    out_.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
    if (!out_) throw std::runtime_error("write failed: " + path_.string());
    ++written_;
}

void DatasetWriter::close() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + path_.string());
    out_.close();
    if (written_ != header_.count)
        throw std::runtime_error("dataset " + path_.string() + " holds " + std::to_string(written_) +
                                 " records, header declares " + std::to_string(header_.count));
}

DatasetReader::DatasetReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open dataset file: " + path.string());
    const std::string context = "corrupt dataset file: " + path.string();

    std::vector<char> fixed(kMagic.size() + 2 + 3 * 4 + 3 * 8 + 8);
    in_.read(fixed.data(), static_cast<std::streamsize>(fixed.size()));
    if (in_.gcount() != static_cast<std::streamsize>(fixed.size())) throw FormatError(context);
    ByteReader r(fixed.data(), fixed.size(), context);
    if (r.bytes(kMagic.size()) != kMagic) throw FormatError("not an OBDOA1 dataset: " + path.string());
    header_.version = r.uint<std::uint16_t>();
    if (header_.version != kDatasetVersion)
        throw FormatError("unsupported dataset version " + std::to_string(header_.version));
    header_.elements = r.uint<std::uint32_t>();
    header_.grid_points = r.uint<std::uint32_t>();
    header_.sources = r.uint<std::uint32_t>();
    const double fov_min = r.f64();
    const double fov_max = r.f64();
    const double step = r.f64();
    header_.count = r.uint<std::uint64_t>();
    header_.grid = GridSpec(fov_min, fov_max, step);
    if (header_.grid.size() != header_.grid_points)
        throw FormatError(context + " (grid parameters disagree with M)");

    std::vector<char> pos(8 * std::size_t{header_.elements});
    in_.read(pos.data(), static_cast<std::streamsize>(pos.size()));
    if (in_.gcount() != static_cast<std::streamsize>(pos.size())) throw FormatError(context);
    ByteReader pr(pos.data(), pos.size(), context);
    header_.positions.resize(header_.elements);
    for (auto& p : header_.positions) p = pr.f64();
    grid_ = header_.grid;

    in_.seekg(0, std::ios::end);
    const auto file_size = static_cast<std::uint64_t>(in_.tellg());
    if (file_size != header_.header_bytes() + header_.count * header_.record_bytes())
        throw FormatError(context + " (size does not match declared record count)");
}

LabeledSample DatasetReader::read(std::uint64_t index) {
    if (index >= header_.count) throw std::out_of_range("dataset index out of range");
    const std::size_t rec = header_.record_bytes();
    std::vector<char> buf(rec);
    in_.clear();
    in_.seekg(static_cast<std::streamoff>(header_.header_bytes() + index * rec));
    in_.read(buf.data(), static_cast<std::streamsize>(rec));
    const std::string context = "corrupt dataset record in " + path_.string();
    if (in_.gcount() != static_cast<std::streamsize>(rec)) throw FormatError(context);
    ByteReader r(buf.data(), buf.size(), context);

    CVector y(header_.elements);
    for (Eigen::Index n = 0; n < y.size(); ++n) {
        const double re = r.i8();
        const double im = r.i8();
        y[n] = cplx(re, im);
    }
    RVector s_star(header_.grid_points), beta_star(header_.grid_points);
    for (Eigen::Index m = 0; m < s_star.size(); ++m) s_star[m] = r.f32();
    for (Eigen::Index m = 0; m < beta_star.size(); ++m) beta_star[m] = r.f32();
    const double snr = r.f32();
    SourceScene scene;
    for (std::uint32_t k = 0; k < header_.sources; ++k) scene.doas_deg.push_back(r.f64());
    // Amplitudes are not stored; |s_k| survives in s_star.
    for (double doa : scene.doas_deg) scene.coeffs.push_back(s_star[grid_.nearest_index(doa)]);
    scene.sigma = snr_to_sigma(snr);
    return LabeledSample{OneBitSnapshot(std::move(y), std::move(scene)), std::move(s_star),
                         std::move(beta_star), snr};
}

std::vector<LabeledSample> DatasetReader::read_all() {
    std::vector<LabeledSample> out;
    out.reserve(header_.count);
    for (std::uint64_t i = 0; i < header_.count; ++i) out.push_back(read(i));
    return out;
}

}  // namespace obdoa
