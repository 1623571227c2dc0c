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

// OBWT1 weight container, all integers and floats little-endian:
//
//   magic "OBWT1" (5 bytes) | version u16
//   architecture: K1 u32 | K2 u32 | M u32 | fov_min f64 | fov_max f64 |
//                 step f64 | bn_eps f64 | n_conv u32 |
//                 n_conv x (in u32, out u32, kernel u32) |
//                 n_fc u32 | n_fc x width u32
//   tensor count u32
//   per tensor:   name length u32 | name (UTF-8) | rank u8 | rank x dim u32 |
//                 f32 payload, row-major
//
// The trainer also writes `<weights>.json` describing the architecture; when
// present it has to agree with the binary header.

#include "obdoa/unrolled.hpp"

#include "obdoa/binary.hpp"

#include <json.hpp>

#include <fstream>
#include <iterator>
#include <stdexcept>

namespace obdoa {

namespace {

constexpr std::string_view kMagic = "OBWT1";
constexpr std::uint16_t kVersion = 1;

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& weights_path) {
    std::filesystem::path p = weights_path;
    p += ".json";
    return p;
}

std::string architecture_json(const NetArchitecture& arch) {
    nlohmann::ordered_json j;
    j["format"] = "OBWT1";
    j["format_version"] = kVersion;
    j["K1"] = arch.K1;
    j["K2"] = arch.K2;
    j["M"] = arch.grid_points();
    j["grid"] = {{"fov_min_deg", arch.grid.fov_min_deg()},
                 {"fov_max_deg", arch.grid.fov_max_deg()},
                 {"step_deg", arch.grid.step_deg()}};
    j["bn_eps"] = arch.bn_eps;
    j["conv"] = nlohmann::ordered_json::array();
    for (const auto& c : arch.conv) j["conv"].push_back({c.in_channels, c.out_channels, c.kernel});
    j["fc_widths"] = arch.fc_widths;
    return j.dump(2) + "\n";
}

NetArchitecture architecture_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        NetArchitecture arch;
        arch.K1 = j.at("K1").get<int>();
        arch.K2 = j.at("K2").get<int>();
        const auto& g = j.at("grid");
        arch.grid = GridSpec(g.at("fov_min_deg").get<double>(), g.at("fov_max_deg").get<double>(),
                             g.at("step_deg").get<double>());
        arch.bn_eps = j.at("bn_eps").get<double>();
        arch.conv.clear();
        for (const auto& c : j.at("conv")) arch.conv.push_back({c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()});
        arch.fc_widths = j.at("fc_widths").get<std::vector<int>>();
        if (j.contains("M") && j.at("M").get<Eigen::Index>() != arch.grid_points())
            throw std::invalid_argument("architecture JSON declares M=" + std::to_string(j.at("M").get<long>()) +
                                        " but its grid has " + std::to_string(arch.grid_points()) + " points");
        return arch;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid architecture JSON: ") + e.what());
    }
}

void save_weights(const WeightBundle& bundle, const std::filesystem::path& path, bool write_sidecar) {
    const NetArchitecture& arch = bundle.architecture();
    ByteWriter w;
    w.bytes(kMagic);
    w.uint(kVersion);
    w.uint(static_cast<std::uint32_t>(arch.K1));
    w.uint(static_cast<std::uint32_t>(arch.K2));
    w.uint(static_cast<std::uint32_t>(arch.grid_points()));
    w.f64(arch.grid.fov_min_deg());
    w.f64(arch.grid.fov_max_deg());
    w.f64(arch.grid.step_deg());
    w.f64(arch.bn_eps);
    w.uint(static_cast<std::uint32_t>(arch.conv.size()));
    for (const auto& c : arch.conv) {
        w.uint(static_cast<std::uint32_t>(c.in_channels));
        w.uint(static_cast<std::uint32_t>(c.out_channels));
        w.uint(static_cast<std::uint32_t>(c.kernel));
    }
    w.uint(static_cast<std::uint32_t>(arch.fc_widths.size()));
    for (int width : arch.fc_widths) w.uint(static_cast<std::uint32_t>(width));

    const auto layout = tensor_layout(arch);
    w.uint(static_cast<std::uint32_t>(layout.size()));
    for (const auto& spec : layout) {
        const Tensor& t = bundle.tensors().at(spec.name);
        w.uint(static_cast<std::uint32_t>(spec.name.size()));
        w.bytes(spec.name);
        w.uint(static_cast<std::uint8_t>(t.shape.size()));
        for (auto d : t.shape) w.uint(d);
        for (float v : t.values) w.f32(v);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write weight file: " + path.string());
    out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());

    if (write_sidecar) {
        std::ofstream js(sidecar_path(path));
        js << architecture_json(arch);
        if (!js) throw std::runtime_error("write failed: " + sidecar_path(path).string());
    }
}

WeightBundle load_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open weight file: " + path.string());
    const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ByteReader r(bytes.data(), bytes.size(), "corrupt weight container: " + path.string());

    if (bytes.size() < kMagic.size() || r.bytes(kMagic.size()) != kMagic)
        throw FormatError("not an OBWT1 weight file: " + path.string());
    const auto version = r.uint<std::uint16_t>();
    if (version != kVersion)
        throw FormatError("unsupported weight format version " + std::to_string(version));

    NetArchitecture arch;
    arch.K1 = static_cast<int>(r.uint<std::uint32_t>());
    arch.K2 = static_cast<int>(r.uint<std::uint32_t>());
    const auto M = r.uint<std::uint32_t>();
    const double fov_min = r.f64();
    const double fov_max = r.f64();
    const double step = r.f64();
    arch.grid = GridSpec(fov_min, fov_max, step);
    if (arch.grid_points() != M)
        throw FormatError("weight header declares M=" + std::to_string(M) + " but its grid has " +
                          std::to_string(arch.grid_points()) + " points");
    arch.bn_eps = r.f64();
    const auto n_conv = r.uint<std::uint32_t>();
    if (n_conv > 1024) throw FormatError("corrupt weight container: " + path.string());
    arch.conv.clear();
    for (std::uint32_t l = 0; l < n_conv; ++l) {
        ConvLayerSpec c;
        c.in_channels = static_cast<int>(r.uint<std::uint32_t>());
        c.out_channels = static_cast<int>(r.uint<std::uint32_t>());
        c.kernel = static_cast<int>(r.uint<std::uint32_t>());
        arch.conv.push_back(c);
    }
    const auto n_fc = r.uint<std::uint32_t>();
    if (n_fc > 1024) throw FormatError("corrupt weight container: " + path.string());
    arch.fc_widths.clear();
    for (std::uint32_t i = 0; i < n_fc; ++i) arch.fc_widths.push_back(static_cast<int>(r.uint<std::uint32_t>()));

    const auto n_tensors = r.uint<std::uint32_t>();
    std::map<std::string, Tensor> tensors;
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        const auto name_len = r.uint<std::uint32_t>();
        std::string name(r.bytes(name_len));
        const auto rank = r.uint<std::uint8_t>();
        Tensor t;
        std::size_t count = 1;
        for (std::uint8_t d = 0; d < rank; ++d) {
            t.shape.push_back(r.uint<std::uint32_t>());
            count *= t.shape.back();
        }
        if (count > r.remaining() / 4) throw FormatError("corrupt weight container: " + path.string());
        t.values.resize(count);
        for (auto& v : t.values) v = r.f32();
        if (!tensors.emplace(name, std::move(t)).second)
            throw FormatError("duplicate tensor '" + name + "' in " + path.string());
    }
    if (r.remaining() != 0) throw FormatError("corrupt weight container: trailing bytes in " + path.string());

    const auto sidecar = sidecar_path(path);
    if (std::filesystem::exists(sidecar)) {
        std::ifstream js(sidecar);
        const std::string text((std::istreambuf_iterator<char>(js)), std::istreambuf_iterator<char>());
        if (!(architecture_from_json(text) == arch))
            throw std::invalid_argument("architecture sidecar " + sidecar.string() +
                                        " disagrees with the weight file header");
    }
    return WeightBundle(std::move(arch), std::move(tensors), version);
}

}  // namespace obdoa
