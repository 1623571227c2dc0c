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

#include "obdoa/binary.hpp"
#include "obdoa/unrolled.hpp"

#include "support/test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <iterator>

using namespace obdoa;
using obdoa::testing::TempDir;

namespace {

OneBitSnapshot snapshot(const ArrayGeometry& g, std::vector<double> doas, std::uint64_t seed) {
    SourceScene s;
    s.doas_deg = std::move(doas);
    s.coeffs.assign(s.doas_deg.size(), cplx(0.7, 0.7));
    s.sigma = snr_to_sigma(10.0);
    return simulate_snapshot(g, s, seed);
}

// Small grid so the reference below stays cheap: 5 points, gap head 5 -> 6 -> 4 -> 3 -> 5.
NetArchitecture tiny_arch() {
    NetArchitecture arch;
    arch.grid = GridSpec(-4, 4, 2);
    arch.K1 = 2;
    arch.K2 = 2;
    arch.conv = {{4, 3, 3}, {3, 2, 1}};
    arch.fc_widths = {6, 4, 3, 5};
    return arch;
}

float at(const WeightBundle& w, const std::string& name, std::size_t i) { return w.tensors().at(name).values.at(i); }

// Straight loop transcription of the network, reading tensors by name.
SpectrumEstimate reference_forward(const OneBitSnapshot& y, const DictionaryPair& d, const WeightBundle& w) {
    const NetArchitecture& arch = w.architecture();
    const auto M = static_cast<std::size_t>(d.cols());
    CVector x = d.A.adjoint() * y.y();
    RVector beta = RVector::Zero(d.cols());

    auto phase = [&](const std::string& prefix) {
        CVector v(d.rows());
        const CVector fit = d.A * x;
        for (Eigen::Index n = 0; n < fit.size(); ++n) {
            auto ratio = [](double t) {
                const double pdf = std::exp(-t * t / 2) / std::sqrt(2 * kPi);
                return pdf / (0.5 * std::erfc(-t / std::sqrt(2.0)));
            };
            const double yr = y.y()[n].real(), yi = y.y()[n].imag();
            const double dr = yr * fit[n].real(), di = yi * fit[n].imag();
            v[n] = cplx(yr * (dr + ratio(dr)), yi * (di + ratio(di)));
        }
        const CVector f = d.A.adjoint() * v;
        std::vector<std::vector<double>> h(4, std::vector<double>(M));
        for (std::size_t m = 0; m < M; ++m) {
            h[0][m] = x[m].real();
            h[1][m] = x[m].imag();
            h[2][m] = f[m].real();
            h[3][m] = f[m].imag();
        }
        for (std::size_t l = 0; l < arch.conv.size(); ++l) {
            const auto& c = arch.conv[l];
            const std::string conv = prefix + "conv" + std::to_string(l) + ".";
            std::vector<std::vector<double>> out(c.out_channels, std::vector<double>(M));
            for (int o = 0; o < c.out_channels; ++o)
                for (std::size_t m = 0; m < M; ++m) {
                    double acc = at(w, conv + "bias", o);
                    for (int i = 0; i < c.in_channels; ++i)
                        for (int t = 0; t < c.kernel; ++t) {
                            const long src = static_cast<long>(m) + t - (c.kernel - 1) / 2;
                            if (src < 0 || src >= static_cast<long>(M)) continue;
                            acc += at(w, conv + "weight", (o * c.in_channels + i) * c.kernel + t) * h[i][src];
                        }
                    const double a = at(w, prefix + "prelu" + std::to_string(l) + ".weight", o);
                    out[o][m] = acc > 0 ? acc : a * acc;
                }
            h = std::move(out);
        }
        for (std::size_t m = 0; m < M; ++m) x[m] += cplx(h[0][m], h[1][m]);
    };

    for (int p = 0; p < arch.K1; ++p) phase("block1." + std::to_string(p) + ".");
    for (int p = 0; p < arch.K2; ++p) {
        const std::string prefix = "block2." + std::to_string(p) + ".";
        phase(prefix);
        std::vector<double> h(M);
        for (std::size_t m = 0; m < M; ++m) h[m] = std::abs(x[m]);
        for (std::size_t i = 0; i < arch.fc_widths.size(); ++i) {
            const std::string fc = prefix + "fc" + std::to_string(i) + ".";
            const std::string bn = prefix + "bn" + std::to_string(i) + ".";
            std::vector<double> z(arch.fc_widths[i]);
            for (std::size_t r = 0; r < z.size(); ++r) {
                double acc = at(w, fc + "bias", r);
                for (std::size_t c = 0; c < h.size(); ++c) acc += at(w, fc + "weight", r * h.size() + c) * h[c];
                const double normed = (acc - at(w, bn + "running_mean", r)) /
                                      std::sqrt(at(w, bn + "running_var", r) + arch.bn_eps);
                z[r] = std::tanh(at(w, bn + "weight", r) * normed + at(w, bn + "bias", r));
            }
            h = std::move(z);
        }
        for (std::size_t m = 0; m < M; ++m) beta[m] = h[m] * arch.grid.step_deg() / 2;
    }

    SpectrumEstimate est;
    est.magnitudes = x.cwiseAbs() / x.cwiseAbs().maxCoeff();
    est.beta_deg = beta;
    return est;
}

std::vector<char> slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& p, const std::vector<char>& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("default architecture") {
    const NetArchitecture arch = NetArchitecture::defaults(GridSpec());
    CHECK(arch.K1 == 4);
    CHECK(arch.K2 == 2);
    CHECK(arch.fc_widths == std::vector<int>{256, 256, 128, 61});
    CHECK_NOTHROW(arch.validate());

    const auto layout = tensor_layout(arch);
    CHECK(layout.size() == 6 * 9 + 2 * 4 * 6);
    CHECK(layout.front().name == "block1.0.conv0.weight");
    CHECK(layout.front().shape == std::vector<std::uint32_t>{16, 4, 3});
    CHECK(layout.back().name == "block2.1.bn3.running_var");
    CHECK(layout.back().shape == std::vector<std::uint32_t>{61});

    NetArchitecture bad = arch;
    bad.fc_widths.back() = 60;
    CHECK_THROWS(bad.validate());
    bad = arch;
    bad.conv.front().in_channels = 3;
    CHECK_THROWS(bad.validate());
    bad = arch;
    bad.conv[1].in_channels = 8;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("conv layer by hand") {
    ConvLayerWeights layer;
    layer.spec = {1, 1, 3};
    layer.weight = {1.0, 2.0, 3.0};
    layer.bias = RVector::Constant(1, 0.5);
    layer.prelu = RVector::Constant(1, 0.1);
    Eigen::MatrixXd in(1, 3);
    in << 1.0, -2.0, 3.0;
    const Eigen::MatrixXd out = conv_prelu(in, layer);
    CHECK(out(0, 0) == doctest::Approx(-0.35));  // 2*1 + 3*(-2) + 0.5 = -3.5
    CHECK(out(0, 1) == doctest::Approx(6.5));
    CHECK(out(0, 2) == doctest::Approx(4.5));
    CHECK_THROWS(conv_prelu(Eigen::MatrixXd::Zero(2, 3), layer));
}

TEST_CASE("zero weights pass the initial spectrum through") {
    const ArrayGeometry g = make_geometry("sla18");
    const DictionaryPair d = build_dictionary(g, GridSpec());
    const WeightBundle w = zero_weights(NetArchitecture::defaults(GridSpec()));
    const auto y = snapshot(g, {-12.3, 27.9}, 4);
    const SpectrumEstimate est = forward(y, d, w);
    const RVector expect = normalized_magnitudes(d.A.adjoint() * y.y());
    CHECK((est.magnitudes - expect).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(est.beta_deg.cwiseAbs().maxCoeff() == 0.0);
    CHECK(est.grid_deg.size() == 61);
}

TEST_CASE("forward matches a loop reference") {
    const NetArchitecture arch = tiny_arch();
    const ArrayGeometry g = ula(6);
    const DictionaryPair d = build_dictionary(g, arch.grid);
    const WeightBundle w = random_weights(arch, 5, 0.3);
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto y = snapshot(g, {-1.3}, seed);
        const SpectrumEstimate got = forward(y, d, w);
        const SpectrumEstimate ref = reference_forward(y, d, w);
        CHECK((got.magnitudes - ref.magnitudes).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((got.beta_deg - ref.beta_deg).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("gaps stay within half a grid interval") {
    const ArrayGeometry g = make_geometry("sla18");
    const DictionaryPair d = build_dictionary(g, GridSpec());
    const WeightBundle w = random_weights(NetArchitecture::defaults(GridSpec()), 11, 3.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SpectrumEstimate est = forward(snapshot(g, {0.4, 33.0}, seed), d, w);
        CHECK(est.beta_deg.cwiseAbs().maxCoeff() <= 1.0);
        CHECK(est.magnitudes.maxCoeff() == doctest::Approx(1.0));
        CHECK(est.magnitudes.allFinite());
    }
}

TEST_CASE("forward is deterministic and batch-consistent") {
    const ArrayGeometry g = make_geometry("sla18");
    const DictionaryPair d = build_dictionary(g, GridSpec());
    const WeightBundle w = random_weights(NetArchitecture::defaults(GridSpec()), 3);
    CHECK(random_weights(w.architecture(), 3).tensors().at("block1.0.conv0.weight").values ==
          w.tensors().at("block1.0.conv0.weight").values);
    std::vector<OneBitSnapshot> batch;
    for (std::uint64_t s = 0; s < 4; ++s) batch.push_back(snapshot(g, {-40.0 + 10 * s}, s));
    const auto out = forward_batch(batch, d, w);
    REQUIRE(out.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        const SpectrumEstimate single = forward(batch[i], d, w);
        CHECK(out[i].magnitudes == single.magnitudes);
        CHECK(out[i].beta_deg == single.beta_deg);
    }
}

TEST_CASE("forward rejects a mismatched dictionary") {
    const WeightBundle w = zero_weights(NetArchitecture::defaults(GridSpec()));
    const DictionaryPair d91 = build_dictionary(make_geometry("sla18"), evaluation_grid());
    CHECK_THROWS_WITH(forward(snapshot(make_geometry("sla18"), {0.0}, 1), d91, w), doctest::Contains("M=61"));
    const DictionaryPair d = build_dictionary(make_geometry("sla18"), GridSpec());
    CHECK_THROWS(forward(snapshot(make_geometry("sla10"), {0.0}, 1), d, w));
}

TEST_CASE("weight bundle validation") {
    const NetArchitecture arch = tiny_arch();
    auto tensors = zero_weights(arch).tensors();

    auto bad = tensors;
    bad["block2.1.fc0.weight"].shape = {5, 6};
    CHECK_THROWS_WITH(WeightBundle(arch, bad), doctest::Contains("block2.1.fc0.weight"));

    bad = tensors;
    bad.erase("block1.0.conv1.bias");
    CHECK_THROWS_WITH(WeightBundle(arch, bad), doctest::Contains("missing tensor 'block1.0.conv1.bias'"));

    bad = tensors;
    bad["extra"] = Tensor{{1}, {0.0f}};
    CHECK_THROWS_WITH(WeightBundle(arch, bad), doctest::Contains("unexpected tensor 'extra'"));

    bad = tensors;
    bad["block2.0.bn2.running_var"].values[0] = 0.0f;
    CHECK_THROWS(WeightBundle(arch, bad));

    bad = tensors;
    bad["block1.1.prelu0.weight"].values[1] = std::nanf("");
    CHECK_THROWS_WITH(WeightBundle(arch, bad), doctest::Contains("non-finite"));
}

TEST_CASE("weight file round trip") {
    TempDir dir("wt");
    const WeightBundle w = random_weights(NetArchitecture::defaults(GridSpec()), 9);
    save_weights(w, dir / "net.obwt");
    CHECK(std::filesystem::exists(dir / "net.obwt.json"));
    CHECK(sidecar_path(dir / "net.obwt") == dir / "net.obwt.json");

    const WeightBundle back = load_weights(dir / "net.obwt");
    CHECK(back.architecture() == w.architecture());
    CHECK(back.format_version() == 1);
    REQUIRE(back.tensors().size() == w.tensors().size());
    for (const auto& [name, t] : w.tensors()) {
        CHECK(back.tensors().at(name).shape == t.shape);
        CHECK(back.tensors().at(name).values == t.values);
    }

    const ArrayGeometry g = make_geometry("sla18");
    const DictionaryPair d = build_dictionary(g, GridSpec());
    const auto y = snapshot(g, {5.5}, 2);
    CHECK(forward(y, d, back).magnitudes == forward(y, d, w).magnitudes);

    const auto bytes = slurp(dir / "net.obwt");
    CHECK(std::string(bytes.data(), 5) == "OBWT1");
    CHECK(bytes[5] == 1);
    CHECK(bytes[6] == 0);
    CHECK(bytes[7] == 4);   // K1
    CHECK(bytes[11] == 2);  // K2
    CHECK(bytes[15] == 61);  // M

    save_weights(w, dir / "bare.obwt", false);
    CHECK_FALSE(std::filesystem::exists(dir / "bare.obwt.json"));
    CHECK(load_weights(dir / "bare.obwt").architecture() == w.architecture());
}

TEST_CASE("architecture sidecar") {
    const NetArchitecture arch = NetArchitecture::defaults(GridSpec());
    const std::string text = architecture_json(arch);
    CHECK(text.find("\"K1\": 4") != std::string::npos);
    CHECK(text.find("\"M\": 61") != std::string::npos);
    CHECK(architecture_from_json(text) == arch);
    CHECK_THROWS_AS(architecture_from_json("{"), FormatError);
    CHECK_THROWS_AS(architecture_from_json("{\"K1\": 4}"), FormatError);

    TempDir dir("side");
    save_weights(zero_weights(arch), dir / "w.obwt");
    NetArchitecture other = arch;
    other.K1 = 3;
    {
        std::ofstream js(dir / "w.obwt.json");
        js << architecture_json(other);
    }
    CHECK_THROWS_WITH(load_weights(dir / "w.obwt"), doctest::Contains("disagrees"));
}

TEST_CASE("weight file errors") {
    TempDir dir("wtbad");
    save_weights(zero_weights(tiny_arch()), dir / "w.obwt", false);
    const auto good = slurp(dir / "w.obwt");

    std::vector<char> bad(good.begin(), good.end() - 3);
    spit(dir / "short.obwt", bad);
    CHECK_THROWS_WITH_AS(load_weights(dir / "short.obwt"), doctest::Contains("corrupt weight container"), FormatError);

    bad.assign(good.begin(), good.begin() + 40);
    spit(dir / "head.obwt", bad);
    CHECK_THROWS_WITH_AS(load_weights(dir / "head.obwt"), doctest::Contains("corrupt weight container"), FormatError);

    bad = good;
    bad.push_back(0);
    spit(dir / "long.obwt", bad);
    CHECK_THROWS_WITH_AS(load_weights(dir / "long.obwt"), doctest::Contains("trailing bytes"), FormatError);

    bad = good;
    bad[5] = 7;
    spit(dir / "ver.obwt", bad);
    CHECK_THROWS_WITH_AS(load_weights(dir / "ver.obwt"), "unsupported weight format version 7", FormatError);

    bad = good;
    bad[1] = 'X';
    spit(dir / "magic.obwt", bad);
    CHECK_THROWS_AS(load_weights(dir / "magic.obwt"), FormatError);

    bad = good;
    bad[15] = 9;  // M disagrees with the grid
    spit(dir / "m.obwt", bad);
    CHECK_THROWS_WITH_AS(load_weights(dir / "m.obwt"), doctest::Contains("declares M=9"), FormatError);

    CHECK_THROWS(load_weights(dir / "missing.obwt"));
}
