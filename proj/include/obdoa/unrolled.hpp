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

// Inference for the unrolled MM network.
//
//   x0 = A^H y
//   Block 1, K1 phases:  x <- x + ConvStack([Re x, Im x, Re f, Im f])
//   Block 2, K2 phases:  same spectrum refinement, then
//                        beta = r/2 * tanh(BN(FC(... tanh(BN(FC(|x|))) ...)))
// where f = A^H v(y, A, x) is the MM pseudo-measurement back-projected onto
// the grid. Convolutions are 1-D over the grid axis with zero "same" padding
// and a PReLU after every layer. Batch norm always uses running statistics.

#include "obdoa/geometry.hpp"
#include "obdoa/onebit.hpp"
#include "obdoa/spectrum.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace obdoa {

struct ConvLayerSpec {
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 0;

    friend bool operator==(const ConvLayerSpec&, const ConvLayerSpec&) = default;
};

struct NetArchitecture {
    int K1 = 4;
    int K2 = 2;
    std::vector<ConvLayerSpec> conv = {{4, 16, 3}, {16, 16, 3}, {16, 2, 3}};
    std::vector<int> fc_widths;  // output widths of the 4 gap-head layers, last == M
    GridSpec grid{};
    double bn_eps = 1e-5;

    /// Default layout for `grid`: gap head M -> 256 -> 256 -> 128 -> M.
    static NetArchitecture defaults(const GridSpec& grid);

    Eigen::Index grid_points() const { return grid.size(); }
    void validate() const;

    friend bool operator==(const NetArchitecture&, const NetArchitecture&);
};

struct TensorSpec {
    std::string name;
    std::vector<std::uint32_t> shape;
};

/// Every tensor the architecture requires, in container order.
std::vector<TensorSpec> tensor_layout(const NetArchitecture& arch);

struct Tensor {
    std::vector<std::uint32_t> shape;
    std::vector<float> values;  // row-major
};

struct ConvLayerWeights {
    ConvLayerSpec spec;
    std::vector<double> weight;  // [out][in][k]
    RVector bias;
    RVector prelu;               // per output channel
};

struct GapLayerWeights {
    Eigen::MatrixXd weight;  // out x in
    RVector bias;
    RVector bn_scale;
    RVector bn_shift;
    RVector running_mean;
    RVector running_var;
};

struct PhaseWeights {
    std::vector<ConvLayerWeights> conv;
    std::vector<GapLayerWeights> gap;  // empty for Block 1 phases
};

class WeightBundle {
public:
    WeightBundle(NetArchitecture arch, std::map<std::string, Tensor> tensors,
                 std::uint16_t format_version = 1);

    const NetArchitecture& architecture() const { return arch_; }
    std::uint16_t format_version() const { return version_; }
    const std::map<std::string, Tensor>& tensors() const { return tensors_; }
    const std::vector<PhaseWeights>& block1() const { return block1_; }
    const std::vector<PhaseWeights>& block2() const { return block2_; }

private:
    NetArchitecture arch_;
    std::uint16_t version_;
    std::map<std::string, Tensor> tensors_;
    std::vector<PhaseWeights> block1_;
    std::vector<PhaseWeights> block2_;
};

/// All parameters zero, batch-norm running variances one.
WeightBundle zero_weights(const NetArchitecture& arch);

/// Uniform(-scale, scale) parameters, positive running variances.
WeightBundle random_weights(const NetArchitecture& arch, std::uint64_t seed, double scale = 0.5);

// OBWT1 container; see weights_io.cpp for the byte layout.
WeightBundle load_weights(const std::filesystem::path& path);
void save_weights(const WeightBundle& bundle, const std::filesystem::path& path,
                  bool write_sidecar = true);
std::filesystem::path sidecar_path(const std::filesystem::path& weights_path);
std::string architecture_json(const NetArchitecture& arch);
NetArchitecture architecture_from_json(const std::string& text);

CVector init_block(const OneBitSnapshot& y, const DictionaryPair& dict);
CVector mm_feature(const OneBitSnapshot& y, const DictionaryPair& dict, const CVector& x_hat);

/// 1-D convolution + PReLU over a channels x M feature map.
Eigen::MatrixXd conv_prelu(const Eigen::MatrixXd& input, const ConvLayerWeights& layer);

CVector block1_phase(const CVector& x_hat, const CVector& feature, const PhaseWeights& weights);

struct Block2Output {
    CVector x_hat;
    RVector beta_deg;
};

Block2Output block2_phase(const CVector& x_hat, const CVector& feature, const PhaseWeights& weights,
                          const NetArchitecture& arch);

SpectrumEstimate forward(const OneBitSnapshot& y, const DictionaryPair& dict, const WeightBundle& weights);

std::vector<SpectrumEstimate> forward_batch(const std::vector<OneBitSnapshot>& batch,
                                            const DictionaryPair& dict, const WeightBundle& weights);

}  // namespace obdoa
