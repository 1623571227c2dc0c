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

#include "obdoa/unrolled.hpp"

#include "obdoa/ogbrim.hpp"
#include "obdoa/rng.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace obdoa {

namespace {

std::string shape_string(const std::vector<std::uint32_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

std::string phase_prefix(int block, int phase) {
    return "block" + std::to_string(block) + "." + std::to_string(phase) + ".";
}

RVector to_rvector(const Tensor& t) {
    RVector v(static_cast<Eigen::Index>(t.values.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = t.values[static_cast<std::size_t>(i)];
    return v;
}

std::vector<double> to_doubles(const Tensor& t) { return {t.values.begin(), t.values.end()}; }

void append_conv_specs(std::vector<TensorSpec>& out, const NetArchitecture& arch,
                       const std::string& prefix) {
    for (std::size_t l = 0; l < arch.conv.size(); ++l) {
        const auto& c = arch.conv[l];
        const auto o = static_cast<std::uint32_t>(c.out_channels);
        const auto i = static_cast<std::uint32_t>(c.in_channels);
        const auto k = static_cast<std::uint32_t>(c.kernel);
        const std::string conv = prefix + "conv" + std::to_string(l) + ".";
        out.push_back({conv + "weight", {o, i, k}});
        out.push_back({conv + "bias", {o}});
        out.push_back({prefix + "prelu" + std::to_string(l) + ".weight", {o}});
    }
}

}  // namespace

NetArchitecture NetArchitecture::defaults(const GridSpec& grid) {
    NetArchitecture arch;
    arch.grid = grid;
    arch.fc_widths = {256, 256, 128, static_cast<int>(grid.size())};
    return arch;
}

void NetArchitecture::validate() const {
    if (K1 < 0 || K2 < 0) throw std::invalid_argument("phase counts must be non-negative");
    if (conv.empty()) throw std::invalid_argument("each phase needs at least one conv layer");
    if (conv.front().in_channels != 4)
        throw std::invalid_argument("first conv layer must take 4 channels (Re/Im of x and feature)");
    if (conv.back().out_channels != 2)
        throw std::invalid_argument("last conv layer must emit 2 channels (Re/Im)");
    for (std::size_t l = 0; l < conv.size(); ++l) {
        const auto& c = conv[l];
        if (c.in_channels < 1 || c.out_channels < 1)
            throw std::invalid_argument("conv layer " + std::to_string(l) + " has no channels");
        if (c.kernel < 1 || c.kernel % 2 == 0)
            throw std::invalid_argument("conv layer " + std::to_string(l) +
                                        " needs an odd kernel for length-preserving padding");
        if (l > 0 && c.in_channels != conv[l - 1].out_channels)
            throw std::invalid_argument("conv layer " + std::to_string(l) +
                                        " input channels do not match the previous layer");
    }
    if (fc_widths.size() != 4)
        throw std::invalid_argument("gap head must have exactly 4 fully connected layers");
    for (int w : fc_widths)
        if (w < 1) throw std::invalid_argument("fully connected widths must be positive");
    if (fc_widths.back() != grid.size())
        throw std::invalid_argument("gap head output width " + std::to_string(fc_widths.back()) +
                                    " does not match grid size M=" + std::to_string(grid.size()));
    if (!(bn_eps > 0.0)) throw std::invalid_argument("batch-norm epsilon must be positive");
}

bool operator==(const NetArchitecture& a, const NetArchitecture& b) {
    return a.K1 == b.K1 && a.K2 == b.K2 && a.conv == b.conv && a.fc_widths == b.fc_widths &&
           a.grid == b.grid && a.bn_eps == b.bn_eps;
}

std::vector<TensorSpec> tensor_layout(const NetArchitecture& arch) {
    std::vector<TensorSpec> out;
    for (int p = 0; p < arch.K1; ++p) append_conv_specs(out, arch, phase_prefix(1, p));
    const auto M = static_cast<std::uint32_t>(arch.grid_points());
    for (int p = 0; p < arch.K2; ++p) {
        const std::string prefix = phase_prefix(2, p);
        append_conv_specs(out, arch, prefix);
        std::uint32_t in = M;
        for (std::size_t i = 0; i < arch.fc_widths.size(); ++i) {
            const auto w = static_cast<std::uint32_t>(arch.fc_widths[i]);
            const std::string fc = prefix + "fc" + std::to_string(i) + ".";
            const std::string bn = prefix + "bn" + std::to_string(i) + ".";
            out.push_back({fc + "weight", {w, in}});
            out.push_back({fc + "bias", {w}});
            out.push_back({bn + "weight", {w}});
            out.push_back({bn + "bias", {w}});
            out.push_back({bn + "running_mean", {w}});
            out.push_back({bn + "running_var", {w}});
            in = w;
        }
    }
    return out;
}

WeightBundle::WeightBundle(NetArchitecture arch, std::map<std::string, Tensor> tensors,
                           std::uint16_t format_version)
    : arch_(std::move(arch)), version_(format_version), tensors_(std::move(tensors)) {
    arch_.validate();
    const auto layout = tensor_layout(arch_);
    for (const auto& spec : layout) {
        auto it = tensors_.find(spec.name);
        if (it == tensors_.end()) throw std::invalid_argument("missing tensor '" + spec.name + "'");
        const Tensor& t = it->second;
        if (t.shape != spec.shape)
            throw std::invalid_argument("shape mismatch for tensor '" + spec.name + "': expected " +
                                        shape_string(spec.shape) + ", got " + shape_string(t.shape));
        std::size_t count = 1;
        for (auto d : t.shape) count *= d;
        if (t.values.size() != count)
            throw std::invalid_argument("tensor '" + spec.name + "' payload size does not match its shape");
        for (float v : t.values)
            if (!std::isfinite(v)) throw std::invalid_argument("tensor '" + spec.name + "' has non-finite values");
        if (spec.name.ends_with("running_var"))
            for (float v : t.values)
                if (!(v > 0.0f))
                    throw std::invalid_argument("non-positive running variance in tensor '" + spec.name + "'");
    }
    if (tensors_.size() != layout.size()) {
        for (const auto& [name, t] : tensors_) {
            bool known = false;
            for (const auto& spec : layout) known = known || spec.name == name;
            if (!known) throw std::invalid_argument("unexpected tensor '" + name + "'");
        }
    }

    auto conv_stack = [&](const std::string& prefix) {
        std::vector<ConvLayerWeights> layers;
        for (std::size_t l = 0; l < arch_.conv.size(); ++l) {
            const std::string conv = prefix + "conv" + std::to_string(l) + ".";
            layers.push_back({arch_.conv[l], to_doubles(tensors_.at(conv + "weight")),
                              to_rvector(tensors_.at(conv + "bias")),
                              to_rvector(tensors_.at(prefix + "prelu" + std::to_string(l) + ".weight"))});
        }
        return layers;
    };
    for (int p = 0; p < arch_.K1; ++p) block1_.push_back({conv_stack(phase_prefix(1, p)), {}});
    for (int p = 0; p < arch_.K2; ++p) {
        const std::string prefix = phase_prefix(2, p);
        PhaseWeights phase{conv_stack(prefix), {}};
        for (std::size_t i = 0; i < arch_.fc_widths.size(); ++i) {
            const std::string fc = prefix + "fc" + std::to_string(i) + ".";
            const std::string bn = prefix + "bn" + std::to_string(i) + ".";
            const Tensor& w = tensors_.at(fc + "weight");
            Eigen::MatrixXd W(w.shape[0], w.shape[1]);
            for (std::uint32_t r = 0; r < w.shape[0]; ++r)
                for (std::uint32_t c = 0; c < w.shape[1]; ++c)
                    W(r, c) = w.values[std::size_t{r} * w.shape[1] + c];
            phase.gap.push_back({std::move(W), to_rvector(tensors_.at(fc + "bias")),
                                 to_rvector(tensors_.at(bn + "weight")),
                                 to_rvector(tensors_.at(bn + "bias")),
                                 to_rvector(tensors_.at(bn + "running_mean")),
                                 to_rvector(tensors_.at(bn + "running_var"))});
        }
        block2_.push_back(std::move(phase));
    }
}

WeightBundle zero_weights(const NetArchitecture& arch) {
    arch.validate();
    std::map<std::string, Tensor> tensors;
    for (const auto& spec : tensor_layout(arch)) {
        std::size_t count = 1;
        for (auto d : spec.shape) count *= d;
        const float fill = spec.name.ends_with("running_var") ? 1.0f : 0.0f;
        tensors[spec.name] = Tensor{spec.shape, std::vector<float>(count, fill)};
    }
    return WeightBundle(arch, std::move(tensors));
}

WeightBundle random_weights(const NetArchitecture& arch, std::uint64_t seed, double scale) {
    arch.validate();
    Rng rng(seed);
    std::uniform_real_distribution<float> uniform(static_cast<float>(-scale), static_cast<float>(scale));
    std::uniform_real_distribution<float> variance(0.5f, 2.0f);
    std::map<std::string, Tensor> tensors;
    for (const auto& spec : tensor_layout(arch)) {
        std::size_t count = 1;
        for (auto d : spec.shape) count *= d;
        Tensor t{spec.shape, std::vector<float>(count)};
        const bool is_var = spec.name.ends_with("running_var");
        for (auto& v : t.values) v = is_var ? variance(rng) : uniform(rng);
        tensors[spec.name] = std::move(t);
    }
    return WeightBundle(arch, std::move(tensors));
}

CVector init_block(const OneBitSnapshot& y, const DictionaryPair& dict) {
    if (y.size() != dict.rows())
        throw std::invalid_argument("init_block: snapshot length " + std::to_string(y.size()) +
                                    " does not match array size " + std::to_string(dict.rows()));
    return dict.A.adjoint() * y.y();
}

CVector mm_feature(const OneBitSnapshot& y, const DictionaryPair& dict, const CVector& x_hat) {
    if (y.size() != dict.rows() || x_hat.size() != dict.cols())
        throw std::invalid_argument("mm_feature: dimension mismatch");
    return dict.A.adjoint() * compute_v(y, dict.A, x_hat);
}

Eigen::MatrixXd conv_prelu(const Eigen::MatrixXd& input, const ConvLayerWeights& layer) {
    const int in_ch = layer.spec.in_channels;
    const int out_ch = layer.spec.out_channels;
    const int k = layer.spec.kernel;
    if (input.rows() != in_ch)
        throw std::invalid_argument("conv layer expects " + std::to_string(in_ch) + " channels, got " +
                                    std::to_string(input.rows()));
    const Eigen::Index len = input.cols();
    const int pad = (k - 1) / 2;
    Eigen::MatrixXd out(out_ch, len);
    for (int o = 0; o < out_ch; ++o) {
        for (Eigen::Index m = 0; m < len; ++m) {
            double acc = layer.bias[o];
            for (int i = 0; i < in_ch; ++i) {
                const double* w = &layer.weight[(static_cast<std::size_t>(o) * in_ch + i) * k];
                for (int t = 0; t < k; ++t) {
                    const Eigen::Index src = m + t - pad;
                    if (src >= 0 && src < len) acc += w[t] * input(i, src);
                }
            }
            out(o, m) = acc >= 0.0 ? acc : layer.prelu[o] * acc;
        }
    }
    return out;
}

namespace {

CVector refine_spectrum(const CVector& x_hat, const CVector& feature, const PhaseWeights& weights) {
    if (x_hat.size() != feature.size())
        throw std::invalid_argument("phase inputs have different lengths");
    Eigen::MatrixXd h(4, x_hat.size());
    h.row(0) = x_hat.real().transpose();
    h.row(1) = x_hat.imag().transpose();
    h.row(2) = feature.real().transpose();
    h.row(3) = feature.imag().transpose();
    for (const auto& layer : weights.conv) h = conv_prelu(h, layer);
    CVector next = x_hat;
    for (Eigen::Index m = 0; m < next.size(); ++m) next[m] += cplx(h(0, m), h(1, m));
    return next;
}

}  // namespace

CVector block1_phase(const CVector& x_hat, const CVector& feature, const PhaseWeights& weights) {
    return refine_spectrum(x_hat, feature, weights);
}

Block2Output block2_phase(const CVector& x_hat, const CVector& feature, const PhaseWeights& weights,
                          const NetArchitecture& arch) {
    Block2Output out{refine_spectrum(x_hat, feature, weights), {}};
    RVector h = out.x_hat.cwiseAbs();
    for (const auto& layer : weights.gap) {
        if (layer.weight.cols() != h.size())
            throw std::invalid_argument("gap head layer expects width " + std::to_string(layer.weight.cols()) +
                                        ", got " + std::to_string(h.size()));
        RVector z = layer.weight * h + layer.bias;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            if (!(layer.running_var[i] > 0.0))
                throw std::invalid_argument("non-positive batch-norm running variance");
            const double normed = (z[i] - layer.running_mean[i]) / std::sqrt(layer.running_var[i] + arch.bn_eps);
            z[i] = std::tanh(layer.bn_scale[i] * normed + layer.bn_shift[i]);
        }
        h = std::move(z);
    }
    out.beta_deg = h * arch.grid.half_step_deg();
    return out;
}

SpectrumEstimate forward(const OneBitSnapshot& y, const DictionaryPair& dict, const WeightBundle& weights) {
    const NetArchitecture& arch = weights.architecture();
    if (arch.grid_points() != dict.cols())
        throw std::invalid_argument("weight bundle was built for M=" + std::to_string(arch.grid_points()) +
                                    " grid points but the dictionary has M=" + std::to_string(dict.cols()));
    if (!(arch.grid == dict.grid))
        throw std::invalid_argument("weight bundle grid " + arch.grid.describe() +
                                    " does not match dictionary grid " + dict.grid.describe());

    CVector x = init_block(y, dict);
    for (const auto& phase : weights.block1()) x = block1_phase(x, mm_feature(y, dict, x), phase);
    RVector beta = RVector::Zero(dict.cols());
    for (const auto& phase : weights.block2()) {
        Block2Output step = block2_phase(x, mm_feature(y, dict, x), phase, arch);
        x = std::move(step.x_hat);
        beta = std::move(step.beta_deg);
    }

    SpectrumEstimate est;
    est.grid_deg = dict.grid.points();
    est.magnitudes = normalized_magnitudes(x);
    est.beta_deg = std::move(beta);
    return est;
}

std::vector<SpectrumEstimate> forward_batch(const std::vector<OneBitSnapshot>& batch,
                                            const DictionaryPair& dict, const WeightBundle& weights) {
    std::vector<SpectrumEstimate> out;
    out.reserve(batch.size());
    for (const auto& y : batch) out.push_back(forward(y, dict, weights));
    return out;
}

}  // namespace obdoa
