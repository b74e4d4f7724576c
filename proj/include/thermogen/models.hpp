#pragma once

#include <string>
#include <utility>
#include <vector>

#include "thermogen/ops.hpp"
#include "thermogen/rng.hpp"
#include "thermogen/tensor.hpp"

namespace thermogen {

struct GeneratorSpec {
    int64_t in_channels = 3;
    int64_t out_channels = 1;
    int64_t base_width = 32;
    int levels = 4;      // U-Net down/up levels
    int res_blocks = 4;  // ResNet variant
    int64_t image_side = 64;
};

struct DiscriminatorSpec {
    int64_t in_channels = 4;  // condition + thermal for pix2pix, 1 for CycleGAN
    int n_layers = 3;         // strided conv layers before the 1-stride head
    int64_t base_width = 32;
    int64_t image_side = 64;
};

using NamedTensor = std::pair<std::string, Tensor>;

// conv/tconv + optional instance norm, weights owned here.
struct ConvBlock {
    Tensor weight;
    Tensor bias;  // undefined when the block is followed by a norm
    Tensor gain, shift;
    bool has_norm = false;
};

class UNetGenerator {
public:
    UNetGenerator(const GeneratorSpec& spec, Rng& rng);

    Tensor forward(const Tensor& input) const;
    std::vector<NamedTensor> named_parameters() const;
    std::vector<Tensor> parameters() const;
    const GeneratorSpec& spec() const { return spec_; }

    // Per-level (input channels, output channels) of the decoder tconvs,
    // exposed so the skip-concatenation arithmetic can be audited.
    std::vector<std::pair<int64_t, int64_t>> decoder_channel_plan() const;

private:
    GeneratorSpec spec_;
    std::vector<int64_t> widths_;
    std::vector<ConvBlock> enc_;
    std::vector<ConvBlock> dec_;
    ConvBlock head_;
};

class ResNetGenerator {
public:
    ResNetGenerator(const GeneratorSpec& spec, Rng& rng);

    Tensor forward(const Tensor& input) const;
    std::vector<NamedTensor> named_parameters() const;
    std::vector<Tensor> parameters() const;
    const GeneratorSpec& spec() const { return spec_; }

private:
    GeneratorSpec spec_;
    ConvBlock stem_;
    std::vector<ConvBlock> down_;
    std::vector<std::pair<ConvBlock, ConvBlock>> res_;
    std::vector<ConvBlock> up_;
    ConvBlock head_;
};

class PatchGan {
public:
    PatchGan(const DiscriminatorSpec& spec, Rng& rng);

    // Returns an (N,1,ph,pw) patch logit map.
    Tensor forward(const Tensor& input) const;
    std::vector<NamedTensor> named_parameters() const;
    std::vector<Tensor> parameters() const;
    const DiscriminatorSpec& spec() const { return spec_; }

    // Spatial extent after the strided stack (before the head).
    int64_t strided_extent() const;

private:
    DiscriminatorSpec spec_;
    std::vector<ConvBlock> layers_;
    ConvBlock head_;
};

// Weight init shared by all models: N(0, 0.02) convs, unit gains, zero
// shifts/biases.
Tensor init_conv_weight(Shape shape, Rng& rng);

}  // namespace thermogen
