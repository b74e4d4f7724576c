#include "thermogen/models.hpp"

#include <algorithm>

namespace thermogen {

Tensor init_conv_weight(Shape shape, Rng& rng) {
    std::vector<float> w(static_cast<size_t>(numel(shape)));
    for (float& v : w) v = rng.normal(0.0f, 0.02f);
    return Tensor::from_data(std::move(shape), std::move(w), /*requires_grad=*/true);
}

namespace {

ConvBlock make_block(Shape weight_shape, int64_t out_ch, bool norm, bool bias, Rng& rng) {
    ConvBlock b;
    b.weight = init_conv_weight(std::move(weight_shape), rng);
    if (bias) b.bias = Tensor::zeros({out_ch}, true);
    b.has_norm = norm;
    if (norm) {
        b.gain = Tensor::full({out_ch}, 1.0f, true);
        b.shift = Tensor::zeros({out_ch}, true);
    }
    return b;
}

Tensor apply_conv(const ConvBlock& b, const Tensor& x, int stride, int padding) {
    std::optional<Tensor> bias;
    if (b.bias.defined()) bias = b.bias;
    Tensor y = conv2d(x, b.weight, bias, stride, padding);
    if (b.has_norm) y = instance_norm(y, b.gain, b.shift);
    return y;
}

Tensor apply_tconv(const ConvBlock& b, const Tensor& x, int stride, int padding) {
    Tensor y = transposed_conv2d(x, b.weight, stride, padding);
    if (b.has_norm) y = instance_norm(y, b.gain, b.shift);
    return y;
}

void collect(std::vector<NamedTensor>& out, const std::string& prefix, const ConvBlock& b) {
    out.emplace_back(prefix + ".weight", b.weight);
    if (b.bias.defined()) out.emplace_back(prefix + ".bias", b.bias);
    if (b.has_norm) {
        out.emplace_back(prefix + ".gain", b.gain);
        out.emplace_back(prefix + ".shift", b.shift);
    }
}

}  // namespace

// ---------------------------------------------------------------- UNet

UNetGenerator::UNetGenerator(const GeneratorSpec& spec, Rng& rng) : spec_(spec) {
    if (spec.levels < 1) throw ConfigError("unet needs at least one level");
    int64_t div = int64_t{1} << spec.levels;
    if (spec.image_side % div != 0)
        throw ConfigError("image side " + std::to_string(spec.image_side) +
                          " not divisible by 2^levels = " + std::to_string(div));
    widths_.resize(spec.levels);
    for (int k = 0; k < spec.levels; ++k)
        widths_[k] = std::min(spec.base_width << k, spec.base_width * 8);

    int64_t cin = spec.in_channels;
    for (int k = 0; k < spec.levels; ++k) {
        bool norm = k > 0;
        enc_.push_back(make_block({widths_[k], cin, 4, 4}, widths_[k], norm, !norm, rng));
        cin = widths_[k];
    }
    for (int k = spec.levels - 1; k >= 1; --k) {
        int64_t in_ch = (k == spec.levels - 1) ? widths_[k] : 2 * widths_[k];
        dec_.push_back(make_block({in_ch, widths_[k - 1], 4, 4}, widths_[k - 1], true, false, rng));
    }
    int64_t head_in = spec.levels == 1 ? widths_[0] : 2 * widths_[0];
    head_ = make_block({head_in, spec.out_channels, 4, 4}, spec.out_channels, false, false, rng);
}

Tensor UNetGenerator::forward(const Tensor& input) const {
    std::vector<Tensor> skips;
    Tensor x = input;
    for (const auto& b : enc_) {
        x = apply_conv(b, x, 2, 1);
        x = activation(x, Activation::LeakyRelu);
        skips.push_back(x);
    }
    Tensor y = skips.back();
    for (size_t i = 0; i < dec_.size(); ++i) {
        y = apply_tconv(dec_[i], y, 2, 1);
        y = activation(y, Activation::Relu);
        y = concat_channels(y, skips[skips.size() - 2 - i]);
    }
    y = transposed_conv2d(y, head_.weight, 2, 1);
    return activation(y, Activation::Tanh);
}

std::vector<std::pair<int64_t, int64_t>> UNetGenerator::decoder_channel_plan() const {
    std::vector<std::pair<int64_t, int64_t>> plan;
    for (const auto& b : dec_) plan.emplace_back(b.weight.shape()[0], b.weight.shape()[1]);
    plan.emplace_back(head_.weight.shape()[0], head_.weight.shape()[1]);
    return plan;
}

std::vector<NamedTensor> UNetGenerator::named_parameters() const {
    std::vector<NamedTensor> out;
    for (size_t i = 0; i < enc_.size(); ++i) collect(out, "enc" + std::to_string(i), enc_[i]);
    for (size_t i = 0; i < dec_.size(); ++i) collect(out, "dec" + std::to_string(i), dec_[i]);
    collect(out, "head", head_);
    return out;
}

std::vector<Tensor> UNetGenerator::parameters() const {
    std::vector<Tensor> out;
    for (auto& [name, t] : named_parameters()) out.push_back(t);
    return out;
}

// ---------------------------------------------------------------- ResNet

ResNetGenerator::ResNetGenerator(const GeneratorSpec& spec, Rng& rng) : spec_(spec) {
    if (spec.image_side % 4 != 0)
        throw ConfigError("resnet generator needs image side divisible by 4");
    int64_t w = spec.base_width;
    stem_ = make_block({w, spec.in_channels, 7, 7}, w, true, false, rng);
    down_.push_back(make_block({2 * w, w, 3, 3}, 2 * w, true, false, rng));
    down_.push_back(make_block({4 * w, 2 * w, 3, 3}, 4 * w, true, false, rng));
    for (int i = 0; i < spec.res_blocks; ++i) {
        res_.emplace_back(make_block({4 * w, 4 * w, 3, 3}, 4 * w, true, false, rng),
                          make_block({4 * w, 4 * w, 3, 3}, 4 * w, true, false, rng));
    }
    up_.push_back(make_block({4 * w, 2 * w, 4, 4}, 2 * w, true, false, rng));
    up_.push_back(make_block({2 * w, w, 4, 4}, w, true, false, rng));
    head_ = make_block({spec.out_channels, w, 7, 7}, spec.out_channels, false, true, rng);
}

Tensor ResNetGenerator::forward(const Tensor& input) const {
    Tensor x = activation(apply_conv(stem_, input, 1, 3), Activation::Relu);
    for (const auto& b : down_) x = activation(apply_conv(b, x, 2, 1), Activation::Relu);
    for (const auto& [b1, b2] : res_) {
        Tensor r = activation(apply_conv(b1, x, 1, 1), Activation::Relu);
        r = apply_conv(b2, r, 1, 1);
        x = add(x, r);
    }
    for (const auto& b : up_) x = activation(apply_tconv(b, x, 2, 1), Activation::Relu);
    x = apply_conv(head_, x, 1, 3);
    return activation(x, Activation::Tanh);
}

std::vector<NamedTensor> ResNetGenerator::named_parameters() const {
    std::vector<NamedTensor> out;
    collect(out, "stem", stem_);
    for (size_t i = 0; i < down_.size(); ++i) collect(out, "down" + std::to_string(i), down_[i]);
    for (size_t i = 0; i < res_.size(); ++i) {
        collect(out, "res" + std::to_string(i) + "a", res_[i].first);
        collect(out, "res" + std::to_string(i) + "b", res_[i].second);
    }
    for (size_t i = 0; i < up_.size(); ++i) collect(out, "up" + std::to_string(i), up_[i]);
    collect(out, "head", head_);
    return out;
}

std::vector<Tensor> ResNetGenerator::parameters() const {
    std::vector<Tensor> out;
    for (auto& [name, t] : named_parameters()) out.push_back(t);
    return out;
}

// ---------------------------------------------------------------- PatchGAN

PatchGan::PatchGan(const DiscriminatorSpec& spec, Rng& rng) : spec_(spec) {
    if (spec.n_layers < 1) throw ConfigError("patchgan needs at least one layer");
    int64_t extent = spec.image_side;
    int64_t cin = spec.in_channels;
    for (int k = 0; k < spec.n_layers; ++k) {
        int64_t w = std::min(spec.base_width << k, spec.base_width * 8);
        bool norm = k > 0;
        layers_.push_back(make_block({w, cin, 4, 4}, w, norm, !norm, rng));
        cin = w;
        extent = (extent + 2 - 4) / 2 + 1;
        if (extent < 1)
            throw ConfigError("patchgan strided stack collapses below 1x1 at layer " +
                              std::to_string(k));
    }
    if (extent + 2 - 4 + 1 < 1)
        throw ConfigError("patchgan head output extent non-positive");
    head_ = make_block({1, cin, 4, 4}, 1, false, true, rng);
}

int64_t PatchGan::strided_extent() const {
    int64_t extent = spec_.image_side;
    for (int k = 0; k < spec_.n_layers; ++k) extent = (extent + 2 - 4) / 2 + 1;
    return extent;
}

Tensor PatchGan::forward(const Tensor& input) const {
    Tensor x = input;
    for (const auto& b : layers_) {
        x = apply_conv(b, x, 2, 1);
        x = activation(x, Activation::LeakyRelu);
    }
    std::optional<Tensor> bias;
    if (head_.bias.defined()) bias = head_.bias;
    return conv2d(x, head_.weight, bias, 1, 1);
}

std::vector<NamedTensor> PatchGan::named_parameters() const {
    std::vector<NamedTensor> out;
    for (size_t i = 0; i < layers_.size(); ++i) collect(out, "layer" + std::to_string(i), layers_[i]);
    collect(out, "head", head_);
    return out;
}

std::vector<Tensor> PatchGan::parameters() const {
    std::vector<Tensor> out;
    for (auto& [name, t] : named_parameters()) out.push_back(t);
    return out;
}

}  // namespace thermogen
