#pragma once

#include <optional>

#include "thermogen/tensor.hpp"

namespace thermogen {

enum class Activation { Relu, LeakyRelu, Tanh, Sigmoid };

// Cross-correlation. input (N,Cin,H,W), weight (Cout,Cin,kH,kW).
// Per output element the accumulation order is in_ch -> kH -> kW, so a naive
// loop reference with the same order matches bitwise in float32.
Tensor conv2d(const Tensor& input, const Tensor& weight,
              const std::optional<Tensor>& bias, int stride, int padding);

// input (N,Cin,H,W), weight (Cin,Cout,kH,kW); output spatial extent
// (H-1)*stride - 2*padding + kH. Shares its kernel with conv2d's
// input-gradient, so differentiating conv2d reproduces it exactly.
Tensor transposed_conv2d(const Tensor& input, const Tensor& weight,
                         int stride, int padding);

Tensor activation(const Tensor& input, Activation kind);

// Per-(sample, channel) spatial normalization followed by gain/shift.
// gain and shift are length-C vectors.
Tensor instance_norm(const Tensor& input, const Tensor& gain,
                     const Tensor& shift, float epsilon = 1e-5f);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float s);
Tensor add_scalar(const Tensor& a, float s);
Tensor abs(const Tensor& a);
Tensor square(const Tensor& a);
Tensor mean_all(const Tensor& a);
Tensor concat_channels(const Tensor& a, const Tensor& b);

// mean over elements of BCE(sigmoid(logits), target), computed in the
// numerically stable softplus form.
Tensor bce_with_logits_mean(const Tensor& logits, float target);

// mean((a - target)^2) against a constant target, for least-squares GAN loss.
Tensor mse_scalar_mean(const Tensor& a, float target);

// mean |a - b|
Tensor l1_mean(const Tensor& a, const Tensor& b);

}  // namespace thermogen
