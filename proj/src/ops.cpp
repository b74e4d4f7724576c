#include "thermogen/ops.hpp"

#include <cmath>
#include <cstring>

namespace thermogen {

namespace {

Tensor make_result(Shape shape, std::vector<float> values) {
    return Tensor::from_data(std::move(shape), std::move(values));
}

void record(const Tensor& out, std::vector<Tensor> parents, std::function<void()> fn) {
    auto node = out.node();
    node->requires_grad = true;
    for (const Tensor& p : parents) node->parents.push_back(p.node());
    node->backward_fn = std::move(fn);
}

bool needs_tape(std::initializer_list<const Tensor*> ts) {
    for (const Tensor* t : ts)
        if (t && t->defined() && t->requires_grad()) return true;
    return false;
}

// dst[n,b,oy,ox] += sum over a -> ky -> kx of
//   src[n,a,oy*s-p+ky,ox*s-p+kx] * w[b,a,ky,kx]
// Accumulation per output element runs in a local float, fixed order.
void correlate_acc(const float* src, int64_t N, int64_t A, int64_t H, int64_t W,
                   const float* w, int64_t B, int64_t kH, int64_t kW,
                   int stride, int padding, float* dst, int64_t Ho, int64_t Wo) {
    for (int64_t n = 0; n < N; ++n) {
        const float* src_n = src + n * A * H * W;
        for (int64_t b = 0; b < B; ++b) {
            const float* w_b = w + b * A * kH * kW;
            float* dst_nb = dst + (n * B + b) * Ho * Wo;
            for (int64_t oy = 0; oy < Ho; ++oy) {
                for (int64_t ox = 0; ox < Wo; ++ox) {
                    float acc = dst_nb[oy * Wo + ox];
                    for (int64_t a = 0; a < A; ++a) {
                        const float* src_na = src_n + a * H * W;
                        const float* w_ba = w_b + a * kH * kW;
                        for (int64_t ky = 0; ky < kH; ++ky) {
                            int64_t iy = oy * stride - padding + ky;
                            if (iy < 0 || iy >= H) continue;
                            const float* row = src_na + iy * W;
                            const float* wrow = w_ba + ky * kW;
                            int64_t base = ox * stride - padding;
                            for (int64_t kx = 0; kx < kW; ++kx) {
                                int64_t ix = base + kx;
                                if (ix < 0 || ix >= W) continue;
                                acc += row[ix] * wrow[kx];
                            }
                        }
                    }
                    dst_nb[oy * Wo + ox] = acc;
                }
            }
        }
    }
}

// dst[n,b,oy*s-p+ky,ox*s-p+kx] += src[n,a,oy,ox] * w[a,b,ky,kx]
void scatter_acc(const float* src, int64_t N, int64_t A, int64_t h, int64_t w_,
                 const float* w, int64_t B, int64_t kH, int64_t kW,
                 int stride, int padding, float* dst, int64_t H, int64_t W) {
    for (int64_t n = 0; n < N; ++n) {
        for (int64_t a = 0; a < A; ++a) {
            const float* src_na = src + (n * A + a) * h * w_;
            const float* w_a = w + a * B * kH * kW;
            for (int64_t b = 0; b < B; ++b) {
                float* dst_nb = dst + (n * B + b) * H * W;
                const float* w_ab = w_a + b * kH * kW;
                for (int64_t oy = 0; oy < h; ++oy) {
                    for (int64_t ox = 0; ox < w_; ++ox) {
                        float v = src_na[oy * w_ + ox];
                        if (v == 0.0f) continue;
                        for (int64_t ky = 0; ky < kH; ++ky) {
                            int64_t y = oy * stride - padding + ky;
                            if (y < 0 || y >= H) continue;
                            float* row = dst_nb + y * W;
                            const float* wrow = w_ab + ky * kW;
                            int64_t base = ox * stride - padding;
                            for (int64_t kx = 0; kx < kW; ++kx) {
                                int64_t x = base + kx;
                                if (x < 0 || x >= W) continue;
                                row[x] += v * wrow[kx];
                            }
                        }
                    }
                }
            }
        }
    }
}

// dw[a,b,ky,kx] += sum_n,oy,ox small[n,a,oy,ox] * big[n,b,oy*s-p+ky,ox*s-p+kx]
void weight_grad_acc(const float* small, int64_t N, int64_t A, int64_t h, int64_t w_,
                     const float* big, int64_t B, int64_t H, int64_t W,
                     int64_t kH, int64_t kW, int stride, int padding, float* dw) {
    for (int64_t n = 0; n < N; ++n) {
        for (int64_t a = 0; a < A; ++a) {
            const float* small_na = small + (n * A + a) * h * w_;
            for (int64_t b = 0; b < B; ++b) {
                const float* big_nb = big + (n * B + b) * H * W;
                float* dw_ab = dw + (a * B + b) * kH * kW;
                for (int64_t ky = 0; ky < kH; ++ky) {
                    for (int64_t kx = 0; kx < kW; ++kx) {
                        float acc = 0.0f;
                        for (int64_t oy = 0; oy < h; ++oy) {
                            int64_t y = oy * stride - padding + ky;
                            if (y < 0 || y >= H) continue;
                            const float* brow = big_nb + y * W;
                            const float* srow = small_na + oy * w_;
                            for (int64_t ox = 0; ox < w_; ++ox) {
                                int64_t x = ox * stride - padding + kx;
                                if (x < 0 || x >= W) continue;
                                acc += srow[ox] * brow[x];
                            }
                        }
                        dw_ab[ky * kW + kx] += acc;
                    }
                }
            }
        }
    }
}

void check_rank4(const Tensor& t, const char* what) {
    if (t.shape().size() != 4)
        throw ContractError(std::string(what) + " must be rank 4, got shape " + shape_str(t.shape()));
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight,
              const std::optional<Tensor>& bias, int stride, int padding) {
    check_rank4(input, "conv2d input");
    check_rank4(weight, "conv2d weight");
    if (stride < 1) throw ContractError("conv2d stride must be positive");
    if (padding < 0) throw ContractError("conv2d padding must be non-negative");
    const Shape& is = input.shape();
    const Shape& ws = weight.shape();
    int64_t N = is[0], Cin = is[1], H = is[2], W = is[3];
    int64_t Cout = ws[0], kH = ws[2], kW = ws[3];
    if (ws[1] != Cin)
        throw ContractError("conv2d channel mismatch: input " + shape_str(is) +
                            " vs weight " + shape_str(ws));
    int64_t Ho = (H + 2 * padding - kH) / stride + 1;
    int64_t Wo = (W + 2 * padding - kW) / stride + 1;
    if (H + 2 * padding < kH || W + 2 * padding < kW || Ho < 1 || Wo < 1)
        throw ContractError("conv2d output extent non-positive for input " + shape_str(is) +
                            " weight " + shape_str(ws));
    if (bias && bias->numel() != Cout)
        throw ContractError("conv2d bias length " + std::to_string(bias->numel()) +
                            " vs out channels " + std::to_string(Cout));

    std::vector<float> out(static_cast<size_t>(N * Cout * Ho * Wo), 0.0f);
    if (bias) {
        const auto& bv = bias->values();
        for (int64_t n = 0; n < N; ++n)
            for (int64_t c = 0; c < Cout; ++c) {
                float* p = out.data() + (n * Cout + c) * Ho * Wo;
                for (int64_t i = 0; i < Ho * Wo; ++i) p[i] = bv[c];
            }
    }
    correlate_acc(input.values().data(), N, Cin, H, W,
                  weight.values().data(), Cout, kH, kW,
                  stride, padding, out.data(), Ho, Wo);
    Tensor result = make_result({N, Cout, Ho, Wo}, std::move(out));

    if (needs_tape({&input, &weight, bias ? &*bias : nullptr})) {
        std::vector<Tensor> parents = {input, weight};
        if (bias) parents.push_back(*bias);
        auto in_n = input.node();
        auto w_n = weight.node();
        auto b_n = bias ? bias->node() : nullptr;
        TensorNode* out_n = result.node().get();
        record(result, parents, [=]() {
            const float* go = out_n->grad.data();
            if (in_n->requires_grad || in_n->backward_fn) {
                in_n->ensure_grad();
                scatter_acc(go, N, Cout, Ho, Wo, w_n->values.data(), Cin, kH, kW,
                            stride, padding, in_n->grad.data(), H, W);
            }
            if (w_n->requires_grad || w_n->backward_fn) {
                w_n->ensure_grad();
                weight_grad_acc(go, N, Cout, Ho, Wo, in_n->values.data(), Cin, H, W,
                                kH, kW, stride, padding, w_n->grad.data());
            }
            if (b_n && (b_n->requires_grad || b_n->backward_fn)) {
                b_n->ensure_grad();
                for (int64_t n = 0; n < N; ++n)
                    for (int64_t c = 0; c < Cout; ++c) {
                        const float* p = go + (n * Cout + c) * Ho * Wo;
                        float acc = 0.0f;
                        for (int64_t i = 0; i < Ho * Wo; ++i) acc += p[i];
                        b_n->grad[c] += acc;
                    }
            }
        });
    }
    return result;
}

Tensor transposed_conv2d(const Tensor& input, const Tensor& weight,
                         int stride, int padding) {
    check_rank4(input, "transposed_conv2d input");
    check_rank4(weight, "transposed_conv2d weight");
    if (stride < 1) throw ContractError("transposed_conv2d stride must be positive");
    if (padding < 0) throw ContractError("transposed_conv2d padding must be non-negative");
    const Shape& is = input.shape();
    const Shape& ws = weight.shape();
    int64_t N = is[0], Cin = is[1], H = is[2], W = is[3];
    int64_t Cout = ws[1], kH = ws[2], kW = ws[3];
    if (ws[0] != Cin)
        throw ContractError("transposed_conv2d channel mismatch: input " + shape_str(is) +
                            " vs weight " + shape_str(ws));
    int64_t Ho = (H - 1) * stride - 2 * padding + kH;
    int64_t Wo = (W - 1) * stride - 2 * padding + kW;
    if (Ho < 1 || Wo < 1)
        throw ContractError("transposed_conv2d output extent non-positive for input " +
                            shape_str(is) + " weight " + shape_str(ws));

    std::vector<float> out(static_cast<size_t>(N * Cout * Ho * Wo), 0.0f);
    scatter_acc(input.values().data(), N, Cin, H, W,
                weight.values().data(), Cout, kH, kW,
                stride, padding, out.data(), Ho, Wo);
    Tensor result = make_result({N, Cout, Ho, Wo}, std::move(out));

    if (needs_tape({&input, &weight})) {
        auto in_n = input.node();
        auto w_n = weight.node();
        TensorNode* out_n = result.node().get();
        record(result, {input, weight}, [=]() {
            const float* go = out_n->grad.data();
            if (in_n->requires_grad || in_n->backward_fn) {
                in_n->ensure_grad();
                correlate_acc(go, N, Cout, Ho, Wo, w_n->values.data(), Cin, kH, kW,
                              stride, padding, in_n->grad.data(), H, W);
            }
            if (w_n->requires_grad || w_n->backward_fn) {
                w_n->ensure_grad();
                weight_grad_acc(in_n->values.data(), N, Cin, H, W, go, Cout, Ho, Wo,
                                kH, kW, stride, padding, w_n->grad.data());
            }
        });
    }
    return result;
}

Tensor activation(const Tensor& input, Activation kind) {
    const auto& x = input.values();
    std::vector<float> y(x.size());
    switch (kind) {
        case Activation::Relu:
            for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
            break;
        case Activation::LeakyRelu:
            for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0f ? x[i] : 0.2f * x[i];
            break;
        case Activation::Tanh:
            for (size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
            break;
        case Activation::Sigmoid:
            for (size_t i = 0; i < x.size(); ++i) y[i] = 1.0f / (1.0f + std::exp(-x[i]));
            break;
    }
    Tensor result = make_result(input.shape(), std::move(y));
    if (needs_tape({&input})) {
        auto in_n = input.node();
        TensorNode* out_n = result.node().get();
        record(result, {input}, [=]() {
            in_n->ensure_grad();
            const auto& g = out_n->grad;
            const auto& yv = out_n->values;
            const auto& xv = in_n->values;
            auto& dx = in_n->grad;
            switch (kind) {
                case Activation::Relu:
                    for (size_t i = 0; i < g.size(); ++i)
                        if (xv[i] > 0.0f) dx[i] += g[i];
                    break;
                case Activation::LeakyRelu:
                    for (size_t i = 0; i < g.size(); ++i)
                        dx[i] += g[i] * (xv[i] > 0.0f ? 1.0f : 0.2f);
                    break;
                case Activation::Tanh:
                    for (size_t i = 0; i < g.size(); ++i)
                        dx[i] += g[i] * (1.0f - yv[i] * yv[i]);
                    break;
                case Activation::Sigmoid:
                    for (size_t i = 0; i < g.size(); ++i)
                        dx[i] += g[i] * yv[i] * (1.0f - yv[i]);
                    break;
            }
        });
    }
    return result;
}

Tensor instance_norm(const Tensor& input, const Tensor& gain,
                     const Tensor& shift, float epsilon) {
    check_rank4(input, "instance_norm input");
    const Shape& is = input.shape();
    int64_t N = is[0], C = is[1], M = is[2] * is[3];
    if (gain.numel() != C || shift.numel() != C)
        throw ContractError("instance_norm gain/shift length must equal channel count " +
                            std::to_string(C));

    const auto& x = input.values();
    const auto& gv = gain.values();
    const auto& bv = shift.values();
    std::vector<float> y(x.size());
    auto xhat = std::make_shared<std::vector<float>>(x.size());
    auto ivstd = std::make_shared<std::vector<float>>(static_cast<size_t>(N * C));
    for (int64_t n = 0; n < N; ++n) {
        for (int64_t c = 0; c < C; ++c) {
            const float* xc = x.data() + (n * C + c) * M;
            float mu = 0.0f;
            for (int64_t i = 0; i < M; ++i) mu += xc[i];
            mu /= static_cast<float>(M);
            float var = 0.0f;
            for (int64_t i = 0; i < M; ++i) {
                float d = xc[i] - mu;
                var += d * d;
            }
            var /= static_cast<float>(M);
            float iv = 1.0f / std::sqrt(var + epsilon);
            (*ivstd)[static_cast<size_t>(n * C + c)] = iv;
            float* xh = xhat->data() + (n * C + c) * M;
            float* yc = y.data() + (n * C + c) * M;
            for (int64_t i = 0; i < M; ++i) {
                xh[i] = (xc[i] - mu) * iv;
                yc[i] = gv[c] * xh[i] + bv[c];
            }
        }
    }
    Tensor result = make_result(is, std::move(y));
    if (needs_tape({&input, &gain, &shift})) {
        auto in_n = input.node();
        auto g_n = gain.node();
        auto b_n = shift.node();
        TensorNode* out_n = result.node().get();
        record(result, {input, gain, shift}, [=]() {
            const auto& go = out_n->grad;
            const float inv_m = 1.0f / static_cast<float>(M);
            bool want_x = in_n->requires_grad || in_n->backward_fn;
            bool want_g = g_n->requires_grad || g_n->backward_fn;
            bool want_b = b_n->requires_grad || b_n->backward_fn;
            if (want_x) in_n->ensure_grad();
            if (want_g) g_n->ensure_grad();
            if (want_b) b_n->ensure_grad();
            for (int64_t n = 0; n < N; ++n) {
                for (int64_t c = 0; c < C; ++c) {
                    size_t base = static_cast<size_t>((n * C + c) * M);
                    const float* g = go.data() + base;
                    const float* xh = xhat->data() + base;
                    float iv = (*ivstd)[static_cast<size_t>(n * C + c)];
                    float gamma = g_n->values[c];
                    float sum_g = 0.0f, sum_gxh = 0.0f;
                    for (int64_t i = 0; i < M; ++i) {
                        sum_g += g[i];
                        sum_gxh += g[i] * xh[i];
                    }
                    if (want_g) g_n->grad[c] += sum_gxh;
                    if (want_b) b_n->grad[c] += sum_g;
                    if (want_x) {
                        float* dx = in_n->grad.data() + base;
                        for (int64_t i = 0; i < M; ++i) {
                            dx[i] += gamma * iv *
                                     (g[i] - inv_m * sum_g - xh[i] * inv_m * sum_gxh);
                        }
                    }
                }
            }
        });
    }
    return result;
}

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw ContractError(std::string(op) + " shape mismatch: " + shape_str(a.shape()) +
                            " vs " + shape_str(b.shape()));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    std::vector<float> y(a.values().size());
    for (size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] + b.values()[i];
    Tensor result = make_result(a.shape(), std::move(y));
    if (needs_tape({&a, &b})) {
        auto an = a.node();
        auto bn = b.node();
        TensorNode* on = result.node().get();
        record(result, {a, b}, [=]() {
            if (an->requires_grad || an->backward_fn) {
                an->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
            }
            if (bn->requires_grad || bn->backward_fn) {
                bn->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] += on->grad[i];
            }
        });
    }
    return result;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    std::vector<float> y(a.values().size());
    for (size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] - b.values()[i];
    Tensor result = make_result(a.shape(), std::move(y));
    if (needs_tape({&a, &b})) {
        auto an = a.node();
        auto bn = b.node();
        TensorNode* on = result.node().get();
        record(result, {a, b}, [=]() {
            if (an->requires_grad || an->backward_fn) {
                an->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
            }
            if (bn->requires_grad || bn->backward_fn) {
                bn->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] -= on->grad[i];
            }
        });
    }
    return result;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    std::vector<float> y(a.values().size());
    for (size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] * b.values()[i];
    Tensor result = make_result(a.shape(), std::move(y));
    if (needs_tape({&a, &b})) {
        auto an = a.node();
        auto bn = b.node();
        TensorNode* on = result.node().get();
        record(result, {a, b}, [=]() {
            if (an->requires_grad || an->backward_fn) {
                an->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i)
                    an->grad[i] += on->grad[i] * bn->values[i];
            }
            if (bn->requires_grad || bn->backward_fn) {
                bn->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i)
                    bn->grad[i] += on->grad[i] * an->values[i];
            }
        });
    }
    return result;
}

Tensor scale(const Tensor& a, float s) {
    std::vector<float> y(a.values().size());
    for (size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] * s;
    Tensor result = make_result(a.shape(), std::move(y));
    if (needs_tape({&a})) {
        auto an = a.node();
        TensorNode* on = result.node().get();
        record(result, {a}, [=]() {
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i] * s;
        });
    }
    return result;
}

Tensor add_scalar(const Tensor& a, float s) {
    std::vector<float> y(a.values().size());
    for (size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] + s;
    Tensor result = make_result(a.shape(), std::move(y));
    if (needs_tape({&a})) {
        auto an = a.node();
        TensorNode* on = result.node().get();
        record(result, {a}, [=]() {
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
        });
    }
    return result;
}

Tensor abs(const Tensor& a) {
    std::vector<float> y(a.values().size());
    for (size_t i = 0; i < y.size(); ++i) y[i] = std::fabs(a.values()[i]);
    Tensor result = make_result(a.shape(), std::move(y));
    if (needs_tape({&a})) {
        auto an = a.node();
        TensorNode* on = result.node().get();
        record(result, {a}, [=]() {
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) {
                float x = an->values[i];
                float s = x > 0.0f ? 1.0f : (x < 0.0f ? -1.0f : 0.0f);
                an->grad[i] += on->grad[i] * s;
            }
        });
    }
    return result;
}

Tensor square(const Tensor& a) {
    std::vector<float> y(a.values().size());
    for (size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] * a.values()[i];
    Tensor result = make_result(a.shape(), std::move(y));
    if (needs_tape({&a})) {
        auto an = a.node();
        TensorNode* on = result.node().get();
        record(result, {a}, [=]() {
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i)
                an->grad[i] += on->grad[i] * 2.0f * an->values[i];
        });
    }
    return result;
}

Tensor mean_all(const Tensor& a) {
    double acc = 0.0;
    for (float v : a.values()) acc += v;
    float m = static_cast<float>(acc / static_cast<double>(a.numel()));
    Tensor result = Tensor::scalar(m);
    if (needs_tape({&a})) {
        auto an = a.node();
        TensorNode* on = result.node().get();
        float inv = 1.0f / static_cast<float>(a.numel());
        record(result, {a}, [=]() {
            an->ensure_grad();
            float g = on->grad[0] * inv;
            for (size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += g;
        });
    }
    return result;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    check_rank4(a, "concat input");
    check_rank4(b, "concat input");
    const Shape& as = a.shape();
    const Shape& bs = b.shape();
    if (as[0] != bs[0] || as[2] != bs[2] || as[3] != bs[3])
        throw ContractError("concat_channels mismatch: " + shape_str(as) + " vs " + shape_str(bs));
    int64_t N = as[0], Ca = as[1], Cb = bs[1], HW = as[2] * as[3];
    std::vector<float> y(static_cast<size_t>(N * (Ca + Cb) * HW));
    for (int64_t n = 0; n < N; ++n) {
        std::memcpy(y.data() + n * (Ca + Cb) * HW, a.values().data() + n * Ca * HW,
                    static_cast<size_t>(Ca * HW) * sizeof(float));
        std::memcpy(y.data() + (n * (Ca + Cb) + Ca) * HW, b.values().data() + n * Cb * HW,
                    static_cast<size_t>(Cb * HW) * sizeof(float));
    }
    Tensor result = make_result({N, Ca + Cb, as[2], as[3]}, std::move(y));
    if (needs_tape({&a, &b})) {
        auto an = a.node();
        auto bn = b.node();
        TensorNode* on = result.node().get();
        record(result, {a, b}, [=]() {
            for (int64_t n = 0; n < N; ++n) {
                if (an->requires_grad || an->backward_fn) {
                    an->ensure_grad();
                    const float* g = on->grad.data() + n * (Ca + Cb) * HW;
                    float* dst = an->grad.data() + n * Ca * HW;
                    for (int64_t i = 0; i < Ca * HW; ++i) dst[i] += g[i];
                }
                if (bn->requires_grad || bn->backward_fn) {
                    bn->ensure_grad();
                    const float* g = on->grad.data() + (n * (Ca + Cb) + Ca) * HW;
                    float* dst = bn->grad.data() + n * Cb * HW;
                    for (int64_t i = 0; i < Cb * HW; ++i) dst[i] += g[i];
                }
            }
        });
    }
    return result;
}

Tensor bce_with_logits_mean(const Tensor& logits, float target) {
    double acc = 0.0;
    for (float x : logits.values()) {
        // max(x,0) - x*t + log(1 + exp(-|x|))
        acc += (x > 0.0f ? x : 0.0f) - x * target + std::log1p(std::exp(-std::fabs(x)));
    }
    float m = static_cast<float>(acc / static_cast<double>(logits.numel()));
    Tensor result = Tensor::scalar(m);
    if (needs_tape({&logits})) {
        auto ln = logits.node();
        TensorNode* on = result.node().get();
        float inv = 1.0f / static_cast<float>(logits.numel());
        record(result, {logits}, [=]() {
            ln->ensure_grad();
            float g = on->grad[0] * inv;
            for (size_t i = 0; i < ln->grad.size(); ++i) {
                float s = 1.0f / (1.0f + std::exp(-ln->values[i]));
                ln->grad[i] += g * (s - target);
            }
        });
    }
    return result;
}

Tensor mse_scalar_mean(const Tensor& a, float target) {
    double acc = 0.0;
    for (float x : a.values()) {
        double d = static_cast<double>(x) - target;
        acc += d * d;
    }
    float m = static_cast<float>(acc / static_cast<double>(a.numel()));
    Tensor result = Tensor::scalar(m);
    if (needs_tape({&a})) {
        auto an = a.node();
        TensorNode* on = result.node().get();
        float inv = 2.0f / static_cast<float>(a.numel());
        record(result, {a}, [=]() {
            an->ensure_grad();
            float g = on->grad[0] * inv;
            for (size_t i = 0; i < an->grad.size(); ++i)
                an->grad[i] += g * (an->values[i] - target);
        });
    }
    return result;
}

Tensor l1_mean(const Tensor& a, const Tensor& b) {
    return mean_all(abs(sub(a, b)));
}

}  // namespace thermogen
