#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "thermogen/ops.hpp"
#include "thermogen/rng.hpp"
#include "thermogen/tensor.hpp"

namespace tgtest {

using thermogen::Rng;
using thermogen::Shape;
using thermogen::Tensor;

inline Tensor random_tensor(Shape shape, Rng& rng, bool requires_grad = false,
                            float lo = -1.0f, float hi = 1.0f) {
    std::vector<float> data(static_cast<size_t>(thermogen::numel(shape)));
    for (float& v : data) v = rng.uniform(lo, hi);
    return Tensor::from_data(std::move(shape), std::move(data), requires_grad);
}

// sum(w ⊙ t), built from differentiable primitives.
inline Tensor weighted_sum(const Tensor& t, const Tensor& w) {
    return thermogen::scale(thermogen::mean_all(thermogen::mul(t, w)),
                            static_cast<float>(t.numel()));
}

// Central finite difference of loss_fn with respect to one element of p.
inline double finite_diff(const std::function<float()>& loss_fn, Tensor& p, size_t j,
                          float h = 1e-3f) {
    float saved = p.values()[j];
    p.values()[j] = saved + h;
    double up = loss_fn();
    p.values()[j] = saved - h;
    double down = loss_fn();
    p.values()[j] = saved;
    return (up - down) / (2.0 * static_cast<double>(h));
}

// Autodiff gradient vs central finite differences on every element of every
// listed parameter. Elements with a meaningful finite-difference magnitude
// must match to 1% relative error; near-zero gradients must agree absolutely.
inline bool grads_match_fd(const std::function<Tensor()>& loss_builder,
                           std::vector<Tensor> params, float h = 1e-3f,
                           float rel_tol = 1e-2f, float fd_floor = 0.02f,
                           float abs_tol = 2e-3f) {
    for (Tensor& p : params) p.zero_grad();
    Tensor loss = loss_builder();
    thermogen::backward(loss);
    auto loss_value = [&]() { return loss_builder().item(); };
    for (Tensor& p : params) {
        const auto& g = p.grad();
        for (size_t j = 0; j < g.size(); ++j) {
            double fd = finite_diff(loss_value, p, j, h);
            double ad = g[j];
            if (std::fabs(fd) > fd_floor) {
                double rel = std::fabs(ad - fd) / std::fabs(fd);
                if (rel > rel_tol) return false;
            } else if (std::fabs(ad - fd) > abs_tol) {
                return false;
            }
        }
    }
    return true;
}

// Unique per-test scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = (std::filesystem::temp_directory_path() /
                 ("thermogen_test_" + tag + "_" + std::to_string(::getpid())))
                    .string();
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace tgtest
