#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "thermogen/tensor.hpp"

namespace thermogen {

struct AdamConfig {
    float lr = 2e-4f;
    float beta1 = 0.5f;
    float beta2 = 0.999f;
    float epsilon = 1e-8f;
};

// Bias-corrected Adam over a fixed parameter list. Moment buffers are
// allocated on the first step and stay shape-congruent with their parameter.
class AdamState {
public:
    AdamState() = default;
    explicit AdamState(AdamConfig config) : config_(config) {}

    // Applies one update in place using each parameter's current grad.
    void step(std::vector<Tensor>& params) {
        if (m_.empty()) {
            m_.resize(params.size());
            v_.resize(params.size());
            for (size_t i = 0; i < params.size(); ++i) {
                m_[i].assign(static_cast<size_t>(params[i].numel()), 0.0f);
                v_[i].assign(static_cast<size_t>(params[i].numel()), 0.0f);
            }
        }
        if (m_.size() != params.size())
            throw ContractError("adam_step parameter count changed");
        ++t_;
        float bc1 = 1.0f - std::pow(config_.beta1, static_cast<float>(t_));
        float bc2 = 1.0f - std::pow(config_.beta2, static_cast<float>(t_));
        for (size_t i = 0; i < params.size(); ++i) {
            auto& p = params[i].values();
            const auto& g = params[i].grad();
            if (m_[i].size() != p.size())
                throw ContractError("adam_step moment/parameter shape mismatch");
            for (size_t j = 0; j < p.size(); ++j) {
                m_[i][j] = config_.beta1 * m_[i][j] + (1.0f - config_.beta1) * g[j];
                v_[i][j] = config_.beta2 * v_[i][j] + (1.0f - config_.beta2) * g[j] * g[j];
                float mhat = m_[i][j] / bc1;
                float vhat = v_[i][j] / bc2;
                p[j] -= config_.lr * mhat / (std::sqrt(vhat) + config_.epsilon);
            }
        }
    }

    int64_t t() const { return t_; }
    const AdamConfig& config() const { return config_; }

    std::vector<std::vector<float>>& moments1() { return m_; }
    std::vector<std::vector<float>>& moments2() { return v_; }
    void restore(int64_t t) { t_ = t; }

private:
    AdamConfig config_;
    int64_t t_ = 0;
    std::vector<std::vector<float>> m_;
    std::vector<std::vector<float>> v_;
};

}  // namespace thermogen
