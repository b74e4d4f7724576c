#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "thermogen/common.hpp"

namespace thermogen {

struct TensorNode;

// Dense float32 tensor. Copying a Tensor copies the handle, not the buffer;
// ops that build new values return new nodes. When any input of an op has
// requires_grad, the op records a tape node (parents + backward closure) on
// the result so backward() can sweep the graph in reverse topological order.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, float value, bool requires_grad = false);
    static Tensor from_data(Shape shape, std::vector<float> data, bool requires_grad = false);
    static Tensor scalar(float value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const;
    int64_t numel() const;
    bool requires_grad() const;

    std::vector<float>& values();
    const std::vector<float>& values() const;

    // Allocates the gradient buffer (zeroed) on first access.
    std::vector<float>& grad();
    bool has_grad() const;
    void zero_grad();

    float item() const;

    // Same values, no graph, no requires_grad. Buffer is copied.
    Tensor detach() const;

    std::shared_ptr<TensorNode> node() const { return node_; }
    explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

private:
    std::shared_ptr<TensorNode> node_;
};

struct TensorNode {
    Shape shape;
    std::vector<float> values;
    std::vector<float> grad;  // empty until first accumulation
    bool requires_grad = false;

    // Tape record; cleared when backward() consumes the graph.
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void()> backward_fn;

    void ensure_grad() {
        if (grad.empty()) grad.assign(values.size(), 0.0f);
    }
};

// Reverse sweep from a scalar loss. Populates grad on every reachable
// requires_grad leaf, then consumes the tape (parents and closures are
// released; a second backward on the same graph is a no-op on interior nodes).
void backward(Tensor loss);

}  // namespace thermogen
