#include "thermogen/tensor.hpp"

#include <sstream>
#include <unordered_set>

namespace thermogen {

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ", ";
        os << shape[i];
    }
    os << ")";
    return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    return full(std::move(shape), 0.0f, requires_grad);
}

Tensor Tensor::full(Shape shape, float value, bool requires_grad) {
    auto node = std::make_shared<TensorNode>();
    node->values.assign(static_cast<size_t>(::thermogen::numel(shape)), value);
    node->shape = std::move(shape);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::from_data(Shape shape, std::vector<float> data, bool requires_grad) {
    if (::thermogen::numel(shape) != static_cast<int64_t>(data.size())) {
        throw ContractError("tensor data length " + std::to_string(data.size()) +
                            " does not match shape " + shape_str(shape));
    }
    auto node = std::make_shared<TensorNode>();
    node->shape = std::move(shape);
    node->values = std::move(data);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(float value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }
int64_t Tensor::numel() const { return static_cast<int64_t>(node_->values.size()); }
bool Tensor::requires_grad() const { return node_->requires_grad; }

std::vector<float>& Tensor::values() { return node_->values; }
const std::vector<float>& Tensor::values() const { return node_->values; }

std::vector<float>& Tensor::grad() {
    node_->ensure_grad();
    return node_->grad;
}

bool Tensor::has_grad() const { return !node_->grad.empty(); }

void Tensor::zero_grad() {
    if (!node_->grad.empty()) node_->grad.assign(node_->values.size(), 0.0f);
}

float Tensor::item() const {
    if (node_->values.size() != 1) {
        throw ContractError("item() on tensor of shape " + shape_str(node_->shape));
    }
    return node_->values[0];
}

Tensor Tensor::detach() const {
    auto node = std::make_shared<TensorNode>();
    node->shape = node_->shape;
    node->values = node_->values;
    node->requires_grad = false;
    return Tensor(std::move(node));
}

void backward(Tensor loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw ContractError("backward() requires a scalar loss, got shape " +
                            (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
    }

    // Iterative post-order DFS; recursion would overflow on deep nets.
    std::vector<TensorNode*> topo;
    std::unordered_set<TensorNode*> visited;
    struct Frame {
        TensorNode* node;
        size_t next_parent;
    };
    std::vector<Frame> stack;
    TensorNode* root = loss.node().get();
    stack.push_back({root, 0});
    visited.insert(root);
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            TensorNode* p = f.node->parents[f.next_parent++].get();
            if (visited.insert(p).second) stack.push_back({p, 0});
        } else {
            topo.push_back(f.node);
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->grad[0] = 1.0f;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        if ((*it)->backward_fn) {
            (*it)->ensure_grad();
            (*it)->backward_fn();
        }
    }
    // Consume the tape: interior structure goes away, leaf grads stay.
    for (TensorNode* n : topo) {
        n->backward_fn = nullptr;
        n->parents.clear();
    }
}

}  // namespace thermogen
