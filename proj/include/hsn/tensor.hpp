#pragma once

// Dense double-precision tensor with recorded reverse-mode differentiation.
//
// Every operation that consumes a tensor flagged `requires_grad` records a
// node holding its inputs and an adjoint closure. `backward(loss)` orders the
// reachable nodes into a Tape (topological visit order) and replays the
// adjoints in reverse. Leaf tensors accumulate gradients across backward
// passes until `zero_grad()` is called; intermediate gradients are reset at
// every recording.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hsn/error.hpp"

namespace hsn {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string to_string(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out << (i ? "x" : "") << shape[i];
    }
    out << ']';
    return out.str();
}

namespace detail {

struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<Node>> inputs;
    // Reads this node's grad and accumulates into the grads of `inputs`.
    std::function<void(Node&)> adjoint;

    void ensure_grad() {
        if (grad.size() != value.size()) {
            grad.assign(value.size(), 0.0);
        }
    }
};

}  // namespace detail

class Tensor {
public:
    Tensor() = default;

    Tensor(Shape shape, std::vector<double> values, bool requires_grad = false)
        : node_(std::make_shared<detail::Node>()) {
        detail::require(numel(shape) == values.size(),
                        "tensor shape " + to_string(shape) + " does not match " +
                            std::to_string(values.size()) + " values");
        node_->shape = std::move(shape);
        node_->value = std::move(values);
        node_->requires_grad = requires_grad;
    }

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        return full(std::move(shape), 0.0, requires_grad);
    }

    static Tensor ones(Shape shape, bool requires_grad = false) {
        return full(std::move(shape), 1.0, requires_grad);
    }

    static Tensor full(Shape shape, double fill, bool requires_grad = false) {
        const std::size_t count = numel(shape);
        return Tensor(std::move(shape), std::vector<double>(count, fill), requires_grad);
    }

    static Tensor scalar(double value, bool requires_grad = false) {
        return Tensor({}, {value}, requires_grad);
    }

    /// Row-major matrix literal, mostly for tests.
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows,
                         bool requires_grad = false) {
        std::vector<double> values;
        std::size_t cols = rows.size() ? rows.begin()->size() : 0;
        for (const auto& row : rows) {
            detail::require(row.size() == cols, "ragged matrix literal");
            values.insert(values.end(), row.begin(), row.end());
        }
        return Tensor({rows.size(), cols}, std::move(values), requires_grad);
    }

    static Tensor vector(std::initializer_list<double> values, bool requires_grad = false) {
        return Tensor({values.size()}, std::vector<double>(values), requires_grad);
    }

    bool defined() const { return static_cast<bool>(node_); }

    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
    std::size_t size() const { return node_->value.size(); }

    std::span<const double> values() const { return node_->value; }
    /// Direct write access; used by optimizers and finite-difference probes.
    /// Writing through this span does not invalidate recorded graphs.
    std::span<double> mutable_values() { return node_->value; }

    double item() const {
        detail::require(size() == 1, "item() on tensor of shape " + to_string(shape()));
        return node_->value[0];
    }

    double operator[](std::size_t flat) const { return node_->value[flat]; }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool flag) { node_->requires_grad = flag; }

    bool has_grad() const { return !node_->grad.empty() || (node_->requires_grad && size() == 0); }
    std::span<const double> grad() const { return node_->grad; }
    void zero_grad() {
        if (node_->requires_grad) {
            node_->grad.assign(node_->value.size(), 0.0);
        } else {
            node_->grad.clear();
        }
    }

    /// Copy of the values with no graph attached.
    Tensor detach() const { return Tensor(shape(), node_->value, false); }

    const std::shared_ptr<detail::Node>& node() const { return node_; }

    /// Builds an operation result. When no input requires a gradient the
    /// result is a plain constant and nothing is recorded.
    static Tensor record(Shape shape, std::vector<double> values, const char* op,
                         std::vector<Tensor> inputs, std::function<void(detail::Node&)> adjoint) {
        Tensor out(std::move(shape), std::move(values));
        bool any = std::any_of(inputs.begin(), inputs.end(),
                               [](const Tensor& t) { return t.requires_grad(); });
        if (any) {
            out.node_->requires_grad = true;
            out.node_->op = op;
            out.node_->adjoint = std::move(adjoint);
            out.node_->inputs.reserve(inputs.size());
            for (auto& t : inputs) {
                out.node_->inputs.push_back(t.node_);
            }
        }
        return out;
    }

private:
    std::shared_ptr<detail::Node> node_;
};

/// Ordered record of the operations reachable from a root, in topological
/// (inputs before outputs) visit order.
class Tape {
public:
    static Tape record(const Tensor& root) {
        Tape tape;
        if (!root.defined() || !root.requires_grad()) {
            return tape;
        }
        std::unordered_set<const detail::Node*> seen;
        std::vector<std::pair<detail::Node*, std::size_t>> stack;
        stack.emplace_back(root.node().get(), 0);
        seen.insert(root.node().get());
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next < node->inputs.size()) {
                detail::Node* child = node->inputs[next++].get();
                if (child->requires_grad && seen.insert(child).second) {
                    stack.emplace_back(child, 0);
                }
            } else {
                tape.order_.push_back(node);
                stack.pop_back();
            }
        }
        return tape;
    }

    std::size_t size() const { return order_.size(); }

    std::vector<std::string> ops() const {
        std::vector<std::string> names;
        names.reserve(order_.size());
        for (const auto* node : order_) {
            names.emplace_back(node->op);
        }
        return names;
    }

    /// Seeds d(root)/d(root) = 1 and replays adjoints from the root back to
    /// the leaves.
    void replay() {
        if (order_.empty()) {
            return;
        }
        for (auto* node : order_) {
            if (node->adjoint) {
                node->grad.assign(node->value.size(), 0.0);
            } else {
                node->ensure_grad();
            }
        }
        order_.back()->grad.assign(order_.back()->value.size(), 1.0);
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            detail::Node* node = *it;
            if (node->adjoint) {
                node->adjoint(*node);
            }
        }
    }

private:
    // Raw pointers are valid for as long as the root tensor is alive.
    std::vector<detail::Node*> order_;
};

/// Populates gradients of every tensor that `loss` depends on and that is
/// flagged `requires_grad`.
inline void backward(const Tensor& loss) {
    detail::require(loss.defined(), "backward on undefined tensor");
    detail::require(loss.size() == 1,
                    "backward requires a scalar loss, got shape " + to_string(loss.shape()));
    Tape tape = Tape::record(loss);
    tape.replay();
}

}  // namespace hsn
