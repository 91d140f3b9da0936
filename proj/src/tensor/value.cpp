#include "pcgk/tensor/value.hpp"

#include <numeric>
#include <sstream>
#include <unordered_set>

#include "pcgk/common/error.hpp"

namespace pcgk::tensor {

std::size_t numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ')';
    return os.str();
}

Value::Value(Shape shape, std::vector<double> data, bool requires_grad) {
    if (shape.empty()) throw ShapeError("value: rank-0 shape, use {1} for scalars");
    for (auto e : shape)
        if (e == 0) throw ShapeError("value: zero-extent dimension in shape " + shape_str(shape));
    if (numel(shape) != data.size())
        throw ShapeError("value: shape " + shape_str(shape) + " expects " + std::to_string(numel(shape)) +
                         " elements, got " + std::to_string(data.size()));
    node_ = std::make_shared<detail::Node>();
    node_->shape = std::move(shape);
    node_->data = std::move(data);
    node_->requires_grad = requires_grad;
    node_->op = "leaf";
}

Value Value::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Value Value::full(Shape shape, double fill, bool requires_grad) {
    const auto n = numel(shape);
    return Value(std::move(shape), std::vector<double>(n, fill), requires_grad);
}

Value Value::scalar(double x, bool requires_grad) { return Value({1}, {x}, requires_grad); }

double Value::item() const {
    if (size() != 1) throw ShapeError("item: value of shape " + shape_str(shape()) + " is not a scalar");
    return node_->data[0];
}

std::vector<double> Value::grad() const {
    if (node_->grad.empty()) return std::vector<double>(node_->data.size(), 0.0);
    return node_->grad;
}

Value Value::detach() const { return Value(node_->shape, node_->data, false); }

void backward(const Value& root) {
    if (root.size() != 1)
        throw ShapeError("backward: root must be a scalar, got shape " + shape_str(root.shape()));
    if (!root.requires_grad()) return;

    // Iterative post-order DFS; topo ends with the root.
    std::vector<detail::Node*> topo;
    std::unordered_set<detail::Node*> seen;
    std::vector<std::pair<detail::Node*, std::size_t>> stack;
    stack.emplace_back(root.node(), 0);
    seen.insert(root.node());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            detail::Node* p = node->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            topo.push_back(node);
            stack.pop_back();
        }
    }

    for (auto* node : topo) {
        if (node->backward)
            node->grad.assign(node->data.size(), 0.0);
        else
            node->ensure_grad();
    }
    root.node()->grad[0] += 1.0;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        if ((*it)->backward) (*it)->backward(**it);
    }
}

}  // namespace pcgk::tensor
