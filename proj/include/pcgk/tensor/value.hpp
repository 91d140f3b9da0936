#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pcgk::tensor {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until materialized
    bool requires_grad = false;
    std::string op;
    std::vector<std::shared_ptr<Node>> parents;
    // Reads this->grad and accumulates into the parents' grads.
    std::function<void(Node&)> backward;

    void ensure_grad() {
        if (grad.empty()) grad.assign(data.size(), 0.0);
    }
};

}  // namespace detail

/// Handle to a node of the autodiff graph. Copies share the node.
class Value {
public:
    Value() = default;

    /// Leaf value. Throws ShapeError if the shape has a zero extent or does not match data.
    Value(Shape shape, std::vector<double> data, bool requires_grad = false);

    static Value zeros(Shape shape, bool requires_grad = false);
    static Value full(Shape shape, double fill, bool requires_grad = false);
    static Value scalar(double x, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
    std::size_t size() const { return node_->data.size(); }

    std::span<const double> data() const { return node_->data; }
    std::span<double> mutable_data() { return node_->data; }
    double item() const;
    double at(std::size_t flat) const { return node_->data.at(flat); }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool on) { node_->requires_grad = on; }
    const std::string& op() const { return node_->op; }

    bool has_grad() const { return !node_->grad.empty(); }
    /// Gradient, zeros if never materialized.
    std::vector<double> grad() const;
    std::span<double> mutable_grad() {
        node_->ensure_grad();
        return node_->grad;
    }
    void zero_grad() { node_->grad.clear(); }

    /// Constant copy of the data, cut from the graph.
    Value detach() const;

    detail::Node* node() const { return node_.get(); }
    const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }
    explicit Value(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

private:
    std::shared_ptr<detail::Node> node_;
};

/// Reverse sweep from a scalar root. Leaf gradients accumulate across calls;
/// interior gradients are recomputed on each sweep.
void backward(const Value& root);

}  // namespace pcgk::tensor
