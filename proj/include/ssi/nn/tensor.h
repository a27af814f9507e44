#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ssi::nn {

using Shape = std::vector<int64_t>;

int64_t NumElements(const Shape& s);
std::string ShapeString(const Shape& s);

// One value in the computation graph. `backward` reads this node's grad and
// accumulates into the parents' grads.
struct Node {
  std::vector<double> value;
  std::vector<double> grad;
  Shape shape;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void EnsureGrad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

// Dense row-major float64 tensor with reverse-mode autodiff. Copies share
// the underlying node, like a handle.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor Zeros(const Shape& shape);
  static Tensor Full(const Shape& shape, double v);
  static Tensor FromData(const Shape& shape, std::vector<double> data);
  static Tensor Scalar(double v) { return FromData({}, {v}); }
  // Leaf that accumulates gradients.
  static Tensor Parameter(const Shape& shape, std::vector<double> data);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  // Negative axes count from the end.
  int64_t dim(int axis) const;
  int64_t numel() const { return static_cast<int64_t>(node_->value.size()); }

  std::span<const double> data() const { return node_->value; }
  std::span<double> mutable_data() { return node_->value; }
  double item() const;
  double at(std::initializer_list<int64_t> index) const;

  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  void ZeroGrad();

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool r) { node_->requires_grad = r; }

  // Runs reverse mode from this scalar. Leaf grads accumulate; intermediate
  // grads are released afterwards.
  void Backward() const;
  // Same values, no history.
  Tensor Detach() const;
  Tensor Clone() const;

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

bool GradEnabled();

// Disables graph recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Builds an op result. History is recorded only when grad mode is on and
// some input requires grad.
Tensor MakeResult(Shape shape, std::vector<double> value, const std::vector<Tensor>& inputs,
                  std::function<void(Node&)> backward);

}  // namespace ssi::nn

namespace ssi::nn {

// Parent `i` of `self` if it wants a gradient (grad buffer allocated), else null.
inline Node* GradTarget(Node& self, size_t i) {
  Node* p = i < self.parents.size() ? self.parents[i].get() : nullptr;
  if (p == nullptr || !p->requires_grad) return nullptr;
  p->EnsureGrad();
  return p;
}

}  // namespace ssi::nn
