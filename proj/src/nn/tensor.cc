#include "ssi/nn/tensor.h"

#include <unordered_set>

#include "ssi/common/error.h"

namespace ssi::nn {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

int64_t NumElements(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

std::string ShapeString(const Shape& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

Tensor Tensor::Zeros(const Shape& shape) { return Full(shape, 0.0); }

Tensor Tensor::Full(const Shape& shape, double v) {
  for (int64_t d : shape) Require(d >= 0, "negative dimension in " + ShapeString(shape));
  return FromData(shape, std::vector<double>(NumElements(shape), v));
}

Tensor Tensor::FromData(const Shape& shape, std::vector<double> data) {
  Require(static_cast<int64_t>(data.size()) == NumElements(shape),
          "data size " + std::to_string(data.size()) + " does not match shape " + ShapeString(shape));
  auto node = std::make_shared<Node>();
  node->shape = shape;
  node->value = std::move(data);
  return Tensor(std::move(node));
}

Tensor Tensor::Parameter(const Shape& shape, std::vector<double> data) {
  Tensor t = FromData(shape, std::move(data));
  t.node_->requires_grad = true;
  return t;
}

int64_t Tensor::dim(int axis) const {
  const int r = rank();
  if (axis < 0) axis += r;
  Require(axis >= 0 && axis < r, "axis out of range for shape " + ShapeString(shape()));
  return node_->shape[axis];
}

double Tensor::item() const {
  Require(numel() == 1, "item() needs a single-element tensor, got " + ShapeString(shape()));
  return node_->value[0];
}

double Tensor::at(std::initializer_list<int64_t> index) const {
  Require(static_cast<int>(index.size()) == rank(), "index rank mismatch");
  int64_t flat = 0;
  int axis = 0;
  for (int64_t i : index) {
    Require(i >= 0 && i < node_->shape[axis], "index out of range");
    flat = flat * node_->shape[axis] + i;
    ++axis;
  }
  return node_->value[flat];
}

void Tensor::ZeroGrad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::Backward() const {
  Require(numel() == 1, "Backward() needs a scalar output");
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p && p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->EnsureGrad();
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
  for (Node* n : order) {
    if (n->backward) {
      n->grad.clear();
      n->grad.shrink_to_fit();
    }
  }
}

Tensor Tensor::Detach() const {
  auto node = std::make_shared<Node>();
  node->shape = node_->shape;
  node->value = node_->value;
  return Tensor(std::move(node));
}

Tensor Tensor::Clone() const {
  Tensor t = Detach();
  t.node_->requires_grad = node_->requires_grad;
  return t;
}

bool GradEnabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor MakeResult(Shape shape, std::vector<double> value, const std::vector<Tensor>& inputs,
                  std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (g_grad_enabled) {
    for (const Tensor& t : inputs) {
      if (t.defined() && t.requires_grad()) {
        node->requires_grad = true;
        break;
      }
    }
    if (node->requires_grad) {
      node->parents.reserve(inputs.size());
      for (const Tensor& t : inputs) node->parents.push_back(t.node_ptr());
      node->backward = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

}  // namespace ssi::nn
