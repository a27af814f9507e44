#include "ssi/nn/ops.h"

#include <algorithm>
#include <Eigen/Core>
#include <cmath>

#include "ssi/common/error.h"

namespace ssi::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  Require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + ShapeString(a.shape()) +
                                      " vs " + ShapeString(b.shape()));
}

int NormalizeAxis(int axis, int rank) {
  if (axis < 0) axis += rank;
  Require(axis >= 0 && axis < rank, "axis out of range");
  return axis;
}

// Splits a shape around `axis` into (outer, dim, inner).
struct AxisSplit {
  int64_t outer = 1, dim = 1, inner = 1;
};

AxisSplit SplitAt(const Shape& s, int axis) {
  AxisSplit r;
  for (int i = 0; i < axis; ++i) r.outer *= s[i];
  r.dim = s[axis];
  for (size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

// y = f(x) with dy/dx = df(x, y).
template <typename F, typename DF>
Tensor Unary(const Tensor& x, F f, DF df) {
  std::vector<double> out(x.numel());
  auto xv = x.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] = f(xv[i]);
  return MakeResult(x.shape(), std::move(out), {x}, [df](Node& self) {
    if (Node* a = GradTarget(self, 0)) {
      for (size_t i = 0; i < self.grad.size(); ++i) a->grad[i] += self.grad[i] * df(a->value[i], self.value[i]);
    }
  });
}

}  // namespace

Tensor Add(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "Add");
  std::vector<double> out(a.numel());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return MakeResult(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (size_t k = 0; k < 2; ++k) {
      if (Node* p = GradTarget(self, k)) {
        for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
      }
    }
  });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "Sub");
  std::vector<double> out(a.numel());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return MakeResult(a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (Node* p = GradTarget(self, 0)) {
      for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
    }
    if (Node* p = GradTarget(self, 1)) {
      for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] -= self.grad[i];
    }
  });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "Mul");
  std::vector<double> out(a.numel());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return MakeResult(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const Node* pa = self.parents[0].get();
    const Node* pb = self.parents[1].get();
    if (Node* p = GradTarget(self, 0)) {
      for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i] * pb->value[i];
    }
    if (Node* p = GradTarget(self, 1)) {
      for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i] * pa->value[i];
    }
  });
}

Tensor Div(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "Div");
  std::vector<double> out(a.numel());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] / b.data()[i];
  return MakeResult(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const Node* pb = self.parents[1].get();
    if (Node* p = GradTarget(self, 0)) {
      for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i] / pb->value[i];
    }
    if (Node* p = GradTarget(self, 1)) {
      for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] -= self.grad[i] * self.value[i] / pb->value[i];
    }
  });
}

Tensor AddScalar(const Tensor& x, double s) {
  return Unary(x, [s](double v) { return v + s; }, [](double, double) { return 1.0; });
}

Tensor MulScalar(const Tensor& x, double s) {
  return Unary(x, [s](double v) { return v * s; }, [s](double, double) { return s; });
}

Tensor Neg(const Tensor& x) { return MulScalar(x, -1.0); }

Tensor AddAlong(const Tensor& x, const Tensor& v, int axis) {
  axis = NormalizeAxis(axis, x.rank());
  Require(v.numel() == x.dim(axis), "AddAlong: vector length does not match axis");
  const AxisSplit s = SplitAt(x.shape(), axis);
  std::vector<double> out(x.data().begin(), x.data().end());
  for (int64_t o = 0; o < s.outer; ++o)
    for (int64_t d = 0; d < s.dim; ++d) {
      double* p = out.data() + (o * s.dim + d) * s.inner;
      const double add = v.data()[d];
      for (int64_t i = 0; i < s.inner; ++i) p[i] += add;
    }
  return MakeResult(x.shape(), std::move(out), {x, v}, [s](Node& self) {
    if (Node* p = GradTarget(self, 0)) {
      for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
    }
    if (Node* p = GradTarget(self, 1)) {
      for (int64_t o = 0; o < s.outer; ++o)
        for (int64_t d = 0; d < s.dim; ++d) {
          const double* g = self.grad.data() + (o * s.dim + d) * s.inner;
          double acc = 0.0;
          for (int64_t i = 0; i < s.inner; ++i) acc += g[i];
          p->grad[d] += acc;
        }
    }
  });
}

Tensor MulAlong(const Tensor& x, const Tensor& v, int axis) {
  axis = NormalizeAxis(axis, x.rank());
  Require(v.numel() == x.dim(axis), "MulAlong: vector length does not match axis");
  const AxisSplit s = SplitAt(x.shape(), axis);
  std::vector<double> out(x.data().begin(), x.data().end());
  for (int64_t o = 0; o < s.outer; ++o)
    for (int64_t d = 0; d < s.dim; ++d) {
      double* p = out.data() + (o * s.dim + d) * s.inner;
      const double m = v.data()[d];
      for (int64_t i = 0; i < s.inner; ++i) p[i] *= m;
    }
  return MakeResult(x.shape(), std::move(out), {x, v}, [s](Node& self) {
    const Node* px = self.parents[0].get();
    const Node* pv = self.parents[1].get();
    Node* gx = GradTarget(self, 0);
    Node* gv = GradTarget(self, 1);
    for (int64_t o = 0; o < s.outer; ++o)
      for (int64_t d = 0; d < s.dim; ++d) {
        const int64_t base = (o * s.dim + d) * s.inner;
        if (gx) {
          const double m = pv->value[d];
          for (int64_t i = 0; i < s.inner; ++i) gx->grad[base + i] += self.grad[base + i] * m;
        }
        if (gv) {
          double acc = 0.0;
          for (int64_t i = 0; i < s.inner; ++i) acc += self.grad[base + i] * px->value[base + i];
          gv->grad[d] += acc;
        }
      }
  });
}

Tensor Sigmoid(const Tensor& x) {
  return Unary(
      x,
      [](double v) { return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor Tanh(const Tensor& x) {
  return Unary(x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor LeakyRelu(const Tensor& x, double slope) {
  return Unary(
      x, [slope](double v) { return v > 0 ? v : slope * v; },
      [slope](double v, double) { return v > 0 ? 1.0 : slope; });
}

Tensor PRelu(const Tensor& x, const Tensor& alpha) {
  Require(x.rank() >= 2, "PRelu expects a channel axis");
  const bool shared = alpha.numel() == 1;
  Require(shared || alpha.numel() == x.dim(1), "PRelu: alpha must have 1 or C elements");
  const AxisSplit s = SplitAt(x.shape(), 1);
  std::vector<double> out(x.numel());
  auto xv = x.data();
  for (int64_t o = 0; o < s.outer; ++o)
    for (int64_t c = 0; c < s.dim; ++c) {
      const double a = alpha.data()[shared ? 0 : c];
      const int64_t base = (o * s.dim + c) * s.inner;
      for (int64_t i = 0; i < s.inner; ++i) {
        const double v = xv[base + i];
        out[base + i] = v > 0 ? v : a * v;
      }
    }
  return MakeResult(x.shape(), std::move(out), {x, alpha}, [s, shared](Node& self) {
    const Node* px = self.parents[0].get();
    const Node* pa = self.parents[1].get();
    Node* gx = GradTarget(self, 0);
    Node* ga = GradTarget(self, 1);
    for (int64_t o = 0; o < s.outer; ++o)
      for (int64_t c = 0; c < s.dim; ++c) {
        const double a = pa->value[shared ? 0 : c];
        const int64_t base = (o * s.dim + c) * s.inner;
        double acc = 0.0;
        for (int64_t i = 0; i < s.inner; ++i) {
          const double v = px->value[base + i];
          const double g = self.grad[base + i];
          if (v > 0) {
            if (gx) gx->grad[base + i] += g;
          } else {
            if (gx) gx->grad[base + i] += g * a;
            acc += g * v;
          }
        }
        if (ga) ga->grad[shared ? 0 : c] += acc;
      }
  });
}

Tensor Square(const Tensor& x) {
  return Unary(x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor Sqrt(const Tensor& x) {
  return Unary(x, [](double v) { return std::sqrt(v); }, [](double, double y) { return 0.5 / y; });
}

Tensor Log(const Tensor& x) {
  return Unary(x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor Pow(const Tensor& x, double p) {
  return Unary(
      x, [p](double v) { return std::pow(v, p); },
      [p](double v, double y) { return p * y / v; });
}

Tensor Clamp(const Tensor& x, double lo, double hi) {
  return Unary(
      x, [lo, hi](double v) { return std::min(hi, std::max(lo, v)); },
      [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

Tensor Sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return MakeResult({}, {acc}, {x}, [](Node& self) {
    if (Node* p = GradTarget(self, 0)) {
      for (double& g : p->grad) g += self.grad[0];
    }
  });
}

Tensor Mean(const Tensor& x) {
  Require(x.numel() > 0, "Mean of an empty tensor");
  return MulScalar(Sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor SumAxis(const Tensor& x, int axis) {
  axis = NormalizeAxis(axis, x.rank());
  const AxisSplit s = SplitAt(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape.erase(out_shape.begin() + axis);
  std::vector<double> out(s.outer * s.inner, 0.0);
  auto xv = x.data();
  for (int64_t o = 0; o < s.outer; ++o)
    for (int64_t d = 0; d < s.dim; ++d)
      for (int64_t i = 0; i < s.inner; ++i) out[o * s.inner + i] += xv[(o * s.dim + d) * s.inner + i];
  return MakeResult(out_shape, std::move(out), {x}, [s](Node& self) {
    if (Node* p = GradTarget(self, 0)) {
      for (int64_t o = 0; o < s.outer; ++o)
        for (int64_t d = 0; d < s.dim; ++d)
          for (int64_t i = 0; i < s.inner; ++i) p->grad[(o * s.dim + d) * s.inner + i] += self.grad[o * s.inner + i];
    }
  });
}

Tensor MeanAxis(const Tensor& x, int axis) {
  const int64_t d = x.dim(axis);
  Require(d > 0, "MeanAxis over an empty axis");
  return MulScalar(SumAxis(x, axis), 1.0 / static_cast<double>(d));
}

Tensor Reshape(const Tensor& x, const Shape& shape) {
  Require(NumElements(shape) == x.numel(),
          "Reshape: cannot view " + ShapeString(x.shape()) + " as " + ShapeString(shape));
  std::vector<double> out(x.data().begin(), x.data().end());
  return MakeResult(shape, std::move(out), {x}, [](Node& self) {
    if (Node* p = GradTarget(self, 0)) {
      for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
    }
  });
}

Tensor Permute(const Tensor& x, const std::vector<int>& dims) {
  const int r = x.rank();
  Require(static_cast<int>(dims.size()) == r, "Permute: wrong number of dims");
  Shape out_shape(r);
  std::vector<int64_t> in_strides(r, 1);
  for (int i = r - 2; i >= 0; --i) in_strides[i] = in_strides[i + 1] * x.shape()[i + 1];
  // Stride in the input for each output axis.
  std::vector<int64_t> strides(r);
  std::vector<bool> used(r, false);
  for (int i = 0; i < r; ++i) {
    Require(dims[i] >= 0 && dims[i] < r && !used[dims[i]], "Permute: invalid permutation");
    used[dims[i]] = true;
    out_shape[i] = x.shape()[dims[i]];
    strides[i] = in_strides[dims[i]];
  }
  const int64_t n = x.numel();
  // src[k] = input offset for output offset k.
  std::vector<int64_t> src(n);
  std::vector<int64_t> idx(r, 0);
  int64_t off = 0;
  for (int64_t k = 0; k < n; ++k) {
    src[k] = off;
    for (int a = r - 1; a >= 0; --a) {
      ++idx[a];
      off += strides[a];
      if (idx[a] < out_shape[a]) break;
      off -= strides[a] * idx[a];
      idx[a] = 0;
    }
  }
  std::vector<double> out(n);
  auto xv = x.data();
  for (int64_t k = 0; k < n; ++k) out[k] = xv[src[k]];
  return MakeResult(out_shape, std::move(out), {x}, [src = std::move(src)](Node& self) {
    if (Node* p = GradTarget(self, 0)) {
      for (size_t k = 0; k < self.grad.size(); ++k) p->grad[src[k]] += self.grad[k];
    }
  });
}

Tensor Concat(const std::vector<Tensor>& xs, int axis) {
  Require(!xs.empty(), "Concat of zero tensors");
  const int r = xs[0].rank();
  axis = NormalizeAxis(axis, r);
  Shape out_shape = xs[0].shape();
  out_shape[axis] = 0;
  std::vector<int64_t> dims;
  for (const Tensor& t : xs) {
    Require(t.rank() == r, "Concat: rank mismatch");
    for (int i = 0; i < r; ++i) {
      Require(i == axis || t.shape()[i] == xs[0].shape()[i],
              "Concat: shape mismatch " + ShapeString(t.shape()) + " vs " + ShapeString(xs[0].shape()));
    }
    dims.push_back(t.shape()[axis]);
    out_shape[axis] += t.shape()[axis];
  }
  const AxisSplit s = SplitAt(out_shape, axis);
  std::vector<double> out(NumElements(out_shape));
  int64_t offset = 0;
  for (size_t k = 0; k < xs.size(); ++k) {
    const int64_t block = dims[k] * s.inner;
    auto xv = xs[k].data();
    for (int64_t o = 0; o < s.outer; ++o) {
      std::copy(xv.begin() + o * block, xv.begin() + (o + 1) * block,
                out.begin() + (o * s.dim + offset) * s.inner);
    }
    offset += dims[k];
  }
  return MakeResult(out_shape, std::move(out), xs, [s, dims](Node& self) {
    int64_t offset = 0;
    for (size_t k = 0; k < dims.size(); ++k) {
      const int64_t block = dims[k] * s.inner;
      if (Node* p = GradTarget(self, k)) {
        for (int64_t o = 0; o < s.outer; ++o) {
          const double* g = self.grad.data() + (o * s.dim + offset) * s.inner;
          double* dst = p->grad.data() + o * block;
          for (int64_t i = 0; i < block; ++i) dst[i] += g[i];
        }
      }
      offset += dims[k];
    }
  });
}

Tensor Slice(const Tensor& x, int axis, int64_t begin, int64_t end) {
  axis = NormalizeAxis(axis, x.rank());
  Require(0 <= begin && begin <= end && end <= x.dim(axis), "Slice: range out of bounds");
  const AxisSplit s = SplitAt(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape[axis] = end - begin;
  const int64_t block = (end - begin) * s.inner;
  std::vector<double> out(s.outer * block);
  auto xv = x.data();
  for (int64_t o = 0; o < s.outer; ++o) {
    const auto src = xv.begin() + (o * s.dim + begin) * s.inner;
    std::copy(src, src + block, out.begin() + o * block);
  }
  return MakeResult(out_shape, std::move(out), {x}, [s, begin, block](Node& self) {
    if (Node* p = GradTarget(self, 0)) {
      for (int64_t o = 0; o < s.outer; ++o) {
        double* dst = p->grad.data() + (o * s.dim + begin) * s.inner;
        const double* g = self.grad.data() + o * block;
        for (int64_t i = 0; i < block; ++i) dst[i] += g[i];
      }
    }
  });
}

Tensor Pad(const Tensor& x, int axis, int64_t before, int64_t after) {
  axis = NormalizeAxis(axis, x.rank());
  Require(before >= 0 && after >= 0, "Pad: negative padding");
  const AxisSplit s = SplitAt(x.shape(), axis);
  Shape out_shape = x.shape();
  const int64_t out_dim = s.dim + before + after;
  out_shape[axis] = out_dim;
  std::vector<double> out(s.outer * out_dim * s.inner, 0.0);
  auto xv = x.data();
  for (int64_t o = 0; o < s.outer; ++o) {
    const auto src = xv.begin() + o * s.dim * s.inner;
    std::copy(src, src + s.dim * s.inner, out.begin() + (o * out_dim + before) * s.inner);
  }
  return MakeResult(out_shape, std::move(out), {x}, [s, before, out_dim](Node& self) {
    if (Node* p = GradTarget(self, 0)) {
      for (int64_t o = 0; o < s.outer; ++o) {
        const double* g = self.grad.data() + (o * out_dim + before) * s.inner;
        double* dst = p->grad.data() + o * s.dim * s.inner;
        for (int64_t i = 0; i < s.dim * s.inner; ++i) dst[i] += g[i];
      }
    }
  });
}

Tensor PadReplicate(const Tensor& x, int axis, int64_t before) {
  axis = NormalizeAxis(axis, x.rank());
  Require(before >= 0 && x.dim(axis) > 0, "PadReplicate: invalid arguments");
  const AxisSplit s = SplitAt(x.shape(), axis);
  Shape out_shape = x.shape();
  const int64_t out_dim = s.dim + before;
  out_shape[axis] = out_dim;
  std::vector<double> out(s.outer * out_dim * s.inner);
  auto xv = x.data();
  for (int64_t o = 0; o < s.outer; ++o)
    for (int64_t d = 0; d < out_dim; ++d) {
      const int64_t sd = std::max<int64_t>(0, d - before);
      const auto src = xv.begin() + (o * s.dim + sd) * s.inner;
      std::copy(src, src + s.inner, out.begin() + (o * out_dim + d) * s.inner);
    }
  return MakeResult(out_shape, std::move(out), {x}, [s, before, out_dim](Node& self) {
    if (Node* p = GradTarget(self, 0)) {
      for (int64_t o = 0; o < s.outer; ++o)
        for (int64_t d = 0; d < out_dim; ++d) {
          const int64_t sd = std::max<int64_t>(0, d - before);
          const double* g = self.grad.data() + (o * out_dim + d) * s.inner;
          double* dst = p->grad.data() + (o * s.dim + sd) * s.inner;
          for (int64_t i = 0; i < s.inner; ++i) dst[i] += g[i];
        }
    }
  });
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  Require(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(0),
          "MatMul: incompatible shapes " + ShapeString(a.shape()) + " x " + ShapeString(b.shape()));
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n);
  MapMat(out.data(), m, n).noalias() = ConstMapMat(a.data().data(), m, k) * ConstMapMat(b.data().data(), k, n);
  return MakeResult({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    ConstMapMat g(self.grad.data(), m, n);
    if (Node* p = GradTarget(self, 0)) {
      MapMat(p->grad.data(), m, k).noalias() += g * ConstMapMat(self.parents[1]->value.data(), k, n).transpose();
    }
    if (Node* p = GradTarget(self, 1)) {
      MapMat(p->grad.data(), k, n).noalias() += ConstMapMat(self.parents[0]->value.data(), m, k).transpose() * g;
    }
  });
}

Tensor Linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  Require(x.rank() == 2 && w.rank() == 2 && x.dim(1) == w.dim(1),
          "Linear: incompatible shapes " + ShapeString(x.shape()) + " and weight " + ShapeString(w.shape()));
  const int64_t m = x.dim(0), in = x.dim(1), out_dim = w.dim(0);
  const bool has_bias = b.defined();
  if (has_bias) Require(b.numel() == out_dim, "Linear: bias size mismatch");
  std::vector<double> out(m * out_dim);
  MapMat y(out.data(), m, out_dim);
  y.noalias() = ConstMapMat(x.data().data(), m, in) * ConstMapMat(w.data().data(), out_dim, in).transpose();
  if (has_bias) y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b.data().data(), out_dim);
  return MakeResult({m, out_dim}, std::move(out), {x, w, b}, [m, in, out_dim](Node& self) {
    ConstMapMat g(self.grad.data(), m, out_dim);
    if (Node* p = GradTarget(self, 0)) {
      MapMat(p->grad.data(), m, in).noalias() += g * ConstMapMat(self.parents[1]->value.data(), out_dim, in);
    }
    if (Node* p = GradTarget(self, 1)) {
      MapMat(p->grad.data(), out_dim, in).noalias() += g.transpose() * ConstMapMat(self.parents[0]->value.data(), m, in);
    }
    if (Node* p = GradTarget(self, 2)) {
      for (int64_t r = 0; r < m; ++r) {
        for (int64_t c = 0; c < out_dim; ++c) p->grad[c] += g(r, c);
      }
    }
  });
}

int64_t ConvOutputSize(int64_t in, int kernel, int stride, int dilation, int pad_lo, int pad_hi) {
  const int64_t span = static_cast<int64_t>(dilation) * (kernel - 1) + 1;
  const int64_t padded = in + pad_lo + pad_hi;
  if (padded < span) return 0;
  return (padded - span) / stride + 1;
}

namespace {

struct ConvDims {
  int64_t channels, in_h, in_w, kh, kw, out_h, out_w;
  int64_t Rows() const { return channels * kh * kw; }
  int64_t Cols() const { return out_h * out_w; }
};

using StridedMap = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;

// Column buffers are built for a band of output rows at a time so their size
// stays bounded for long inputs.
constexpr int64_t kColBudget = 1 << 18;

struct RowBand {
  int64_t begin, end;
  int64_t Cols(const ConvDims& d) const { return (end - begin) * d.out_w; }
};

std::vector<RowBand> RowBands(const ConvDims& d) {
  const int64_t per_row = std::max<int64_t>(d.Rows() * d.out_w, 1);
  const int64_t rows = std::clamp<int64_t>(kColBudget / per_row, 1, std::max<int64_t>(d.out_h, 1));
  std::vector<RowBand> bands;
  for (int64_t h = 0; h < d.out_h; h += rows) bands.push_back({h, std::min(d.out_h, h + rows)});
  return bands;
}

int64_t MaxBandCols(const ConvDims& d) {
  int64_t m = 0;
  for (const RowBand& r : RowBands(d)) m = std::max(m, r.Cols(d));
  return m;
}

// col[(c*kh + i)*kw + j][(oh - band.begin)*out_w + ow] = in[c][oh*sh - pt + i*dh][ow*sw - pl + j*dw]
// for oh in the band.
void Im2Col(const double* in, const ConvDims& d, const Conv2dGeometry& g, const RowBand& band, double* col) {
  const int64_t cols = band.Cols(d);
  for (int64_t c = 0; c < d.channels; ++c)
    for (int64_t i = 0; i < d.kh; ++i)
      for (int64_t j = 0; j < d.kw; ++j) {
        double* row = col + ((c * d.kh + i) * d.kw + j) * cols;
        for (int64_t oh = band.begin; oh < band.end; ++oh) {
          const int64_t h = oh * g.stride_h - g.pad_top + i * g.dilation_h;
          double* dst = row + (oh - band.begin) * d.out_w;
          if (h < 0 || h >= d.in_h) {
            std::fill(dst, dst + d.out_w, 0.0);
            continue;
          }
          const double* src = in + (c * d.in_h + h) * d.in_w;
          for (int64_t ow = 0; ow < d.out_w; ++ow) {
            const int64_t w = ow * g.stride_w - g.pad_left + j * g.dilation_w;
            dst[ow] = (w >= 0 && w < d.in_w) ? src[w] : 0.0;
          }
        }
      }
}

void Col2Im(const double* col, const ConvDims& d, const Conv2dGeometry& g, const RowBand& band, double* in) {
  const int64_t cols = band.Cols(d);
  for (int64_t c = 0; c < d.channels; ++c)
    for (int64_t i = 0; i < d.kh; ++i)
      for (int64_t j = 0; j < d.kw; ++j) {
        const double* row = col + ((c * d.kh + i) * d.kw + j) * cols;
        for (int64_t oh = band.begin; oh < band.end; ++oh) {
          const int64_t h = oh * g.stride_h - g.pad_top + i * g.dilation_h;
          if (h < 0 || h >= d.in_h) continue;
          double* dst = in + (c * d.in_h + h) * d.in_w;
          const double* src = row + (oh - band.begin) * d.out_w;
          for (int64_t ow = 0; ow < d.out_w; ++ow) {
            const int64_t w = ow * g.stride_w - g.pad_left + j * g.dilation_w;
            if (w >= 0 && w < d.in_w) dst[w] += src[ow];
          }
        }
      }
}

void ValidateGeometry(const Conv2dGeometry& g) {
  Require(g.stride_h > 0 && g.stride_w > 0 && g.dilation_h > 0 && g.dilation_w > 0,
          "conv stride and dilation must be positive");
  Require(g.pad_top >= 0 && g.pad_bottom >= 0 && g.pad_left >= 0 && g.pad_right >= 0,
          "conv padding must be non-negative");
}

}  // namespace

Tensor Conv2d(const Tensor& x, const Tensor& w, const Tensor& b, const Conv2dGeometry& g) {
  ValidateGeometry(g);
  Require(x.rank() == 4 && w.rank() == 4, "Conv2d expects 4-D input and weight");
  Require(x.dim(1) == w.dim(1), "Conv2d: input has " + std::to_string(x.dim(1)) + " channels, weight expects " +
                                    std::to_string(w.dim(1)));
  const int64_t n = x.dim(0), o = w.dim(0);
  ConvDims d{x.dim(1), x.dim(2), x.dim(3), w.dim(2), w.dim(3), 0, 0};
  d.out_h = ConvOutputSize(d.in_h, static_cast<int>(d.kh), g.stride_h, g.dilation_h, g.pad_top, g.pad_bottom);
  d.out_w = ConvOutputSize(d.in_w, static_cast<int>(d.kw), g.stride_w, g.dilation_w, g.pad_left, g.pad_right);
  Require(d.out_h > 0 && d.out_w > 0, "Conv2d: empty output for input " + ShapeString(x.shape()));
  const bool has_bias = b.defined();
  if (has_bias) Require(b.numel() == o, "Conv2d: bias size mismatch");

  const int64_t in_size = d.channels * d.in_h * d.in_w;
  const int64_t out_size = o * d.Cols();
  std::vector<double> out(n * out_size);
  const std::vector<RowBand> bands = RowBands(d);
  std::vector<double> col(d.Rows() * MaxBandCols(d));
  ConstMapMat wm(w.data().data(), o, d.Rows());
  for (int64_t s = 0; s < n; ++s) {
    for (const RowBand& band : bands) {
      const int64_t cols = band.Cols(d);
      Im2Col(x.data().data() + s * in_size, d, g, band, col.data());
      StridedMap y(out.data() + s * out_size + band.begin * d.out_w, o, cols, Eigen::OuterStride<>(d.Cols()));
      y.noalias() = wm * ConstMapMat(col.data(), d.Rows(), cols);
      if (has_bias) y.colwise() += Eigen::Map<const Eigen::VectorXd>(b.data().data(), o);
    }
  }
  return MakeResult({n, o, d.out_h, d.out_w}, std::move(out), {x, w, b}, [d, g, n, o, in_size, out_size](Node& self) {
    Node* gx = GradTarget(self, 0);
    Node* gw = GradTarget(self, 1);
    Node* gb = GradTarget(self, 2);
    const double* xv = self.parents[0]->value.data();
    ConstMapMat wm(self.parents[1]->value.data(), o, d.Rows());
    const std::vector<RowBand> bands = RowBands(d);
    std::vector<double> col(d.Rows() * MaxBandCols(d));
    for (int64_t s = 0; s < n; ++s) {
      if (gb) {
        const double* gs = self.grad.data() + s * out_size;
        for (int64_t r = 0; r < o; ++r) {
          double acc = 0.0;
          for (int64_t c = 0; c < d.Cols(); ++c) acc += gs[r * d.Cols() + c];
          gb->grad[r] += acc;
        }
      }
      for (const RowBand& band : bands) {
        const int64_t cols = band.Cols(d);
        ConstStridedMap gy(self.grad.data() + s * out_size + band.begin * d.out_w, o, cols,
                           Eigen::OuterStride<>(d.Cols()));
        if (gw) {
          Im2Col(xv + s * in_size, d, g, band, col.data());
          MapMat(gw->grad.data(), o, d.Rows()).noalias() += gy * ConstMapMat(col.data(), d.Rows(), cols).transpose();
        }
        if (gx) {
          MapMat(col.data(), d.Rows(), cols).noalias() = wm.transpose() * gy;
          Col2Im(col.data(), d, g, band, gx->grad.data() + s * in_size);
        }
      }
    }
  });
}

Tensor ConvTranspose2d(const Tensor& x, const Tensor& w, const Tensor& b, const Conv2dGeometry& g,
                       int64_t out_h, int64_t out_w) {
  ValidateGeometry(g);
  Require(x.rank() == 4 && w.rank() == 4, "ConvTranspose2d expects 4-D input and weight");
  Require(x.dim(1) == w.dim(0), "ConvTranspose2d: input has " + std::to_string(x.dim(1)) +
                                    " channels, weight expects " + std::to_string(w.dim(0)));
  const int64_t n = x.dim(0), cin = w.dim(0), o = w.dim(1);
  // Geometry of the forward conv mapping y [o, out_h, out_w] -> x [cin, H, W].
  ConvDims d{o, out_h, out_w, w.dim(2), w.dim(3), 0, 0};
  d.out_h = ConvOutputSize(out_h, static_cast<int>(d.kh), g.stride_h, g.dilation_h, g.pad_top, g.pad_bottom);
  d.out_w = ConvOutputSize(out_w, static_cast<int>(d.kw), g.stride_w, g.dilation_w, g.pad_left, g.pad_right);
  Require(d.out_h == x.dim(2) && d.out_w == x.dim(3),
          "ConvTranspose2d: requested output size is inconsistent with the input " + ShapeString(x.shape()));
  const bool has_bias = b.defined();
  if (has_bias) Require(b.numel() == o, "ConvTranspose2d: bias size mismatch");

  const int64_t in_size = cin * d.Cols();
  const int64_t out_size = o * out_h * out_w;
  std::vector<double> out(n * out_size, 0.0);
  const std::vector<RowBand> bands = RowBands(d);
  std::vector<double> col(d.Rows() * MaxBandCols(d));
  ConstMapMat wm(w.data().data(), cin, d.Rows());
  for (int64_t s = 0; s < n; ++s) {
    double* y = out.data() + s * out_size;
    for (const RowBand& band : bands) {
      const int64_t cols = band.Cols(d);
      MapMat(col.data(), d.Rows(), cols).noalias() =
          wm.transpose() * ConstStridedMap(x.data().data() + s * in_size + band.begin * d.out_w, cin, cols,
                                           Eigen::OuterStride<>(d.Cols()));
      Col2Im(col.data(), d, g, band, y);
    }
    if (has_bias) {
      for (int64_t c = 0; c < o; ++c) {
        const double bv = b.data()[c];
        for (int64_t i = 0; i < out_h * out_w; ++i) y[c * out_h * out_w + i] += bv;
      }
    }
  }
  return MakeResult({n, o, out_h, out_w}, std::move(out), {x, w, b},
                    [d, g, n, cin, o, in_size, out_size](Node& self) {
                      Node* gx = GradTarget(self, 0);
                      Node* gw = GradTarget(self, 1);
                      Node* gb = GradTarget(self, 2);
                      const double* xv = self.parents[0]->value.data();
                      ConstMapMat wm(self.parents[1]->value.data(), cin, d.Rows());
                      const std::vector<RowBand> bands = RowBands(d);
                      std::vector<double> col(d.Rows() * MaxBandCols(d));
                      const int64_t plane = d.in_h * d.in_w;
                      for (int64_t s = 0; s < n; ++s) {
                        const double* gy = self.grad.data() + s * out_size;
                        if (gb) {
                          for (int64_t c = 0; c < o; ++c) {
                            double acc = 0.0;
                            for (int64_t i = 0; i < plane; ++i) acc += gy[c * plane + i];
                            gb->grad[c] += acc;
                          }
                        }
                        if (!gx && !gw) continue;
                        for (const RowBand& band : bands) {
                          const int64_t cols = band.Cols(d);
                          const int64_t offset = s * in_size + band.begin * d.out_w;
                          Im2Col(gy, d, g, band, col.data());
                          ConstMapMat cm(col.data(), d.Rows(), cols);
                          if (gx) {
                            StridedMap(gx->grad.data() + offset, cin, cols, Eigen::OuterStride<>(d.Cols())).noalias() +=
                                wm * cm;
                          }
                          if (gw) {
                            MapMat(gw->grad.data(), cin, d.Rows()).noalias() +=
                                ConstStridedMap(xv + offset, cin, cols, Eigen::OuterStride<>(d.Cols())) *
                                cm.transpose();
                          }
                        }
                      }
                    });
}

Tensor AvgPoolLast(const Tensor& x, int kernel, int stride, int pad) {
  Require(kernel > 0 && stride > 0 && pad >= 0, "AvgPoolLast: invalid arguments");
  const int64_t len = x.dim(-1);
  const int64_t rows = x.numel() / std::max<int64_t>(len, 1);
  const int64_t out_len = ConvOutputSize(len, kernel, stride, 1, pad, pad);
  Require(out_len > 0, "AvgPoolLast: input too short");
  Shape out_shape = x.shape();
  out_shape.back() = out_len;
  std::vector<double> out(rows * out_len, 0.0);
  const double inv = 1.0 / kernel;
  auto xv = x.data();
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t t = 0; t < out_len; ++t) {
      double acc = 0.0;
      for (int k = 0; k < kernel; ++k) {
        const int64_t i = t * stride - pad + k;
        if (i >= 0 && i < len) acc += xv[r * len + i];
      }
      out[r * out_len + t] = acc * inv;
    }
  return MakeResult(out_shape, std::move(out), {x}, [=](Node& self) {
    if (Node* p = GradTarget(self, 0)) {
      for (int64_t r = 0; r < rows; ++r)
        for (int64_t t = 0; t < out_len; ++t) {
          const double gv = self.grad[r * out_len + t] * inv;
          for (int k = 0; k < kernel; ++k) {
            const int64_t i = t * stride - pad + k;
            if (i >= 0 && i < len) p->grad[r * len + i] += gv;
          }
        }
    }
  });
}

Tensor FrameNorm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  Require(x.rank() == 4, "FrameNorm expects [N, C, F, T]");
  const int64_t n = x.dim(0), c = x.dim(1), f = x.dim(2), t = x.dim(3);
  Require(gain.numel() == c && bias.numel() == c, "FrameNorm: gain/bias must have C elements");
  const int64_t count = c * f;
  std::vector<double> out(x.numel());
  // Normalized values and inverse std per (n, t), kept for backward.
  std::vector<double> xhat(x.numel());
  std::vector<double> inv_std(n * t);
  auto xv = x.data();
  auto idx = [=](int64_t s, int64_t ch, int64_t fr, int64_t tt) { return ((s * c + ch) * f + fr) * t + tt; };
  for (int64_t s = 0; s < n; ++s)
    for (int64_t tt = 0; tt < t; ++tt) {
      double mean = 0.0;
      for (int64_t ch = 0; ch < c; ++ch)
        for (int64_t fr = 0; fr < f; ++fr) mean += xv[idx(s, ch, fr, tt)];
      mean /= count;
      double var = 0.0;
      for (int64_t ch = 0; ch < c; ++ch)
        for (int64_t fr = 0; fr < f; ++fr) {
          const double dlt = xv[idx(s, ch, fr, tt)] - mean;
          var += dlt * dlt;
        }
      var /= count;
      const double is = 1.0 / std::sqrt(var + eps);
      inv_std[s * t + tt] = is;
      for (int64_t ch = 0; ch < c; ++ch)
        for (int64_t fr = 0; fr < f; ++fr) {
          const int64_t k = idx(s, ch, fr, tt);
          xhat[k] = (xv[k] - mean) * is;
          out[k] = xhat[k] * gain.data()[ch] + bias.data()[ch];
        }
    }
  return MakeResult(x.shape(), std::move(out), {x, gain, bias},
                    [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
                      Node* gx = GradTarget(self, 0);
                      Node* gg = GradTarget(self, 1);
                      Node* gbias = GradTarget(self, 2);
                      const std::vector<double>& gain_v = self.parents[1]->value;
                      for (int64_t s = 0; s < n; ++s)
                        for (int64_t tt = 0; tt < t; ++tt) {
                          double sum_g = 0.0, sum_gx = 0.0;
                          for (int64_t ch = 0; ch < c; ++ch)
                            for (int64_t fr = 0; fr < f; ++fr) {
                              const int64_t k = idx(s, ch, fr, tt);
                              const double gy = self.grad[k];
                              if (gg) gg->grad[ch] += gy * xhat[k];
                              if (gbias) gbias->grad[ch] += gy;
                              const double gh = gy * gain_v[ch];
                              sum_g += gh;
                              sum_gx += gh * xhat[k];
                            }
                          if (!gx) continue;
                          const double is = inv_std[s * t + tt];
                          for (int64_t ch = 0; ch < c; ++ch)
                            for (int64_t fr = 0; fr < f; ++fr) {
                              const int64_t k = idx(s, ch, fr, tt);
                              const double gh = self.grad[k] * gain_v[ch];
                              gx->grad[k] += is * (gh - sum_g / count - xhat[k] * sum_gx / count);
                            }
                        }
                    });
}

}  // namespace ssi::nn
