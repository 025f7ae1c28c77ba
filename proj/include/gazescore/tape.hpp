#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "gazescore/errors.hpp"
#include "gazescore/tensor.hpp"

namespace gazescore {

// Reverse-mode automatic differentiation over an ordered operation record.
//
// A Tape logs every primitive applied during a forward pass; each entry
// references the entries that produced its inputs, so the record is
// topologically ordered by construction. backward() walks the record in
// reverse and accumulates d(loss)/d(node) for every node, including leaves.
// replay() recomputes all derived values from the leaves in record order.
//
// A Tape is confined to one thread for the duration of a forward/backward
// pass. Handles (Var) are invalidated by reset().

enum class Op : std::uint8_t {
  kLeaf,
  kMatVec,
  kHadamard,
  kAdd,
  kSub,
  kConcat,
  kSlice,
  kSigmoid,
  kTanh,
  kRelu,
  kDot,
  kSum,
  kScale,
  kSquare,
};

struct Var {
  std::uint32_t id = 0;
  std::uint64_t tag = 0;
};

class Tape {
 public:
  Tape() : tag_(next_tag()) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Drops all recorded operations; capacity is kept for reuse.
  void reset() {
    nodes_.clear();
    values_.clear();
    grads_.clear();
    has_gradients_ = false;
    tag_ = next_tag();
  }

  std::size_t size() const { return nodes_.size(); }

  Var leaf(const Tensor& t) {
    if (t.rank() == 0 || t.rank() > 2) {
      throw dimension_error("leaf: rank must be 1 or 2, got " +
                            std::to_string(t.rank()));
    }
    Node node{};
    node.op = Op::kLeaf;
    node.rank = static_cast<std::uint8_t>(t.rank());
    node.dims[0] = t.dim(0);
    node.dims[1] = t.rank() == 2 ? t.dim(1) : 1;
    const std::uint32_t id = allocate(node, t.numel());
    std::copy(t.data().begin(), t.data().end(),
              values_.begin() + static_cast<std::ptrdiff_t>(nodes_[id].offset));
    return Var{id, tag_};
  }

  Var scalar_leaf(double v) { return leaf(Tensor::scalar(v)); }

  Var vector_leaf(std::span<const double> v) {
    return leaf(Tensor::vector(std::vector<double>(v.begin(), v.end())));
  }

  Var zeros_leaf(std::size_t n) { return leaf(Tensor::zeros({n})); }

  // result[i] = sum_j m[i,j] * v[j]
  Var matvec(Var m, Var v) {
    const Node& mn = node(m);
    const Node& vn = node(v);
    if (mn.rank != 2) {
      throw dimension_error("matvec: left operand must be a matrix, got " +
                            node_shape_string(mn));
    }
    if (vn.rank != 1) {
      throw dimension_error("matvec: right operand must be a vector, got " +
                            node_shape_string(vn));
    }
    if (mn.dims[1] != vn.dims[0]) {
      throw dimension_error("matvec: shapes " + node_shape_string(mn) +
                            " and " + node_shape_string(vn) +
                            " are incompatible");
    }
    Node out{};
    out.op = Op::kMatVec;
    out.rank = 1;
    out.a = m.id;
    out.b = v.id;
    out.dims[0] = mn.dims[0];
    out.dims[1] = 1;
    const std::uint32_t id = allocate(out, mn.dims[0]);
    recompute(id);
    return Var{id, tag_};
  }

  Var hadamard(Var a, Var b) { return elementwise_pair(Op::kHadamard, a, b); }
  Var add(Var a, Var b) { return elementwise_pair(Op::kAdd, a, b); }
  Var sub(Var a, Var b) { return elementwise_pair(Op::kSub, a, b); }

  Var concat(Var a, Var b) {
    const Node& an = node(a);
    const Node& bn = node(b);
    if (an.rank != 1 || bn.rank != 1) {
      throw dimension_error("concat: both operands must be vectors, got " +
                            node_shape_string(an) + " and " +
                            node_shape_string(bn));
    }
    Node out{};
    out.op = Op::kConcat;
    out.rank = 1;
    out.a = a.id;
    out.b = b.id;
    out.dims[0] = an.dims[0] + bn.dims[0];
    out.dims[1] = 1;
    const std::uint32_t id = allocate(out, out.dims[0]);
    recompute(id);
    return Var{id, tag_};
  }

  Var slice(Var v, std::size_t start, std::size_t length) {
    const Node& vn = node(v);
    if (vn.rank != 1) {
      throw dimension_error("slice: operand must be a vector, got " +
                            node_shape_string(vn));
    }
    if (start + length > vn.dims[0] || length == 0) {
      throw dimension_error("slice: range [" + std::to_string(start) + ", " +
                            std::to_string(start + length) +
                            ") out of bounds for " + node_shape_string(vn));
    }
    Node out{};
    out.op = Op::kSlice;
    out.rank = 1;
    out.a = v.id;
    out.b = kNoParent;
    out.dims[0] = length;
    out.dims[1] = 1;
    out.slice_start = start;
    const std::uint32_t id = allocate(out, length);
    recompute(id);
    return Var{id, tag_};
  }

  Var sigmoid(Var v) { return elementwise_unary(Op::kSigmoid, v); }
  Var tanh_act(Var v) { return elementwise_unary(Op::kTanh, v); }
  Var relu(Var v) { return elementwise_unary(Op::kRelu, v); }
  Var square(Var v) { return elementwise_unary(Op::kSquare, v); }

  Var dot(Var a, Var b) {
    const Node& an = node(a);
    const Node& bn = node(b);
    if (an.rank != 1 || bn.rank != 1 || an.dims[0] != bn.dims[0]) {
      throw dimension_error("dot: shapes " + node_shape_string(an) + " and " +
                            node_shape_string(bn) + " are incompatible");
    }
    Node out{};
    out.op = Op::kDot;
    out.rank = 1;
    out.a = a.id;
    out.b = b.id;
    out.dims[0] = 1;
    out.dims[1] = 1;
    const std::uint32_t id = allocate(out, 1);
    recompute(id);
    return Var{id, tag_};
  }

  Var sum(Var v) {
    const Node& vn = node(v);
    if (vn.rank != 1) {
      throw dimension_error("sum: operand must be a vector, got " +
                            node_shape_string(vn));
    }
    Node out{};
    out.op = Op::kSum;
    out.rank = 1;
    out.a = v.id;
    out.b = kNoParent;
    out.dims[0] = 1;
    out.dims[1] = 1;
    const std::uint32_t id = allocate(out, 1);
    recompute(id);
    return Var{id, tag_};
  }

  Var scale(Var v, double factor) {
    const Node& vn = node(v);
    Node out{};
    out.op = Op::kScale;
    out.rank = vn.rank;
    out.a = v.id;
    out.b = kNoParent;
    out.dims[0] = vn.dims[0];
    out.dims[1] = vn.dims[1];
    out.factor = factor;
    const std::uint32_t id = allocate(out, vn.len);
    recompute(id);
    return Var{id, tag_};
  }

  bool is_leaf(Var v) const { return node(v).op == Op::kLeaf; }

  std::span<const double> values(Var v) const {
    const Node& n = node(v);
    return {values_.data() + n.offset, n.len};
  }

  double scalar_value(Var v) const {
    const Node& n = node(v);
    if (n.len != 1) {
      throw dimension_error("scalar_value: node holds " +
                            std::to_string(n.len) + " values");
    }
    return values_[n.offset];
  }

  Tensor value_tensor(Var v) const {
    const Node& n = node(v);
    std::vector<std::size_t> shape{n.dims[0]};
    if (n.rank == 2) shape.push_back(n.dims[1]);
    auto sp = values(v);
    return Tensor(std::move(shape), std::vector<double>(sp.begin(), sp.end()));
  }

  // Accumulates d(loss)/d(node) for every recorded node. loss must hold a
  // single value and must have been produced through this record.
  void backward(Var loss) {
    const Node& ln = node(loss);
    if (ln.len != 1) {
      throw dimension_error("backward: loss must be scalar, got " +
                            node_shape_string(ln));
    }
    grads_.assign(values_.size(), 0.0);
    grads_[ln.offset] = 1.0;
    for (std::uint32_t i = loss.id + 1; i-- > 0;) {
      propagate(i);
    }
    has_gradients_ = true;
  }

  std::span<const double> gradient(Var v) const {
    if (!has_gradients_) {
      throw record_error("gradient: no backward pass has been run");
    }
    const Node& n = node(v);
    return {grads_.data() + n.offset, n.len};
  }

  Tensor gradient_tensor(Var v) const {
    const Node& n = node(v);
    std::vector<std::size_t> shape{n.dims[0]};
    if (n.rank == 2) shape.push_back(n.dims[1]);
    auto sp = gradient(v);
    return Tensor(std::move(shape), std::vector<double>(sp.begin(), sp.end()));
  }

  // Recomputes every derived node from the leaves, in record order.
  void replay() {
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].op != Op::kLeaf) recompute(i);
    }
  }

 private:
  static constexpr std::uint32_t kNoParent =
      std::numeric_limits<std::uint32_t>::max();

  struct Node {
    Op op = Op::kLeaf;
    std::uint8_t rank = 1;
    std::uint32_t a = kNoParent;
    std::uint32_t b = kNoParent;
    std::size_t dims[2] = {0, 0};
    std::size_t offset = 0;
    std::size_t len = 0;
    std::size_t slice_start = 0;
    double factor = 1.0;
  };

  static std::uint64_t next_tag() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
  }

  const Node& node(Var v) const {
    if (v.tag != tag_ || v.id >= nodes_.size()) {
      throw record_error(
          "node handle does not belong to this recording (detached or reset)");
    }
    return nodes_[v.id];
  }

  std::string node_shape_string(const Node& n) const {
    std::vector<std::size_t> shape{n.dims[0]};
    if (n.rank == 2) shape.push_back(n.dims[1]);
    return shape_string(shape);
  }

  std::uint32_t allocate(Node node, std::size_t len) {
    node.offset = values_.size();
    node.len = len;
    values_.resize(values_.size() + len, 0.0);
    nodes_.push_back(node);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  Var elementwise_pair(Op op, Var a, Var b) {
    const Node& an = node(a);
    const Node& bn = node(b);
    if (an.rank != bn.rank || an.dims[0] != bn.dims[0] ||
        an.dims[1] != bn.dims[1]) {
      throw dimension_error("elementwise op: shapes " + node_shape_string(an) +
                            " and " + node_shape_string(bn) + " differ");
    }
    Node out{};
    out.op = op;
    out.rank = an.rank;
    out.a = a.id;
    out.b = b.id;
    out.dims[0] = an.dims[0];
    out.dims[1] = an.dims[1];
    const std::uint32_t id = allocate(out, an.len);
    recompute(id);
    return Var{id, tag_};
  }

  Var elementwise_unary(Op op, Var v) {
    const Node& vn = node(v);
    Node out{};
    out.op = op;
    out.rank = vn.rank;
    out.a = v.id;
    out.b = kNoParent;
    out.dims[0] = vn.dims[0];
    out.dims[1] = vn.dims[1];
    const std::uint32_t id = allocate(out, vn.len);
    recompute(id);
    return Var{id, tag_};
  }

  // Sigmoid and tanh outputs are nudged off the closed interval bounds so
  // that gate values stay strictly inside (0,1) and (-1,1) even where the
  // double-precision result would round to an endpoint.
  static double stable_sigmoid(double x) {
    double y;
    if (x >= 0.0) {
      y = 1.0 / (1.0 + std::exp(-x));
    } else {
      const double e = std::exp(x);
      y = e / (1.0 + e);
    }
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    constexpr double lo = std::numeric_limits<double>::min();
    if (y >= 1.0) y = hi;
    if (y <= 0.0) y = lo;
    return y;
  }

  static double stable_tanh(double x) {
    double y = std::tanh(x);
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    if (y >= 1.0) y = hi;
    if (y <= -1.0) y = -hi;
    return y;
  }

  void recompute(std::uint32_t id) {
    Node& n = nodes_[id];
    double* out = values_.data() + n.offset;
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatVec: {
        const Node& mn = nodes_[n.a];
        const Node& vn = nodes_[n.b];
        const double* m = values_.data() + mn.offset;
        const double* v = values_.data() + vn.offset;
        const std::size_t rows = mn.dims[0];
        const std::size_t cols = mn.dims[1];
        for (std::size_t i = 0; i < rows; ++i) {
          double acc = 0.0;
          const double* row = m + i * cols;
          for (std::size_t j = 0; j < cols; ++j) acc += row[j] * v[j];
          out[i] = acc;
        }
        break;
      }
      case Op::kHadamard: {
        const double* a = values_.data() + nodes_[n.a].offset;
        const double* b = values_.data() + nodes_[n.b].offset;
        for (std::size_t i = 0; i < n.len; ++i) out[i] = a[i] * b[i];
        break;
      }
      case Op::kAdd: {
        const double* a = values_.data() + nodes_[n.a].offset;
        const double* b = values_.data() + nodes_[n.b].offset;
        for (std::size_t i = 0; i < n.len; ++i) out[i] = a[i] + b[i];
        break;
      }
      case Op::kSub: {
        const double* a = values_.data() + nodes_[n.a].offset;
        const double* b = values_.data() + nodes_[n.b].offset;
        for (std::size_t i = 0; i < n.len; ++i) out[i] = a[i] - b[i];
        break;
      }
      case Op::kConcat: {
        const Node& an = nodes_[n.a];
        const Node& bn = nodes_[n.b];
        const double* a = values_.data() + an.offset;
        const double* b = values_.data() + bn.offset;
        for (std::size_t i = 0; i < an.len; ++i) out[i] = a[i];
        for (std::size_t i = 0; i < bn.len; ++i) out[an.len + i] = b[i];
        break;
      }
      case Op::kSlice: {
        const double* a = values_.data() + nodes_[n.a].offset + n.slice_start;
        for (std::size_t i = 0; i < n.len; ++i) out[i] = a[i];
        break;
      }
      case Op::kSigmoid: {
        const double* a = values_.data() + nodes_[n.a].offset;
        for (std::size_t i = 0; i < n.len; ++i) out[i] = stable_sigmoid(a[i]);
        break;
      }
      case Op::kTanh: {
        const double* a = values_.data() + nodes_[n.a].offset;
        for (std::size_t i = 0; i < n.len; ++i) out[i] = stable_tanh(a[i]);
        break;
      }
      case Op::kRelu: {
        const double* a = values_.data() + nodes_[n.a].offset;
        for (std::size_t i = 0; i < n.len; ++i)
          out[i] = a[i] > 0.0 ? a[i] : 0.0;
        break;
      }
      case Op::kDot: {
        const Node& an = nodes_[n.a];
        const double* a = values_.data() + an.offset;
        const double* b = values_.data() + nodes_[n.b].offset;
        double acc = 0.0;
        for (std::size_t i = 0; i < an.len; ++i) acc += a[i] * b[i];
        out[0] = acc;
        break;
      }
      case Op::kSum: {
        const Node& an = nodes_[n.a];
        const double* a = values_.data() + an.offset;
        double acc = 0.0;
        for (std::size_t i = 0; i < an.len; ++i) acc += a[i];
        out[0] = acc;
        break;
      }
      case Op::kScale: {
        const double* a = values_.data() + nodes_[n.a].offset;
        for (std::size_t i = 0; i < n.len; ++i) out[i] = n.factor * a[i];
        break;
      }
      case Op::kSquare: {
        const double* a = values_.data() + nodes_[n.a].offset;
        for (std::size_t i = 0; i < n.len; ++i) out[i] = a[i] * a[i];
        break;
      }
    }
  }

  void propagate(std::uint32_t id) {
    const Node& n = nodes_[id];
    if (n.op == Op::kLeaf) return;
    const double* g = grads_.data() + n.offset;
    const double* out = values_.data() + n.offset;
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatVec: {
        const Node& mn = nodes_[n.a];
        const Node& vn = nodes_[n.b];
        const double* m = values_.data() + mn.offset;
        const double* v = values_.data() + vn.offset;
        double* gm = grads_.data() + mn.offset;
        double* gv = grads_.data() + vn.offset;
        const std::size_t rows = mn.dims[0];
        const std::size_t cols = mn.dims[1];
        for (std::size_t i = 0; i < rows; ++i) {
          const double gi = g[i];
          const double* row = m + i * cols;
          double* grow = gm + i * cols;
          for (std::size_t j = 0; j < cols; ++j) {
            grow[j] += gi * v[j];
            gv[j] += gi * row[j];
          }
        }
        break;
      }
      case Op::kHadamard: {
        const double* a = values_.data() + nodes_[n.a].offset;
        const double* b = values_.data() + nodes_[n.b].offset;
        double* ga = grads_.data() + nodes_[n.a].offset;
        double* gb = grads_.data() + nodes_[n.b].offset;
        for (std::size_t i = 0; i < n.len; ++i) {
          ga[i] += g[i] * b[i];
          gb[i] += g[i] * a[i];
        }
        break;
      }
      case Op::kAdd: {
        double* ga = grads_.data() + nodes_[n.a].offset;
        double* gb = grads_.data() + nodes_[n.b].offset;
        for (std::size_t i = 0; i < n.len; ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        break;
      }
      case Op::kSub: {
        double* ga = grads_.data() + nodes_[n.a].offset;
        double* gb = grads_.data() + nodes_[n.b].offset;
        for (std::size_t i = 0; i < n.len; ++i) {
          ga[i] += g[i];
          gb[i] -= g[i];
        }
        break;
      }
      case Op::kConcat: {
        const Node& an = nodes_[n.a];
        const Node& bn = nodes_[n.b];
        double* ga = grads_.data() + an.offset;
        double* gb = grads_.data() + bn.offset;
        for (std::size_t i = 0; i < an.len; ++i) ga[i] += g[i];
        for (std::size_t i = 0; i < bn.len; ++i) gb[i] += g[an.len + i];
        break;
      }
      case Op::kSlice: {
        double* ga = grads_.data() + nodes_[n.a].offset + n.slice_start;
        for (std::size_t i = 0; i < n.len; ++i) ga[i] += g[i];
        break;
      }
      case Op::kSigmoid: {
        double* ga = grads_.data() + nodes_[n.a].offset;
        for (std::size_t i = 0; i < n.len; ++i)
          ga[i] += g[i] * out[i] * (1.0 - out[i]);
        break;
      }
      case Op::kTanh: {
        double* ga = grads_.data() + nodes_[n.a].offset;
        for (std::size_t i = 0; i < n.len; ++i)
          ga[i] += g[i] * (1.0 - out[i] * out[i]);
        break;
      }
      case Op::kRelu: {
        const double* a = values_.data() + nodes_[n.a].offset;
        double* ga = grads_.data() + nodes_[n.a].offset;
        for (std::size_t i = 0; i < n.len; ++i)
          if (a[i] > 0.0) ga[i] += g[i];
        break;
      }
      case Op::kDot: {
        const Node& an = nodes_[n.a];
        const double* a = values_.data() + an.offset;
        const double* b = values_.data() + nodes_[n.b].offset;
        double* ga = grads_.data() + an.offset;
        double* gb = grads_.data() + nodes_[n.b].offset;
        const double g0 = g[0];
        for (std::size_t i = 0; i < an.len; ++i) {
          ga[i] += g0 * b[i];
          gb[i] += g0 * a[i];
        }
        break;
      }
      case Op::kSum: {
        const Node& an = nodes_[n.a];
        double* ga = grads_.data() + an.offset;
        const double g0 = g[0];
        for (std::size_t i = 0; i < an.len; ++i) ga[i] += g0;
        break;
      }
      case Op::kScale: {
        double* ga = grads_.data() + nodes_[n.a].offset;
        for (std::size_t i = 0; i < n.len; ++i) ga[i] += n.factor * g[i];
        break;
      }
      case Op::kSquare: {
        const double* a = values_.data() + nodes_[n.a].offset;
        double* ga = grads_.data() + nodes_[n.a].offset;
        for (std::size_t i = 0; i < n.len; ++i) ga[i] += 2.0 * a[i] * g[i];
        break;
      }
    }
  }

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> grads_;
  std::uint64_t tag_ = 0;
  bool has_gradients_ = false;
};

}  // namespace gazescore
