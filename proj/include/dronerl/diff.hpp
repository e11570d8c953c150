#pragma once

// Tape-based reverse-mode automatic differentiation over dense Eigen
// matrices. Values are column-major; a batch of samples is laid out one
// sample per column.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dronerl::diff {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

template <typename Derived>
std::string shape_string(const Eigen::EigenBase<Derived>& m) {
  return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

/// Named trainable parameters with their gradients and Adam moments.
/// Iteration order is insertion order and is what checkpoints rely on.
template <typename Scalar>
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Matrix<Scalar> value;
    Matrix<Scalar> grad;
    Matrix<Scalar> adam_m;
    Matrix<Scalar> adam_v;
  };

  std::size_t add(std::string name, Matrix<Scalar> value) {
    if (index_.count(name) != 0) {
      throw UsageError("duplicate parameter name '" + name + "'");
    }
    const auto rows = value.rows();
    const auto cols = value.cols();
    index_.emplace(name, entries_.size());
    entries_.push_back(Entry{std::move(name), std::move(value),
                             Matrix<Scalar>::Zero(rows, cols),
                             Matrix<Scalar>::Zero(rows, cols),
                             Matrix<Scalar>::Zero(rows, cols)});
    return entries_.size() - 1;
  }

  std::size_t index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw UsageError("unknown parameter '" + name + "'");
    }
    return it->second;
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  Entry& operator[](std::size_t i) { return entries_[i]; }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  Entry& at(const std::string& name) { return entries_[index_of(name)]; }
  const Entry& at(const std::string& name) const { return entries_[index_of(name)]; }

  std::size_t size() const { return entries_.size(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += static_cast<std::size_t>(e.value.size());
    return n;
  }

  void zero_grad() {
    for (auto& e : entries_) e.grad.setZero();
  }

  /// Number of optimizer steps taken; drives Adam bias correction.
  std::int64_t adam_steps = 0;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

template <typename Scalar>
class Tape;

/// Handle to a node on a tape.
template <typename Scalar>
struct Var {
  Tape<Scalar>* tape = nullptr;
  int id = -1;

  const Matrix<Scalar>& value() const { return tape->value(*this); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

template <typename Scalar>
class Tape {
 public:
  using Mat = Matrix<Scalar>;
  using Backward = std::function<void(Tape&, const Mat& grad, const Mat& out)>;

  /// A tape built with record=false never stores backward closures; use it
  /// for inference.
  explicit Tape(bool record = true) : record_(record) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  Var<Scalar> constant(Mat value) { return push(std::move(value), false, nullptr); }

  /// Free variable whose gradient is read back with grad().
  Var<Scalar> leaf(Mat value) { return push(std::move(value), record_, nullptr); }

  /// Trainable parameter: gradients are added into the store on backward.
  Var<Scalar> parameter(ParamStore<Scalar>& store, std::size_t index) {
    Var<Scalar> v = push_view(&store[index].value, record_);
    if (record_) nodes_[v.id].param_grad = &store[index].grad;
    return v;
  }

  /// Read-only view of a parameter; no gradient flows back.
  Var<Scalar> frozen(const ParamStore<Scalar>& store, std::size_t index) {
    return push_view(&store[index].value, false);
  }

  const Mat& value(Var<Scalar> v) const {
    const Node& n = nodes_[check(v)];
    return n.external != nullptr ? *n.external : n.value;
  }

  /// Gradient from the last backward(); zero-shaped when none flowed.
  const Mat& grad(Var<Scalar> v) const { return nodes_[check(v)].grad; }

  bool requires_grad(Var<Scalar> v) const { return nodes_[check(v)].requires_grad; }

  /// Reverse sweep from a scalar loss. Every node is visited once in reverse
  /// creation order, which is a topological order of the graph. Parameter
  /// gradients accumulate into their ParamStore across calls.
  void backward(Var<Scalar> loss) {
    check(loss);
    if (!record_) throw UsageError("backward on a non-recording tape");
    const Mat& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1) {
      throw UsageError("backward requires a scalar loss, got " + shape_string(lv));
    }
    for (auto& n : nodes_) n.grad.resize(0, 0);
    nodes_[loss.id].grad = Mat::Ones(1, 1);
    for (int id = loss.id; id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.requires_grad || n.grad.size() == 0) continue;
      if (n.backward) n.backward(*this, n.grad, n.external != nullptr ? *n.external : n.value);
      if (n.param_grad != nullptr) *n.param_grad += n.grad;
    }
  }

  // Building blocks for operations.

  Var<Scalar> push(Mat value, bool requires_grad, Backward backward) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad && record_;
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var<Scalar>{this, static_cast<int>(nodes_.size()) - 1};
  }

  bool any_requires_grad(std::initializer_list<Var<Scalar>> vars) const {
    if (!record_) return false;
    for (auto v : vars) {
      if (nodes_[check(v)].requires_grad) return true;
    }
    return false;
  }

  /// Adds `g` into the gradient of `v`, allocating on first touch.
  template <typename Derived>
  void accumulate(Var<Scalar> v, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[v.id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  /// Gradient buffer of `v` sized like its value, or nullptr when `v` takes
  /// no gradient. Lets an op accumulate into a sub-block in place.
  Mat* grad_buffer(Var<Scalar> v) {
    Node& n = nodes_[v.id];
    if (!n.requires_grad) return nullptr;
    if (n.grad.size() == 0) {
      const Mat& val = n.external != nullptr ? *n.external : n.value;
      n.grad.setZero(val.rows(), val.cols());
    }
    return &n.grad;
  }

 private:
  struct Node {
    Mat value;
    const Mat* external = nullptr;
    Mat grad;
    bool requires_grad = false;
    Backward backward;
    Mat* param_grad = nullptr;
  };

  Var<Scalar> push_view(const Mat* external, bool requires_grad) {
    Node n;
    n.external = external;
    n.requires_grad = requires_grad && record_;
    nodes_.push_back(std::move(n));
    return Var<Scalar>{this, static_cast<int>(nodes_.size()) - 1};
  }

  int check(Var<Scalar> v) const {
    if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
      throw UsageError("variable does not belong to this tape");
    }
    return v.id;
  }

  bool record_;
  std::vector<Node> nodes_;
};

namespace detail {

template <typename Scalar>
Tape<Scalar>& same_tape(Var<Scalar> a, Var<Scalar> b) {
  if (a.tape == nullptr || a.tape != b.tape) {
    throw UsageError("operands live on different tapes");
  }
  return *a.tape;
}

template <typename Scalar>
void require_same_shape(const char* op, Var<Scalar> a, Var<Scalar> b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.value()) +
                     " vs " + shape_string(b.value()));
  }
}

// Sum in double regardless of Scalar.
template <typename Derived>
double accurate_sum(const Eigen::MatrixBase<Derived>& m) {
  return m.template cast<double>().sum();
}

}  // namespace detail

// Elementwise binary operations. add/sub also accept a column vector as the
// second operand, broadcast across the columns of the first.

template <typename Scalar>
Var<Scalar> add(Var<Scalar> a, Var<Scalar> b) {
  auto& t = detail::same_tape(a, b);
  const bool broadcast =
      b.cols() == 1 && a.cols() != 1 && a.rows() == b.rows();
  if (!broadcast) detail::require_same_shape("add", a, b);
  Matrix<Scalar> out = broadcast ? Matrix<Scalar>(a.value().colwise() + b.value().col(0))
                                 : Matrix<Scalar>(a.value() + b.value());
  return t.push(std::move(out), t.any_requires_grad({a, b}),
                [a, b, broadcast](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>&) {
                  tp.accumulate(a, g);
                  if (broadcast) {
                    tp.accumulate(b, g.rowwise().sum());
                  } else {
                    tp.accumulate(b, g);
                  }
                });
}

template <typename Scalar>
Var<Scalar> sub(Var<Scalar> a, Var<Scalar> b) {
  auto& t = detail::same_tape(a, b);
  const bool broadcast =
      b.cols() == 1 && a.cols() != 1 && a.rows() == b.rows();
  if (!broadcast) detail::require_same_shape("sub", a, b);
  Matrix<Scalar> out = broadcast ? Matrix<Scalar>(a.value().colwise() - b.value().col(0))
                                 : Matrix<Scalar>(a.value() - b.value());
  return t.push(std::move(out), t.any_requires_grad({a, b}),
                [a, b, broadcast](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>&) {
                  tp.accumulate(a, g);
                  if (broadcast) {
                    tp.accumulate(b, -g.rowwise().sum());
                  } else {
                    tp.accumulate(b, -g);
                  }
                });
}

template <typename Scalar>
Var<Scalar> mul(Var<Scalar> a, Var<Scalar> b) {
  auto& t = detail::same_tape(a, b);
  detail::require_same_shape("mul", a, b);
  return t.push(a.value().cwiseProduct(b.value()), t.any_requires_grad({a, b}),
                [a, b](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>&) {
                  tp.accumulate(a, g.cwiseProduct(b.value()));
                  tp.accumulate(b, g.cwiseProduct(a.value()));
                });
}

/// Elementwise minimum; on ties the gradient goes to the first operand.
template <typename Scalar>
Var<Scalar> min(Var<Scalar> a, Var<Scalar> b) {
  auto& t = detail::same_tape(a, b);
  detail::require_same_shape("min", a, b);
  return t.push(a.value().cwiseMin(b.value()), t.any_requires_grad({a, b}),
                [a, b](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>&) {
                  const auto take_a = (a.value().array() <= b.value().array());
                  tp.accumulate(a, take_a.select(g, Scalar(0)).matrix());
                  tp.accumulate(b, take_a.select(Scalar(0), g).matrix());
                });
}

template <typename Scalar>
Var<Scalar> matmul(Var<Scalar> a, Var<Scalar> b) {
  auto& t = detail::same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ " + shape_string(a.value()) + " vs " +
                     shape_string(b.value()));
  }
  Matrix<Scalar> out(a.rows(), b.cols());
  out.noalias() = a.value() * b.value();
  return t.push(std::move(out), t.any_requires_grad({a, b}),
                [a, b](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>&) {
                  if (auto* ga = tp.grad_buffer(a)) ga->noalias() += g * b.value().transpose();
                  if (auto* gb = tp.grad_buffer(b)) gb->noalias() += a.value().transpose() * g;
                });
}

// Unary operations.

template <typename Scalar>
Var<Scalar> scale(Var<Scalar> a, Scalar s) {
  auto& t = *a.tape;
  return t.push(a.value() * s, t.any_requires_grad({a}),
                [a, s](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>&) { tp.accumulate(a, g * s); });
}

template <typename Scalar>
Var<Scalar> neg(Var<Scalar> a) {
  return scale(a, Scalar(-1));
}

template <typename Scalar>
Var<Scalar> tanh(Var<Scalar> a) {
  auto& t = *a.tape;
  return t.push(a.value().array().tanh().matrix(), t.any_requires_grad({a}),
                [a](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>& y) {
                  tp.accumulate(a, (g.array() * (Scalar(1) - y.array().square())).matrix());
                });
}

template <typename Scalar>
Var<Scalar> sigmoid(Var<Scalar> a) {
  auto& t = *a.tape;
  Matrix<Scalar> y = (Scalar(1) / (Scalar(1) + (-a.value().array()).exp())).matrix();
  return t.push(std::move(y), t.any_requires_grad({a}),
                [a](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>& y) {
                  tp.accumulate(a, (g.array() * y.array() * (Scalar(1) - y.array())).matrix());
                });
}

template <typename Scalar>
Var<Scalar> exp(Var<Scalar> a) {
  auto& t = *a.tape;
  return t.push(a.value().array().exp().matrix(), t.any_requires_grad({a}),
                [a](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>& y) {
                  tp.accumulate(a, g.cwiseProduct(y));
                });
}

template <typename Scalar>
Var<Scalar> log(Var<Scalar> a) {
  auto& t = *a.tape;
  return t.push(a.value().array().log().matrix(), t.any_requires_grad({a}),
                [a](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>&) {
                  tp.accumulate(a, (g.array() / a.value().array()).matrix());
                });
}

template <typename Scalar>
Var<Scalar> square(Var<Scalar> a) {
  auto& t = *a.tape;
  return t.push(a.value().array().square().matrix(), t.any_requires_grad({a}),
                [a](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>&) {
                  tp.accumulate(a, (Scalar(2) * g.array() * a.value().array()).matrix());
                });
}

/// Clamp to [lo, hi]. Gradient passes through inside the closed interval and
/// is zero outside it.
template <typename Scalar>
Var<Scalar> clip(Var<Scalar> a, Scalar lo, Scalar hi) {
  if (!(lo <= hi)) throw UsageError("clip: lo > hi");
  auto& t = *a.tape;
  return t.push(a.value().cwiseMax(lo).cwiseMin(hi), t.any_requires_grad({a}),
                [a, lo, hi](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>&) {
                  const auto& x = a.value().array();
                  tp.accumulate(a, ((x >= lo) && (x <= hi)).select(g, Scalar(0)).matrix());
                });
}

// Reductions. Accumulation is carried out in double.

template <typename Scalar>
Var<Scalar> sum(Var<Scalar> a) {
  auto& t = *a.tape;
  Matrix<Scalar> out(1, 1);
  out(0, 0) = static_cast<Scalar>(detail::accurate_sum(a.value()));
  return t.push(std::move(out), t.any_requires_grad({a}),
                [a](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>&) {
                  tp.accumulate(a, Matrix<Scalar>::Constant(a.rows(), a.cols(), g(0, 0)));
                });
}

template <typename Scalar>
Var<Scalar> mean(Var<Scalar> a) {
  if (a.value().size() == 0) throw UsageError("mean of an empty matrix");
  auto& t = *a.tape;
  const double n = static_cast<double>(a.value().size());
  Matrix<Scalar> out(1, 1);
  out(0, 0) = static_cast<Scalar>(detail::accurate_sum(a.value()) / n);
  return t.push(std::move(out), t.any_requires_grad({a}),
                [a, n](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>&) {
                  tp.accumulate(a, Matrix<Scalar>::Constant(a.rows(), a.cols(),
                                                            static_cast<Scalar>(g(0, 0) / n)));
                });
}

/// Sum over rows: (r x c) -> (1 x c).
template <typename Scalar>
Var<Scalar> col_sum(Var<Scalar> a) {
  auto& t = *a.tape;
  Matrix<Scalar> out = a.value().template cast<double>().colwise().sum().template cast<Scalar>();
  return t.push(std::move(out), t.any_requires_grad({a}),
                [a](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>&) {
                  tp.accumulate(a, g.replicate(a.rows(), 1));
                });
}

/// Column-wise softmax.
template <typename Scalar>
Var<Scalar> softmax(Var<Scalar> a) {
  auto& t = *a.tape;
  Matrix<Scalar> y = (a.value().rowwise() - a.value().colwise().maxCoeff()).array().exp().matrix();
  y.array().rowwise() /= y.colwise().sum().array();
  return t.push(std::move(y), t.any_requires_grad({a}),
                [a](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>& y) {
                  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> dot =
                      y.cwiseProduct(g).colwise().sum();
                  tp.accumulate(a, y.cwiseProduct(g.rowwise() - dot));
                });
}

/// Column-wise log-softmax, computed with the max-shift for stability.
template <typename Scalar>
Var<Scalar> log_softmax(Var<Scalar> a) {
  auto& t = *a.tape;
  Matrix<Scalar> shifted = a.value().rowwise() - a.value().colwise().maxCoeff();
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> lse =
      shifted.array().exp().colwise().sum().log().matrix();
  shifted.rowwise() -= lse;
  return t.push(std::move(shifted), t.any_requires_grad({a}),
                [a](Tape<Scalar>& tp, const Matrix<Scalar>& g, const Matrix<Scalar>& y) {
                  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> gs = g.colwise().sum();
                  Matrix<Scalar> p = y.array().exp().matrix();
                  p.array().rowwise() *= gs.array();
                  tp.accumulate(a, g - p);
                });
}

/// Picks a(index[j], j) for every column j: (r x c) -> (1 x c).
template <typename Scalar>
Var<Scalar> gather(Var<Scalar> a, std::span<const int> index) {
  if (static_cast<Eigen::Index>(index.size()) != a.cols()) {
    throw ShapeError("gather: " + std::to_string(index.size()) + " indices for " +
                     shape_string(a.value()));
  }
  auto& t = *a.tape;
  Matrix<Scalar> out(1, a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const int r = index[static_cast<std::size_t>(j)];
    if (r < 0 || r >= a.rows()) throw UsageError("gather: index out of range");
    out(0, j) = a.value()(r, j);
  }
  std::vector<int> idx(index.begin(), index.end());
  return t.push(std::move(out), t.any_requires_grad({a}),
                [a, idx = std::move(idx)](Tape<Scalar>& tp, const Matrix<Scalar>& g,
                                          const Matrix<Scalar>&) {
                  if (auto* ga = tp.grad_buffer(a)) {
                    for (std::size_t j = 0; j < idx.size(); ++j) {
                      (*ga)(idx[j], static_cast<Eigen::Index>(j)) += g(0, static_cast<Eigen::Index>(j));
                    }
                  }
                });
}

template <typename Scalar>
Var<Scalar> slice_rows(Var<Scalar> a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(start) + ", +" + std::to_string(count) +
                     ") out of " + shape_string(a.value()));
  }
  auto& t = *a.tape;
  return t.push(a.value().middleRows(start, count), t.any_requires_grad({a}),
                [a, start, count](Tape<Scalar>& tp, const Matrix<Scalar>& g,
                                  const Matrix<Scalar>&) {
                  if (auto* ga = tp.grad_buffer(a)) ga->middleRows(start, count) += g;
                });
}

template <typename Scalar>
Var<Scalar> slice_cols(Var<Scalar> a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(start) + ", +" + std::to_string(count) +
                     ") out of " + shape_string(a.value()));
  }
  auto& t = *a.tape;
  return t.push(a.value().middleCols(start, count), t.any_requires_grad({a}),
                [a, start, count](Tape<Scalar>& tp, const Matrix<Scalar>& g,
                                  const Matrix<Scalar>&) {
                  if (auto* ga = tp.grad_buffer(a)) ga->middleCols(start, count) += g;
                });
}

/// Horizontal concatenation of equally tall blocks.
template <typename Scalar>
Var<Scalar> concat_cols(std::span<const Var<Scalar>> parts) {
  if (parts.empty()) throw UsageError("concat_cols of nothing");
  auto& t = *parts.front().tape;
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  bool needs_grad = false;
  for (const auto& p : parts) {
    if (p.tape != &t) throw UsageError("operands live on different tapes");
    if (p.rows() != rows) {
      throw ShapeError("concat_cols: " + shape_string(parts.front().value()) + " vs " +
                       shape_string(p.value()));
    }
    cols += p.cols();
    needs_grad = needs_grad || t.any_requires_grad({p});
  }
  Matrix<Scalar> out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  std::vector<Var<Scalar>> keep(parts.begin(), parts.end());
  return t.push(std::move(out), needs_grad,
                [keep = std::move(keep)](Tape<Scalar>& tp, const Matrix<Scalar>& g,
                                         const Matrix<Scalar>&) {
                  Eigen::Index off = 0;
                  for (const auto& p : keep) {
                    const Eigen::Index c = p.cols();
                    tp.accumulate(p, g.middleCols(off, c));
                    off += c;
                  }
                });
}

template <typename Scalar>
Var<Scalar> operator+(Var<Scalar> a, Var<Scalar> b) { return add(a, b); }
template <typename Scalar>
Var<Scalar> operator-(Var<Scalar> a, Var<Scalar> b) { return sub(a, b); }
template <typename Scalar>
Var<Scalar> operator*(Var<Scalar> a, Var<Scalar> b) { return mul(a, b); }
template <typename Scalar>
Var<Scalar> operator-(Var<Scalar> a) { return neg(a); }

/// Scalar read-out of a (1 x 1) variable.
template <typename Scalar>
Scalar item(Var<Scalar> a) {
  if (a.rows() != 1 || a.cols() != 1) {
    throw ShapeError("item: expected (1x1), got " + shape_string(a.value()));
  }
  return a.value()(0, 0);
}

// Optimization.

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update from the gradients held in the store.
template <typename Scalar>
void adam_step(ParamStore<Scalar>& params, const AdamConfig& cfg) {
  params.adam_steps += 1;
  const double t = static_cast<double>(params.adam_steps);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  const auto b1 = static_cast<Scalar>(cfg.beta1);
  const auto b2 = static_cast<Scalar>(cfg.beta2);
  const auto step = static_cast<Scalar>(cfg.lr / bc1);
  const auto inv_bc2 = static_cast<Scalar>(1.0 / bc2);
  const auto eps = static_cast<Scalar>(cfg.eps);
  for (auto& e : params) {
    e.adam_m = b1 * e.adam_m + (Scalar(1) - b1) * e.grad;
    e.adam_v = b2 * e.adam_v + (Scalar(1) - b2) * e.grad.cwiseAbs2();
    e.value.array() -=
        step * e.adam_m.array() / ((e.adam_v.array() * inv_bc2).sqrt() + eps);
  }
}

/// L2 norm over every gradient in the store.
template <typename Scalar>
double grad_norm(const ParamStore<Scalar>& params) {
  double sq = 0.0;
  for (const auto& e : params) sq += e.grad.template cast<double>().squaredNorm();
  return std::sqrt(sq);
}

/// Rescales all gradients so their global norm is at most max_norm. Returns
/// the norm before clipping.
template <typename Scalar>
double clip_grad_norm(ParamStore<Scalar>& params, double max_norm) {
  const double norm = grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const auto s = static_cast<Scalar>(max_norm / norm);
    for (auto& e : params) e.grad *= s;
  }
  return norm;
}

}  // namespace dronerl::diff
