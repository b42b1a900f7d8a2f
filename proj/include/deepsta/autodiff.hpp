// Reverse-mode differentiation over dense matrices. A Tape records every
// primitive executed during a forward pass; backward() replays it once in
// reverse. Tapes are rebuilt per step and confined to one worker.
#pragma once

#include "deepsta/common.hpp"
#include "deepsta/rng.hpp"

#include <functional>
#include <vector>

namespace deepsta::ad {

class Tape;

// Lightweight handle to a tape node. Copyable; valid for the tape's lifetime.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int index) : tape_(tape), index_(index) {}

  const Matrix& value() const;
  // Gradient accumulated by backward(); zero matrix if the node was never
  // reached. Only meaningful for requires_grad nodes.
  Matrix grad() const;
  bool requires_grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  int index() const { return index_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int index_ = -1;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves: parameters (requires_grad) or constants.
  Var leaf(Matrix value, bool requires_grad = false);
  Var constant(Matrix value) { return leaf(std::move(value), false); }

  // Records an interior node. `backward` may be empty when no input needs
  // gradients; it must only accumulate into earlier nodes.
  Var record(Matrix value, bool requires_grad, std::function<void(Tape&)> backward);

  // Seeds d(root)/d(root) = 1 and propagates to all requires_grad nodes.
  // root must be 1x1.
  void backward(const Var& root);

  const Matrix& value(int index) const { return nodes_[static_cast<std::size_t>(index)].value; }
  bool node_requires_grad(int index) const {
    return nodes_[static_cast<std::size_t>(index)].requires_grad;
  }
  // Accumulates into a node's gradient; no-op for non-grad nodes.
  void accumulate(int index, const Matrix& g);
  const Matrix& stored_grad(int index) const {
    return nodes_[static_cast<std::size_t>(index)].grad;
  }
  bool has_grad(int index) const { return nodes_[static_cast<std::size_t>(index)].grad.size() != 0; }

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;  // empty until touched by backward
    bool requires_grad = false;
    std::function<void(Tape&)> backward;
  };
  std::vector<Node> nodes_;
};

// ---- primitives -----------------------------------------------------------

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& x);

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise

Var sigmoid(const Var& x);
Var tanh(const Var& x);
Var relu(const Var& x);

// Row-wise softmax; a 1xN input behaves as the vector case.
Var softmax_rows(const Var& x);

// x (NxD) + bias (1xD) broadcast over rows; the only broadcast primitive.
Var add_rowwise(const Var& x, const Var& bias);

Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(const Var& x, Eigen::Index start, Eigen::Index count);
Var select_rows(const Var& x, const std::vector<int>& rows);

Var scale(const Var& x, Scalar c);
Var sum(const Var& x);  // 1x1

// Inverted dropout: training mode zeroes entries with probability `rate`
// and scales survivors by 1/(1-rate); eval mode is the identity.
Var dropout(const Var& x, Scalar rate, bool training, Rng& rng);

// Mean of squared differences against a constant target.
Var mse_loss(const Var& pred, const Matrix& target);

}  // namespace deepsta::ad
