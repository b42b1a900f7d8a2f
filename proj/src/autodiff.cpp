#include "deepsta/autodiff.hpp"

#include <cmath>
#include <utility>

namespace deepsta::ad {

const Matrix& Var::value() const { return tape_->value(index_); }

Matrix Var::grad() const {
  if (tape_->has_grad(index_)) return tape_->stored_grad(index_);
  return Matrix::Zero(rows(), cols());
}

bool Var::requires_grad() const { return tape_->node_requires_grad(index_); }

Var Tape::leaf(Matrix value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Matrix value, bool requires_grad, std::function<void(Tape&)> backward) {
  nodes_.push_back(Node{std::move(value), Matrix(), requires_grad,
                        requires_grad ? std::move(backward) : nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int index, const Matrix& g) {
  Node& n = nodes_[static_cast<std::size_t>(index)];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(const Var& root) {
  if (root.tape() != this) throw DimensionError("backward: root belongs to a different tape");
  if (root.rows() != 1 || root.cols() != 1) {
    throw DimensionError("backward: root must be a 1x1 scalar, got " +
                         shape_str(root.rows(), root.cols()));
  }
  Node& r = nodes_[static_cast<std::size_t>(root.index())];
  if (!r.requires_grad) return;
  r.grad = Matrix::Ones(1, 1);
  // Creation order is topological, so one reverse sweep visits each node once.
  for (int i = root.index(); i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.backward && n.grad.size() != 0) n.backward(*this);
  }
}

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.rows(), a.cols()) +
                         " vs " + shape_str(b.rows(), b.cols()));
  }
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_str(a.rows(), a.cols()) +
                         " * " + shape_str(b.rows(), b.cols()));
  }
  Tape* tape = a.tape();
  const int ia = a.index(), ib = b.index();
  const int out = tape->size();
  Matrix value = a.value() * b.value();
  return tape->record(std::move(value), a.requires_grad() || b.requires_grad(),
                      [ia, ib, out](Tape& t) {
                        const Matrix& g = t.stored_grad(out);
                        if (t.node_requires_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
                        if (t.node_requires_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
                      });
}

Var transpose(const Var& x) {
  Tape* tape = x.tape();
  const int ix = x.index();
  const int out = tape->size();
  return tape->record(x.value().transpose(), x.requires_grad(), [ix, out](Tape& t) {
    t.accumulate(ix, t.stored_grad(out).transpose());
  });
}

Var operator+(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tape* tape = a.tape();
  const int ia = a.index(), ib = b.index();
  const int out = tape->size();
  return tape->record(a.value() + b.value(), a.requires_grad() || b.requires_grad(),
                      [ia, ib, out](Tape& t) {
                        const Matrix& g = t.stored_grad(out);
                        t.accumulate(ia, g);
                        t.accumulate(ib, g);
                      });
}

Var operator-(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tape* tape = a.tape();
  const int ia = a.index(), ib = b.index();
  const int out = tape->size();
  return tape->record(a.value() - b.value(), a.requires_grad() || b.requires_grad(),
                      [ia, ib, out](Tape& t) {
                        const Matrix& g = t.stored_grad(out);
                        t.accumulate(ia, g);
                        t.accumulate(ib, -g);
                      });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Tape* tape = a.tape();
  const int ia = a.index(), ib = b.index();
  const int out = tape->size();
  return tape->record(a.value().cwiseProduct(b.value()), a.requires_grad() || b.requires_grad(),
                      [ia, ib, out](Tape& t) {
                        const Matrix& g = t.stored_grad(out);
                        if (t.node_requires_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
                        if (t.node_requires_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
                      });
}

Var sigmoid(const Var& x) {
  Tape* tape = x.tape();
  const int ix = x.index();
  const int out = tape->size();
  Matrix y = x.value().unaryExpr([](Scalar v) { return Scalar(1) / (Scalar(1) + std::exp(-v)); });
  return tape->record(std::move(y), x.requires_grad(), [ix, out](Tape& t) {
    const Matrix& yv = t.value(out);
    const Matrix ones = Matrix::Ones(yv.rows(), yv.cols());
    t.accumulate(ix, t.stored_grad(out).cwiseProduct(yv.cwiseProduct(ones - yv)));
  });
}

Var tanh(const Var& x) {
  Tape* tape = x.tape();
  const int ix = x.index();
  const int out = tape->size();
  Matrix y = x.value().unaryExpr([](Scalar v) { return std::tanh(v); });
  return tape->record(std::move(y), x.requires_grad(), [ix, out](Tape& t) {
    const Matrix& yv = t.value(out);
    const Matrix ones = Matrix::Ones(yv.rows(), yv.cols());
    t.accumulate(ix, t.stored_grad(out).cwiseProduct(ones - yv.cwiseProduct(yv)));
  });
}

Var relu(const Var& x) {
  Tape* tape = x.tape();
  const int ix = x.index();
  const int out = tape->size();
  return tape->record(x.value().cwiseMax(Scalar(0)), x.requires_grad(), [ix, out](Tape& t) {
    const Matrix mask =
        (t.value(ix).array() > Scalar(0)).cast<Scalar>().matrix();
    t.accumulate(ix, t.stored_grad(out).cwiseProduct(mask));
  });
}

Var softmax_rows(const Var& x) {
  if (x.cols() < 1) throw DimensionError("softmax: needs at least one column");
  if (!x.value().allFinite()) throw NumericError("softmax: input contains NaN or Inf");
  Tape* tape = x.tape();
  const int ix = x.index();
  const int out = tape->size();
  Matrix y = x.value();
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const Scalar m = y.row(r).maxCoeff();  // max-subtraction for stability
    y.row(r) = (y.row(r).array() - m).exp();
    y.row(r) /= y.row(r).sum();
  }
  return tape->record(std::move(y), x.requires_grad(), [ix, out](Tape& t) {
    const Matrix& yv = t.value(out);
    const Matrix& g = t.stored_grad(out);
    Matrix gx(yv.rows(), yv.cols());
    for (Eigen::Index r = 0; r < yv.rows(); ++r) {
      const Scalar dot = g.row(r).dot(yv.row(r));
      gx.row(r) = yv.row(r).cwiseProduct(g.row(r).array().matrix() - RowVector::Constant(yv.cols(), dot));
    }
    t.accumulate(ix, gx);
  });
}

Var add_rowwise(const Var& x, const Var& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols()) {
    throw DimensionError("add_rowwise: bias must be 1x" + std::to_string(x.cols()) + ", got " +
                         shape_str(bias.rows(), bias.cols()));
  }
  Tape* tape = x.tape();
  const int ix = x.index(), ibias = bias.index();
  const int out = tape->size();
  Matrix value = x.value();
  value.rowwise() += bias.value().row(0);
  return tape->record(std::move(value), x.requires_grad() || bias.requires_grad(),
                      [ix, ibias, out](Tape& t) {
                        const Matrix& g = t.stored_grad(out);
                        t.accumulate(ix, g);
                        if (t.node_requires_grad(ibias)) {
                          t.accumulate(ibias, g.colwise().sum());
                        }
                      });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat: no parts");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  bool rg = false;
  for (const Var& p : parts) {
    if (p.rows() != rows) {
      throw DimensionError("concat: row counts disagree, " + std::to_string(rows) + " vs " +
                           std::to_string(p.rows()));
    }
    cols += p.cols();
    rg = rg || p.requires_grad();
  }
  Tape* tape = parts.front().tape();
  Matrix value(rows, cols);
  std::vector<int> idx;
  std::vector<Eigen::Index> widths;
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    value.middleCols(at, p.cols()) = p.value();
    idx.push_back(p.index());
    widths.push_back(p.cols());
    at += p.cols();
  }
  const int out = tape->size();
  return tape->record(std::move(value), rg, [idx, widths, out](Tape& t) {
    const Matrix& g = t.stored_grad(out);
    Eigen::Index start = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (t.node_requires_grad(idx[k])) {
        t.accumulate(idx[k], g.middleCols(start, widths[k]));
      }
      start += widths[k];
    }
  });
}

Var slice_cols(const Var& x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > x.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") out of range for " +
                         std::to_string(x.cols()) + " columns");
  }
  Tape* tape = x.tape();
  const int ix = x.index();
  const int out = tape->size();
  return tape->record(x.value().middleCols(start, count), x.requires_grad(),
                      [ix, start, count, out](Tape& t) {
                        const Matrix& g = t.stored_grad(out);
                        Matrix gx = Matrix::Zero(t.value(ix).rows(), t.value(ix).cols());
                        gx.middleCols(start, count) = g;
                        t.accumulate(ix, gx);
                      });
}

Var select_rows(const Var& x, const std::vector<int>& rows) {
  Tape* tape = x.tape();
  Matrix value(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= x.rows()) {
      throw DimensionError("select_rows: row " + std::to_string(rows[k]) + " out of range for " +
                           std::to_string(x.rows()) + " rows");
    }
    value.row(static_cast<Eigen::Index>(k)) = x.value().row(rows[k]);
  }
  const int ix = x.index();
  const int out = tape->size();
  return tape->record(std::move(value), x.requires_grad(), [ix, rows, out](Tape& t) {
    const Matrix& g = t.stored_grad(out);
    Matrix gx = Matrix::Zero(t.value(ix).rows(), t.value(ix).cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      gx.row(rows[k]) += g.row(static_cast<Eigen::Index>(k));
    }
    t.accumulate(ix, gx);
  });
}

Var scale(const Var& x, Scalar c) {
  Tape* tape = x.tape();
  const int ix = x.index();
  const int out = tape->size();
  return tape->record(x.value() * c, x.requires_grad(), [ix, c, out](Tape& t) {
    t.accumulate(ix, t.stored_grad(out) * c);
  });
}

Var sum(const Var& x) {
  Tape* tape = x.tape();
  const int ix = x.index();
  const int out = tape->size();
  Matrix value(1, 1);
  value(0, 0) = x.value().sum();
  return tape->record(std::move(value), x.requires_grad(), [ix, out](Tape& t) {
    const Scalar g = t.stored_grad(out)(0, 0);
    t.accumulate(ix, Matrix::Constant(t.value(ix).rows(), t.value(ix).cols(), g));
  });
}

Var dropout(const Var& x, Scalar rate, bool training, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  Tape* tape = x.tape();
  const int ix = x.index();
  if (!training || rate == 0.0) {
    const int out = tape->size();
    return tape->record(x.value(), x.requires_grad(), [ix, out](Tape& t) {
      t.accumulate(ix, t.stored_grad(out));
    });
  }
  const Scalar keep = 1.0 - rate;
  Matrix mask(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < mask.cols(); ++j) {
    for (Eigen::Index i = 0; i < mask.rows(); ++i) {
      mask(i, j) = rng.uniform() < rate ? Scalar(0) : Scalar(1) / keep;
    }
  }
  const int out = tape->size();
  return tape->record(x.value().cwiseProduct(mask), x.requires_grad(),
                      [ix, mask, out](Tape& t) {
                        t.accumulate(ix, t.stored_grad(out).cwiseProduct(mask));
                      });
}

Var mse_loss(const Var& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DimensionError("mse_loss: shape mismatch " + shape_str(pred.rows(), pred.cols()) +
                         " vs " + shape_str(target.rows(), target.cols()));
  }
  if (target.size() == 0) throw DimensionError("mse_loss: empty input");
  Tape* tape = pred.tape();
  const int ip = pred.index();
  const int out = tape->size();
  const Scalar n = static_cast<Scalar>(target.size());
  Matrix value(1, 1);
  value(0, 0) = (pred.value() - target).squaredNorm() / n;
  return tape->record(std::move(value), pred.requires_grad(), [ip, target, n, out](Tape& t) {
    const Scalar g = t.stored_grad(out)(0, 0);
    t.accumulate(ip, (t.value(ip) - target) * (Scalar(2) * g / n));
  });
}

}  // namespace deepsta::ad
