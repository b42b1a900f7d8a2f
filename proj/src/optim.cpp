#include "deepsta/optim.hpp"

#include <cmath>

namespace deepsta {

Scalar clip_global_norm(GradMap& grads, Scalar max_norm) {
  Scalar sq = 0.0;
  for (const auto& [name, g] : grads) sq += g.squaredNorm();
  const Scalar norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const Scalar f = max_norm / norm;
    for (auto& [name, g] : grads) g *= f;
  }
  return norm;
}

void adam_step(const NamedParams& params, const GradMap& grads, AdamState& state,
               const AdamConfig& cfg) {
  state.step += 1;
  const Scalar bc1 = 1.0 - std::pow(cfg.beta1, static_cast<Scalar>(state.step));
  const Scalar bc2 = 1.0 - std::pow(cfg.beta2, static_cast<Scalar>(state.step));
  for (const auto& [name, p] : params) {
    Matrix g;
    auto it = grads.find(name);
    if (it != grads.end()) {
      if (it->second.rows() != p->rows() || it->second.cols() != p->cols()) {
        throw DimensionError("adam: gradient for '" + name + "' has shape " +
                             shape_str(it->second) + ", parameter is " + shape_str(*p));
      }
      if (!it->second.allFinite()) {
        throw NumericError("adam: non-finite gradient for parameter '" + name + "'");
      }
      g = it->second;
    } else {
      g = Matrix::Zero(p->rows(), p->cols());
    }
    Matrix& m = state.m.try_emplace(name, Matrix::Zero(p->rows(), p->cols())).first->second;
    Matrix& v = state.v.try_emplace(name, Matrix::Zero(p->rows(), p->cols())).first->second;
    if (m.rows() != p->rows() || m.cols() != p->cols()) {
      throw DimensionError("adam: stale state shape for parameter '" + name + "'");
    }
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    const Matrix m_hat = m / bc1;
    const Matrix v_hat = v / bc2;
    p->array() -= cfg.lr * m_hat.array() / (v_hat.array().sqrt() + cfg.eps);
  }
}

}  // namespace deepsta
