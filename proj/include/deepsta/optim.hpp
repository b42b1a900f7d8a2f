// Adam with bias correction, plus global-norm gradient clipping.
#pragma once

#include "deepsta/common.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace deepsta {

using NamedParams = std::vector<std::pair<std::string, Matrix*>>;
using GradMap = std::map<std::string, Matrix>;

struct AdamConfig {
  Scalar lr = 1e-4;
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar eps = 1e-8;
};

struct AdamState {
  std::map<std::string, Matrix> m;
  std::map<std::string, Matrix> v;
  long step = 0;
};

// Rescales all gradients so their joint L2 norm is at most max_norm.
// Returns the pre-clip norm.
Scalar clip_global_norm(GradMap& grads, Scalar max_norm);

// One Adam update over every named parameter. Parameters without an entry in
// `grads` are treated as zero-gradient. Moment buffers are created on first
// use; shapes must match thereafter.
void adam_step(const NamedParams& params, const GradMap& grads, AdamState& state,
               const AdamConfig& cfg);

}  // namespace deepsta
