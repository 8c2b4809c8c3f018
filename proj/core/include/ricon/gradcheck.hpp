#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ricon/graph.hpp"

namespace ricon {

struct ParamGradError {
  std::string name;
  double max_relative_error = 0.0;
};

struct GradCheckReport {
  std::vector<ParamGradError> params;
  double worst = 0.0;
  std::string worst_param;
};

// Builds the scalar loss on a fresh graph from the current parameter values.
using LossBuilder = std::function<Var(Graph&)>;

// Compares backward() against central differences for every scalar entry of
// every parameter in `store`:
//   |analytic - numeric| / max(1, |analytic|, |numeric|),
//   numeric = (L(theta + eps) - L(theta - eps)) / (2 eps).
// Runs in double precision. The builder must be deterministic; two baseline
// evaluations that differ raise ContractError. Parameter grads are left zeroed.
GradCheckReport gradient_check(ParamStore& store, const LossBuilder& build_loss,
                               double eps = 1e-5);

}  // namespace ricon
