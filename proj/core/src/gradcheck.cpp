#include "ricon/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ricon/errors.hpp"

namespace ricon {
namespace {

double evaluate(const LossBuilder& build_loss) {
  Graph graph(Precision::kDouble);
  return build_loss(graph).item();
}

}  // namespace

GradCheckReport gradient_check(ParamStore& store, const LossBuilder& build_loss,
                               double eps) {
  if (!(eps > 0.0)) throw ContractError("gradient_check: eps must be positive");
  double first = evaluate(build_loss);
  double second = evaluate(build_loss);
  if (first != second) {
    throw ContractError("gradient_check: loss builder is not deterministic");
  }

  store.zero_grad();
  {
    Graph graph(Precision::kDouble);
    graph.backward(build_loss(graph));
  }

  GradCheckReport report;
  for (auto& param_ptr : store) {
    Param& param = *param_ptr;
    ParamGradError entry{param.name(), 0.0};
    auto values = param.value().values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      double saved = values[k];
      values[k] = saved + eps;
      double plus = evaluate(build_loss);
      values[k] = saved - eps;
      double minus = evaluate(build_loss);
      values[k] = saved;
      double numeric = (plus - minus) / (2.0 * eps);
      double analytic = param.grad()[k];
      double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
      entry.max_relative_error =
          std::max(entry.max_relative_error, std::abs(analytic - numeric) / denom);
    }
    if (entry.max_relative_error >= report.worst) {
      report.worst = entry.max_relative_error;
      report.worst_param = entry.name;
    }
    report.params.push_back(std::move(entry));
  }
  store.zero_grad();
  return report;
}

}  // namespace ricon
