#include "plangen/optim.hpp"

#include <cmath>

namespace plangen {

OptimState OptimState::create(const ParamStore& params, double learning_rate,
                              double initial_accumulator, double clip_norm) {
  if (!(learning_rate >= 0.0)) throw Error("learning rate must be nonnegative");
  if (!(initial_accumulator > 0.0)) throw Error("initial accumulator must be positive");
  if (!(clip_norm > 0.0)) throw Error("clip norm must be positive");
  OptimState state;
  state.learning_rate = learning_rate;
  state.clip_norm = clip_norm;
  state.accumulators.reserve(params.size());
  for (const auto& [name, p] : params)
    state.accumulators.emplace_back(p.size(), initial_accumulator);
  return state;
}

void adagrad_update(ParamStore& params, OptimState& state) {
  if (state.accumulators.size() != params.size())
    throw Error("adagrad_update: optimizer tracks " +
                std::to_string(state.accumulators.size()) + " arrays, model has " +
                std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Array& p = params.at(i);
    auto& acc = state.accumulators[i];
    if (acc.size() != p.size())
      throw Error("adagrad_update: accumulator shape mismatch for " + params.name(i));
    if (!p.has_grad()) continue;
    auto g = p.grad_view();
    auto v = p.values();
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!std::isfinite(g[k]))
        throw Error("adagrad_update: non-finite gradient in " + params.name(i));
      acc[k] += g[k] * g[k];
      v[k] -= state.learning_rate * g[k] / std::sqrt(acc[k]);
    }
  }
}

double gradient_norm(const ParamStore& params) {
  double total = 0.0;
  for (const auto& [name, p] : params)
    for (double g : p.grad_view()) total += g * g;
  return std::sqrt(total);
}

double clip_global_norm(ParamStore& params, double max_norm) {
  if (!(max_norm > 0.0)) throw Error("clip_global_norm: max_norm must be positive");
  const double norm = gradient_norm(params);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& [name, p] : params)
      if (p.has_grad())
        for (double& g : p.grad()) g *= factor;
  }
  return norm;
}

}  // namespace plangen
