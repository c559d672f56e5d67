#pragma once

#include <vector>

#include "plangen/params.hpp"

namespace plangen {

struct OptimState {
  double learning_rate = 0.15;
  double clip_norm = 2.0;
  // One accumulator per parameter, aligned with ParamStore order.
  std::vector<std::vector<double>> accumulators;

  static OptimState create(const ParamStore& params, double learning_rate = 0.15,
                           double initial_accumulator = 0.1, double clip_norm = 2.0);
};

// acc += g^2; p -= lr * g / sqrt(acc), using each parameter's grad buffer.
void adagrad_update(ParamStore& params, OptimState& state);

// Rescales all grads so their global L2 norm is at most max_norm. Returns the
// norm measured before clipping.
double clip_global_norm(ParamStore& params, double max_norm);
double gradient_norm(const ParamStore& params);

}  // namespace plangen
