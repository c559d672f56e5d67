#pragma once

#include <functional>
#include <string>
#include <vector>

#include "plangen/params.hpp"

namespace plangen {

struct GradCheckEntry {
  std::string name;
  std::size_t elements = 0;
  // ||analytic - numeric|| / max(||analytic|| + ||numeric||, 1e-8)
  double relative_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 1e-4;
  bool passed() const;
  double max_relative_error() const;
  std::string table() const;
};

// `forward` must return a scalar loss; it records onto the tape it is given
// (which may be nullptr for the numeric passes).
using LossFn = std::function<Array(Tape*)>;

GradCheckReport check_gradients(const LossFn& forward, ParamStore& params,
                                double eps = 1e-6, double tolerance = 1e-4);

}  // namespace plangen
