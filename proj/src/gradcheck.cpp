#include "plangen/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace plangen {

bool GradCheckReport::passed() const { return max_relative_error() < tolerance; }

double GradCheckReport::max_relative_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.relative_error);
  return worst;
}

std::string GradCheckReport::table() const {
  std::size_t width = 9;
  for (const auto& e : entries) width = std::max(width, e.name.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %9s %12s %12s\n", static_cast<int>(width),
                "parameter", "elements", "rel_err", "max_abs_err");
  out << line;
  for (const auto& e : entries) {
    std::snprintf(line, sizeof line, "%-*s %9zu %12.3e %12.3e\n",
                  static_cast<int>(width), e.name.c_str(), e.elements, e.relative_error,
                  e.max_abs_error);
    out << line;
  }
  std::snprintf(line, sizeof line, "max rel_err %.3e (tolerance %.1e): %s\n",
                max_relative_error(), tolerance, passed() ? "PASS" : "FAIL");
  out << line;
  return out.str();
}

GradCheckReport check_gradients(const LossFn& forward, ParamStore& params, double eps,
                                double tolerance) {
  if (!(eps > 0.0)) throw Error("check_gradients: eps must be positive");

  params.zero_grad();
  Tape tape;
  Array loss = forward(&tape);
  const double baseline = loss.item();
  tape.backward(loss);
  tape.clear();
  if (forward(nullptr).item() != baseline)
    throw Error("check_gradients: forward pass is not deterministic");

  GradCheckReport report;
  report.tolerance = tolerance;
  for (auto& [name, p] : params) {
    std::vector<double> analytic(p.grad_view().begin(), p.grad_view().end());
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0, max_abs = 0.0;
    auto values = p.values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double saved = values[k];
      values[k] = saved + eps;
      const double up = forward(nullptr).item();
      values[k] = saved - eps;
      const double down = forward(nullptr).item();
      values[k] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double d = analytic[k] - numeric;
      diff2 += d * d;
      a2 += analytic[k] * analytic[k];
      n2 += numeric * numeric;
      max_abs = std::max(max_abs, std::abs(d));
    }
    GradCheckEntry entry;
    entry.name = name;
    entry.elements = values.size();
    entry.relative_error =
        std::sqrt(diff2) / std::max(std::sqrt(a2) + std::sqrt(n2), 1e-8);
    entry.max_abs_error = max_abs;
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace plangen
