#include "plangen/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace plangen::ops {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

bool tracking(Tape* tape, std::initializer_list<const Array*> inputs) {
  if (tape == nullptr) return false;
  for (const Array* a : inputs)
    if (a->requires_grad()) return true;
  return false;
}

Array output(Shape shape, bool track) {
  Array out(std::move(shape));
  out.set_requires_grad(track);
  return out;
}

ConstMatMap as_matrix(const Array& a) {
  return ConstMatMap(a.values().data(), a.rows(), a.cols());
}
MatMap grad_matrix(const Array& a) { return MatMap(a.grad().data(), a.rows(), a.cols()); }
ConstVecMap as_vector(const Array& a) {
  return ConstVecMap(a.values().data(), a.size());
}
VecMap grad_vector(const Array& a) { return VecMap(a.grad().data(), a.size()); }
ConstVecMap grad_of(const Array& a) {
  return ConstVecMap(a.grad_view().data(), a.size());
}

void require_same_shape(const char* op, const Array& a, const Array& b) {
  if (a.shape() != b.shape())
    throw Error(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                " vs " + shape_string(b.shape()));
}

void require_matrix(const char* op, const Array& a) {
  if (a.rank() != 2)
    throw Error(std::string(op) + ": expected a matrix, got " + shape_string(a.shape()));
}

double clamp_exp_arg(double x) { return std::clamp(x, -kExpClamp, kExpClamp); }

}  // namespace

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-clamp_exp_arg(x))); }

Array matmul(Tape* tape, const Array& a, const Array& b) {
  if (a.cols() != b.rows())
    throw Error("matmul: shape mismatch " + shape_string(a.shape()) + " x " +
                shape_string(b.shape()));
  const bool track = tracking(tape, {&a, &b});
  Array out = output({a.rows(), b.cols()}, track);
  MatMap(out.values().data(), a.rows(), b.cols()).noalias() = as_matrix(a) * as_matrix(b);
  if (track) {
    tape->record([a, b, out]() mutable {
      if (!out.has_grad()) return;
      ConstMatMap dy(out.grad_view().data(), out.rows(), out.cols());
      if (a.requires_grad()) grad_matrix(a).noalias() += dy * as_matrix(b).transpose();
      if (b.requires_grad()) grad_matrix(b).noalias() += as_matrix(a).transpose() * dy;
    });
  }
  return out;
}

Array matvec(Tape* tape, const Array& w, const Array& x) {
  require_matrix("matvec", w);
  if (w.cols() != x.size())
    throw Error("matvec: shape mismatch " + shape_string(w.shape()) + " x " +
                shape_string(x.shape()));
  const bool track = tracking(tape, {&w, &x});
  Array out = output({w.rows()}, track);
  VecMap(out.values().data(), w.rows()).noalias() = as_matrix(w) * as_vector(x);
  if (track) {
    tape->record([w, x, out]() mutable {
      if (!out.has_grad()) return;
      auto dy = grad_of(out);
      if (w.requires_grad()) grad_matrix(w).noalias() += dy * as_vector(x).transpose();
      if (x.requires_grad()) grad_vector(x).noalias() += as_matrix(w).transpose() * dy;
    });
  }
  return out;
}

Array matvec_t(Tape* tape, const Array& w, const Array& x) {
  require_matrix("matvec_t", w);
  if (w.rows() != x.size())
    throw Error("matvec_t: shape mismatch " + shape_string(w.shape()) + "^T x " +
                shape_string(x.shape()));
  const bool track = tracking(tape, {&w, &x});
  Array out = output({w.cols()}, track);
  VecMap(out.values().data(), w.cols()).noalias() =
      as_matrix(w).transpose() * as_vector(x);
  if (track) {
    tape->record([w, x, out]() mutable {
      if (!out.has_grad()) return;
      auto dy = grad_of(out);
      if (w.requires_grad()) grad_matrix(w).noalias() += as_vector(x) * dy.transpose();
      if (x.requires_grad()) grad_vector(x).noalias() += as_matrix(w) * dy;
    });
  }
  return out;
}

Array linear(Tape* tape, const Array& w, const Array& x, const Array& b) {
  require_matrix("linear", w);
  if (w.cols() != x.size() || w.rows() != b.size())
    throw Error("linear: shape mismatch W" + shape_string(w.shape()) + " x" +
                shape_string(x.shape()) + " b" + shape_string(b.shape()));
  const bool track = tracking(tape, {&w, &x, &b});
  Array out = output({w.rows()}, track);
  VecMap(out.values().data(), w.rows()).noalias() =
      as_matrix(w) * as_vector(x) + as_vector(b);
  if (track) {
    tape->record([w, x, b, out]() mutable {
      if (!out.has_grad()) return;
      auto dy = grad_of(out);
      if (w.requires_grad()) grad_matrix(w).noalias() += dy * as_vector(x).transpose();
      if (x.requires_grad()) grad_vector(x).noalias() += as_matrix(w).transpose() * dy;
      if (b.requires_grad()) grad_vector(b) += dy;
    });
  }
  return out;
}

Array add(Tape* tape, const Array& a, const Array& b) {
  require_same_shape("add", a, b);
  const bool track = tracking(tape, {&a, &b});
  Array out = output(a.shape(), track);
  VecMap(out.values().data(), out.size()) = as_vector(a) + as_vector(b);
  if (track) {
    tape->record([a, b, out]() mutable {
      if (!out.has_grad()) return;
      if (a.requires_grad()) grad_vector(a) += grad_of(out);
      if (b.requires_grad()) grad_vector(b) += grad_of(out);
    });
  }
  return out;
}

Array sub(Tape* tape, const Array& a, const Array& b) {
  require_same_shape("sub", a, b);
  const bool track = tracking(tape, {&a, &b});
  Array out = output(a.shape(), track);
  VecMap(out.values().data(), out.size()) = as_vector(a) - as_vector(b);
  if (track) {
    tape->record([a, b, out]() mutable {
      if (!out.has_grad()) return;
      if (a.requires_grad()) grad_vector(a) += grad_of(out);
      if (b.requires_grad()) grad_vector(b) -= grad_of(out);
    });
  }
  return out;
}

Array mul(Tape* tape, const Array& a, const Array& b) {
  require_same_shape("mul", a, b);
  const bool track = tracking(tape, {&a, &b});
  Array out = output(a.shape(), track);
  VecMap(out.values().data(), out.size()) =
      as_vector(a).cwiseProduct(as_vector(b));
  if (track) {
    tape->record([a, b, out]() mutable {
      if (!out.has_grad()) return;
      if (a.requires_grad()) grad_vector(a) += grad_of(out).cwiseProduct(as_vector(b));
      if (b.requires_grad()) grad_vector(b) += grad_of(out).cwiseProduct(as_vector(a));
    });
  }
  return out;
}

Array scale(Tape* tape, const Array& a, double factor) {
  const bool track = tracking(tape, {&a});
  Array out = output(a.shape(), track);
  VecMap(out.values().data(), out.size()) = as_vector(a) * factor;
  if (track) {
    tape->record([a, out, factor]() mutable {
      if (!out.has_grad()) return;
      grad_vector(a) += grad_of(out) * factor;
    });
  }
  return out;
}

Array add_scalar(Tape* tape, const Array& a, const Array& s) {
  if (s.size() != 1) throw Error("add_scalar: second operand must be scalar");
  const bool track = tracking(tape, {&a, &s});
  Array out = output(a.shape(), track);
  VecMap(out.values().data(), out.size()) =
      as_vector(a).array() + s.item();
  if (track) {
    tape->record([a, s, out]() mutable {
      if (!out.has_grad()) return;
      if (a.requires_grad()) grad_vector(a) += grad_of(out);
      if (s.requires_grad()) s.grad()[0] += grad_of(out).sum();
    });
  }
  return out;
}

Array mul_scalar(Tape* tape, const Array& a, const Array& s) {
  if (s.size() != 1) throw Error("mul_scalar: second operand must be scalar");
  const bool track = tracking(tape, {&a, &s});
  Array out = output(a.shape(), track);
  const double sv = s.item();
  VecMap(out.values().data(), out.size()) = as_vector(a) * sv;
  if (track) {
    tape->record([a, s, out, sv]() mutable {
      if (!out.has_grad()) return;
      if (a.requires_grad()) grad_vector(a) += grad_of(out) * sv;
      if (s.requires_grad()) s.grad()[0] += grad_of(out).dot(as_vector(a));
    });
  }
  return out;
}

Array activation_apply(Tape* tape, const Array& x, Activation kind) {
  const bool track = tracking(tape, {&x});
  Array out = output(x.shape(), track);
  auto xv = x.values();
  auto yv = out.values();
  if (kind == Activation::kSigmoid) {
    for (std::size_t i = 0; i < xv.size(); ++i) yv[i] = sigmoid_scalar(xv[i]);
  } else {
    for (std::size_t i = 0; i < xv.size(); ++i) yv[i] = std::tanh(xv[i]);
  }
  if (track) {
    tape->record([x, out, kind]() mutable {
      if (!out.has_grad()) return;
      auto y = out.values();
      auto dy = out.grad_view();
      auto dx = x.grad();
      if (kind == Activation::kSigmoid) {
        for (std::size_t i = 0; i < y.size(); ++i) dx[i] += dy[i] * y[i] * (1.0 - y[i]);
      } else {
        for (std::size_t i = 0; i < y.size(); ++i) dx[i] += dy[i] * (1.0 - y[i] * y[i]);
      }
    });
  }
  return out;
}

namespace {

void softmax_span(std::span<const double> x, std::span<double> y) {
  double max = -std::numeric_limits<double>::infinity();
  for (double v : x) max = std::max(max, v);
  if (max == -std::numeric_limits<double>::infinity())
    throw Error("softmax: every entry of the row is masked");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i] == -std::numeric_limits<double>::infinity()
               ? 0.0
               : std::exp(clamp_exp_arg(x[i] - max));
    total += y[i];
  }
  for (double& v : y) v /= total;
}

void softmax_backward_span(std::span<const double> y, std::span<const double> dy,
                           std::span<double> dx) {
  double inner = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) inner += dy[i] * y[i];
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] += y[i] * (dy[i] - inner);
}

}  // namespace

Array softmax(Tape* tape, const Array& x) {
  const bool track = tracking(tape, {&x});
  Array out = output({x.size()}, track);
  softmax_span(x.values(), out.values());
  if (track) {
    tape->record([x, out]() mutable {
      if (!out.has_grad()) return;
      softmax_backward_span(out.values(), out.grad_view(), x.grad());
    });
  }
  return out;
}

Array softmax_rows(Tape* tape, const Array& x) {
  require_matrix("softmax_rows", x);
  const bool track = tracking(tape, {&x});
  Array out = output(x.shape(), track);
  const std::size_t n = x.cols();
  for (std::size_t r = 0; r < x.rows(); ++r)
    softmax_span(x.values().subspan(r * n, n), out.values().subspan(r * n, n));
  if (track) {
    tape->record([x, out, n]() mutable {
      if (!out.has_grad()) return;
      auto dx = x.grad();
      for (std::size_t r = 0; r < x.rows(); ++r)
        softmax_backward_span(out.values().subspan(r * n, n),
                              out.grad_view().subspan(r * n, n), dx.subspan(r * n, n));
    });
  }
  return out;
}

Array sum(Tape* tape, const Array& x) {
  const bool track = tracking(tape, {&x});
  Array out = output({1}, track);
  out[0] = as_vector(x).sum();
  if (track) {
    tape->record([x, out]() mutable {
      if (!out.has_grad()) return;
      grad_vector(x).array() += out.grad_view()[0];
    });
  }
  return out;
}

Array dot(Tape* tape, const Array& a, const Array& b) {
  if (a.size() != b.size())
    throw Error("dot: shape mismatch " + shape_string(a.shape()) + " . " +
                shape_string(b.shape()));
  const bool track = tracking(tape, {&a, &b});
  Array out = output({1}, track);
  out[0] = as_vector(a).dot(as_vector(b));
  if (track) {
    tape->record([a, b, out]() mutable {
      if (!out.has_grad()) return;
      const double g = out.grad_view()[0];
      if (a.requires_grad()) grad_vector(a) += g * as_vector(b);
      if (b.requires_grad()) grad_vector(b) += g * as_vector(a);
    });
  }
  return out;
}

Array concat(Tape* tape, std::span<const Array> parts) {
  if (parts.empty()) throw Error("concat: no inputs");
  std::size_t total = 0;
  bool track = false;
  for (const auto& p : parts) {
    total += p.size();
    track = track || tracking(tape, {&p});
  }
  Array out = output({total}, track);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    std::copy(p.values().begin(), p.values().end(), out.values().begin() + offset);
    offset += p.size();
  }
  if (track) {
    std::vector<Array> inputs(parts.begin(), parts.end());
    tape->record([inputs, out]() mutable {
      if (!out.has_grad()) return;
      auto dy = out.grad_view();
      std::size_t off = 0;
      for (auto& p : inputs) {
        if (p.requires_grad()) {
          auto dx = p.grad();
          for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[off + i];
        }
        off += p.size();
      }
    });
  }
  return out;
}

Array slice(Tape* tape, const Array& x, std::size_t offset, std::size_t length) {
  if (offset + length > x.size() || length == 0)
    throw Error("slice: range [" + std::to_string(offset) + ", " +
                std::to_string(offset + length) + ") outside " + shape_string(x.shape()));
  const bool track = tracking(tape, {&x});
  Array out = output({length}, track);
  std::copy_n(x.values().begin() + offset, length, out.values().begin());
  if (track) {
    tape->record([x, out, offset]() mutable {
      if (!out.has_grad()) return;
      auto dx = x.grad();
      auto dy = out.grad_view();
      for (std::size_t i = 0; i < dy.size(); ++i) dx[offset + i] += dy[i];
    });
  }
  return out;
}

Array row(Tape* tape, const Array& m, std::size_t r) {
  require_matrix("row", m);
  if (r >= m.rows())
    throw Error("row: index " + std::to_string(r) + " outside " + shape_string(m.shape()));
  return slice(tape, m, r * m.cols(), m.cols());
}

Array stack_rows(Tape* tape, std::span<const Array> rows) {
  if (rows.empty()) throw Error("stack_rows: no inputs");
  const std::size_t d = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != d)
      throw Error("stack_rows: row extents differ (" + std::to_string(d) + " vs " +
                  std::to_string(r.size()) + ")");
  Array flat = concat(tape, rows);
  Array out = output({rows.size(), d}, flat.requires_grad());
  std::copy(flat.values().begin(), flat.values().end(), out.values().begin());
  if (out.requires_grad()) {
    tape->record([flat, out]() mutable {
      if (!out.has_grad()) return;
      grad_vector(flat) += grad_of(out);
    });
  }
  return out;
}

Array pick(Tape* tape, const Array& x, std::size_t i) { return slice(tape, x, i, 1); }

Array scatter_add(Tape* tape, const Array& x, std::span<const std::size_t> ids,
                  std::size_t out_size) {
  if (ids.size() != x.size())
    throw Error("scatter_add: " + std::to_string(ids.size()) + " ids for " +
                std::to_string(x.size()) + " values");
  for (auto id : ids)
    if (id >= out_size) throw Error("scatter_add: id out of range");
  const bool track = tracking(tape, {&x});
  Array out = output({out_size}, track);
  for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] += x[i];
  if (track) {
    std::vector<std::size_t> idv(ids.begin(), ids.end());
    tape->record([x, out, idv]() mutable {
      if (!out.has_grad()) return;
      auto dx = x.grad();
      auto dy = out.grad_view();
      for (std::size_t i = 0; i < idv.size(); ++i) dx[i] += dy[idv[i]];
    });
  }
  return out;
}

Array normalize(Tape* tape, const Array& x) {
  const double total = as_vector(x).sum();
  if (!(total > 0.0)) throw Error("normalize: sum must be positive");
  const bool track = tracking(tape, {&x});
  Array out = output(x.shape(), track);
  VecMap(out.values().data(), out.size()) = as_vector(x) / total;
  if (track) {
    tape->record([x, out, total]() mutable {
      if (!out.has_grad()) return;
      auto dy = grad_of(out);
      const double inner = dy.dot(as_vector(out));
      grad_vector(x).array() += (dy.array() - inner) / total;
    });
  }
  return out;
}

Array gather_scaled(Tape* tape, const Array& x, std::span<const std::size_t> index,
                    std::span<const double> weight) {
  if (index.size() != weight.size() || index.empty())
    throw Error("gather_scaled: index/weight size mismatch");
  for (auto i : index)
    if (i >= x.size()) throw Error("gather_scaled: index out of range");
  const bool track = tracking(tape, {&x});
  Array out = output({index.size()}, track);
  for (std::size_t t = 0; t < index.size(); ++t) out[t] = x[index[t]] * weight[t];
  if (track) {
    std::vector<std::size_t> idx(index.begin(), index.end());
    std::vector<double> w(weight.begin(), weight.end());
    tape->record([x, out, idx, w]() mutable {
      if (!out.has_grad()) return;
      auto dx = x.grad();
      auto dy = out.grad_view();
      for (std::size_t t = 0; t < idx.size(); ++t) dx[idx[t]] += dy[t] * w[t];
    });
  }
  return out;
}

Array pad_to(Tape* tape, const Array& x, std::size_t size) {
  if (size < x.size()) throw Error("pad_to: target smaller than input");
  const bool track = tracking(tape, {&x});
  Array out = output({size}, track);
  std::copy(x.values().begin(), x.values().end(), out.values().begin());
  if (track) {
    tape->record([x, out]() mutable {
      if (!out.has_grad()) return;
      auto dx = x.grad();
      auto dy = out.grad_view();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i];
    });
  }
  return out;
}

Array log(Tape* tape, const Array& x) {
  const bool track = tracking(tape, {&x});
  Array out = output(x.shape(), track);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::log(std::max(x[i], kLogEps));
  if (track) {
    tape->record([x, out]() mutable {
      if (!out.has_grad()) return;
      auto dx = x.grad();
      auto dy = out.grad_view();
      for (std::size_t i = 0; i < dx.size(); ++i)
        if (x[i] > kLogEps) dx[i] += dy[i] / x[i];
    });
  }
  return out;
}

Array apply_mask(Tape* tape, const Array& x, std::span<const double> mask) {
  if (mask.size() != x.size()) throw Error("apply_mask: mask size mismatch");
  const bool track = tracking(tape, {&x});
  Array out = output(x.shape(), track);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * mask[i];
  if (track) {
    std::vector<double> m(mask.begin(), mask.end());
    tape->record([x, out, m]() mutable {
      if (!out.has_grad()) return;
      auto dx = x.grad();
      auto dy = out.grad_view();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * m[i];
    });
  }
  return out;
}

Array binary_cross_entropy(Tape* tape, const Array& probs,
                           std::span<const double> targets) {
  if (targets.size() != probs.size())
    throw Error("binary_cross_entropy: " + std::to_string(targets.size()) +
                " targets for " + std::to_string(probs.size()) + " scores");
  const bool track = tracking(tape, {&probs});
  Array out = output({1}, track);
  double loss = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double p = std::clamp(probs[k], kLogEps, 1.0 - kLogEps);
    loss -= targets[k] * std::log(p) + (1.0 - targets[k]) * std::log(1.0 - p);
  }
  out[0] = loss;
  if (track) {
    std::vector<double> t(targets.begin(), targets.end());
    tape->record([probs, out, t]() mutable {
      if (!out.has_grad()) return;
      const double g = out.grad_view()[0];
      auto dp = probs.grad();
      for (std::size_t k = 0; k < dp.size(); ++k) {
        const double p = probs[k];
        if (p <= kLogEps || p >= 1.0 - kLogEps) continue;
        dp[k] += g * (-t[k] / p + (1.0 - t[k]) / (1.0 - p));
      }
    });
  }
  return out;
}

Array negative_log_likelihood(Tape* tape, const Array& probs, std::size_t index) {
  if (index >= probs.size())
    throw Error("negative_log_likelihood: index " + std::to_string(index) +
                " outside " + shape_string(probs.shape()));
  const bool track = tracking(tape, {&probs});
  Array out = output({1}, track);
  const double p = probs[index];
  out[0] = -std::log(std::max(p, kLogEps));
  if (track) {
    tape->record([probs, out, index, p]() mutable {
      if (!out.has_grad()) return;
      if (p > kLogEps) probs.grad()[index] -= out.grad_view()[0] / p;
    });
  }
  return out;
}

LstmState lstm_cell_step(Tape* tape, const Array& x, const LstmState& prev,
                         const LstmWeights& weights) {
  const std::size_t hsz = weights.hidden_size();
  const std::size_t dsz = x.size();
  if (weights.w.rank() != 2 || weights.w.rows() != 4 * hsz ||
      weights.w.cols() != dsz + hsz || prev.h.size() != hsz || prev.c.size() != hsz)
    throw Error("lstm_cell_step: shape mismatch W" + shape_string(weights.w.shape()) +
                " b" + shape_string(weights.b.shape()) + " x" + shape_string(x.shape()) +
                " h" + shape_string(prev.h.shape()) + " c" + shape_string(prev.c.shape()));
  const bool track = tracking(tape, {&x, &prev.h, &prev.c, &weights.w, &weights.b});

  Eigen::VectorXd input(dsz + hsz);
  input.head(dsz) = as_vector(x);
  input.tail(hsz) = as_vector(prev.h);
  Eigen::VectorXd gates = as_matrix(weights.w) * input + as_vector(weights.b);
  for (std::size_t i = 0; i < 3 * hsz; ++i) gates[i] = sigmoid_scalar(gates[i]);
  for (std::size_t i = 3 * hsz; i < 4 * hsz; ++i) gates[i] = std::tanh(gates[i]);

  LstmState next{output({hsz}, track), output({hsz}, track)};
  Eigen::VectorXd tanh_c(hsz);
  for (std::size_t i = 0; i < hsz; ++i) {
    const double c = gates[hsz + i] * prev.c[i] + gates[i] * gates[3 * hsz + i];
    next.c[i] = c;
    tanh_c[i] = std::tanh(c);
    next.h[i] = gates[2 * hsz + i] * tanh_c[i];
  }

  if (track) {
    Array xc = x, hc = prev.h, cc = prev.c, w = weights.w, b = weights.b;
    Array h = next.h, c = next.c;
    tape->record([=]() mutable {
      if (!h.has_grad() && !c.has_grad()) return;
      Eigen::VectorXd dgate(4 * hsz);
      Eigen::VectorXd dc_prev(hsz);
      for (std::size_t i = 0; i < hsz; ++i) {
        const double dh = h.has_grad() ? h.grad_view()[i] : 0.0;
        double dc = c.has_grad() ? c.grad_view()[i] : 0.0;
        const double ig = gates[i], fg = gates[hsz + i], og = gates[2 * hsz + i],
                     cand = gates[3 * hsz + i];
        dc += dh * og * (1.0 - tanh_c[i] * tanh_c[i]);
        const double d_o = dh * tanh_c[i];
        const double d_i = dc * cand;
        const double d_f = dc * cc[i];
        const double d_cand = dc * ig;
        dc_prev[i] = dc * fg;
        dgate[i] = d_i * ig * (1.0 - ig);
        dgate[hsz + i] = d_f * fg * (1.0 - fg);
        dgate[2 * hsz + i] = d_o * og * (1.0 - og);
        dgate[3 * hsz + i] = d_cand * (1.0 - cand * cand);
      }
      if (w.requires_grad()) grad_matrix(w).noalias() += dgate * input.transpose();
      if (b.requires_grad()) grad_vector(b) += dgate;
      if (xc.requires_grad() || hc.requires_grad()) {
        Eigen::VectorXd dinput = as_matrix(w).transpose() * dgate;
        if (xc.requires_grad()) grad_vector(xc) += dinput.head(dsz);
        if (hc.requires_grad()) grad_vector(hc) += dinput.tail(hsz);
      }
      if (cc.requires_grad()) grad_vector(cc) += dc_prev;
    });
  }
  return next;
}

double global_norm(std::span<const Array> arrays) {
  double total = 0.0;
  for (const auto& a : arrays) total += as_vector(a).squaredNorm();
  return std::sqrt(total);
}

}  // namespace plangen::ops
