#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "plangen/array.hpp"

// Differentiable primitives. Every op takes the tape it should record onto;
// passing nullptr (or inputs that do not require grad) runs forward only.
namespace plangen::ops {

enum class Activation { kSigmoid, kTanh };

// Exponent arguments are clamped to this range before exp().
inline constexpr double kExpClamp = 40.0;
// Probabilities are clamped to [eps, 1 - eps] before log().
inline constexpr double kLogEps = 1e-12;

double sigmoid_scalar(double x);

Array matmul(Tape* tape, const Array& a, const Array& b);
// W[m x k] * x[k] -> [m]
Array matvec(Tape* tape, const Array& w, const Array& x);
// W[m x k]^T * x[m] -> [k]
Array matvec_t(Tape* tape, const Array& w, const Array& x);
// W x + b
Array linear(Tape* tape, const Array& w, const Array& x, const Array& b);

Array add(Tape* tape, const Array& a, const Array& b);
Array sub(Tape* tape, const Array& a, const Array& b);
Array mul(Tape* tape, const Array& a, const Array& b);
Array scale(Tape* tape, const Array& a, double factor);
// a + s where s is a scalar array broadcast over a.
Array add_scalar(Tape* tape, const Array& a, const Array& s);
// a * s where s is a scalar array broadcast over a.
Array mul_scalar(Tape* tape, const Array& a, const Array& s);

Array activation_apply(Tape* tape, const Array& x, Activation kind);
inline Array sigmoid(Tape* t, const Array& x) {
  return activation_apply(t, x, Activation::kSigmoid);
}
inline Array tanh(Tape* t, const Array& x) {
  return activation_apply(t, x, Activation::kTanh);
}

// Softmax of a 1-D array. Entries equal to -infinity are masked (prob 0).
Array softmax(Tape* tape, const Array& x);
// Row-wise softmax of a 2-D array.
Array softmax_rows(Tape* tape, const Array& x);

Array sum(Tape* tape, const Array& x);
Array dot(Tape* tape, const Array& a, const Array& b);
Array concat(Tape* tape, std::span<const Array> parts);
Array slice(Tape* tape, const Array& x, std::size_t offset, std::size_t length);
// Row r of a matrix as a 1-D array; gradient is scattered into that row only.
Array row(Tape* tape, const Array& m, std::size_t r);
Array stack_rows(Tape* tape, std::span<const Array> rows);
// x[i] as a scalar.
Array pick(Tape* tape, const Array& x, std::size_t i);
// out[ids[i]] += x[i], out has extent out_size.
Array scatter_add(Tape* tape, const Array& x, std::span<const std::size_t> ids,
                  std::size_t out_size);
// x / sum(x) for a 1-D array with positive sum.
Array normalize(Tape* tape, const Array& x);
// out[t] = x[index[t]] * weight[t]
Array gather_scaled(Tape* tape, const Array& x, std::span<const std::size_t> index,
                    std::span<const double> weight);
// Zero-extends a 1-D array to `size` entries.
Array pad_to(Tape* tape, const Array& x, std::size_t size);
// log(clamp(x, eps, 1)) elementwise.
Array log(Tape* tape, const Array& x);
// Elementwise product with a constant mask (inverted dropout).
Array apply_mask(Tape* tape, const Array& x, std::span<const double> mask);

// -sum_k [t_k log p_k + (1 - t_k) log(1 - p_k)] with p clamped by kLogEps.
Array binary_cross_entropy(Tape* tape, const Array& probs,
                           std::span<const double> targets);
// -log p[index], p clamped by kLogEps.
Array negative_log_likelihood(Tape* tape, const Array& probs,
                              std::size_t index);

struct LstmWeights {
  Array w;  // [4H x (D + H)], gate order: input, forget, output, candidate
  Array b;  // [4H]
  std::size_t input_size() const { return w.cols() - hidden_size(); }
  std::size_t hidden_size() const { return b.size() / 4; }
};

struct LstmState {
  Array h;
  Array c;
};

LstmState lstm_cell_step(Tape* tape, const Array& x, const LstmState& prev,
                         const LstmWeights& weights);

double global_norm(std::span<const Array> arrays);

}  // namespace plangen::ops
