#include "plangen/array.hpp"

#include <numeric>
#include <sstream>

namespace plangen {

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

namespace {
void validate_shape(const Shape& shape) {
  if (shape.empty()) throw Error("array shape must have at least one extent");
  for (auto e : shape)
    if (e == 0) throw Error("array extents must be positive: " + shape_string(shape));
}
}  // namespace

Array::Array() = default;

Array::Array(Shape shape, double fill) : impl_(std::make_shared<Impl>()) {
  validate_shape(shape);
  impl_->values.assign(shape_size(shape), fill);
  impl_->shape = std::move(shape);
}

Array::Array(Shape shape, std::vector<double> values)
    : impl_(std::make_shared<Impl>()) {
  validate_shape(shape);
  if (shape_size(shape) != values.size())
    throw Error("array of shape " + shape_string(shape) + " given " +
                std::to_string(values.size()) + " values");
  impl_->shape = std::move(shape);
  impl_->values = std::move(values);
}

Array Array::scalar(double v) { return Array({1}, std::vector<double>{v}); }

Array Array::vector(std::vector<double> values) {
  const auto n = values.size();
  return Array({n}, std::move(values));
}

Array Array::matrix(std::size_t rows, std::size_t cols,
                    std::vector<double> values) {
  return Array({rows, cols}, std::move(values));
}

const Shape& Array::shape() const { return impl_->shape; }
std::size_t Array::size() const { return impl_ ? impl_->values.size() : 0; }
std::size_t Array::rows() const { return impl_->shape[0]; }
std::size_t Array::cols() const {
  return impl_->shape.size() > 1 ? impl_->shape[1] : 1;
}

std::span<const double> Array::values() const { return impl_->values; }
std::span<double> Array::values() { return impl_->values; }

double Array::at(std::size_t r, std::size_t c) const {
  return impl_->values[r * cols() + c];
}

double Array::item() const {
  if (size() != 1) throw Error("item() on array of shape " + shape_string(shape()));
  return impl_->values[0];
}

bool Array::requires_grad() const { return impl_ && impl_->requires_grad; }
void Array::set_requires_grad(bool flag) { impl_->requires_grad = flag; }

bool Array::has_grad() const { return impl_ && !impl_->grad.empty(); }

std::span<double> Array::grad() const {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), 0.0);
  return impl_->grad;
}

std::span<const double> Array::grad_view() const { return impl_->grad; }

void Array::zero_grad() { impl_->grad.assign(impl_->values.size(), 0.0); }
void Array::drop_grad() { impl_->grad.clear(); }

Array Array::clone() const {
  Array out(impl_->shape, impl_->values);
  out.impl_->requires_grad = impl_->requires_grad;
  return out;
}

void Tape::record(std::function<void()> backward) {
  nodes_.push_back(std::move(backward));
}

void Tape::backward(Array& loss) {
  if (loss.size() != 1)
    throw Error("backward requires a scalar loss, got shape " +
                shape_string(loss.shape()));
  loss.grad()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
}

}  // namespace plangen
