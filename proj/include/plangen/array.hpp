#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace plangen {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

// Dense row-major float64 array. Copies share storage; use clone() for a
// deep copy. A 1-D array of extent n behaves as an n x 1 column.
class Array {
 public:
  Array();
  explicit Array(Shape shape, double fill = 0.0);
  Array(Shape shape, std::vector<double> values);

  static Array scalar(double v);
  static Array vector(std::vector<double> values);
  static Array matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values);

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  std::size_t rows() const;
  std::size_t cols() const;
  bool empty() const { return impl_ == nullptr; }

  std::span<const double> values() const;
  std::span<double> values();
  double operator[](std::size_t i) const { return values()[i]; }
  double& operator[](std::size_t i) { return values()[i]; }
  double at(std::size_t r, std::size_t c) const;
  double item() const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);

  bool has_grad() const;
  // Allocates a zero buffer on first access.
  std::span<double> grad() const;
  std::span<const double> grad_view() const;
  void zero_grad();
  void drop_grad();

  bool same_storage(const Array& other) const { return impl_ == other.impl_; }
  Array clone() const;

 private:
  struct Impl {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Impl> impl_;
};

// Define-by-run record of executed primitives. Backward closures are
// replayed in reverse insertion order, which is a valid topological order
// because every op is recorded after its inputs exist.
class Tape {
 public:
  void record(std::function<void()> backward);
  void backward(Array& loss);
  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  std::vector<std::function<void()>> nodes_;
};

}  // namespace plangen
