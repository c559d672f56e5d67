#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "plangen/array.hpp"

namespace plangen {

// Deterministic 64-bit generator (splitmix64). Its output sequence is fixed
// across standard libraries, unlike std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::size_t below(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[below(i)]);
  }

 private:
  std::uint64_t state_;
};

// Named trainable arrays in registration order.
class ParamStore {
 public:
  // Returns a handle sharing storage with the stored parameter.
  Array add(const std::string& name, Shape shape, Rng& rng, double init_scale);
  Array add_constant(const std::string& name, Shape shape, double fill);
  Array& get(const std::string& name);
  const Array& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::size_t size() const { return entries_.size(); }
  const std::string& name(std::size_t i) const { return entries_[i].first; }
  Array& at(std::size_t i) { return entries_[i].second; }
  const Array& at(std::size_t i) const { return entries_[i].second; }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::size_t parameter_count() const;
  void zero_grad();
  ParamStore clone() const;

 private:
  std::vector<std::pair<std::string, Array>> entries_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace plangen
