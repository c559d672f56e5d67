#include "plangen/params.hpp"

namespace plangen {

std::uint64_t Rng::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw Error("Rng::below(0)");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do v = next();
  while (v >= limit);
  return static_cast<std::size_t>(v % n);
}

Array ParamStore::add(const std::string& name, Shape shape, Rng& rng,
                       double init_scale) {
  Array a = add_constant(name, std::move(shape), 0.0);
  for (double& v : a.values()) v = rng.uniform(-init_scale, init_scale);
  return a;
}

Array ParamStore::add_constant(const std::string& name, Shape shape, double fill) {
  if (contains(name)) throw Error("duplicate parameter name: " + name);
  Array a(std::move(shape), fill);
  a.set_requires_grad(true);
  index_[name] = entries_.size();
  entries_.emplace_back(name, std::move(a));
  return entries_.back().second;
}

Array& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter: " + name);
  return entries_[it->second].second;
}

const Array& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter: " + name);
  return entries_[it->second].second;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, a] : entries_) n += a.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [name, a] : entries_) a.zero_grad();
}

ParamStore ParamStore::clone() const {
  ParamStore out;
  for (const auto& [name, a] : entries_) {
    out.index_[name] = out.entries_.size();
    out.entries_.emplace_back(name, a.clone());
  }
  return out;
}

}  // namespace plangen
