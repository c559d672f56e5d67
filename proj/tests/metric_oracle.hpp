#pragma once

// Slow reference versions of the metrics, written with no shared code so they
// can check the real ones. Shared by the unit tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace oracle {

using Words = std::vector<std::string>;
using Plan = std::vector<std::vector<std::size_t>>;

inline Words split(const std::string& s) {
  Words out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline std::vector<Words> ngrams(const Words& w, std::size_t n) {
  std::vector<Words> out;
  for (std::size_t i = 0; i + n <= w.size(); ++i) out.emplace_back(w.begin() + i, w.begin() + i + n);
  return out;
}

inline std::size_t occurrences(const std::vector<Words>& grams, const Words& g) {
  return static_cast<std::size_t>(std::count(grams.begin(), grams.end(), g));
}

inline double bleu(const Words& cand, const std::vector<Words>& refs, int max_n) {
  if (cand.empty()) return 0.0;
  double log_sum = 0;
  for (int n = 1; n <= max_n; ++n) {
    const auto grams = ngrams(cand, n);
    if (grams.empty()) return 0.0;
    std::vector<Words> seen;
    std::size_t clipped = 0;
    for (const auto& g : grams) {
      if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
      seen.push_back(g);
      std::size_t best = 0;
      for (const auto& r : refs) best = std::max(best, occurrences(ngrams(r, n), g));
      clipped += std::min(occurrences(grams, g), best);
    }
    if (clipped == 0) return 0.0;
    log_sum += std::log(double(clipped) / double(grams.size()));
  }
  // closest reference length, the shorter one when two are equally close
  std::size_t r = refs[0].size();
  for (const auto& ref : refs) {
    const long d = std::labs(long(ref.size()) - long(cand.size()));
    const long best = std::labs(long(r) - long(cand.size()));
    if (d < best || (d == best && ref.size() < r)) r = ref.size();
  }
  const double c = double(cand.size());
  const double bp = c > double(r) ? 1.0 : std::exp(1.0 - double(r) / c);
  return bp * std::exp(log_sum / max_n);
}

inline bool is_subsequence(const Words& sub, const Words& of) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < of.size() && j < sub.size(); ++i)
    if (of[i] == sub[j]) ++j;
  return j == sub.size();
}

// Tries every subsequence of the shorter side.
inline std::size_t lcs(const Words& a, const Words& b) {
  const Words& s = a.size() <= b.size() ? a : b;
  const Words& l = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (unsigned long mask = 0; mask < (1ul << s.size()); ++mask) {
    Words sub;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (mask >> i & 1) sub.push_back(s[i]);
    if (sub.size() > best && is_subsequence(sub, l)) best = sub.size();
  }
  return best;
}

inline double rouge_l(const Words& cand, const Words& ref) {
  const std::size_t n = lcs(cand, ref);
  if (n == 0) return 0.0;
  const double p = double(n) / cand.size(), r = double(n) / ref.size();
  return 2 * p * r / (p + r);
}

inline std::set<std::size_t> flatten(const Plan& p) {
  std::set<std::size_t> s;
  for (const auto& step : p) s.insert(step.begin(), step.end());
  return s;
}

inline double f1_from(std::size_t overlap, std::size_t pred, std::size_t gold) {
  if (pred == 0 && gold == 0) return 1.0;
  if (overlap == 0) return 0.0;
  const double p = double(overlap) / pred, r = double(overlap) / gold;
  return 2 * p * r / (p + r);
}

inline std::size_t overlap(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  std::size_t n = 0;
  for (auto x : a) n += b.count(x);
  return n;
}

inline double selection_f1(const Plan& pred, const Plan& gold) {
  const auto p = flatten(pred), g = flatten(gold);
  return f1_from(overlap(p, g), p.size(), g.size());
}

inline double selection_f1(const std::vector<Plan>& pred, const std::vector<Plan>& gold) {
  std::size_t o = 0, np = 0, ng = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto p = flatten(pred[i]), g = flatten(gold[i]);
    o += overlap(p, g);
    np += p.size();
    ng += g.size();
  }
  return f1_from(o, np, ng);
}

struct Case {
  Words candidate;
  std::vector<Words> references;
  Plan predicted, gold;
};

inline std::vector<Case> load_cases(const std::string& path) {
  std::ifstream in(path);
  std::vector<Case> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    Case c;
    c.candidate = split(j.at("candidate").get<std::string>());
    for (const auto& r : j.at("references")) c.references.push_back(split(r.get<std::string>()));
    c.predicted = j.at("predicted").get<Plan>();
    c.gold = j.at("gold").get<Plan>();
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace oracle
