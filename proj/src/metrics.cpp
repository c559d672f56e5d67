#include "plangen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace plangen {

namespace {

using NgramCounts = std::map<Tokens, std::size_t>;

NgramCounts ngrams(const Tokens& t, std::size_t n) {
  NgramCounts c;
  for (std::size_t i = 0; i + n <= t.size(); ++i) ++c[Tokens(t.begin() + i, t.begin() + i + n)];
  return c;
}

struct BleuStats {
  std::vector<std::size_t> matched, possible;
  std::size_t cand_len = 0, ref_len = 0;
};

std::size_t closest_length(std::size_t cand, const std::vector<Tokens>& refs) {
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    const auto d = [&](std::size_t l) { return l > cand ? l - cand : cand - l; };
    if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
  }
  return best;
}

BleuStats bleu_stats(const Tokens& cand, const std::vector<Tokens>& refs, int max_n) {
  BleuStats s;
  s.cand_len = cand.size();
  s.ref_len = closest_length(cand.size(), refs);
  for (int n = 1; n <= max_n; ++n) {
    NgramCounts max_ref;
    for (const auto& r : refs)
      for (const auto& [g, c] : ngrams(r, n)) max_ref[g] = std::max(max_ref[g], c);
    std::size_t matched = 0, total = 0;
    for (const auto& [g, c] : ngrams(cand, n)) {
      total += c;
      auto it = max_ref.find(g);
      if (it != max_ref.end()) matched += std::min(c, it->second);
    }
    s.matched.push_back(matched);
    s.possible.push_back(total);
  }
  return s;
}

double bleu_from(const BleuStats& s) {
  if (s.cand_len == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < s.matched.size(); ++n) {
    if (s.matched[n] == 0 || s.possible[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(s.matched[n]) / static_cast<double>(s.possible[n]));
  }
  const double bp = s.cand_len >= s.ref_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(s.ref_len) /
                                             static_cast<double>(s.cand_len));
  return bp * std::exp(log_sum / static_cast<double>(s.matched.size()));
}

void check_order(int max_n) {
  if (max_n != 2 && max_n != 4) throw Error("BLEU order must be 2 or 4, got " + std::to_string(max_n));
}

}  // namespace

double bleu_score(const Tokens& candidate, const std::vector<Tokens>& references, int max_n) {
  check_order(max_n);
  if (references.empty()) throw Error("bleu_score: no references");
  return bleu_from(bleu_stats(candidate, references, max_n));
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_score(const Tokens& candidate, const Tokens& reference) {
  if (reference.empty()) throw Error("rouge_l_score: empty reference");
  if (candidate.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0) return 0.0;
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  return 2 * p * r / (p + r);
}

double SelectionCounts::f1() const {
  if (gold == 0) return predicted == 0 ? 1.0 : 0.0;
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / static_cast<double>(predicted);
  const double r = static_cast<double>(overlap) / static_cast<double>(gold);
  return 2 * p * r / (p + r);
}

SelectionCounts selection_counts(const Plan& predicted, const Plan& gold) {
  std::set<std::size_t> p, g;
  for (const auto& s : predicted) p.insert(s.begin(), s.end());
  for (const auto& s : gold) g.insert(s.begin(), s.end());
  SelectionCounts c;
  c.predicted = p.size();
  c.gold = g.size();
  for (auto k : p) c.overlap += g.count(k);
  return c;
}

double selection_f1(const Plan& predicted, const Plan& gold) {
  return selection_counts(predicted, gold).f1();
}

double selection_f1(const std::vector<Plan>& predicted, const std::vector<Plan>& gold) {
  if (predicted.size() != gold.size()) throw Error("selection_f1: sample count mismatch");
  SelectionCounts total;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    auto c = selection_counts(predicted[i], gold[i]);
    total.overlap += c.overlap;
    total.predicted += c.predicted;
    total.gold += c.gold;
  }
  return total.f1();
}

RecordScores score_record(const EvalRecord& record) {
  if (record.references.empty()) throw Error("record " + record.id + " has no reference");
  RecordScores best;
  bool first = true;
  for (std::size_t i = 0; i < record.references.size(); ++i) {
    const std::vector<Tokens> ref{record.references[i]};
    RecordScores s;
    s.best_reference = i;
    s.bleu2 = bleu_score(record.candidate, ref, 2);
    s.bleu4 = bleu_score(record.candidate, ref, 4);
    s.rouge_l = record.references[i].empty() ? 0.0 : rouge_l_score(record.candidate, record.references[i]);
    if (first || s.bleu2 > best.bleu2 || (s.bleu2 == best.bleu2 && s.rouge_l > best.rouge_l)) {
      best = s;
      first = false;
    }
  }
  best.selection_f1 = selection_f1(record.predicted_plan, record.gold_plan);
  return best;
}

CorpusScores evaluate_corpus(const std::vector<EvalRecord>& records) {
  CorpusScores out;
  out.samples = records.size();
  if (records.empty()) return out;
  BleuStats b2, b4;
  b2.matched.assign(2, 0);
  b2.possible.assign(2, 0);
  b4.matched.assign(4, 0);
  b4.possible.assign(4, 0);
  double rouge = 0, length = 0;
  std::vector<Plan> predicted, gold;
  for (const auto& r : records) {
    RecordScores s = score_record(r);
    const std::vector<Tokens> ref{r.references[s.best_reference]};
    for (auto* acc : {&b2, &b4}) {
      BleuStats one = bleu_stats(r.candidate, ref, static_cast<int>(acc->matched.size()));
      for (std::size_t n = 0; n < one.matched.size(); ++n) {
        acc->matched[n] += one.matched[n];
        acc->possible[n] += one.possible[n];
      }
      acc->cand_len += one.cand_len;
      acc->ref_len += one.ref_len;
    }
    rouge += s.rouge_l;
    length += static_cast<double>(r.candidate.size());
    predicted.push_back(r.predicted_plan);
    gold.push_back(r.gold_plan);
  }
  const double n = static_cast<double>(records.size());
  out.bleu2 = bleu_from(b2);
  out.bleu4 = bleu_from(b4);
  out.rouge_l = rouge / n;
  out.mean_length = length / n;
  out.selection_f1 = selection_f1(predicted, gold);
  return out;
}

std::string format_scores(const CorpusScores& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%-8s %-8s %-8s %-8s %-8s %-8s\n%-8.2f %-8.2f %-8.2f %-8s %-8.2f %-8.2f\n",
                "BLEU-2", "BLEU-4", "ROUGE-L", "METEOR", "SelF1", "Length", 100 * s.bleu2,
                100 * s.bleu4, 100 * s.rouge_l, "-", 100 * s.selection_f1, s.mean_length);
  return buf;
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("pearson: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 1e-15 || syy <= 1e-15) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

BinAnalysis plan_quality_correlation(const std::vector<ScoredPoint>& points, std::size_t n_bins) {
  if (n_bins < 1) throw Error("plan_quality_correlation: need at least one bin");
  if (points.size() < n_bins)
    throw Error("plan_quality_correlation: " + std::to_string(points.size()) +
                " records for " + std::to_string(n_bins) + " bins");
  std::vector<ScoredPoint> sorted = points;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredPoint& a, const ScoredPoint& b) { return a.f1 < b.f1; });
  BinAnalysis out;
  const std::size_t base = sorted.size() / n_bins, extra = sorted.size() % n_bins;
  std::size_t pos = 0;
  std::vector<double> f1s, bleus, rouges;
  for (std::size_t b = 0; b < n_bins; ++b) {
    BinRow row;
    row.index = b;
    row.count = base + (b < extra ? 1 : 0);
    for (std::size_t i = 0; i < row.count; ++i, ++pos) {
      row.mean_f1 += sorted[pos].f1;
      row.mean_bleu += sorted[pos].bleu;
      row.mean_rouge += sorted[pos].rouge;
    }
    const double c = static_cast<double>(row.count);
    row.mean_f1 /= c;
    row.mean_bleu /= c;
    row.mean_rouge /= c;
    f1s.push_back(row.mean_f1);
    bleus.push_back(row.mean_bleu);
    rouges.push_back(row.mean_rouge);
    out.bins.push_back(row);
  }
  out.r_bleu = pearson(f1s, bleus);
  out.r_rouge = pearson(f1s, rouges);
  return out;
}

std::string bins_csv(const BinAnalysis& analysis) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "bin_index,mean_f1,mean_bleu,mean_rouge\n";
  for (const auto& b : analysis.bins)
    out << b.index << ',' << b.mean_f1 << ',' << b.mean_bleu << ',' << b.mean_rouge << '\n';
  return out.str();
}

}  // namespace plangen
