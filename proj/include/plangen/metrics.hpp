#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plangen/corpus.hpp"

namespace plangen {

// Unsmoothed BLEU with brevity penalty; max_n must be 2 or 4. Clip counts
// take the per-n-gram max over references; the reference length is the
// closest one (shorter on ties).
double bleu_score(const Tokens& candidate, const std::vector<Tokens>& references, int max_n);

// LCS F1 (beta = 1).
double rouge_l_score(const Tokens& candidate, const Tokens& reference);
std::size_t lcs_length(const Tokens& a, const Tokens& b);

using Plan = std::vector<std::vector<std::size_t>>;

struct SelectionCounts {
  std::size_t overlap = 0, predicted = 0, gold = 0;
  double f1() const;
};

// Selections are unioned over sentences before comparing.
SelectionCounts selection_counts(const Plan& predicted, const Plan& gold);
double selection_f1(const Plan& predicted, const Plan& gold);
// Micro-averaged over samples.
double selection_f1(const std::vector<Plan>& predicted, const std::vector<Plan>& gold);

struct EvalRecord {
  std::string id;
  Tokens candidate;
  std::vector<Tokens> references;
  Plan predicted_plan;
  Plan gold_plan;
};

struct RecordScores {
  double bleu2 = 0, bleu4 = 0, rouge_l = 0, selection_f1 = 0;
  std::size_t best_reference = 0;
};

// Scores against the best matched reference (highest BLEU-2, then ROUGE-L).
RecordScores score_record(const EvalRecord& record);

struct CorpusScores {
  double bleu2 = 0, bleu4 = 0, rouge_l = 0, selection_f1 = 0;
  double mean_length = 0;
  std::size_t samples = 0;
};

// Corpus BLEU pools clipped counts and lengths over samples, each against
// its best matched reference. ROUGE-L is the mean over samples.
CorpusScores evaluate_corpus(const std::vector<EvalRecord>& records);
std::string format_scores(const CorpusScores& scores);

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

struct BinRow {
  std::size_t index = 0, count = 0;
  double mean_f1 = 0, mean_bleu = 0, mean_rouge = 0;
};

struct BinAnalysis {
  std::vector<BinRow> bins;
  std::optional<double> r_bleu;   // undefined for zero variance
  std::optional<double> r_rouge;
};

struct ScoredPoint {
  double f1 = 0, bleu = 0, rouge = 0;
};

// Sorted ascending by F1 (stable), split into equal-count bins with the
// remainder going to the first bins.
BinAnalysis plan_quality_correlation(const std::vector<ScoredPoint>& points,
                                     std::size_t n_bins = 10);
std::string bins_csv(const BinAnalysis& analysis);

}  // namespace plangen
