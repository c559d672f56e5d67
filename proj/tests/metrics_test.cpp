#include <gtest/gtest.h>

#include <cmath>

#include "metric_oracle.hpp"
#include "plangen/metrics.hpp"
#include "plangen/params.hpp"
#include "test_util.hpp"

using namespace plangen;

namespace {

Tokens w(const std::string& s) { return oracle::split(s); }

Tokens random_words(Rng& rng, std::size_t max_len) {
  Tokens t;
  const std::size_t n = rng.below(max_len + 1);
  for (std::size_t i = 0; i < n; ++i) t.push_back(std::string(1, char('a' + rng.below(4))));
  return t;
}

void shuffle(Tokens& t, Rng& rng) {
  for (std::size_t i = t.size(); i > 1; --i) std::swap(t[i - 1], t[rng.below(i)]);
}

}  // namespace

TEST(Bleu, HandExamples) {
  EXPECT_DOUBLE_EQ(bleu_score(w("a b c d"), {w("a b c d")}, 2), 1.0);
  EXPECT_NEAR(bleu_score(w("a b c d"), {w("a b c e")}, 2), std::sqrt(0.75 * 2.0 / 3.0), 1e-12);
  EXPECT_EQ(bleu_score({}, {w("a b")}, 4), 0.0);
  // no 4-gram match and no smoothing
  EXPECT_EQ(bleu_score(w("a b c d e"), {w("a b c x e")}, 4), 0.0);
  // shorter than n: nothing to match at that order
  EXPECT_EQ(bleu_score(w("a b"), {w("a b")}, 4), 0.0);
  EXPECT_THROW(bleu_score(w("a"), {w("a")}, 3), Error);
}

TEST(Bleu, ClosestReferenceLengthShorterOnTie) {
  // candidate length 4, references 3 and 5: every n-gram clips against the
  // longer one, and the tie picks 3, so there is no penalty
  const auto c = w("a b c d");
  EXPECT_DOUBLE_EQ(bleu_score(c, {w("a b c"), w("a b c d e")}, 2), 1.0);
  EXPECT_DOUBLE_EQ(oracle::bleu(c, {w("a b c"), w("a b c d e")}, 2), 1.0);
  // with only the longer one the penalty applies
  const double p1 = 3.0 / 4, p2 = 2.0 / 3;
  EXPECT_NEAR(bleu_score(c, {w("a b c x e")}, 2), std::exp(1 - 5.0 / 4) * std::sqrt(p1 * p2),
              1e-12);
}

TEST(Rouge, HandExamples) {
  EXPECT_DOUBLE_EQ(rouge_l_score(w("a b c"), w("a b c")), 1.0);
  EXPECT_NEAR(rouge_l_score(w("a c b"), w("a b c")), 2.0 / 3, 1e-12);
  EXPECT_EQ(rouge_l_score(w("x y"), w("a b")), 0.0);
  EXPECT_EQ(rouge_l_score({}, w("a b")), 0.0);
  EXPECT_EQ(lcs_length(w("a b c b d a b"), w("b d c a b a")), 4u);
}

TEST(SelectionF1, HandExamples) {
  EXPECT_DOUBLE_EQ(selection_f1(Plan{{1, 2}}, Plan{{1, 2}}), 1.0);
  EXPECT_DOUBLE_EQ(selection_f1(Plan{{1, 2}}, Plan{{2, 3}}), 0.5);
  EXPECT_EQ(selection_f1(Plan{}, Plan{{1}}), 0.0);
  EXPECT_EQ(selection_f1(Plan{}, Plan{}), 1.0);
  EXPECT_EQ(selection_f1(Plan{{4}}, Plan{}), 0.0);
  // union over sentences, repeats counted once
  EXPECT_DOUBLE_EQ(selection_f1(Plan{{1}, {1}, {2}}, Plan{{1, 2}}), 1.0);
}

TEST(SelectionF1, MicroAverage) {
  // 1 overlap of 1 predicted / 1 gold, then 0 of 3 / 1
  const std::vector<Plan> pred = {{{1}}, {{1, 2, 3}}}, gold = {{{1}}, {{4}}};
  const double p = 1.0 / 4, r = 1.0 / 2;
  EXPECT_NEAR(selection_f1(pred, gold), 2 * p * r / (p + r), 1e-12);
}

TEST(MetricFixture, AgreesWithBruteForce) {
  const auto cases = oracle::load_cases(testutil::fixture("metric_cases.jsonl"));
  ASSERT_EQ(cases.size(), 20u);
  std::vector<Plan> pred, gold;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    EXPECT_NEAR(bleu_score(c.candidate, c.references, 2), oracle::bleu(c.candidate, c.references, 2),
                1e-9) << "case " << i;
    EXPECT_NEAR(bleu_score(c.candidate, c.references, 4), oracle::bleu(c.candidate, c.references, 4),
                1e-9) << "case " << i;
    for (const auto& r : c.references)
      EXPECT_NEAR(rouge_l_score(c.candidate, r), oracle::rouge_l(c.candidate, r), 1e-9)
          << "case " << i;
    EXPECT_NEAR(selection_f1(c.predicted, c.gold), oracle::selection_f1(c.predicted, c.gold), 1e-9)
        << "case " << i;
    pred.push_back(c.predicted);
    gold.push_back(c.gold);
  }
  EXPECT_NEAR(selection_f1(pred, gold), oracle::selection_f1(pred, gold), 1e-9);
}

TEST(MetricProperties, RandomSequences) {
  Rng rng(21);
  for (int n = 0; n < 400; ++n) {
    const auto c = random_words(rng, 8), r1 = random_words(rng, 8), r2 = random_words(rng, 8);
    if (r1.empty() || r2.empty()) continue;
    for (int order : {2, 4}) {
      const double b = bleu_score(c, {r1, r2}, order);
      EXPECT_GE(b, 0.0);
      EXPECT_LE(b, 1.0 + 1e-12);
      EXPECT_DOUBLE_EQ(b, bleu_score(c, {r2, r1}, order));
      EXPECT_NEAR(b, oracle::bleu(c, {r1, r2}, order), 1e-9);
      if (c == r1) EXPECT_DOUBLE_EQ(b, c.size() < std::size_t(order) ? 0.0 : 1.0);
    }
    if (c.empty()) continue;
    const double f = rouge_l_score(c, r1);
    EXPECT_NEAR(f, oracle::rouge_l(c, r1), 1e-9);
    EXPECT_DOUBLE_EQ(f, rouge_l_score(r1, c));
    EXPECT_EQ(f > 1.0 - 1e-12, c == r1);
  }
}

TEST(MetricProperties, PerfectScoreMeansMatchWhenTokensDistinct) {
  Rng rng(8);
  const Tokens pool = {"a", "b", "c", "d", "e", "f"};
  for (int n = 0; n < 300; ++n) {
    Tokens c = pool, r = pool;
    shuffle(c, rng);
    shuffle(r, rng);
    c.resize(2 + rng.below(5));
    r.resize(2 + rng.below(5));
    EXPECT_EQ(bleu_score(c, {r}, 2) == 1.0, c == r);
  }
  // with repeated tokens two orders can share every bigram
  EXPECT_DOUBLE_EQ(bleu_score(w("a b a c a"), {w("a c a b a")}, 2), 1.0);
  EXPECT_LT(bleu_score(w("a b a c a"), {w("a c a b a")}, 4), 1.0);
}

TEST(ScoreRecord, PicksBestReference) {
  EvalRecord r{"r", w("a b c d"), {w("x y"), w("a b c d"), w("a b")}, {{1}}, {{1}}};
  const auto s = score_record(r);
  EXPECT_EQ(s.best_reference, 1u);
  EXPECT_DOUBLE_EQ(s.bleu2, 1.0);
  EXPECT_DOUBLE_EQ(s.rouge_l, 1.0);
  EXPECT_DOUBLE_EQ(s.selection_f1, 1.0);
  r.references.clear();
  EXPECT_THROW(score_record(r), Error);
}

TEST(EvaluateCorpus, PoolsCounts) {
  // one record: corpus BLEU is sentence BLEU against the best reference
  const EvalRecord one{"a", w("a b c d"), {w("a b c e")}, {}, {}};
  const auto s = evaluate_corpus({one});
  EXPECT_NEAR(s.bleu2, bleu_score(one.candidate, one.references, 2), 1e-12);
  EXPECT_DOUBLE_EQ(s.mean_length, 4.0);
  // two records: pooled precisions 5/6 unigram, 3/4 bigram; lengths 6 vs 6
  const EvalRecord two{"b", w("x y"), {w("x y")}, {}, {}};
  const auto p = evaluate_corpus({one, two});
  EXPECT_NEAR(p.bleu2, std::sqrt(5.0 / 6 * 3.0 / 4), 1e-12);
  EXPECT_NEAR(p.rouge_l, (0.75 + 1.0) / 2, 1e-12);
  EXPECT_EQ(p.samples, 2u);
  const auto table = format_scores(p);
  EXPECT_NE(table.find("BLEU-2"), std::string::npos);
  EXPECT_NE(table.find("-"), std::string::npos);
}

TEST(Pearson, KnownValues) {
  EXPECT_NEAR(*pearson({1, 2, 3}, {2, 4, 6}), 1.0, 1e-12);
  EXPECT_NEAR(*pearson({1, 2, 3}, {3, 2, 1}), -1.0, 1e-12);
  // x = 1..4, y = 1 3 2 4: r = 0.8
  EXPECT_NEAR(*pearson({1, 2, 3, 4}, {1, 3, 2, 4}), 0.8, 1e-12);
  EXPECT_FALSE(pearson({1, 2, 3}, {5, 5, 5}).has_value());
  EXPECT_FALSE(pearson({1}, {1}).has_value());
  EXPECT_THROW(pearson({1, 2}, {1}), Error);
}

TEST(Bins, RemainderToEarlyBins) {
  std::vector<ScoredPoint> pts;
  for (int i = 22; i >= 0; --i) pts.push_back({i / 22.0, i / 22.0, 0.5});
  const auto a = plan_quality_correlation(pts, 10);
  ASSERT_EQ(a.bins.size(), 10u);
  EXPECT_EQ(a.bins[0].count, 3u);
  EXPECT_EQ(a.bins[2].count, 3u);
  EXPECT_EQ(a.bins[3].count, 2u);
  EXPECT_NEAR(a.bins[0].mean_f1, 1.0 / 22, 1e-12);
  ASSERT_TRUE(a.r_bleu.has_value());
  EXPECT_NEAR(*a.r_bleu, 1.0, 1e-12);
  EXPECT_FALSE(a.r_rouge.has_value());
  EXPECT_THROW(plan_quality_correlation(pts, 30), Error);
  const auto csv = bins_csv(a);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "bin_index,mean_f1,mean_bleu,mean_rouge");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
}
