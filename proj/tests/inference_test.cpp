#include <gtest/gtest.h>

#include <set>
#include <tuple>

#include "plangen/inference.hpp"
#include "test_util.hpp"

using namespace plangen;

namespace {

Keyphrase kp(const Tokens& t) { return *Keyphrase::from_tokens(t); }

bool has_repeated_trigram(const Tokens& t) {
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (std::size_t i = 0; i + 2 < t.size(); ++i)
    if (!seen.insert({t[i], t[i + 1], t[i + 2]}).second) return true;
  return false;
}

DecodeOptions short_decode(bool greedy, std::size_t beam = 1) {
  DecodeOptions o;
  o.greedy = greedy;
  o.beam = beam;
  o.max_len = 12;
  o.max_sentences = 3;
  o.replace_unknown = false;
  return o;
}

}  // namespace

TEST(Trigram, BlocksRepeat) {
  // ids for "a b c a b"
  const std::vector<std::size_t> h = {10, 11, 12, 10, 11};
  EXPECT_TRUE(repeats_trigram(h, 12));
  EXPECT_FALSE(repeats_trigram(h, 13));
  EXPECT_FALSE(repeats_trigram({10, 11}, 12));
  EXPECT_FALSE(repeats_trigram({}, 1));
  // the candidate trigram overlapping the tail is new
  EXPECT_FALSE(repeats_trigram({7, 7}, 7));
  EXPECT_TRUE(repeats_trigram({7, 7, 7}, 7));
}

TEST(Decode, OptionsValidated) {
  DecodeOptions o;
  EXPECT_NO_THROW(o.validate());
  o.beam = 0;
  EXPECT_THROW(o.validate(), Error);
  o = {};
  o.threshold = 1.0;
  EXPECT_THROW(o.validate(), Error);
  o = {};
  o.max_len = 0;
  EXPECT_THROW(o.validate(), Error);
}

TEST(Decode, BeamOneMatchesGreedy) {
  auto model = testutil::small_model(testutil::small_config(Task::kArgument, 8, 2));
  for (const auto& sample : testutil::tiny_corpus()) {
    const auto g = generate(*model, sample, short_decode(true));
    const auto b = generate(*model, sample, short_decode(false, 1));
    EXPECT_EQ(g.output, b.output) << sample.id;
    EXPECT_EQ(g.sentences, b.sentences);
    EXPECT_NEAR(g.log_prob, b.log_prob, 1e-12);
  }
}

TEST(Decode, NoRepeatedTrigramAcrossOutput) {
  auto model = testutil::small_model();
  for (std::size_t beam : {1u, 4u})
    for (const auto& sample : testutil::tiny_corpus()) {
      auto opts = short_decode(beam == 1, beam);
      opts.max_len = 30;
      const auto g = generate(*model, sample, opts);
      EXPECT_FALSE(has_repeated_trigram(g.output)) << sample.id << " beam " << beam;
    }
}

TEST(Decode, SentencesFollowPlan) {
  auto model = testutil::small_model();
  const auto& sample = testutil::tiny_corpus()[0];
  ASSERT_GE(sample.bank.size(), 4u);
  const std::vector<std::vector<std::size_t>> plan = {{1}, {2}, {1, 2}};
  const auto g = generate_with_plan(*model, sample, plan, short_decode(false, 3));
  ASSERT_EQ(g.sentences.size(), 3u);
  ASSERT_EQ(g.plan.size(), 3u);
  Tokens flat;
  for (const auto& s : g.sentences) flat.insert(flat.end(), s.begin(), s.end());
  EXPECT_EQ(flat, g.output);
  EXPECT_EQ(g.plan[2].selection, (std::vector<std::size_t>{1, 2}));
  for (const auto& t : g.output) {
    EXPECT_NE(t, "<snt>");
    EXPECT_NE(t, "<eos>");
  }
}

TEST(Decode, MaxLenForcesEnd) {
  auto model = testutil::small_model();
  auto opts = short_decode(false, 2);
  opts.max_len = 1;
  const auto g = generate_with_plan(*model, testutil::tiny_corpus()[1], {{1}, {2}}, opts);
  for (const auto& s : g.sentences) EXPECT_LE(s.size(), 1u);
}

TEST(Decode, EmptyPlanGivesEmptyOutput) {
  auto model = testutil::small_model();
  model->weights().select_bias[0] = 40.0;  // END always selected
  const auto g = generate(*model, testutil::tiny_corpus()[0], short_decode(false, 2));
  EXPECT_TRUE(g.plan.empty());
  EXPECT_TRUE(g.output.empty());
  EXPECT_NE(generation_jsonl(g).find("\"plan\":[]"), std::string::npos);
}

TEST(Decode, OracleNeedsGoldPlan) {
  auto model = testutil::small_model();
  Sample s = testutil::tiny_corpus()[0];
  auto opts = short_decode(false, 2);
  opts.oracle_plan = true;
  const auto g = generate(*model, s, opts);
  EXPECT_EQ(g.plan.size(), s.targets.size());
  for (std::size_t j = 0; j < s.targets.size(); ++j)
    EXPECT_EQ(g.plan[j].selection, s.targets[j].selection);
  s.targets.clear();
  try {
    generate(*model, s, opts);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(s.id), std::string::npos);
  }
}

TEST(Decode, Deterministic) {
  auto a = testutil::small_model(), b = testutil::small_model();
  const auto& s = testutil::tiny_corpus()[4];
  EXPECT_EQ(generation_jsonl(generate(*a, s, short_decode(false, 3))),
            generation_jsonl(generate(*b, s, short_decode(false, 3))));
}

TEST(ReplaceUnknown, UsesMostAttendedContentPhrase) {
  const auto bank = build_keyphrase_bank({kp({"foreign", "aid"}), kp({"poverty"})}, 70);
  ASSERT_EQ(bank.size(), 4u);
  // sentinels carry the most attention but never fill in
  const std::vector<std::vector<double>> att = {{0.9, 0.05, 0.03, 0.02}, {0, 0, 0, 0},
                                                {0.5, 0.1, 0.3, 0.1}};
  const Tokens out = replace_unknown_tokens({"<unk>", "cuts", "<unk>"}, att, bank);
  EXPECT_EQ(out, (Tokens{"foreign", "aid", "cuts", "poverty"}));
}

TEST(ReplaceUnknown, EdgeCases) {
  const auto empty = build_keyphrase_bank({}, 70);
  EXPECT_EQ(replace_unknown_tokens({"<unk>"}, {{0.5, 0.5}}, empty), (Tokens{"<unk>"}));
  EXPECT_THROW(replace_unknown_tokens({"a", "b"}, {{}}, empty), Error);
  EXPECT_TRUE(replace_unknown_tokens({}, {}, empty).empty());
}

TEST(ReplaceUnknown, GeneratedOutputHasNoUnk) {
  auto model = testutil::small_model();
  auto opts = short_decode(false, 2);
  opts.replace_unknown = true;
  for (const auto& s : testutil::tiny_corpus()) {
    const auto g = generate(*model, s, opts);
    for (const auto& t : g.output) EXPECT_NE(t, "<unk>") << s.id;
  }
}

TEST(PlanJson, DropsSentinelsAndShifts) {
  std::vector<PlanStep> plan(2);
  plan[0].selection = {1, 3};
  plan[0].style = 2;
  plan[1].selection = {0, 2, 4};  // START and END of a 5-entry bank
  EXPECT_EQ(plan_json(plan, 5), R"([{"selection":[0,2],"style":2},{"selection":[1],"style":0}])");
  EXPECT_EQ(plan_raw_selections(plan, 5),
            (std::vector<std::vector<std::size_t>>{{0, 2}, {1}}));
}

TEST(GenerationFile, RoundTrip) {
  Generation g;
  g.id = "x-1";
  g.output = {"tax", "cuts", "."};
  g.plan.resize(1);
  g.plan[0].selection = {2};
  g.plan[0].style = 1;
  g.bank_size = 4;
  const auto text = generation_jsonl(g) + "\n\n" + generation_jsonl(g) + "\n";
  const auto recs = parse_generations(text);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].id, "x-1");
  EXPECT_EQ(recs[0].output, g.output);
  EXPECT_EQ(recs[0].plan, (std::vector<std::vector<std::size_t>>{{1}}));
  EXPECT_EQ(recs[0].styles, (std::vector<int>{1}));
  try {
    parse_generations(generation_jsonl(g) + "\n{\"id\": 3}\n");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}
