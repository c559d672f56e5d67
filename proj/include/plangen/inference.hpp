#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plangen/realizer.hpp"

namespace plangen {

struct DecodeOptions {
  std::size_t beam = 5;
  std::size_t max_sentences = 10;
  double threshold = 0.5;
  bool oracle_plan = false;
  bool greedy = false;  // plain argmax decoding instead of beam search
  std::size_t max_len = 40;
  bool replace_unknown = true;
  void validate() const;
};

struct BeamHypothesis {
  std::vector<std::size_t> tokens;  // extended ids, terminal token included
  double log_prob = 0.0;
  std::vector<ops::LstmState> cells;
  std::vector<std::vector<double>> bank_attention;  // alpha^e per emitted token
  bool finished = false;
  double normalized() const {
    return tokens.empty() ? log_prob : log_prob / static_cast<double>(tokens.size());
  }
};

struct DecodeContext {
  const Model& model;
  const EncoderState& encoder;
  const KeyphraseMemory& memory;
  const SourceContext& source;
};

// True when appending `next` to history would repeat one of its trigrams.
bool repeats_trigram(const std::vector<std::size_t>& history, std::size_t next);

// Each token in `prefix` is the trigram history before the sentence (the
// output so far, without boundary tokens). The sentence starts from
// y_prev = start_token with the given decoder cells.
BeamHypothesis beam_search_sentence(const DecodeContext& ctx,
                                    const std::vector<ops::LstmState>& cells,
                                    std::size_t start_token, const PlanStep& step,
                                    const Array& style, const std::vector<std::size_t>& prefix,
                                    std::size_t beam_size, std::size_t max_len);

BeamHypothesis greedy_sentence(const DecodeContext& ctx, const std::vector<ops::LstmState>& cells,
                               std::size_t start_token, const PlanStep& step,
                               const Array& style, const std::vector<std::size_t>& prefix,
                               std::size_t max_len);

// Each UNK becomes the tokens of the content phrase with the highest
// attention at that step.
Tokens replace_unknown_tokens(const Tokens& tokens,
                              const std::vector<std::vector<double>>& attention,
                              const KeyphraseBank& bank);

struct Generation {
  std::string id;
  Tokens output;                  // flat, no boundary tokens
  std::vector<Tokens> sentences;  // same tokens split by plan step
  std::vector<PlanStep> plan;
  std::size_t bank_size = 0;
  double log_prob = 0.0;
};

Generation generate(const Model& model, const Sample& sample, const DecodeOptions& options);

// Decodes with the given selections (bank indices); styles are predicted.
Generation generate_with_plan(const Model& model, const Sample& sample,
                              const std::vector<std::vector<std::size_t>>& selections,
                              const DecodeOptions& options);

// [{"selection": [raw keyphrase index], "style": int}], sentinels dropped.
std::string plan_json(const std::vector<PlanStep>& plan, std::size_t bank_size);
std::vector<std::vector<std::size_t>> plan_raw_selections(const std::vector<PlanStep>& plan,
                                                          std::size_t bank_size);
std::string generation_jsonl(const Generation& g);

struct GenerationRecord {
  std::string id;
  Tokens output;
  std::vector<std::vector<std::size_t>> plan;  // raw keyphrase indices
  std::vector<int> styles;
};

std::vector<GenerationRecord> parse_generations(const std::string& text);

}  // namespace plangen
