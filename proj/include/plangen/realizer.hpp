#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plangen/planner.hpp"

namespace plangen {

// Per-sample copy bookkeeping. Extended ids are vocabulary ids followed by
// source tokens missing from the vocabulary, in first-seen order.
struct SourceContext {
  std::size_t vocab_size = 0;
  std::vector<std::string> oov_tokens;
  // Input copy: token i receives weight[i] * alpha^w[row[i]].
  std::vector<std::size_t> input_ext, input_row;
  std::vector<double> input_weight;
  // Bank copy over content entries; bank_weight is the uniform spread.
  std::vector<std::size_t> content_entries;  // bank indices, ascending
  std::vector<std::size_t> bank_ext, bank_slot;  // slot indexes content_entries
  std::vector<double> bank_weight;

  std::size_t extended_size() const { return vocab_size + oov_tokens.size(); }
  // Vocabulary id, else extended OOV id, else UNK.
  std::size_t ext_id(const Vocabulary& vocab, const std::string& token) const;
  std::string token(const Vocabulary& vocab, std::size_t ext) const;
  bool has_bank_copy() const { return !content_entries.empty(); }
};

// `input_rows` is the number of encoder rows (1 in title-by-sum mode, where
// every input token copies from the single summary row).
SourceContext build_source_context(const Vocabulary& vocab, const Tokens& input,
                                   std::size_t input_rows, const KeyphraseBank& bank);

// Per bank token weights within each phrase; see CopySpread.
std::vector<double> bank_spread(const SourceContext& source,
                                const std::vector<std::size_t>& sentence_so_far,
                                CopySpread mode);

// One-hot style plus the global bit when the task defines one.
Array style_vector(const ModelConfig& config, int style, std::optional<int> global_bit);

Array token_embedding(Tape* tape, const Model& model, std::size_t ext_id);

// z_t = g(z_{t-1}, tanh(W^ws s + W^ww y_prev + b)); returns every layer's state.
std::vector<ops::LstmState> realize_step(Tape* tape, const Model& model,
                                         const std::vector<ops::LstmState>& prev,
                                         const Array& y_prev_embedding, const Array& s,
                                         const Dropout& dropout = {});

struct ExtendedVocabDist {
  Array probs;       // over the extended vocabulary
  Array attn_input;  // alpha^w over encoder rows
  Array attn_bank;   // alpha^e over all bank entries
  Array gate;        // generate, copy input, copy bank
  Array generation;  // softmax over the base vocabulary
};

// Optional gate override exists for tests of the mixture.
ExtendedVocabDist output_distribution(Tape* tape, const Model& model, const Array& z,
                                      const Array& y_prev_embedding,
                                      const EncoderState& encoder,
                                      const KeyphraseMemory& memory, const Array& style,
                                      const SourceContext& source,
                                      const std::vector<double>& spread,
                                      const Array* gate_override = nullptr);

Array generation_loss(Tape* tape, const std::vector<Array>& dists,
                      const std::vector<std::size_t>& gold);

// BOS, then each sentence's tokens followed by SNT, as extended ids.
std::vector<std::size_t> target_sequence(const Vocabulary& vocab, const SourceContext& source,
                                         const std::vector<TargetSentence>& targets);

struct TeacherForcedRealization {
  Array loss;
  std::size_t correct = 0;  // argmax == gold
  std::size_t total = 0;
};

TeacherForcedRealization teacher_forced_realize(
    Tape* tape, const Model& model, const EncoderState& encoder,
    const KeyphraseMemory& memory, const SourceContext& source,
    const std::vector<PlanStep>& plan, const std::vector<TargetSentence>& targets,
    std::optional<int> global_bit, const Dropout& dropout = {});

}  // namespace plangen
