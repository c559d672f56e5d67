#pragma once

#include <cstdint>
#include <vector>

#include "plangen/corpus.hpp"
#include "plangen/ops.hpp"
#include "plangen/params.hpp"
#include "plangen/task.hpp"

namespace plangen {

// How a phrase's bank-copy mass reaches its tokens. Uniform splits it evenly;
// sequential gives all of it to the phrase's first token not yet emitted in
// the current sentence (uniform again once every token is out).
enum class CopySpread { kUniform, kSequential };
CopySpread parse_copy_spread(const std::string& name);
std::string copy_spread_name(CopySpread spread);

struct ModelConfig {
  Task task = Task::kArgument;
  std::size_t embedding_dim = 300;
  std::size_t hidden = 512;  // decoder width; each reader direction gets half
  std::size_t layers = 2;
  double dropout = 0.2;
  double init_scale = 0.1;
  double forget_bias = 1.0;
  // Multiplies the tanh-bounded vocabulary logits; 1 is the plain form.
  double logit_scale = 1.0;
  CopySpread copy_spread = CopySpread::kUniform;
  std::uint64_t seed = 1;

  int n_styles() const { return style_arity(task); }
  bool global_style() const { return uses_global_style(task); }
  // Width of the style vector fed to the realizer (one-hot plus global bit).
  std::size_t style_input_size() const {
    return static_cast<std::size_t>(n_styles()) + (global_style() ? 1 : 0);
  }
  // Width of m_j as consumed by the planner and style predictor.
  std::size_t plan_input_size() const { return hidden + (global_style() ? 1 : 0); }
  void validate() const;
};

struct BiLstmWeights {
  ops::LstmWeights forward;
  ops::LstmWeights backward;
};

struct BridgeWeights {
  Array h_w, h_b, c_w, c_b;
};

// Handles into the ParamStore; copying the struct shares storage.
struct ModelWeights {
  Array word_embedding;  // [V x D]
  Array start_embedding, end_embedding;
  BiLstmWeights input_reader;
  Array title_w, title_b;  // title-by-summation mode only
  std::vector<BridgeWeights> bridge;  // one per decoder layer
  BiLstmWeights keyphrase_reader;

  std::vector<ops::LstmWeights> planner_cells;
  Array select_state_w, select_bias, select_history_w;  // w_v, bias, W^c
  Array style_hidden_w, style_out_w, style_out_b;       // W^s, w_s, bias

  Array plan_proj_w, token_proj_w, realizer_in_b;  // W^ws, W^ww, bias
  std::vector<ops::LstmWeights> realizer_cells;
  Array input_attn_w, bank_attn_w;  // W^wa, W^we
  Array vocab_w, vocab_b;           // W^o, bias
  Array gate_w, gate_b;             // copy gate over {generate, input, bank}
};

class Model {
 public:
  Model(ModelConfig config, Vocabulary vocab);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const ModelWeights& weights() const { return weights_; }
  ModelWeights& weights() { return weights_; }

 private:
  ModelConfig config_;
  Vocabulary vocab_;
  ParamStore params_;
  ModelWeights weights_;
};

// Inverted dropout; inactive when rate is 0 or no rng is attached.
struct Dropout {
  double rate = 0.0;
  Rng* rng = nullptr;
  bool active() const { return rate > 0.0 && rng != nullptr; }
};

Array apply_dropout(Tape* tape, const Array& x, const Dropout& dropout);

// Runs a stack of LSTM cells, applying dropout between layers. Returns the
// new per-layer states; the top layer's h is the output.
std::vector<ops::LstmState> stacked_lstm_step(Tape* tape, const Array& input,
                                              const std::vector<ops::LstmState>& prev,
                                              const std::vector<ops::LstmWeights>& cells,
                                              const Dropout& dropout);

std::vector<ops::LstmState> zero_states(std::size_t layers, std::size_t hidden);

}  // namespace plangen
