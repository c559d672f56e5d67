#include "plangen/model.hpp"

namespace plangen {

CopySpread parse_copy_spread(const std::string& name) {
  if (name == "uniform") return CopySpread::kUniform;
  if (name == "sequential") return CopySpread::kSequential;
  throw Error("unknown copy_spread \"" + name + "\" (uniform or sequential)");
}

std::string copy_spread_name(CopySpread spread) {
  return spread == CopySpread::kUniform ? "uniform" : "sequential";
}

void ModelConfig::validate() const {
  if (embedding_dim == 0) throw Error("embedding_dim must be positive");
  if (hidden < 2 || hidden % 2 != 0) throw Error("hidden must be an even number >= 2");
  if (layers < 1) throw Error("layers must be at least 1");
  if (dropout < 0.0 || dropout >= 1.0) throw Error("dropout must lie in [0, 1)");
  if (!(init_scale > 0.0)) throw Error("init_scale must be positive");
  if (!(logit_scale > 0.0)) throw Error("logit_scale must be positive");
}

namespace {

ops::LstmWeights add_lstm(ParamStore& p, const std::string& name, std::size_t in,
                          std::size_t hidden, Rng& rng, const ModelConfig& cfg) {
  ops::LstmWeights w;
  w.w = p.add(name + ".w", {4 * hidden, in + hidden}, rng, cfg.init_scale);
  w.b = p.add(name + ".b", {4 * hidden}, rng, cfg.init_scale);
  for (std::size_t i = hidden; i < 2 * hidden; ++i) w.b[i] = cfg.forget_bias;
  return w;
}

}  // namespace

Model::Model(ModelConfig config, Vocabulary vocab)
    : config_(config), vocab_(std::move(vocab)) {
  config_.validate();
  Rng rng(config_.seed);
  const std::size_t V = vocab_.size(), D = config_.embedding_dim, H = config_.hidden,
                    half = H / 2, S = config_.style_input_size(),
                    M = config_.plan_input_size();
  const double scale = config_.init_scale;
  auto& p = params_;
  auto& w = weights_;

  w.word_embedding = p.add("embed.word", {V, D}, rng, scale);
  w.start_embedding = p.add("embed.start", {D}, rng, scale);
  w.end_embedding = p.add("embed.end", {D}, rng, scale);

  if (encodes_title_by_sum(config_.task)) {
    w.title_w = p.add("encoder.title.w", {H, D}, rng, scale);
    w.title_b = p.add("encoder.title.b", {H}, rng, scale);
  } else {
    w.input_reader.forward = add_lstm(p, "encoder.fwd", D, half, rng, config_);
    w.input_reader.backward = add_lstm(p, "encoder.bwd", D, half, rng, config_);
  }
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::string n = "bridge.l" + std::to_string(l);
    BridgeWeights b;
    b.h_w = p.add(n + ".h.w", {H, H}, rng, scale);
    b.h_b = p.add(n + ".h.b", {H}, rng, scale);
    b.c_w = p.add(n + ".c.w", {H, H}, rng, scale);
    b.c_b = p.add(n + ".c.b", {H}, rng, scale);
    w.bridge.push_back(b);
  }
  w.keyphrase_reader.forward = add_lstm(p, "kpreader.fwd", D, half, rng, config_);
  w.keyphrase_reader.backward = add_lstm(p, "kpreader.bwd", D, half, rng, config_);

  for (std::size_t l = 0; l < config_.layers; ++l)
    w.planner_cells.push_back(
        add_lstm(p, "planner.l" + std::to_string(l), l == 0 ? M : H, H, rng, config_));
  w.select_state_w = p.add("planner.select.state_w", {H}, rng, scale);
  w.select_bias = p.add("planner.select.b", {1}, rng, scale);
  w.select_history_w = p.add("planner.select.history_w", {H, H}, rng, scale);
  w.style_hidden_w = p.add("planner.style.hidden_w", {H, M + H}, rng, scale);
  w.style_out_w = p.add("planner.style.out_w",
                        {static_cast<std::size_t>(config_.n_styles()), H}, rng, scale);
  w.style_out_b = p.add("planner.style.out_b",
                        {static_cast<std::size_t>(config_.n_styles())}, rng, scale);

  w.plan_proj_w = p.add("realizer.plan_w", {H, H}, rng, scale);
  w.token_proj_w = p.add("realizer.token_w", {H, D}, rng, scale);
  w.realizer_in_b = p.add("realizer.in_b", {H}, rng, scale);
  for (std::size_t l = 0; l < config_.layers; ++l)
    w.realizer_cells.push_back(
        add_lstm(p, "realizer.l" + std::to_string(l), H, H, rng, config_));
  w.input_attn_w = p.add("realizer.attn.input_w", {H, H}, rng, scale);
  w.bank_attn_w = p.add("realizer.attn.bank_w", {H, H}, rng, scale);
  w.vocab_w = p.add("realizer.vocab.w", {V, 3 * H + S}, rng, scale);
  w.vocab_b = p.add("realizer.vocab.b", {V}, rng, scale);
  w.gate_w = p.add("realizer.gate.w", {3, 3 * H + D}, rng, scale);
  w.gate_b = p.add("realizer.gate.b", {3}, rng, scale);
}

Array apply_dropout(Tape* tape, const Array& x, const Dropout& dropout) {
  if (!dropout.active()) return x;
  const double keep = 1.0 - dropout.rate;
  std::vector<double> mask(x.size());
  for (double& m : mask) m = dropout.rng->uniform() < keep ? 1.0 / keep : 0.0;
  return ops::apply_mask(tape, x, mask);
}

std::vector<ops::LstmState> stacked_lstm_step(Tape* tape, const Array& input,
                                              const std::vector<ops::LstmState>& prev,
                                              const std::vector<ops::LstmWeights>& cells,
                                              const Dropout& dropout) {
  if (prev.size() != cells.size()) throw Error("stacked_lstm_step: layer count mismatch");
  std::vector<ops::LstmState> next;
  next.reserve(cells.size());
  Array x = input;
  for (std::size_t l = 0; l < cells.size(); ++l) {
    if (l > 0) x = apply_dropout(tape, x, dropout);
    next.push_back(ops::lstm_cell_step(tape, x, prev[l], cells[l]));
    x = next.back().h;
  }
  return next;
}

std::vector<ops::LstmState> zero_states(std::size_t layers, std::size_t hidden) {
  std::vector<ops::LstmState> out;
  for (std::size_t l = 0; l < layers; ++l) out.push_back({Array({hidden}), Array({hidden})});
  return out;
}

}  // namespace plangen
