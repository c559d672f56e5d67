#include "plangen/encoder.hpp"

#include <fstream>
#include <sstream>

namespace plangen {

std::vector<double> KeyphraseMemory::entry_encoding(std::size_t k) const {
  auto v = matrix_E.values().subspan(k * matrix_E.cols(), matrix_E.cols());
  return {v.begin(), v.end()};
}

BiLstmOutput run_bilstm(Tape* tape, const std::vector<Array>& inputs,
                        const BiLstmWeights& weights) {
  const std::size_t n = inputs.size();
  const std::size_t h = weights.forward.hidden_size();
  BiLstmOutput out;
  ops::LstmState state{Array({h}), Array({h})};
  for (std::size_t i = 0; i < n; ++i) {
    state = ops::lstm_cell_step(tape, inputs[i], state, weights.forward);
    out.forward.push_back(state);
  }
  out.backward.resize(n);
  state = {Array({h}), Array({h})};
  for (std::size_t i = n; i-- > 0;) {
    state = ops::lstm_cell_step(tape, inputs[i], state, weights.backward);
    out.backward[i] = state;
  }
  return out;
}

namespace {

Array embed(Tape* tape, const Model& model, std::size_t id) {
  return ops::row(tape, model.weights().word_embedding, id);
}

std::vector<ops::LstmState> bridge(Tape* tape, const Model& model, const Array& fused_h,
                                   const Array& fused_c) {
  std::vector<ops::LstmState> states;
  for (const auto& b : model.weights().bridge)
    states.push_back({ops::linear(tape, b.h_w, fused_h, b.h_b),
                      ops::linear(tape, b.c_w, fused_c, b.c_b)});
  return states;
}

}  // namespace

EncoderState encode_input(Tape* tape, const Model& model,
                          const std::vector<std::size_t>& token_ids) {
  if (token_ids.empty()) throw Error("encode_input: empty input");
  const auto& w = model.weights();
  std::vector<Array> embedded;
  embedded.reserve(token_ids.size());
  for (auto id : token_ids) embedded.push_back(embed(tape, model, id));

  EncoderState state;
  state.length = token_ids.size();
  if (encodes_title_by_sum(model.config().task)) {
    Array total = embedded.front();
    for (std::size_t i = 1; i < embedded.size(); ++i) total = ops::add(tape, total, embedded[i]);
    Array row = ops::linear(tape, w.title_w, total, w.title_b);
    // One summary row stands for the whole title.
    state.length = 1;
    state.hidden_seq = ops::stack_rows(tape, std::vector<Array>{row});
    state.init_states = bridge(tape, model, row, row);
    return state;
  }

  BiLstmOutput bi = run_bilstm(tape, embedded, w.input_reader);
  std::vector<Array> rows;
  rows.reserve(bi.forward.size());
  for (std::size_t i = 0; i < bi.forward.size(); ++i)
    rows.push_back(ops::concat(tape, std::vector<Array>{bi.forward[i].h, bi.backward[i].h}));
  state.hidden_seq = ops::stack_rows(tape, rows);
  Array fused_h = ops::concat(tape, std::vector<Array>{bi.forward.back().h, bi.backward.front().h});
  Array fused_c = ops::concat(tape, std::vector<Array>{bi.forward.back().c, bi.backward.front().c});
  state.init_states = bridge(tape, model, fused_h, fused_c);
  return state;
}

std::vector<std::size_t> input_ids(const Model& model, const Sample& sample) {
  std::vector<std::size_t> ids;
  for (const auto& t : encoder_input_tokens(sample)) ids.push_back(model.vocab().id(t));
  return ids;
}

Array phrase_embedding(Tape* tape, const Model& model, const Keyphrase& phrase) {
  const auto& w = model.weights();
  if (phrase.kind == Keyphrase::Kind::kStart) return w.start_embedding;
  if (phrase.kind == Keyphrase::Kind::kEnd) return w.end_embedding;
  if (phrase.tokens.empty()) throw Error("phrase_embedding: empty keyphrase");
  Array total = embed(tape, model, model.vocab().id(phrase.tokens.front()));
  for (std::size_t i = 1; i < phrase.tokens.size(); ++i)
    total = ops::add(tape, total, embed(tape, model, model.vocab().id(phrase.tokens[i])));
  return total;
}

KeyphraseMemory encode_keyphrase_bank(Tape* tape, const Model& model,
                                      const KeyphraseBank& bank) {
  if (bank.size() < 2) throw Error("encode_keyphrase_bank: bank lacks sentinels");
  KeyphraseMemory memory;
  for (const auto& kp : bank) memory.embeddings.push_back(phrase_embedding(tape, model, kp));
  BiLstmOutput bi = run_bilstm(tape, memory.embeddings, model.weights().keyphrase_reader);
  std::vector<Array> rows;
  for (std::size_t k = 0; k < bank.size(); ++k)
    rows.push_back(ops::concat(tape, std::vector<Array>{bi.forward[k].h, bi.backward[k].h}));
  memory.matrix_E = ops::stack_rows(tape, rows);
  memory.start_index = 0;
  memory.end_index = bank.size() - 1;
  return memory;
}

std::size_t load_pretrained_embeddings(Model& model, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file " + path);
  Array& table = model.weights().word_embedding;
  const std::size_t dim = table.cols();
  std::size_t replaced = 0, number = 0;
  for (std::string line; std::getline(in, line);) {
    ++number;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> values;
    for (double v; fields >> v;) values.push_back(v);
    if (values.size() != dim)
      throw Error("embedding file line " + std::to_string(number) + ": expected " +
                  std::to_string(dim) + " values, got " + std::to_string(values.size()));
    if (!model.vocab().contains(token)) continue;
    const std::size_t id = model.vocab().id(token);
    std::copy(values.begin(), values.end(), table.values().begin() + id * dim);
    ++replaced;
  }
  return replaced;
}

}  // namespace plangen
