#include "plangen/realizer.hpp"

#include <algorithm>
#include <limits>

namespace plangen {

std::size_t SourceContext::ext_id(const Vocabulary& vocab, const std::string& token) const {
  if (vocab.contains(token)) return vocab.id(token);
  auto it = std::find(oov_tokens.begin(), oov_tokens.end(), token);
  if (it != oov_tokens.end()) return vocab_size + static_cast<std::size_t>(it - oov_tokens.begin());
  return Vocabulary::kUnk;
}

std::string SourceContext::token(const Vocabulary& vocab, std::size_t ext) const {
  if (ext < vocab_size) return vocab.token(ext);
  if (ext - vocab_size < oov_tokens.size()) return oov_tokens[ext - vocab_size];
  throw Error("extended id " + std::to_string(ext) + " out of range");
}

SourceContext build_source_context(const Vocabulary& vocab, const Tokens& input,
                                   std::size_t input_rows, const KeyphraseBank& bank) {
  if (input.empty()) throw Error("build_source_context: empty input");
  const bool pooled = input_rows == 1 && input.size() > 1;
  if (!pooled && input_rows != input.size())
    throw Error("build_source_context: input rows do not match the input tokens");
  SourceContext src;
  src.vocab_size = vocab.size();
  auto intern = [&](const std::string& t) {
    if (!vocab.contains(t) &&
        std::find(src.oov_tokens.begin(), src.oov_tokens.end(), t) == src.oov_tokens.end())
      src.oov_tokens.push_back(t);
    return src.ext_id(vocab, t);
  };
  for (std::size_t i = 0; i < input.size(); ++i) {
    src.input_ext.push_back(intern(input[i]));
    src.input_row.push_back(pooled ? 0 : i);
    src.input_weight.push_back(pooled ? 1.0 / static_cast<double>(input.size()) : 1.0);
  }
  for (std::size_t k = 0; k < bank.size(); ++k) {
    if (bank[k].is_sentinel()) continue;
    const std::size_t slot = src.content_entries.size();
    src.content_entries.push_back(k);
    const double w = 1.0 / static_cast<double>(bank[k].tokens.size());
    for (const auto& t : bank[k].tokens) {
      src.bank_ext.push_back(intern(t));
      src.bank_slot.push_back(slot);
      src.bank_weight.push_back(w);
    }
  }
  return src;
}

std::vector<double> bank_spread(const SourceContext& source,
                                const std::vector<std::size_t>& sentence_so_far,
                                CopySpread mode) {
  const std::size_t n = source.content_entries.size();
  std::vector<std::size_t> total(n, 0);
  for (auto k : source.bank_slot) ++total[k];
  std::vector<double> w(source.bank_ext.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = 1.0 / static_cast<double>(total[source.bank_slot[i]]);
  if (mode == CopySpread::kUniform) return w;

  std::vector<std::optional<std::size_t>> next(n);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const std::size_t k = source.bank_slot[i];
    const bool emitted = std::find(sentence_so_far.begin(), sentence_so_far.end(),
                                   source.bank_ext[i]) != sentence_so_far.end();
    if (!emitted && !next[k]) next[k] = i;
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    const std::size_t k = source.bank_slot[i];
    if (next[k]) w[i] = *next[k] == i ? 1.0 : 0.0;
  }
  return w;
}

Array style_vector(const ModelConfig& config, int style, std::optional<int> global_bit) {
  const int n = config.n_styles();
  if (style < 0 || style >= n)
    throw Error("style " + std::to_string(style) + " outside arity " + std::to_string(n));
  Array v({config.style_input_size()});
  v[static_cast<std::size_t>(style)] = 1.0;
  if (config.global_style()) {
    if (!global_bit) throw Error("task requires a global style bit");
    v[static_cast<std::size_t>(n)] = *global_bit ? 1.0 : 0.0;
  }
  return v;
}

Array token_embedding(Tape* tape, const Model& model, std::size_t ext_id) {
  const std::size_t id = ext_id < model.vocab().size() ? ext_id : Vocabulary::kUnk;
  return ops::row(tape, model.weights().word_embedding, id);
}

std::vector<ops::LstmState> realize_step(Tape* tape, const Model& model,
                                         const std::vector<ops::LstmState>& prev,
                                         const Array& y_prev_embedding, const Array& s,
                                         const Dropout& dropout) {
  const auto& w = model.weights();
  if (s.size() != model.config().hidden || y_prev_embedding.size() != model.config().embedding_dim)
    throw Error("realize_step: shape mismatch");
  Array u = ops::tanh(tape, ops::add(tape, ops::matvec(tape, w.plan_proj_w, s),
                                     ops::linear(tape, w.token_proj_w, y_prev_embedding,
                                                 w.realizer_in_b)));
  return stacked_lstm_step(tape, u, prev, w.realizer_cells, dropout);
}

namespace {

constexpr double kMasked = -std::numeric_limits<double>::infinity();

Array attend(Tape* tape, const Array& rows, const Array& w, const Array& z) {
  return ops::softmax(tape, ops::matvec(tape, rows, ops::matvec_t(tape, w, z)));
}

}  // namespace

ExtendedVocabDist output_distribution(Tape* tape, const Model& model, const Array& z,
                                      const Array& y_prev_embedding,
                                      const EncoderState& encoder,
                                      const KeyphraseMemory& memory, const Array& style,
                                      const SourceContext& source,
                                      const std::vector<double>& spread,
                                      const Array* gate_override) {
  const auto& w = model.weights();
  const std::size_t V = model.vocab().size(), ext = source.extended_size();
  if (style.size() != model.config().style_input_size())
    throw Error("output_distribution: style vector has " + std::to_string(style.size()) +
                " entries, expected " + std::to_string(model.config().style_input_size()));
  if (source.vocab_size != V) throw Error("output_distribution: source context vocabulary mismatch");
  if (spread.size() != source.bank_ext.size())
    throw Error("output_distribution: bank spread does not match the bank tokens");

  ExtendedVocabDist out;
  out.attn_input = attend(tape, encoder.hidden_seq, w.input_attn_w, z);
  out.attn_bank = attend(tape, memory.matrix_E, w.bank_attn_w, z);
  Array c_w = ops::matvec_t(tape, encoder.hidden_seq, out.attn_input);
  Array c_e = ops::matvec_t(tape, memory.matrix_E, out.attn_bank);

  std::vector<double> vocab_mask(V, 0.0);
  vocab_mask[Vocabulary::kPad] = kMasked;
  vocab_mask[Vocabulary::kBos] = kMasked;
  Array logits = ops::scale(
      tape,
      ops::tanh(tape, ops::linear(tape, w.vocab_w,
                                  ops::concat(tape, std::vector<Array>{z, c_w, c_e, style}),
                                  w.vocab_b)),
      model.config().logit_scale);
  out.generation = ops::softmax(tape, ops::add(tape, logits, Array::vector(vocab_mask)));

  if (gate_override) {
    out.gate = *gate_override;
  } else {
    Array gate_logits = ops::linear(
        tape, w.gate_w, ops::concat(tape, std::vector<Array>{z, c_w, c_e, y_prev_embedding}),
        w.gate_b);
    if (!source.has_bank_copy())
      gate_logits = ops::add(tape, gate_logits, Array::vector({0.0, 0.0, kMasked}));
    out.gate = ops::softmax(tape, gate_logits);
  }

  Array probs = ops::mul_scalar(tape, ops::pad_to(tape, out.generation, ext),
                                ops::pick(tape, out.gate, 0));
  Array input_copy = ops::scatter_add(
      tape, ops::gather_scaled(tape, out.attn_input, source.input_row, source.input_weight),
      source.input_ext, ext);
  probs = ops::add(tape, probs, ops::mul_scalar(tape, input_copy, ops::pick(tape, out.gate, 1)));
  if (source.has_bank_copy()) {
    std::vector<double> ones(source.content_entries.size(), 1.0);
    Array content = ops::normalize(
        tape, ops::gather_scaled(tape, out.attn_bank, source.content_entries, ones));
    Array bank_copy = ops::scatter_add(
        tape, ops::gather_scaled(tape, content, source.bank_slot, spread),
        source.bank_ext, ext);
    probs = ops::add(tape, probs, ops::mul_scalar(tape, bank_copy, ops::pick(tape, out.gate, 2)));
  }
  out.probs = probs;
  return out;
}

Array generation_loss(Tape* tape, const std::vector<Array>& dists,
                      const std::vector<std::size_t>& gold) {
  if (dists.size() != gold.size()) throw Error("generation_loss: step count mismatch");
  if (dists.empty()) return Array::scalar(0.0);
  Array total;
  for (std::size_t t = 0; t < dists.size(); ++t) {
    const std::size_t y = gold[t] < dists[t].size() ? gold[t] : Vocabulary::kUnk;
    Array term = ops::negative_log_likelihood(tape, dists[t], y);
    total = t == 0 ? term : ops::add(tape, total, term);
  }
  return total;
}

std::vector<std::size_t> target_sequence(const Vocabulary& vocab, const SourceContext& source,
                                         const std::vector<TargetSentence>& targets) {
  std::vector<std::size_t> seq{Vocabulary::kBos};
  for (const auto& t : targets) {
    for (const auto& tok : t.tokens) seq.push_back(source.ext_id(vocab, tok));
    seq.push_back(Vocabulary::kSnt);
  }
  return seq;
}

TeacherForcedRealization teacher_forced_realize(
    Tape* tape, const Model& model, const EncoderState& encoder,
    const KeyphraseMemory& memory, const SourceContext& source,
    const std::vector<PlanStep>& plan, const std::vector<TargetSentence>& targets,
    std::optional<int> global_bit, const Dropout& dropout) {
  if (plan.size() != targets.size())
    throw Error("teacher_forced_realize: plan has " + std::to_string(plan.size()) +
                " steps for " + std::to_string(targets.size()) + " sentences");
  const auto seq = target_sequence(model.vocab(), source, targets);
  TeacherForcedRealization out;
  std::vector<Array> dists;
  std::vector<std::size_t> gold;
  auto cells = encoder.init_states;
  std::size_t pos = 1;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    Array style = style_vector(model.config(), plan[j].style, global_bit);
    const std::size_t len = targets[j].tokens.size() + 1;
    std::vector<std::size_t> sentence;
    for (std::size_t t = 0; t < len; ++t, ++pos) {
      Array y_prev = token_embedding(tape, model, seq[pos - 1]);
      cells = realize_step(tape, model, cells, y_prev, plan[j].s, dropout);
      ExtendedVocabDist d =
          output_distribution(tape, model, cells.back().h, y_prev, encoder, memory, style,
                              source, bank_spread(source, sentence, model.config().copy_spread));
      sentence.push_back(seq[pos]);
      auto p = d.probs.values();
      const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
      if (best == seq[pos]) ++out.correct;
      ++out.total;
      dists.push_back(d.probs);
      gold.push_back(seq[pos]);
    }
  }
  out.loss = generation_loss(tape, dists, gold);
  return out;
}

}  // namespace plangen
