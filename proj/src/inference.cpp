#include "plangen/inference.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace plangen {

using json = nlohmann::ordered_json;

void DecodeOptions::validate() const {
  if (beam < 1) throw Error("beam must be at least 1");
  if (max_sentences < 1) throw Error("max_sentences must be at least 1");
  if (!(threshold > 0 && threshold < 1)) throw Error("threshold must lie in (0, 1)");
  if (max_len < 1) throw Error("max_len must be at least 1");
}

bool repeats_trigram(const std::vector<std::size_t>& history, std::size_t next) {
  const std::size_t n = history.size();
  if (n < 2) return false;
  const std::size_t a = history[n - 2], b = history[n - 1];
  for (std::size_t i = 0; i + 2 < n; ++i)
    if (history[i] == a && history[i + 1] == b && history[i + 2] == next) return true;
  return false;
}

namespace {

bool is_boundary(std::size_t id) { return id == Vocabulary::kSnt || id == Vocabulary::kEos; }

struct StepOutput {
  std::vector<ops::LstmState> cells;
  std::vector<double> probs;
  std::vector<double> bank_attention;
};

StepOutput advance(const DecodeContext& ctx, const std::vector<ops::LstmState>& cells,
                   const std::vector<std::size_t>& sentence, std::size_t start_token,
                   const PlanStep& step, const Array& style) {
  const std::size_t y_prev = sentence.empty() ? start_token : sentence.back();
  Array emb = token_embedding(nullptr, ctx.model, y_prev);
  StepOutput out;
  out.cells = realize_step(nullptr, ctx.model, cells, emb, step.s);
  const auto spread = bank_spread(ctx.source, sentence, ctx.model.config().copy_spread);
  ExtendedVocabDist d = output_distribution(nullptr, ctx.model, out.cells.back().h, emb,
                                            ctx.encoder, ctx.memory, style, ctx.source, spread);
  out.probs.assign(d.probs.values().begin(), d.probs.values().end());
  out.bank_attention.assign(d.attn_bank.values().begin(), d.attn_bank.values().end());
  return out;
}

std::vector<std::size_t> history_of(const std::vector<std::size_t>& prefix,
                                    const std::vector<std::size_t>& tokens) {
  std::vector<std::size_t> h = prefix;
  for (auto t : tokens)
    if (!is_boundary(t)) h.push_back(t);
  return h;
}

void force_end(BeamHypothesis& h) {
  h.tokens.push_back(Vocabulary::kEos);
  h.bank_attention.emplace_back();
  h.finished = true;
}

}  // namespace

BeamHypothesis beam_search_sentence(const DecodeContext& ctx,
                                    const std::vector<ops::LstmState>& cells,
                                    std::size_t start_token, const PlanStep& step,
                                    const Array& style, const std::vector<std::size_t>& prefix,
                                    std::size_t beam_size, std::size_t max_len) {
  if (beam_size < 1) throw Error("beam_search_sentence: beam must be at least 1");
  if (max_len < 1) throw Error("beam_search_sentence: max_len must be at least 1");
  BeamHypothesis root;
  root.cells = cells;
  std::vector<BeamHypothesis> live{root}, finished;

  struct Candidate {
    double score;
    std::size_t hyp, token;
  };
  for (std::size_t len = 0; len < max_len && !live.empty() && finished.size() < beam_size; ++len) {
    std::vector<StepOutput> outputs;
    std::vector<Candidate> candidates;
    for (std::size_t h = 0; h < live.size(); ++h) {
      const auto& hyp = live[h];
      outputs.push_back(advance(ctx, hyp.cells, hyp.tokens, start_token, step, style));
      const auto history = history_of(prefix, hyp.tokens);
      bool any = false;
      for (std::size_t t = 0; t < outputs.back().probs.size(); ++t) {
        const double p = outputs.back().probs[t];
        if (!(p > 0.0)) continue;
        if (!is_boundary(t) && repeats_trigram(history, t)) continue;
        candidates.push_back({hyp.log_prob + std::log(p), h, t});
        any = true;
      }
      if (!any) {
        BeamHypothesis done = hyp;
        done.cells = outputs.back().cells;
        force_end(done);
        finished.push_back(std::move(done));
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    std::vector<BeamHypothesis> next;
    for (const auto& c : candidates) {
      if (next.size() + finished.size() >= beam_size) break;
      BeamHypothesis h = live[c.hyp];
      h.cells = outputs[c.hyp].cells;
      h.tokens.push_back(c.token);
      h.log_prob = c.score;
      h.bank_attention.push_back(outputs[c.hyp].bank_attention);
      if (is_boundary(c.token)) {
        h.finished = true;
        finished.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
  }
  for (auto& h : live) {
    force_end(h);
    finished.push_back(std::move(h));
  }
  // Mean log-prob per emitted token; earlier entries win ties.
  std::size_t best = 0;
  for (std::size_t i = 1; i < finished.size(); ++i)
    if (finished[i].normalized() > finished[best].normalized()) best = i;
  return finished[best];
}

BeamHypothesis greedy_sentence(const DecodeContext& ctx, const std::vector<ops::LstmState>& cells,
                               std::size_t start_token, const PlanStep& step,
                               const Array& style, const std::vector<std::size_t>& prefix,
                               std::size_t max_len) {
  BeamHypothesis h;
  h.cells = cells;
  while (h.tokens.size() < max_len) {
    StepOutput out = advance(ctx, h.cells, h.tokens, start_token, step, style);
    h.cells = out.cells;
    const auto history = history_of(prefix, h.tokens);
    std::size_t best = 0;
    double best_p = 0.0;
    for (std::size_t t = 0; t < out.probs.size(); ++t) {
      if (!is_boundary(t) && repeats_trigram(history, t)) continue;
      if (out.probs[t] > best_p) {
        best_p = out.probs[t];
        best = t;
      }
    }
    if (!(best_p > 0.0)) break;
    h.tokens.push_back(best);
    h.log_prob += std::log(best_p);
    h.bank_attention.push_back(out.bank_attention);
    if (is_boundary(best)) {
      h.finished = true;
      return h;
    }
  }
  force_end(h);
  return h;
}

Tokens replace_unknown_tokens(const Tokens& tokens,
                              const std::vector<std::vector<double>>& attention,
                              const KeyphraseBank& bank) {
  if (attention.size() != tokens.size())
    throw Error("replace_unknown_tokens: attention records do not align with tokens");
  const std::string unk = Vocabulary().token(Vocabulary::kUnk);
  Tokens out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] != unk) {
      out.push_back(tokens[i]);
      continue;
    }
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < attention[i].size() && k < bank.size(); ++k) {
      if (bank[k].is_sentinel()) continue;
      if (!best || attention[i][k] > attention[i][*best]) best = k;
    }
    if (!best) {
      out.push_back(tokens[i]);
      continue;
    }
    out.insert(out.end(), bank[*best].tokens.begin(), bank[*best].tokens.end());
  }
  return out;
}

namespace {

Generation realize_plan(const Model& model, const Sample& sample, const EncoderState& enc,
                        const KeyphraseMemory& memory, std::vector<PlanStep> plan,
                        const DecodeOptions& options) {
  SourceContext source =
      build_source_context(model.vocab(), encoder_input_tokens(sample), enc.length, sample.bank);
  DecodeContext ctx{model, enc, memory, source};
  Generation g;
  g.id = sample.id;
  auto cells = enc.init_states;
  std::size_t y_prev = Vocabulary::kBos;
  std::vector<std::size_t> history;
  for (const auto& step : plan) {
    Array style = style_vector(model.config(), step.style, sample.global_style);
    BeamHypothesis h =
        options.greedy
            ? greedy_sentence(ctx, cells, y_prev, step, style, history, options.max_len)
            : beam_search_sentence(ctx, cells, y_prev, step, style, history, options.beam,
                                   options.max_len);
    cells = h.cells;
    y_prev = Vocabulary::kSnt;
    g.log_prob += h.log_prob;
    Tokens words;
    std::vector<std::vector<double>> attention;
    for (std::size_t i = 0; i < h.tokens.size(); ++i) {
      if (is_boundary(h.tokens[i])) continue;
      history.push_back(h.tokens[i]);
      words.push_back(source.token(model.vocab(), h.tokens[i]));
      attention.push_back(h.bank_attention[i]);
    }
    if (options.replace_unknown) words = replace_unknown_tokens(words, attention, sample.bank);
    g.output.insert(g.output.end(), words.begin(), words.end());
    g.sentences.push_back(std::move(words));
  }
  g.plan = std::move(plan);
  g.bank_size = sample.bank.size();
  return g;
}

}  // namespace

Generation generate(const Model& model, const Sample& sample, const DecodeOptions& options) {
  options.validate();
  if (options.oracle_plan) {
    if (sample.targets.empty())
      throw Error("oracle plan requested but sample " + sample.id + " has no gold plan");
    std::vector<std::vector<std::size_t>> gold;
    for (const auto& t : sample.targets) gold.push_back(t.selection);
    return generate_with_plan(model, sample, gold, options);
  }
  EncoderState enc = encode_input(nullptr, model, input_ids(model, sample));
  KeyphraseMemory memory = encode_keyphrase_bank(nullptr, model, sample.bank);
  PlanState init = initial_plan_state(model, enc, memory);
  auto plan = infer_plan(model, memory, init, {options.max_sentences, options.threshold},
                         sample.global_style);
  return realize_plan(model, sample, enc, memory, std::move(plan), options);
}

Generation generate_with_plan(const Model& model, const Sample& sample,
                              const std::vector<std::vector<std::size_t>>& selections,
                              const DecodeOptions& options) {
  options.validate();
  EncoderState enc = encode_input(nullptr, model, input_ids(model, sample));
  KeyphraseMemory memory = encode_keyphrase_bank(nullptr, model, sample.bank);
  PlanState init = initial_plan_state(model, enc, memory);
  auto plan = execute_plan(nullptr, model, memory, init, selections, sample.global_style);
  return realize_plan(model, sample, enc, memory, std::move(plan), options);
}

std::vector<std::vector<std::size_t>> plan_raw_selections(const std::vector<PlanStep>& plan,
                                                          std::size_t bank_size) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& step : plan) {
    std::vector<std::size_t> raw;
    for (auto k : step.selection)
      if (k >= 1 && k + 1 < bank_size) raw.push_back(k - 1);
    out.push_back(std::move(raw));
  }
  return out;
}

namespace {

json plan_to_json(const std::vector<PlanStep>& plan, std::size_t bank_size) {
  json arr = json::array();
  auto raw = plan_raw_selections(plan, bank_size);
  for (std::size_t j = 0; j < plan.size(); ++j)
    arr.push_back(json{{"selection", raw[j]}, {"style", plan[j].style}});
  return arr;
}

}  // namespace

std::string plan_json(const std::vector<PlanStep>& plan, std::size_t bank_size) {
  return plan_to_json(plan, bank_size).dump();
}

std::string generation_jsonl(const Generation& g) {
  json rec{{"id", g.id}, {"output", g.output}, {"plan", plan_to_json(g.plan, g.bank_size)}};
  return rec.dump();
}

std::vector<GenerationRecord> parse_generations(const std::string& text) {
  std::vector<GenerationRecord> out;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json rec = json::parse(line);
      GenerationRecord r;
      r.id = rec.at("id").get<std::string>();
      r.output = rec.at("output").get<Tokens>();
      for (const auto& step : rec.at("plan")) {
        r.plan.push_back(step.at("selection").get<std::vector<std::size_t>>());
        r.styles.push_back(step.at("style").get<int>());
      }
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error("generation line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace plangen
