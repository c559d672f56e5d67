#include "plangen/planner.hpp"

#include <algorithm>

namespace plangen {

PlanState initial_plan_state(const Model& model, const EncoderState& encoder,
                             const KeyphraseMemory& memory) {
  PlanState state;
  state.usage_counts.assign(memory.size(), 0.0);
  state.q = Array({model.config().hidden});
  state.cells = encoder.init_states;
  return state;
}

PlanStepResult plan_step(Tape* tape, const Model& model, const PlanState& state,
                         const std::vector<std::size_t>& prev_selection,
                         const KeyphraseMemory& memory, std::optional<int> global_bit,
                         const Dropout& dropout) {
  const auto& w = model.weights();
  const std::size_t H = model.config().hidden;
  if (memory.matrix_E.cols() != H || state.q.size() != H ||
      state.usage_counts.size() != memory.size())
    throw Error("plan_step: dimension mismatch between plan state and keyphrase memory");
  if (model.config().global_style() && !global_bit)
    throw Error("plan_step: task requires a global style bit");

  Array m_core({H});
  for (std::size_t i = 0; i < prev_selection.size(); ++i) {
    const std::size_t k = prev_selection[i];
    if (k >= memory.size()) throw Error("plan_step: selection index outside the bank");
    Array r = ops::row(tape, memory.matrix_E, k);
    m_core = i == 0 ? r : ops::add(tape, m_core, r);
  }
  Array m = m_core;
  if (model.config().global_style())
    m = ops::concat(tape, std::vector<Array>{m_core, Array::scalar(*global_bit ? 1.0 : 0.0)});

  PlanStepResult out;
  out.state = state;
  for (auto k : prev_selection) out.state.usage_counts[k] += 1.0;
  out.state.q = ops::add(tape, state.q, m_core);
  out.state.sentence_index = state.sentence_index + 1;
  out.state.cells = stacked_lstm_step(tape, m, state.cells, w.planner_cells, dropout);
  out.s = out.state.cells.back().h;
  out.m = m;

  // sigma(w_v . s + b + q W^c h^e_k) for all k at once.
  Array history = ops::matvec(tape, memory.matrix_E,
                              ops::matvec_t(tape, w.select_history_w, out.state.q));
  Array state_term = ops::add(tape, ops::dot(tape, w.select_state_w, out.s), w.select_bias);
  out.scores = ops::sigmoid(tape, ops::add_scalar(tape, history, state_term));
  return out;
}

StylePrediction predict_style(Tape* tape, const Model& model, const Array& m,
                              const Array& s) {
  const auto& w = model.weights();
  Array hidden =
      ops::tanh(tape, ops::matvec(tape, w.style_hidden_w, ops::concat(tape, std::vector<Array>{m, s})));
  StylePrediction out;
  out.dist = ops::softmax(tape, ops::linear(tape, w.style_out_w, hidden, w.style_out_b));
  auto v = out.dist.values();
  out.style = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
  return out;
}

Array selection_loss(Tape* tape, const std::vector<Array>& scores,
                     const std::vector<std::vector<double>>& gold) {
  if (scores.size() != gold.size()) throw Error("selection_loss: step count mismatch");
  if (scores.empty()) return Array::scalar(0.0);
  Array total = ops::binary_cross_entropy(tape, scores[0], gold[0]);
  for (std::size_t j = 1; j < scores.size(); ++j)
    total = ops::add(tape, total, ops::binary_cross_entropy(tape, scores[j], gold[j]));
  return total;
}

Array style_loss(Tape* tape, const std::vector<Array>& dists, const std::vector<int>& gold) {
  if (dists.size() != gold.size()) throw Error("style_loss: sentence count mismatch");
  if (dists.empty()) return Array::scalar(0.0);
  Array total;
  for (std::size_t j = 0; j < dists.size(); ++j) {
    if (gold[j] < 0 || static_cast<std::size_t>(gold[j]) >= dists[j].size())
      throw Error("style_loss: gold style " + std::to_string(gold[j]) + " out of range");
    Array term = ops::negative_log_likelihood(tape, dists[j], static_cast<std::size_t>(gold[j]));
    total = j == 0 ? term : ops::add(tape, total, term);
  }
  return total;
}

std::vector<double> selection_vector(const std::vector<std::size_t>& selection,
                                     std::size_t bank_size) {
  std::vector<double> v(bank_size, 0.0);
  for (auto k : selection) v.at(k) = 1.0;
  return v;
}

namespace {

PlanStep make_step(Tape* tape, const Model& model, const PlanStepResult& r,
                   std::vector<std::size_t> selection, std::optional<int> forced_style) {
  PlanStep step;
  step.selection = std::move(selection);
  step.s = r.s;
  step.m = r.m;
  StylePrediction style = predict_style(tape, model, r.m, r.s);
  step.style_dist = style.dist;
  step.style = forced_style ? *forced_style : style.style;
  return step;
}

}  // namespace

std::vector<PlanStep> infer_plan(const Model& model, const KeyphraseMemory& memory,
                                 const PlanState& init, const PlanLimits& limits,
                                 std::optional<int> global_bit) {
  if (limits.max_sentences < 1) throw Error("infer_plan: max_sentences must be >= 1");
  if (!(limits.threshold > 0.0 && limits.threshold < 1.0))
    throw Error("infer_plan: threshold must lie in (0, 1)");
  std::vector<PlanStep> plan;
  PlanStepResult r = plan_step(nullptr, model, init, {memory.start_index}, memory, global_bit);
  while (plan.size() < limits.max_sentences) {
    if (r.scores[memory.end_index] > limits.threshold) break;
    std::vector<std::size_t> selection;
    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t k = memory.start_index + 1; k < memory.end_index; ++k) {
      if (r.scores[k] > limits.threshold) selection.push_back(k);
      if (r.scores[k] > best_score) {
        best_score = r.scores[k];
        best = k;
      }
    }
    if (best_score < 0.0) break;  // no content entries
    if (selection.empty()) selection.push_back(best);
    r = plan_step(nullptr, model, r.state, selection, memory, global_bit);
    plan.push_back(make_step(nullptr, model, r, selection, std::nullopt));
  }
  return plan;
}

std::vector<PlanStep> execute_plan(Tape* tape, const Model& model,
                                   const KeyphraseMemory& memory, const PlanState& init,
                                   const std::vector<std::vector<std::size_t>>& selections,
                                   std::optional<int> global_bit,
                                   const std::vector<int>* styles, const Dropout& dropout) {
  if (styles && styles->size() != selections.size())
    throw Error("execute_plan: style count does not match the plan");
  std::vector<PlanStep> plan;
  PlanStepResult r =
      plan_step(tape, model, init, {memory.start_index}, memory, global_bit, dropout);
  for (std::size_t j = 0; j < selections.size(); ++j) {
    r = plan_step(tape, model, r.state, selections[j], memory, global_bit, dropout);
    plan.push_back(make_step(tape, model, r, selections[j],
                             styles ? std::optional((*styles)[j]) : std::nullopt));
  }
  return plan;
}

TeacherForcedPlan teacher_forced_plan(Tape* tape, const Model& model,
                                      const KeyphraseMemory& memory, const PlanState& init,
                                      const Sample& sample, const Dropout& dropout) {
  std::vector<std::size_t> prev{memory.start_index};
  std::vector<Array> scores;
  std::vector<std::vector<double>> targets;
  std::vector<Array> dists;
  std::vector<int> gold_styles;
  TeacherForcedPlan out;

  PlanStepResult r = plan_step(tape, model, init, prev, memory, sample.global_style, dropout);
  for (const auto& t : sample.targets) {
    scores.push_back(r.scores);
    targets.push_back(selection_vector(t.selection, memory.size()));
    r = plan_step(tape, model, r.state, t.selection, memory, sample.global_style, dropout);
    PlanStep step = make_step(tape, model, r, t.selection, t.style);
    dists.push_back(step.style_dist);
    gold_styles.push_back(t.style);
    out.steps.push_back(std::move(step));
  }
  scores.push_back(r.scores);
  targets.push_back(selection_vector({memory.end_index}, memory.size()));

  out.selection_loss = selection_loss(tape, scores, targets);
  out.style_loss = style_loss(tape, dists, gold_styles);
  return out;
}

}  // namespace plangen
