#pragma once

#include <optional>
#include <vector>

#include "plangen/encoder.hpp"

namespace plangen {

struct PlanState {
  std::vector<double> usage_counts;  // selections consumed so far, per bank entry
  Array q;                           // usage_counts^T E
  std::size_t sentence_index = 0;
  std::vector<ops::LstmState> cells;
};

PlanState initial_plan_state(const Model& model, const EncoderState& encoder,
                             const KeyphraseMemory& memory);

struct PlanStepResult {
  Array scores;     // P(v_next,k = 1) for every bank entry
  Array s;          // planner hidden state after consuming prev selection
  Array m;          // summed entry encodings of prev selection (+ global bit)
  PlanState state;  // includes prev selection in usage_counts and q
};

// Consumes the previous selection (v_0 is {<START>}), advances the planner
// LSTM and scores every bank entry for the next sentence.
PlanStepResult plan_step(Tape* tape, const Model& model, const PlanState& state,
                         const std::vector<std::size_t>& prev_selection,
                         const KeyphraseMemory& memory, std::optional<int> global_bit,
                         const Dropout& dropout = {});

struct StylePrediction {
  Array dist;
  int style = 0;  // argmax, lowest id on ties
};

StylePrediction predict_style(Tape* tape, const Model& model, const Array& m,
                              const Array& s);

// Summed binary cross-entropy over sentences and bank entries.
Array selection_loss(Tape* tape, const std::vector<Array>& scores,
                     const std::vector<std::vector<double>>& gold);
// -sum_j log dist_j[gold_j]
Array style_loss(Tape* tape, const std::vector<Array>& dists, const std::vector<int>& gold);

std::vector<double> selection_vector(const std::vector<std::size_t>& selection,
                                     std::size_t bank_size);

struct PlanStep {
  std::vector<std::size_t> selection;  // bank indices, sorted
  int style = 0;
  Array style_dist;
  Array s;
  Array m;
};

struct PlanLimits {
  std::size_t max_sentences = 10;
  double threshold = 0.5;
};

// Greedy plan inference: per sentence, entries scoring above the threshold
// (argmax if none) among non-sentinels; stops once <END> scores above the
// threshold or max_sentences steps were produced.
std::vector<PlanStep> infer_plan(const Model& model, const KeyphraseMemory& memory,
                                 const PlanState& init, const PlanLimits& limits,
                                 std::optional<int> global_bit = {});

// Runs the planner on given selections (oracle or manipulated plans). Styles
// are predicted unless provided.
std::vector<PlanStep> execute_plan(Tape* tape, const Model& model,
                                   const KeyphraseMemory& memory, const PlanState& init,
                                   const std::vector<std::vector<std::size_t>>& selections,
                                   std::optional<int> global_bit,
                                   const std::vector<int>* styles = nullptr,
                                   const Dropout& dropout = {});

struct TeacherForcedPlan {
  std::vector<PlanStep> steps;  // one per gold sentence, gold styles used
  Array selection_loss;
  Array style_loss;
};

// Gold selections feed the planner; selection targets cover every gold
// sentence plus the final step, whose target is {<END>}.
TeacherForcedPlan teacher_forced_plan(Tape* tape, const Model& model,
                                      const KeyphraseMemory& memory, const PlanState& init,
                                      const Sample& sample, const Dropout& dropout = {});

}  // namespace plangen
