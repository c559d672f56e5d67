#pragma once

#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "plangen/corpus.hpp"
#include "plangen/task.hpp"

namespace plangen {

enum ArgumentStyle : int { kClaim = 0, kPremise = 1, kFunctional = 2 };

struct StyleLabel {
  Task task = Task::kArgument;
  int id = 0;
  std::string name;
  bool operator==(const StyleLabel& o) const { return task == o.task && id == o.id; }
};

struct StylePattern {
  std::string rule;  // e.g. "belief"
  std::string source;
  std::regex regex;
};

struct StyleRuleSet {
  std::vector<StylePattern> claim_patterns;
  std::vector<StylePattern> premise_patterns;
  std::size_t functional_alpha_limit = 5;  // fewer than this many alphabetical words
  std::size_t claim_length_cap = 20;       // claims are shorter than this
  std::size_t premise_length_floor = 5;    // premises are longer than this

  static const StyleRuleSet& argument_defaults();
};

std::string style_name(Task task, int id);

// Rules apply in the order functional, claim, premise; unmatched sentences
// default to premise. pos_hints marks noun/verb content words per token.
StyleLabel label_argument_sentence(const Tokens& tokens,
                                   const std::optional<std::vector<bool>>& pos_hints = {},
                                   const StyleRuleSet& rules = StyleRuleSet::argument_defaults());

// Length buckets (0,10], (10,20], (20,30], (30,inf).
StyleLabel label_wikipedia_sentence(const Tokens& tokens);

// Returns the name of the first matching claim/premise rule, or empty.
std::string matching_rule(const Tokens& tokens, const std::vector<StylePattern>& patterns);

bool has_noun_or_verb_content_word(const Tokens& tokens,
                                   const std::optional<std::vector<bool>>& pos_hints);
std::size_t count_alphabetical_words(const Tokens& tokens);

std::vector<Sample> prune_functional_only(std::vector<Sample> samples);

// Fills every target's style for the task (abstract: style 0).
void label_corpus(std::vector<Sample>& samples, Task task);

// Style counts and percentages per label.
std::string style_distribution_report(const std::vector<Sample>& samples, Task task);

}  // namespace plangen
