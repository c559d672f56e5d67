#include "plangen/style.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <unordered_set>

namespace plangen {

namespace {

StylePattern make(const std::string& rule, const std::string& body) {
  // Token-aligned: the text is space-padded, so every pattern is bracketed
  // by spaces.
  const std::string source = " " + body + " ";
  return {rule, source, std::regex(source, std::regex::ECMAScript | std::regex::icase |
                                               std::regex::optimize)};
}

const std::unordered_set<std::string>& function_words() {
  static const std::unordered_set<std::string> words = {
      "ok", "okay", "yes", "yeah", "sure", "well", "really", "also", "maybe",
      "perhaps", "still", "even", "actually", "right", "indeed", "though", "anyway",
      "exactly", "probably", "thanks", "thank", "please", "hmm", "oh", "lol", "like",
      "much", "many", "lot", "always", "never", "ever", "often", "sometimes", "quite",
      "rather", "else", "yet", "however", "therefore", "thus", "would", "could",
      "might", "must", "may", "shall", "cannot", "tl", "dr", "tldr", "etc"};
  return words;
}

bool is_alphabetical(const std::string& t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) {
    return std::isalpha(c) != 0;
  });
}

std::string padded_text(const Tokens& tokens) {
  std::string text = " ";
  for (const auto& t : tokens) {
    text += lowercase(t);
    text += ' ';
  }
  return text;
}

}  // namespace

const StyleRuleSet& StyleRuleSet::argument_defaults() {
  static const StyleRuleSet rules = [] {
    StyleRuleSet r;
    r.claim_patterns = {
        make("belief",
             "i (do n't |don't |do not |dont )?"
             "(believe|agree|concede|suspect|doubt|see|feel|understand)"),
        make("imperative",
             "(any|anyone|anybody|every|everyone|everybody|all|most|few|no|no one|nobody"
             "|it|we|you|they|there) ([a-z']{1,10} )?(could|should|might|need|must)"),
        make("sense", "(it|this|that) (make|makes|made) ((no|zero) )?sense"),
        make("chance",
             "(chance|chances|likelihood|possibility|probability) (.* )?"
             "(slim|zero|negligible)"),
        make("evaluation",
             "(be|is|are|was|were|am|been|being|'s|'re|'m|seem|seems|seemed) "
             "(necessary|unnecessary|moral|immoral|right|wrong|stupid|unconstitutional"
             "|costly|inefficient|efficient|reasonable|beneficial|important|unfair"
             "|harmful|justified|jeopardized|meaningless|flawed|justifiable"
             "|unacceptable|impossible|irrational|foolish)"),
        make("miscellaneous",
             "(in my opinion|imo|my view|i be try to say|i am trying to say"
             "|i 'm trying to say|i'm trying to say|have nothing to do with"
             "|has nothing to do with|tldr|tl ; dr|tl;dr)"),
    };
    r.premise_patterns = {
        make("affect",
             "(help|helps|helped|helping|improve|improves|improved|improving|reduce"
             "|reduces|reduced|reducing|deter|deters|deterred|deterring|increase"
             "|increases|increased|increasing|decrease|decreases|decreased|decreasing"
             "|promote|promotes|promoted|promoting)"),
        make("example", "(for example|for instance|e\\.g\\.|e\\.g)"),
    };
    return r;
  }();
  return rules;
}

std::string style_name(Task task, int id) {
  switch (task) {
    case Task::kArgument: {
      static const char* names[] = {"CLAIM", "PREMISE", "FUNCTIONAL"};
      return id >= 0 && id < 3 ? names[id] : "?";
    }
    case Task::kWikipedia: {
      static const char* names[] = {"(0,10]", "(10,20]", "(20,30]", "(30,inf)"};
      return id >= 0 && id < 4 ? names[id] : "?";
    }
    case Task::kAbstract: return "NONE";
  }
  return "?";
}

std::string matching_rule(const Tokens& tokens, const std::vector<StylePattern>& patterns) {
  const std::string text = padded_text(tokens);
  for (const auto& p : patterns)
    if (std::regex_search(text, p.regex)) return p.rule;
  return {};
}

std::size_t count_alphabetical_words(const Tokens& tokens) {
  return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), is_alphabetical));
}

bool has_noun_or_verb_content_word(const Tokens& tokens,
                                   const std::optional<std::vector<bool>>& pos_hints) {
  if (pos_hints) {
    if (pos_hints->size() != tokens.size())
      throw Error("pos_hints has " + std::to_string(pos_hints->size()) + " flags for " +
                  std::to_string(tokens.size()) + " tokens");
    return std::find(pos_hints->begin(), pos_hints->end(), true) != pos_hints->end();
  }
  return std::any_of(tokens.begin(), tokens.end(), [](const std::string& t) {
    return is_alphabetical(t) && is_content_word(t) && !function_words().count(lowercase(t));
  });
}

StyleLabel label_argument_sentence(const Tokens& tokens,
                                   const std::optional<std::vector<bool>>& pos_hints,
                                   const StyleRuleSet& rules) {
  const bool content = has_noun_or_verb_content_word(tokens, pos_hints);
  int id = kPremise;
  if (count_alphabetical_words(tokens) < rules.functional_alpha_limit && !content) {
    id = kFunctional;
  } else if (tokens.size() < rules.claim_length_cap &&
             !matching_rule(tokens, rules.claim_patterns).empty()) {
    id = kClaim;
  } else if (tokens.size() > rules.premise_length_floor && content &&
             !matching_rule(tokens, rules.premise_patterns).empty()) {
    id = kPremise;
  }
  return {Task::kArgument, id, style_name(Task::kArgument, id)};
}

StyleLabel label_wikipedia_sentence(const Tokens& tokens) {
  const std::size_t n = tokens.size();
  const int id = n <= 10 ? 0 : n <= 20 ? 1 : n <= 30 ? 2 : 3;
  return {Task::kWikipedia, id, style_name(Task::kWikipedia, id)};
}

std::vector<Sample> prune_functional_only(std::vector<Sample> samples) {
  std::erase_if(samples, [](const Sample& s) {
    return !s.targets.empty() &&
           std::all_of(s.targets.begin(), s.targets.end(),
                       [](const TargetSentence& t) { return t.style == kFunctional; });
  });
  return samples;
}

void label_corpus(std::vector<Sample>& samples, Task task) {
  for (auto& s : samples)
    for (auto& t : s.targets) {
      switch (task) {
        case Task::kArgument: t.style = label_argument_sentence(t.tokens).id; break;
        case Task::kWikipedia: t.style = label_wikipedia_sentence(t.tokens).id; break;
        case Task::kAbstract: t.style = 0; break;
      }
    }
}

std::string style_distribution_report(const std::vector<Sample>& samples, Task task) {
  const int arity = style_arity(task);
  std::vector<std::size_t> count(arity, 0), tokens(arity, 0);
  std::size_t total = 0;
  for (const auto& s : samples)
    for (const auto& t : s.targets)
      if (t.style >= 0 && t.style < arity) {
        ++count[t.style];
        tokens[t.style] += t.tokens.size();
        ++total;
      }
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-12s", "");
  out += buf;
  for (int k = 0; k < arity; ++k) {
    std::snprintf(buf, sizeof buf, " %11s", style_name(task, k).c_str());
    out += buf;
  }
  out += "\n";
  auto row = [&](const char* label, auto cell) {
    std::snprintf(buf, sizeof buf, "%-12s", label);
    out += buf;
    for (int k = 0; k < arity; ++k) out += cell(k);
    out += "\n";
  };
  row("# Sentences", [&](int k) {
    std::snprintf(buf, sizeof buf, " %11zu", count[k]);
    return std::string(buf);
  });
  row("% Sentences", [&](int k) {
    std::snprintf(buf, sizeof buf, " %10.1f%%", total ? 100.0 * count[k] / total : 0.0);
    return std::string(buf);
  });
  row("# Tokens", [&](int k) {
    std::snprintf(buf, sizeof buf, " %11.1f",
                  count[k] ? static_cast<double>(tokens[k]) / count[k] : 0.0);
    return std::string(buf);
  });
  return out;
}

}  // namespace plangen
