#include "plangen/synthetic.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include "plangen/params.hpp"

namespace plangen {

namespace {

struct Cluster {
  const char* topic_word;
  std::vector<const char*> phrases;
};

const std::vector<Cluster>& clusters() {
  static const std::vector<Cluster> c = {
      {"economy",
       {"tax cuts", "trade deficit", "minimum wage", "inflation", "stock market",
        "small business", "interest rates", "job growth"}},
      {"healthcare",
       {"health insurance", "hospital costs", "vaccine access", "mental wellness",
        "drug prices", "nurse shortage", "obesity", "clinic funding"}},
      {"education",
       {"public schools", "student loans", "teacher pay", "class size", "online courses",
        "tuition fees", "literacy", "college admissions"}},
      {"environment",
       {"carbon emissions", "plastic waste", "forest loss", "clean rivers", "recycling",
        "air pollution", "ocean warming", "wildlife habitat"}},
      {"energy",
       {"solar panels", "wind farms", "nuclear power", "coal plants", "fuel efficiency",
        "battery storage", "gas pipelines", "electric grid"}},
      {"defense",
       {"military budget", "border security", "veteran benefits", "cyber attacks",
        "foreign aid", "arms treaties", "troop deployment", "drone strikes"}},
      {"technology",
       {"data privacy", "social media", "artificial intelligence", "broadband",
        "smartphone addiction", "software patents", "robot automation", "encryption"}},
      {"transportation",
       {"high speed rail", "traffic congestion", "bike lanes", "toll roads",
        "bus routes", "road safety", "airport expansion", "car ownership"}},
  };
  return c;
}

const std::vector<Tokens>& openers() {
  static const std::vector<Tokens> o = {
      {"we", "should", "rethink"}, {"time", "to", "reform"}, {"my", "view", "on"},
      {"nobody", "talks", "about"}};
  return o;
}

const std::vector<std::string>& modifiers() {
  static const std::vector<std::string> m = {"policy", "spending", "rules", "priorities"};
  return m;
}

Tokens split(const std::string& s) {
  Tokens out;
  std::istringstream in(s);
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

// Template text for (style, phrase count); "A" and "B" are phrase slots.
const char* template_for(int style, std::size_t n_phrases) {
  static const char* one[] = {"i believe that A is important .",
                              "for example , A can help reduce poverty .",
                              "what about A ?"};
  static const char* two[] = {"i think A and B really matter .",
                              "studies show that A increases B over time .",
                              "so A or B ?"};
  return n_phrases == 1 ? one[style] : two[style];
}

Tokens realize(int style, const std::vector<Tokens>& phrases) {
  Tokens out;
  for (const auto& w : split(template_for(style, phrases.size()))) {
    if (w == "A") out.insert(out.end(), phrases[0].begin(), phrases[0].end());
    else if (w == "B") out.insert(out.end(), phrases[1].begin(), phrases[1].end());
    else out.push_back(w);
  }
  return out;
}

bool has_repeated_trigram(const Tokens& tokens) {
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (std::size_t i = 2; i < tokens.size(); ++i)
    if (!seen.emplace(tokens[i - 2], tokens[i - 1], tokens[i]).second) return true;
  return false;
}

std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.below(hi - lo + 1);
}

struct PhraseRef {
  std::size_t cluster;
  std::size_t index;
};

std::optional<Sample> try_sample(Rng& rng, const SyntheticConfig& cfg,
                                 const std::string& id) {
  const auto& cl = clusters();
  const std::size_t c = rng.below(cl.size());
  Sample s;
  s.id = id;
  s.topic = openers()[rng.below(openers().size())];
  s.topic.push_back(cl[c].topic_word);
  s.topic.push_back(modifiers()[rng.below(modifiers().size())]);

  const std::size_t n_sent = between(rng, cfg.min_sentences, cfg.max_sentences);
  std::vector<std::size_t> pool(cl[c].phrases.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  rng.shuffle(pool);
  std::vector<std::vector<PhraseRef>> groups;
  std::size_t used = 0;
  for (std::size_t j = 0; j < n_sent; ++j) {
    const std::size_t n = rng.bernoulli(cfg.pair_probability) ? 2 : 1;
    if (used + n > pool.size()) return std::nullopt;
    std::vector<PhraseRef> g;
    for (std::size_t k = 0; k < n; ++k) g.push_back({c, pool[used++]});
    groups.push_back(g);
  }

  std::vector<PhraseRef> entries;
  for (const auto& g : groups) entries.insert(entries.end(), g.begin(), g.end());
  const std::size_t n_distract = between(rng, cfg.min_distractors, cfg.max_distractors);
  std::set<std::pair<std::size_t, std::size_t>> taken;
  for (const auto& e : entries) taken.emplace(e.cluster, e.index);
  while (entries.size() < used + n_distract) {
    std::size_t oc = rng.below(cl.size() - 1);
    if (oc >= c) ++oc;
    const std::size_t oi = rng.below(cl[oc].phrases.size());
    if (taken.emplace(oc, oi).second) entries.push_back({oc, oi});
  }
  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<Keyphrase> candidates;
  std::vector<std::size_t> bank_pos(entries.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto& e = entries[order[pos]];
    candidates.push_back(*Keyphrase::from_tokens(split(cl[e.cluster].phrases[e.index])));
    bank_pos[order[pos]] = pos + 1;  // +1 for <START>
  }
  s.bank = build_keyphrase_bank(candidates, 70);

  // Sentences follow the bank order of their first phrase.
  std::vector<std::vector<std::size_t>> selections;
  std::size_t flat = 0;
  for (const auto& g : groups) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < g.size(); ++k) idx.push_back(bank_pos[flat + k]);
    flat += g.size();
    std::sort(idx.begin(), idx.end());
    selections.push_back(std::move(idx));
  }
  std::sort(selections.begin(), selections.end());

  std::set<std::pair<int, std::size_t>> combos;
  Tokens all_tokens;
  for (const auto& idx : selections) {
    const std::size_t first_entry =
        std::find(bank_pos.begin(), bank_pos.end(), idx.front()) - bank_pos.begin();
    const int style = static_cast<int>(entries[first_entry].index % 3);
    if (!combos.emplace(style, idx.size()).second) return std::nullopt;
    std::vector<Tokens> phrases;
    for (auto k : idx) phrases.push_back(s.bank[k].tokens);
    TargetSentence t;
    t.tokens = realize(style, phrases);
    t.selection = idx;
    t.style = style;
    all_tokens.insert(all_tokens.end(), t.tokens.begin(), t.tokens.end());
    s.targets.push_back(std::move(t));
  }
  if (has_repeated_trigram(all_tokens)) return std::nullopt;
  for (const auto& t : s.targets)
    if (align_selection_labels(t.tokens, s.bank) != t.selection) return std::nullopt;
  return s;
}

}  // namespace

std::vector<Sample> generate_synthetic_corpus(std::uint64_t seed, std::size_t n_samples,
                                              const SyntheticConfig& config) {
  if (n_samples < 1) throw Error("synthetic corpus needs at least one sample");
  if (config.min_sentences < 1 || config.max_sentences < config.min_sentences ||
      config.max_distractors < config.min_distractors)
    throw Error("invalid synthetic grammar ranges");
  Rng rng(seed);
  std::vector<Sample> out;
  while (out.size() < n_samples) {
    const std::string id = "synth-" + std::to_string(seed) + "-" + std::to_string(out.size());
    if (auto s = try_sample(rng, config, id)) out.push_back(std::move(*s));
  }
  return out;
}

}  // namespace plangen
