#include "plangen/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace plangen {

using json = nlohmann::ordered_json;

Vocabulary::Vocabulary() {
  for (const char* t : {"<pad>", "<unk>", "<bos>", "<eos>", "<snt>"}) add(t);
}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) {
  if (tokens.size() < kReserved) throw Error("vocabulary is missing reserved tokens");
  for (const auto& t : tokens) add(t);
  const Vocabulary reserved;
  for (std::size_t i = 0; i < kReserved; ++i)
    if (tokens_[i] != reserved.tokens_[i])
      throw Error("vocabulary reserved token " + std::to_string(i) + " is " + tokens_[i]);
}

void Vocabulary::add(const std::string& token) {
  if (!ids_.emplace(token, tokens_.size()).second)
    throw Error("duplicate vocabulary token: " + token);
  tokens_.push_back(token);
}

std::size_t Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

std::optional<Keyphrase> Keyphrase::from_tokens(const Tokens& tokens) {
  Keyphrase kp;
  for (std::size_t i = 0; i < tokens.size() && i < kMaxKeyphraseTokens; ++i)
    kp.tokens.push_back(lowercase(tokens[i]));
  for (const auto& t : kp.tokens)
    if (is_content_word(t) &&
        std::find(kp.content_words.begin(), kp.content_words.end(), t) ==
            kp.content_words.end())
      kp.content_words.push_back(t);
  if (kp.content_words.empty()) return std::nullopt;
  return kp;
}

Keyphrase Keyphrase::start() {
  Keyphrase kp;
  kp.kind = Kind::kStart;
  return kp;
}

Keyphrase Keyphrase::end() {
  Keyphrase kp;
  kp.kind = Kind::kEnd;
  return kp;
}

KeyphraseBank build_keyphrase_bank(const std::vector<Keyphrase>& candidates,
                                   std::size_t cap) {
  if (cap < 1) throw Error("keyphrase bank cap must be at least 1");
  KeyphraseBank bank{Keyphrase::start()};
  std::set<Tokens> seen;
  for (const auto& kp : candidates) {
    if (bank.size() - 1 >= cap) break;
    if (!seen.insert(kp.tokens).second) continue;
    bank.push_back(kp);
  }
  bank.push_back(Keyphrase::end());
  return bank;
}

std::vector<std::size_t> align_selection_labels(const Tokens& sentence,
                                                const KeyphraseBank& bank) {
  std::set<std::string> words;
  for (const auto& t : sentence) words.insert(lowercase(t));
  std::vector<std::size_t> selected;
  for (std::size_t k = 0; k < bank.size(); ++k) {
    if (bank[k].is_sentinel()) continue;
    for (const auto& w : bank[k].content_words) {
      if (words.count(w)) {
        selected.push_back(k);
        break;
      }
    }
  }
  return selected;
}

std::vector<Keyphrase> extract_keyphrase_candidates(const Tokens& tokens) {
  std::vector<Keyphrase> out;
  Tokens run;
  auto flush = [&]() {
    if (!run.empty())
      if (auto kp = Keyphrase::from_tokens(run)) out.push_back(*kp);
    run.clear();
  };
  for (const auto& t : tokens) {
    if (is_content_word(t)) {
      run.push_back(t);
      if (run.size() == kMaxKeyphraseTokens) flush();
    } else {
      flush();
    }
  }
  flush();
  return out;
}

Tokens encoder_input_tokens(const Sample& sample) {
  Tokens out(sample.topic.begin(),
             sample.topic.begin() + std::min(sample.topic.size(), kTopicCap));
  if (sample.passages && !sample.passages->empty()) {
    out.push_back(kSeparatorToken);
    const auto& p = *sample.passages;
    out.insert(out.end(), p.begin(), p.begin() + std::min(p.size(), kPassageCap));
  }
  return out;
}

Vocabulary build_vocabulary(const std::vector<Sample>& samples, std::size_t max_size) {
  if (max_size < Vocabulary::kReserved + 1)
    throw Error("vocabulary max_size must be at least 6, got " + std::to_string(max_size));
  if (samples.empty()) throw Error("build_vocabulary: no samples");
  std::map<std::string, std::size_t> counts;
  const Vocabulary reserved;
  auto count = [&](const Tokens& ts) {
    for (const auto& t : ts)
      if (!reserved.contains(t)) ++counts[t];
  };
  for (const auto& s : samples) {
    count(encoder_input_tokens(s));
    for (const auto& kp : s.bank) count(kp.tokens);
    for (const auto& t : s.targets) count(t.tokens);
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens = reserved.tokens();
  for (const auto& [tok, n] : ranked) {
    if (tokens.size() >= max_size) break;
    tokens.push_back(tok);
  }
  return Vocabulary(tokens);
}

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error("corpus line " + std::to_string(line) + ": " + what);
}

Tokens token_list(const json& j, std::size_t line, const std::string& field) {
  if (!j.is_array()) fail(line, "field \"" + field + "\" must be a list of strings");
  Tokens out;
  for (const auto& t : j) {
    if (!t.is_string()) fail(line, "field \"" + field + "\" must be a list of strings");
    out.push_back(t.get<std::string>());
  }
  return out;
}

const json& require(const json& rec, const char* field, std::size_t line) {
  auto it = rec.find(field);
  if (it == rec.end()) fail(line, std::string("missing field \"") + field + "\"");
  return *it;
}

Sample parse_record(const json& rec, std::size_t line, const CorpusOptions& options) {
  if (!rec.is_object()) fail(line, "record is not a JSON object");
  Sample s;
  const auto& id = require(rec, "id", line);
  if (!id.is_string()) fail(line, "field \"id\" must be a string");
  s.id = id.get<std::string>();
  s.topic = token_list(require(rec, "topic", line), line, "topic");
  if (auto it = rec.find("passages"); it != rec.end() && !it->is_null())
    s.passages = token_list(*it, line, "passages");

  const auto& kps = require(rec, "keyphrases", line);
  if (!kps.is_array()) fail(line, "field \"keyphrases\" must be a list of token lists");
  std::vector<Keyphrase> candidates;
  std::vector<std::optional<std::size_t>> candidate_of_raw;
  for (const auto& kp : kps) {
    auto phrase = Keyphrase::from_tokens(token_list(kp, line, "keyphrases"));
    candidate_of_raw.push_back(phrase ? std::optional(candidates.size()) : std::nullopt);
    if (phrase) candidates.push_back(*phrase);
  }
  s.bank = build_keyphrase_bank(candidates, options.bank_cap);
  // Raw keyphrase index -> bank index, after dedup and truncation.
  std::map<Tokens, std::size_t> bank_index;
  for (std::size_t k = s.content_begin(); k < s.content_end(); ++k)
    bank_index[s.bank[k].tokens] = k;
  std::vector<std::optional<std::size_t>> bank_of_raw;
  for (const auto& c : candidate_of_raw) {
    std::optional<std::size_t> b;
    if (c) {
      auto it = bank_index.find(candidates[*c].tokens);
      if (it != bank_index.end()) b = it->second;
    }
    bank_of_raw.push_back(b);
  }

  auto targets = rec.find("targets");
  if (targets == rec.end() || targets->is_null()) {
    if (options.require_targets) fail(line, "missing field \"targets\"");
  } else {
    if (!targets->is_array()) fail(line, "field \"targets\" must be a list");
    for (const auto& t : *targets) {
      if (!t.is_object()) fail(line, "target is not a JSON object");
      TargetSentence ts;
      ts.tokens = token_list(require(t, "tokens", line), line, "tokens");
      std::set<std::size_t> sel;
      if (auto it = t.find("selection"); it != t.end() && !it->is_null()) {
        if (!it->is_array()) fail(line, "field \"selection\" must be a list of ints");
        for (const auto& k : *it) {
          if (!k.is_number_integer()) fail(line, "field \"selection\" must be a list of ints");
          const auto raw = k.get<long long>();
          if (raw < 0 || static_cast<std::size_t>(raw) >= bank_of_raw.size())
            fail(line, "selection index " + std::to_string(raw) + " outside keyphrases");
          if (auto b = bank_of_raw[raw]) sel.insert(*b);
        }
      }
      ts.selection.assign(sel.begin(), sel.end());
      auto st = t.find("style");
      if (st == t.end() || st->is_null()) {
        if (options.require_styles && options.style_arity > 1)
          fail(line, "missing field \"style\"");
        if (options.style_arity == 1) ts.style = 0;  // constant style
      } else {
        if (!st->is_number_integer()) fail(line, "field \"style\" must be an int");
        const auto v = st->get<long long>();
        if (v < 0 || v >= options.style_arity)
          fail(line, "unknown style id " + std::to_string(v));
        ts.style = static_cast<int>(v);
      }
      s.targets.push_back(std::move(ts));
    }
    if (options.require_targets && s.targets.empty()) fail(line, "field \"targets\" is empty");
  }

  if (auto it = rec.find("global_style"); it != rec.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<long long>() < 0 || it->get<long long>() > 1)
      fail(line, "field \"global_style\" must be 0, 1 or null");
    s.global_style = it->get<int>();
  }
  return s;
}

json to_json(const Sample& s) {
  json rec;
  rec["id"] = s.id;
  rec["topic"] = s.topic;
  rec["passages"] = s.passages ? json(*s.passages) : json(nullptr);
  json kps = json::array();
  for (std::size_t k = s.content_begin(); k < s.content_end(); ++k)
    kps.push_back(s.bank[k].tokens);
  rec["keyphrases"] = kps;
  json targets = json::array();
  for (const auto& t : s.targets) {
    json jt;
    jt["tokens"] = t.tokens;
    json sel = json::array();
    for (auto k : t.selection) sel.push_back(k - s.content_begin());
    jt["selection"] = sel;
    jt["style"] = t.style < 0 ? json(nullptr) : json(t.style);
    targets.push_back(jt);
  }
  rec["targets"] = targets;
  rec["global_style"] = s.global_style ? json(*s.global_style) : json(nullptr);
  return rec;
}

}  // namespace

std::vector<Sample> parse_corpus(const std::string& text, const CorpusOptions& options) {
  std::vector<Sample> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(number, std::string("malformed JSON: ") + e.what());
    }
    out.push_back(parse_record(rec, number, options));
  }
  return out;
}

std::vector<Sample> load_corpus(const std::string& path, const CorpusOptions& options) {
  return parse_corpus(read_file(path), options);
}

std::string serialize_corpus(const std::vector<Sample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    out += to_json(s).dump();
    out += '\n';
  }
  return out;
}

void write_corpus(const std::vector<Sample>& samples, const std::string& path) {
  write_file(path, serialize_corpus(samples));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << contents;
  if (!out) throw Error("error writing " + path);
}

}  // namespace plangen
