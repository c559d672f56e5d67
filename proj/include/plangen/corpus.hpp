#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "plangen/array.hpp"

namespace plangen {

using Tokens = std::vector<std::string>;

// Fixed stopword list; a content word is any token with a letter or digit
// that is not on it.
bool is_stopword(const std::string& token);
bool is_content_word(const std::string& token);
const std::vector<std::string>& stopword_list();
std::string lowercase(std::string s);

inline constexpr std::size_t kMaxKeyphraseTokens = 10;
inline constexpr std::size_t kTopicCap = 500;
inline constexpr std::size_t kPassageCap = 400;
inline constexpr const char* kSeparatorToken = "<sep>";

class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0, kUnk = 1, kBos = 2, kEos = 3, kSnt = 4;
  static constexpr std::size_t kReserved = 5;

  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& tokens);  // includes reserved

  std::size_t size() const { return tokens_.size(); }
  std::size_t id(const std::string& token) const;  // kUnk when absent
  bool contains(const std::string& token) const { return ids_.count(token) > 0; }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  void add(const std::string& token);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

struct Keyphrase {
  enum class Kind { kContent, kStart, kEnd };
  Kind kind = Kind::kContent;
  Tokens tokens;
  Tokens content_words;

  // Lowercases, truncates to kMaxKeyphraseTokens; nullopt when no content word.
  static std::optional<Keyphrase> from_tokens(const Tokens& tokens);
  static Keyphrase start();
  static Keyphrase end();
  bool is_sentinel() const { return kind != Kind::kContent; }
  bool operator==(const Keyphrase&) const = default;
};

using KeyphraseBank = std::vector<Keyphrase>;

struct TargetSentence {
  Tokens tokens;
  std::vector<std::size_t> selection;  // sorted bank indices (sentinels included)
  int style = -1;                      // -1 when unlabeled
  bool operator==(const TargetSentence&) const = default;
};

struct Sample {
  std::string id;
  Tokens topic;
  std::optional<Tokens> passages;
  KeyphraseBank bank;  // <START> first, <END> last
  std::vector<TargetSentence> targets;
  std::optional<int> global_style;  // 0 = simple, 1 = normal
  bool operator==(const Sample&) const = default;

  std::size_t content_begin() const { return 1; }
  std::size_t content_end() const { return bank.size() - 1; }
};

// Dedup by exact token sequence, keep the first `cap` in input order, then
// add <START> in front and <END> at the back.
KeyphraseBank build_keyphrase_bank(const std::vector<Keyphrase>& candidates,
                                   std::size_t cap);

// Bank indices whose keyphrase shares a content word with the sentence.
std::vector<std::size_t> align_selection_labels(const Tokens& sentence,
                                                const KeyphraseBank& bank);

// Maximal runs of content words between stopwords and punctuation, capped
// at kMaxKeyphraseTokens. Used when no precomputed candidates exist.
std::vector<Keyphrase> extract_keyphrase_candidates(const Tokens& tokens);

// Topic (truncated to kTopicCap) followed by the separator and passages
// (truncated to kPassageCap) when present.
Tokens encoder_input_tokens(const Sample& sample);

Vocabulary build_vocabulary(const std::vector<Sample>& samples, std::size_t max_size);

struct CorpusOptions {
  bool require_targets = true;
  bool require_styles = true;
  int style_arity = 3;
  std::size_t bank_cap = 70;
};

std::vector<Sample> parse_corpus(const std::string& text, const CorpusOptions& options);
std::vector<Sample> load_corpus(const std::string& path, const CorpusOptions& options);
std::string serialize_corpus(const std::vector<Sample>& samples);
void write_corpus(const std::vector<Sample>& samples, const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace plangen
