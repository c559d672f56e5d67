#include "plangen/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace plangen {

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "task",          "train",         "dev",            "test",        "output",
      "checkpoint",    "embeddings",    "gamma",          "eta",         "batch_size",
      "lr",            "acc_init",      "clip",           "hidden",      "layers",
      "dropout",       "embedding_dim", "logit_scale",    "copy_spread", "seed",
      "max_epochs",    "lm_pretraining", "vocab_size",    "bank_cap",    "beam",
      "max_sentences", "threshold",     "oracle_plan",    "greedy",      "max_len",
      "replace_unknown"};
  return keys;
}

const std::vector<std::string>& decode_config_keys() {
  static const std::vector<std::string> keys{"beam",   "max_sentences", "threshold", "oracle_plan",
                                             "greedy", "max_len",       "replace_unknown"};
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const char* what) {
  throw Error("config field " + key + ": " + what + " (got \"" + value + "\")");
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key, v, "expected a nonnegative integer");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double out = std::stod(v, &used);
    if (used != v.size()) bad(key, v, "expected a number");
    return out;
  } catch (const std::logic_error&) {
    bad(key, v, "expected a number");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, v, "expected true or false");
}

// Shortest text that reads back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

void set_config_value(RunConfig& c, const std::string& key, const std::string& v) {
  auto& t = c.train;
  auto& d = c.decode;
  if (key == "task") {
    try {
      c.task = parse_task(v);
    } catch (const Error&) {
      bad(key, v, "expected argument, wikipedia or abstract");
    }
    c.bank_cap = default_bank_cap(c.task);
  } else if (key == "train") c.train_path = v;
  else if (key == "dev") c.dev_path = v;
  else if (key == "test") c.test_path = v;
  else if (key == "output") c.output_path = v;
  else if (key == "checkpoint") c.checkpoint_path = v;
  else if (key == "embeddings") c.embeddings_path = v;
  else if (key == "gamma") t.gamma = to_double(key, v);
  else if (key == "eta") t.eta = to_double(key, v);
  else if (key == "batch_size") t.batch_size = to_size(key, v);
  else if (key == "lr") t.lr = to_double(key, v);
  else if (key == "acc_init") t.acc_init = to_double(key, v);
  else if (key == "clip") t.clip = to_double(key, v);
  else if (key == "hidden") t.hidden = to_size(key, v);
  else if (key == "layers") t.layers = to_size(key, v);
  else if (key == "dropout") t.dropout = to_double(key, v);
  else if (key == "embedding_dim") t.embedding_dim = to_size(key, v);
  else if (key == "logit_scale") t.logit_scale = to_double(key, v);
  else if (key == "copy_spread") t.copy_spread = parse_copy_spread(v);
  else if (key == "seed") t.seed = to_size(key, v);
  else if (key == "max_epochs") t.max_epochs = to_size(key, v);
  else if (key == "lm_pretraining") t.lm_pretraining = to_bool(key, v);
  else if (key == "vocab_size") c.vocab_size = to_size(key, v);
  else if (key == "bank_cap") c.bank_cap = to_size(key, v);
  else if (key == "beam") d.beam = to_size(key, v);
  else if (key == "max_sentences") d.max_sentences = to_size(key, v);
  else if (key == "threshold") d.threshold = to_double(key, v);
  else if (key == "oracle_plan") d.oracle_plan = to_bool(key, v);
  else if (key == "greedy") d.greedy = to_bool(key, v);
  else if (key == "max_len") d.max_len = to_size(key, v);
  else if (key == "replace_unknown") d.replace_unknown = to_bool(key, v);
  else throw Error("unknown config key \"" + key + "\"");
}

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(n) + ": expected key=value");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

namespace {

void validate(const RunConfig& c) {
  try {
    c.train.validate();
  } catch (const Error& e) {
    throw Error(std::string("config: ") + e.what());
  }
  try {
    c.decode.validate();
  } catch (const Error& e) {
    throw Error(std::string("config: ") + e.what());
  }
  if (c.vocab_size < Vocabulary::kReserved + 1) throw Error("config field vocab_size: too small");
  if (c.bank_cap < 1) throw Error("config field bank_cap: must be positive");
}

}  // namespace

RunConfig config_from_text(const std::string& text,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig c;
  auto entries = parse_config_text(text);
  entries.insert(entries.end(), overrides.begin(), overrides.end());
  // The task sets the default bank cap, so apply it before an explicit cap.
  for (const auto& [k, v] : entries)
    if (k == "task") set_config_value(c, k, v);
  for (const auto& [k, v] : entries)
    if (k != "task") set_config_value(c, k, v);
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
  return config_from_text(path.empty() ? std::string() : read_file(path), overrides);
}

std::string RunConfig::to_text() const {
  std::ostringstream s;
  const auto& t = train;
  const auto& d = decode;
  s << "task=" << task_name(task) << "\n"
    << "train=" << train_path << "\n"
    << "dev=" << dev_path << "\n"
    << "test=" << test_path << "\n"
    << "output=" << output_path << "\n"
    << "checkpoint=" << checkpoint_path << "\n"
    << "embeddings=" << embeddings_path << "\n"
    << "gamma=" << fmt(t.gamma) << "\n"
    << "eta=" << fmt(t.eta) << "\n"
    << "batch_size=" << t.batch_size << "\n"
    << "lr=" << fmt(t.lr) << "\n"
    << "acc_init=" << fmt(t.acc_init) << "\n"
    << "clip=" << fmt(t.clip) << "\n"
    << "hidden=" << t.hidden << "\n"
    << "layers=" << t.layers << "\n"
    << "dropout=" << fmt(t.dropout) << "\n"
    << "embedding_dim=" << t.embedding_dim << "\n"
    << "logit_scale=" << fmt(t.logit_scale) << "\n"
    << "copy_spread=" << copy_spread_name(t.copy_spread) << "\n"
    << "seed=" << t.seed << "\n"
    << "max_epochs=" << t.max_epochs << "\n"
    << "lm_pretraining=" << (t.lm_pretraining ? "true" : "false") << "\n"
    << "vocab_size=" << vocab_size << "\n"
    << "bank_cap=" << bank_cap << "\n"
    << "beam=" << d.beam << "\n"
    << "max_sentences=" << d.max_sentences << "\n"
    << "threshold=" << fmt(d.threshold) << "\n"
    << "oracle_plan=" << (d.oracle_plan ? "true" : "false") << "\n"
    << "greedy=" << (d.greedy ? "true" : "false") << "\n"
    << "max_len=" << d.max_len << "\n"
    << "replace_unknown=" << (d.replace_unknown ? "true" : "false") << "\n";
  return s.str();
}

}  // namespace plangen
