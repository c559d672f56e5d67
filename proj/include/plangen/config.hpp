#pragma once

#include <map>
#include <string>
#include <vector>

#include "plangen/inference.hpp"
#include "plangen/training.hpp"

namespace plangen {

struct RunConfig {
  Task task = Task::kArgument;
  std::string train_path, dev_path, test_path, output_path, checkpoint_path;
  std::string embeddings_path;
  TrainConfig train;
  DecodeOptions decode;
  std::size_t vocab_size = 50000;
  std::size_t bank_cap = 70;  // follows the task unless set explicitly

  std::uint64_t seed() const { return train.seed; }
  // Flat key=value dump in key order; loadable by load_config.
  std::string to_text() const;
};

const std::vector<std::string>& config_keys();
const std::vector<std::string>& decode_config_keys();

// Applies one key; throws naming the key on unknown keys or bad values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

// Parses key=value lines (# comments, blank lines ignored).
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

// File values first, then overrides. An empty path means defaults only.
RunConfig load_config(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides = {});
RunConfig config_from_text(const std::string& text,
                           const std::vector<std::pair<std::string, std::string>>& overrides = {});

}  // namespace plangen
