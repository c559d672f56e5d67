#pragma once

#include <cstdint>
#include <vector>

#include "plangen/corpus.hpp"

namespace plangen {

struct SyntheticConfig {
  std::size_t min_sentences = 1;
  std::size_t max_sentences = 4;
  std::size_t min_distractors = 2;
  std::size_t max_distractors = 4;
  double pair_probability = 0.35;
};

// Argument-style corpus with three template classes (0 claim, 1 premise,
// 2 functional). Each sentence embeds its selected keyphrases verbatim in a
// template fixed by (style, number of phrases), so gold plans are exactly
// recoverable from the text. No trigram repeats within a sample.
std::vector<Sample> generate_synthetic_corpus(std::uint64_t seed, std::size_t n_samples,
                                              const SyntheticConfig& config = {});

}  // namespace plangen
