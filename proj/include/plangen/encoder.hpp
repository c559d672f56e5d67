#pragma once

#include <vector>

#include "plangen/model.hpp"

namespace plangen {

struct EncoderState {
  Array hidden_seq;  // [L x H]; row i is [forward_i ; backward_i]
  // Decoder initial states, one per layer, projected from the fused
  // final forward/backward reader state.
  std::vector<ops::LstmState> init_states;
  std::size_t length = 0;
};

struct KeyphraseMemory {
  Array matrix_E;                 // [|M| x H], row k is h^e_k
  std::vector<Array> embeddings;  // e_k before the reader
  std::size_t start_index = 0;
  std::size_t end_index = 0;
  std::size_t size() const { return matrix_E.rows(); }
  std::vector<double> entry_encoding(std::size_t k) const;
};

struct BiLstmOutput {
  std::vector<ops::LstmState> forward;   // forward[i] has read inputs 0..i
  std::vector<ops::LstmState> backward;  // backward[i] has read inputs i..L-1
};

BiLstmOutput run_bilstm(Tape* tape, const std::vector<Array>& inputs,
                        const BiLstmWeights& weights);

// Vocabulary ids; out-of-vocabulary tokens should already map to UNK.
EncoderState encode_input(Tape* tape, const Model& model,
                          const std::vector<std::size_t>& token_ids);

// Sum of word embeddings; sentinels use their dedicated learned vectors.
Array phrase_embedding(Tape* tape, const Model& model, const Keyphrase& phrase);

// Tokens fed to the encoder, mapped to vocabulary ids.
std::vector<std::size_t> input_ids(const Model& model, const Sample& sample);

KeyphraseMemory encode_keyphrase_bank(Tape* tape, const Model& model,
                                      const KeyphraseBank& bank);

// Reads a text file of "token v1 ... vD" lines into the word embedding
// table; returns the number of rows replaced. Unknown tokens are skipped.
std::size_t load_pretrained_embeddings(Model& model, const std::string& path);

}  // namespace plangen
