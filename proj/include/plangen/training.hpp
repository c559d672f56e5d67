#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plangen/optim.hpp"
#include "plangen/realizer.hpp"

namespace plangen {

struct TrainConfig {
  double gamma = 1.0;
  double eta = 1.0;
  std::size_t batch_size = 64;
  double lr = 0.15;
  double acc_init = 0.1;
  double clip = 2.0;
  std::size_t hidden = 512;
  std::size_t layers = 2;
  double dropout = 0.2;
  std::size_t embedding_dim = 300;
  double logit_scale = 1.0;
  CopySpread copy_spread = CopySpread::kUniform;
  std::uint64_t seed = 1;
  std::size_t max_epochs = 30;
  bool lm_pretraining = false;  // reserved; rejected when set

  void validate() const;
};

ModelConfig model_config(const TrainConfig& config, Task task);

Array joint_loss(Tape* tape, const Array& gen, const Array& style, const Array& sel,
                 double gamma, double eta);
double joint_loss(double gen, double style, double sel, double gamma, double eta);

struct SampleLoss {
  Array joint, gen, sel, style;
  std::size_t correct = 0, total = 0;
};

// Teacher-forced forward pass over one sample: gold selections feed the
// planner, gold styles feed the realizer.
SampleLoss compute_sample_loss(Tape* tape, const Model& model, const Sample& sample,
                               double gamma, double eta, const Dropout& dropout = {});

struct EpochStats {
  std::size_t epoch = 0;
  double joint = 0, gen = 0, sel = 0, style = 0;
  double token_accuracy = 0;
  std::size_t batches = 0;
};

// Permutes with order_rng, trains every batch (the last may be partial):
// backward, clip, AdaGrad. Throws naming the batch when a loss is not finite.
EpochStats train_epoch(Model& model, const std::vector<Sample>& data, const TrainConfig& config,
                       OptimState& opt, Rng& order_rng, Rng& dropout_rng,
                       std::size_t epoch = 0);

// Mean losses with dropout off and no gradient tracking.
EpochStats evaluate_loss(const Model& model, const std::vector<Sample>& data,
                         const TrainConfig& config);

struct TrainResult {
  std::vector<EpochStats> train;
  std::vector<EpochStats> validation;  // empty when no dev data
  std::size_t best_epoch = 0;
  double best_validation = 0;
};

struct CheckpointInfo {
  std::size_t epoch = 0;
  double validation_loss = 0;
};

void save_checkpoint(const Model& model, const std::string& dir, const CheckpointInfo& info = {});
// Reads the model configuration and vocabulary from the manifest.
std::unique_ptr<Model> load_checkpoint(const std::string& dir, CheckpointInfo* info = nullptr);
// Loads into an existing model after checking config and every shape.
void load_checkpoint_into(Model& model, const std::string& dir, CheckpointInfo* info = nullptr);

using EpochCallback = std::function<bool(const EpochStats& train,
                                         const std::optional<EpochStats>& validation)>;

// Runs max_epochs epochs (or until the callback returns false). With a
// checkpoint dir, the model with the lowest validation joint loss is saved
// there (lowest training loss if no dev set).
TrainResult train_model(Model& model, const std::vector<Sample>& train,
                        const std::vector<Sample>& dev, const TrainConfig& config,
                        const std::string& checkpoint_dir = {},
                        const EpochCallback& on_epoch = {});

}  // namespace plangen
