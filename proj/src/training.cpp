#include "plangen/training.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace plangen {

using json = nlohmann::ordered_json;

void TrainConfig::validate() const {
  if (gamma < 0 || eta < 0) throw Error("gamma and eta must be nonnegative");
  if (batch_size < 1) throw Error("batch_size must be positive");
  if (lr < 0) throw Error("lr must be nonnegative");
  if (!(acc_init > 0)) throw Error("acc_init must be positive");
  if (!(clip > 0)) throw Error("clip must be positive");
  if (hidden < 2 || hidden % 2) throw Error("hidden must be an even number >= 2");
  if (layers < 1) throw Error("layers must be positive");
  if (dropout < 0 || dropout >= 1) throw Error("dropout must lie in [0, 1)");
  if (embedding_dim < 1) throw Error("embedding_dim must be positive");
  if (!(logit_scale > 0)) throw Error("logit_scale must be positive");
  if (lm_pretraining) throw Error("lm_pretraining is not supported");
}

ModelConfig model_config(const TrainConfig& config, Task task) {
  ModelConfig m;
  m.task = task;
  m.embedding_dim = config.embedding_dim;
  m.hidden = config.hidden;
  m.layers = config.layers;
  m.dropout = config.dropout;
  m.logit_scale = config.logit_scale;
  m.copy_spread = config.copy_spread;
  m.seed = config.seed;
  return m;
}

Array joint_loss(Tape* tape, const Array& gen, const Array& style, const Array& sel,
                 double gamma, double eta) {
  return ops::add(tape, ops::add(tape, gen, ops::scale(tape, style, gamma)),
                  ops::scale(tape, sel, eta));
}

double joint_loss(double gen, double style, double sel, double gamma, double eta) {
  return gen + gamma * style + eta * sel;
}

SampleLoss compute_sample_loss(Tape* tape, const Model& model, const Sample& sample,
                               double gamma, double eta, const Dropout& dropout) {
  if (sample.targets.empty()) throw Error("sample " + sample.id + " has no target sentences");
  EncoderState enc = encode_input(tape, model, input_ids(model, sample));
  KeyphraseMemory memory = encode_keyphrase_bank(tape, model, sample.bank);
  PlanState init = initial_plan_state(model, enc, memory);
  TeacherForcedPlan plan = teacher_forced_plan(tape, model, memory, init, sample, dropout);
  SourceContext source =
      build_source_context(model.vocab(), encoder_input_tokens(sample), enc.length, sample.bank);
  TeacherForcedRealization real = teacher_forced_realize(
      tape, model, enc, memory, source, plan.steps, sample.targets, sample.global_style, dropout);

  SampleLoss out;
  out.gen = real.loss;
  out.sel = plan.selection_loss;
  out.style = plan.style_loss;
  out.joint = joint_loss(tape, out.gen, out.style, out.sel, gamma, eta);
  out.correct = real.correct;
  out.total = real.total;
  return out;
}

namespace {

void accumulate(EpochStats& s, const SampleLoss& l, std::size_t& correct, std::size_t& total) {
  s.joint += l.joint.item();
  s.gen += l.gen.item();
  s.sel += l.sel.item();
  s.style += l.style.item();
  correct += l.correct;
  total += l.total;
}

void finish(EpochStats& s, std::size_t n, std::size_t correct, std::size_t total) {
  const double d = static_cast<double>(n);
  s.joint /= d;
  s.gen /= d;
  s.sel /= d;
  s.style /= d;
  s.token_accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

}  // namespace

EpochStats train_epoch(Model& model, const std::vector<Sample>& data, const TrainConfig& config,
                       OptimState& opt, Rng& order_rng, Rng& dropout_rng, std::size_t epoch) {
  if (data.empty()) throw Error("train_epoch: empty dataset");
  if (opt.accumulators.size() != model.params().size())
    throw Error("train_epoch: optimizer state does not match the model");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  order_rng.shuffle(order);

  Dropout dropout{config.dropout, &dropout_rng};
  EpochStats stats;
  stats.epoch = epoch;
  std::size_t correct = 0, total = 0;
  for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
    const std::size_t end = std::min(order.size(), start + config.batch_size);
    const double weight = 1.0 / static_cast<double>(end - start);
    const std::size_t batch_id = stats.batches++;
    model.params().zero_grad();
    for (std::size_t i = start; i < end; ++i) {
      Tape tape;
      SampleLoss l = compute_sample_loss(&tape, model, data[order[i]], config.gamma,
                                         config.eta, dropout);
      if (!std::isfinite(l.joint.item()))
        throw Error("non-finite loss in epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(batch_id) + " (sample " + data[order[i]].id + ")");
      Array scaled = ops::scale(&tape, l.joint, weight);
      tape.backward(scaled);
      accumulate(stats, l, correct, total);
    }
    clip_global_norm(model.params(), config.clip);
    adagrad_update(model.params(), opt);
  }
  finish(stats, data.size(), correct, total);
  return stats;
}

EpochStats evaluate_loss(const Model& model, const std::vector<Sample>& data,
                         const TrainConfig& config) {
  EpochStats stats;
  if (data.empty()) return stats;
  std::size_t correct = 0, total = 0;
  for (const auto& s : data)
    accumulate(stats, compute_sample_loss(nullptr, model, s, config.gamma, config.eta), correct,
               total);
  finish(stats, data.size(), correct, total);
  return stats;
}

namespace {

namespace fs = std::filesystem;

json config_json(const ModelConfig& c) {
  return json{{"task", task_name(c.task)},       {"embedding_dim", c.embedding_dim},
              {"hidden", c.hidden},               {"layers", c.layers},
              {"dropout", c.dropout},             {"init_scale", c.init_scale},
              {"forget_bias", c.forget_bias},     {"logit_scale", c.logit_scale},
              {"copy_spread", copy_spread_name(c.copy_spread)}, {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.task = parse_task(j.at("task").get<std::string>());
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.init_scale = j.at("init_scale").get<double>();
  c.forget_bias = j.at("forget_bias").get<double>();
  c.logit_scale = j.at("logit_scale").get<double>();
  c.copy_spread = parse_copy_spread(j.at("copy_spread").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

void put_le(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  return std::bit_cast<double>(bits);
}

json read_manifest(const std::string& dir) {
  const fs::path path = fs::path(dir) / "manifest.json";
  if (!fs::exists(path)) throw Error("checkpoint manifest not found: " + path.string());
  try {
    return json::parse(read_file(path.string()));
  } catch (const json::exception& e) {
    throw Error("checkpoint manifest " + path.string() + ": " + e.what());
  }
}

void load_payload(Model& model, const std::string& dir, const json& manifest) {
  const auto& entries = manifest.at("parameters");
  auto& params = model.params();
  if (entries.size() != params.size())
    throw Error("checkpoint lists " + std::to_string(entries.size()) + " parameters, model has " +
                std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto name = entries[i].at("name").get<std::string>();
    const auto shape = entries[i].at("shape").get<Shape>();
    if (name != params.name(i))
      throw Error("checkpoint parameter " + name + " where model expects " + params.name(i));
    if (shape != params.at(i).shape())
      throw Error("checkpoint parameter " + name + " has shape " + shape_string(shape) +
                  ", model expects " + shape_string(params.at(i).shape()));
  }
  const std::string payload = read_file((fs::path(dir) / "params.bin").string());
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto values = params.at(i).values();
    if (payload.size() < offset + 8 * values.size())
      throw Error("checkpoint payload truncated in parameter " + params.name(i));
    for (auto& v : values) {
      v = get_le(bytes + offset);
      offset += 8;
    }
  }
  if (offset != payload.size())
    throw Error("checkpoint payload has " + std::to_string(payload.size() - offset) +
                " trailing bytes");
}

void read_info(const json& manifest, CheckpointInfo* info) {
  if (!info) return;
  info->epoch = manifest.at("epoch").get<std::size_t>();
  info->validation_loss = manifest.at("validation_loss").get<double>();
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& dir, const CheckpointInfo& info) {
  fs::create_directories(dir);
  json manifest;
  manifest["format"] = 1;
  manifest["config"] = config_json(model.config());
  manifest["epoch"] = info.epoch;
  manifest["validation_loss"] = info.validation_loss;
  manifest["vocab"] = model.vocab().tokens();
  json entries = json::array();
  std::string payload;
  payload.reserve(8 * model.params().parameter_count());
  for (const auto& [name, array] : model.params()) {
    entries.push_back(json{{"name", name}, {"shape", array.shape()}});
    for (double v : array.values()) put_le(payload, v);
  }
  manifest["parameters"] = entries;
  write_file((fs::path(dir) / "manifest.json").string(), manifest.dump(1) + "\n");
  write_file((fs::path(dir) / "params.bin").string(), payload);
}

std::unique_ptr<Model> load_checkpoint(const std::string& dir, CheckpointInfo* info) {
  json manifest = read_manifest(dir);
  ModelConfig cfg;
  Vocabulary vocab;
  try {
    cfg = config_from_json(manifest.at("config"));
    vocab = Vocabulary(manifest.at("vocab").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw Error("checkpoint manifest: " + std::string(e.what()));
  }
  auto model = std::make_unique<Model>(cfg, std::move(vocab));
  load_payload(*model, dir, manifest);
  read_info(manifest, info);
  return model;
}

void load_checkpoint_into(Model& model, const std::string& dir, CheckpointInfo* info) {
  json manifest = read_manifest(dir);
  const json expected = config_json(model.config());
  for (const auto& [key, value] : expected.items()) {
    if (key == "dropout" || key == "seed") continue;
    if (!manifest.at("config").contains(key) || manifest["config"][key] != value)
      throw Error("checkpoint config field " + key + " is " + manifest["config"][key].dump() +
                  ", model has " + value.dump());
  }
  if (manifest.at("vocab").get<std::vector<std::string>>() != model.vocab().tokens())
    throw Error("checkpoint vocabulary differs from the model's");
  load_payload(model, dir, manifest);
  read_info(manifest, info);
}

TrainResult train_model(Model& model, const std::vector<Sample>& train,
                        const std::vector<Sample>& dev, const TrainConfig& config,
                        const std::string& checkpoint_dir, const EpochCallback& on_epoch) {
  config.validate();
  OptimState opt = OptimState::create(model.params(), config.lr, config.acc_init, config.clip);
  Rng order_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Rng dropout_rng(config.seed ^ 0xd1b54a32d192ed03ULL);
  TrainResult result;
  bool have_best = false;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    EpochStats stats = train_epoch(model, train, config, opt, order_rng, dropout_rng, epoch);
    result.train.push_back(stats);
    std::optional<EpochStats> val;
    if (!dev.empty()) {
      val = evaluate_loss(model, dev, config);
      val->epoch = epoch;
      result.validation.push_back(*val);
    }
    const double score = val ? val->joint : stats.joint;
    if (!have_best || score < result.best_validation) {
      have_best = true;
      result.best_validation = score;
      result.best_epoch = epoch;
      if (!checkpoint_dir.empty()) save_checkpoint(model, checkpoint_dir, {epoch, score});
    }
    if (on_epoch && !on_epoch(stats, val)) break;
  }
  return result;
}

}  // namespace plangen
