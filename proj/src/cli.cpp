#include "plangen/cli.hpp"

#include <deque>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "plangen/config.hpp"
#include "plangen/metrics.hpp"
#include "plangen/style.hpp"
#include "plangen/synthetic.hpp"

namespace plangen {

namespace {

namespace fs = std::filesystem;
using Overrides = std::vector<std::pair<std::string, std::string>>;

// Flags that map straight onto config keys.
struct KeyedFlags {
  // deque keeps the bound references valid as flags are added
  std::deque<std::pair<std::string, std::optional<std::string>>> values;
  std::vector<std::string> sets;
  std::string config_path;

  void add(CLI::App* app, const std::string& flag, const std::string& key,
           const std::string& help) {
    values.emplace_back(key, std::nullopt);
    app->add_option(flag, values.back().second, help);
  }

  Overrides overrides(bool allow_decode_keys) const {
    Overrides out;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw Error("--set expects key=value, got \"" + s + "\"");
      out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [k, v] : values)
      if (v) out.emplace_back(k, *v);
    if (!allow_decode_keys)
      for (const auto& [k, v] : out) {
        const auto& dk = decode_config_keys();
        if (std::find(dk.begin(), dk.end(), k) != dk.end())
          throw Error("config key " + k + " is decode-only and not accepted by train");
      }
    return out;
  }
};

void shared_flags(CLI::App* app, KeyedFlags& f) {
  app->add_option("--config", f.config_path, "key=value config file");
  app->add_option("--set", f.sets, "config override key=value (repeatable)");
  f.add(app, "--seed", "seed", "random seed");
  f.add(app, "--task", "task", "argument, wikipedia or abstract");
}

void require_file(const std::string& what, const std::string& path) {
  if (path.empty()) throw Error("missing " + what + " path");
  if (!fs::exists(path)) throw Error(what + " not found: " + path);
}

void log_config(std::ostream& err, const std::string& command, const RunConfig& c) {
  err << "[" << command << "] resolved config (seed " << c.seed() << ")\n" << c.to_text();
}

CorpusOptions corpus_options(const RunConfig& c, bool targets, bool styles) {
  CorpusOptions o;
  o.require_targets = targets;
  o.require_styles = styles;
  o.style_arity = style_arity(c.task);
  o.bank_cap = c.bank_cap;
  return o;
}

std::string curve_csv(const TrainResult& r) {
  std::ostringstream s;
  s.precision(10);
  s << "epoch,train_joint,train_gen,train_sel,train_style,train_token_acc,dev_joint\n";
  for (std::size_t i = 0; i < r.train.size(); ++i) {
    const auto& t = r.train[i];
    s << t.epoch << ',' << t.joint << ',' << t.gen << ',' << t.sel << ',' << t.style << ','
      << t.token_accuracy << ',';
    if (i < r.validation.size()) s << r.validation[i].joint;
    s << '\n';
  }
  return s.str();
}

int run_train(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_file("train corpus", c.train_path);
  if (!c.dev_path.empty()) require_file("dev corpus", c.dev_path);
  if (!c.embeddings_path.empty()) require_file("embeddings", c.embeddings_path);
  if (c.checkpoint_path.empty()) throw Error("missing checkpoint path");
  log_config(err, "train", c);

  auto train = load_corpus(c.train_path, corpus_options(c, true, true));
  std::vector<Sample> dev;
  if (!c.dev_path.empty()) dev = load_corpus(c.dev_path, corpus_options(c, true, true));
  if (train.empty()) throw Error("train corpus is empty");
  Model model(model_config(c.train, c.task), build_vocabulary(train, c.vocab_size));
  if (!c.embeddings_path.empty()) {
    auto n = load_pretrained_embeddings(model, c.embeddings_path);
    err << "[train] loaded " << n << " pretrained embeddings\n";
  }
  err << "[train] " << train.size() << " samples, vocab " << model.vocab().size() << ", "
      << model.params().parameter_count() << " parameters\n";
  fs::create_directories(c.checkpoint_path);
  write_file((fs::path(c.checkpoint_path) / "run_config.txt").string(), c.to_text());
  TrainResult r = train_model(model, train, dev, c.train, c.checkpoint_path,
                              [&](const EpochStats& t, const std::optional<EpochStats>& v) {
                                err << "[train] epoch " << t.epoch << " joint " << t.joint
                                    << " acc " << t.token_accuracy;
                                if (v) err << " dev " << v->joint;
                                err << '\n';
                                return true;
                              });
  write_file((fs::path(c.checkpoint_path) / "loss_curve.csv").string(), curve_csv(r));
  out << "best epoch " << r.best_epoch << " loss " << r.best_validation << '\n';
  return 0;
}

int run_generate(RunConfig c, bool task_given, const std::string& dump_plan, std::ostream& out,
                 std::ostream& err) {
  require_file("checkpoint", c.checkpoint_path);
  require_file("test corpus", c.test_path);
  auto model = load_checkpoint(c.checkpoint_path);
  if (task_given && model->config().task != c.task)
    throw Error("checkpoint was trained for task " + task_name(model->config().task));
  if (!task_given) {
    c.task = model->config().task;
    set_config_value(c, "task", task_name(c.task));
  }
  log_config(err, "generate", c);
  auto samples = load_corpus(c.test_path, corpus_options(c, c.decode.oracle_plan, false));
  std::string lines, plans;
  for (const auto& s : samples) {
    Generation g = generate(*model, s, c.decode);
    lines += generation_jsonl(g) + "\n";
    plans += "{\"id\":" + nlohmann::json(g.id).dump() + ",\"plan\":" +
             plan_json(g.plan, g.bank_size) + "}\n";
  }
  if (c.output_path.empty()) out << lines;
  else write_file(c.output_path, lines);
  if (!dump_plan.empty()) write_file(dump_plan, plans);
  err << "[generate] " << samples.size() << " outputs\n";
  return 0;
}

std::vector<EvalRecord> join_records(const std::vector<GenerationRecord>& gens,
                                     const std::vector<Sample>& refs) {
  std::map<std::string, EvalRecord> by_id;
  for (const auto& s : refs) {
    auto [it, fresh] = by_id.try_emplace(s.id);
    Tokens ref;
    for (const auto& t : s.targets) ref.insert(ref.end(), t.tokens.begin(), t.tokens.end());
    it->second.references.push_back(std::move(ref));
    if (fresh) {
      it->second.id = s.id;
      for (const auto& t : s.targets) {
        std::vector<std::size_t> raw;
        for (auto k : t.selection)
          if (k >= s.content_begin() && k < s.content_end()) raw.push_back(k - 1);
        it->second.gold_plan.push_back(std::move(raw));
      }
    }
  }
  std::vector<EvalRecord> out;
  for (const auto& g : gens) {
    auto it = by_id.find(g.id);
    if (it == by_id.end()) throw Error("no reference for generated id " + g.id);
    EvalRecord r = it->second;
    r.candidate = g.output;
    r.predicted_plan = g.plan;
    out.push_back(std::move(r));
  }
  return out;
}

int run_evaluate(const RunConfig& c, const std::string& generations, const std::string& refs,
                 const std::string& bins_path, std::size_t n_bins, std::ostream& out,
                 std::ostream& err) {
  require_file("generations", generations);
  require_file("references", refs);
  log_config(err, "evaluate", c);
  auto records = join_records(parse_generations(read_file(generations)),
                              load_corpus(refs, corpus_options(c, true, false)));
  const std::string table = format_scores(evaluate_corpus(records));
  if (c.output_path.empty()) out << table;
  else write_file(c.output_path, table);
  if (!bins_path.empty()) {
    std::vector<ScoredPoint> points;
    for (const auto& r : records) {
      RecordScores s = score_record(r);
      points.push_back({s.selection_f1, s.bleu2, s.rouge_l});
    }
    BinAnalysis a = plan_quality_correlation(points, n_bins);
    write_file(bins_path, bins_csv(a));
    err << "[evaluate] pearson r (BLEU-2) "
        << (a.r_bleu ? std::to_string(*a.r_bleu) : std::string("undefined")) << '\n';
  }
  return 0;
}

struct LabelFlags {
  std::string input;
  bool report = false, no_prune = false, align = false, extract = false;
};

int run_label(const RunConfig& c, const LabelFlags& f, std::ostream& out, std::ostream& err) {
  require_file("input corpus", f.input);
  log_config(err, "label", c);
  auto samples = load_corpus(f.input, corpus_options(c, true, false));
  for (auto& s : samples) {
    if (f.extract) {
      std::vector<Keyphrase> candidates;
      for (const auto& t : s.targets) {
        auto found = extract_keyphrase_candidates(t.tokens);
        candidates.insert(candidates.end(), found.begin(), found.end());
      }
      s.bank = build_keyphrase_bank(candidates, c.bank_cap);
    }
    if (f.align || f.extract)
      for (auto& t : s.targets) t.selection = align_selection_labels(t.tokens, s.bank);
  }
  label_corpus(samples, c.task);
  const std::size_t before = samples.size();
  if (c.task == Task::kArgument && !f.no_prune) samples = prune_functional_only(std::move(samples));
  err << "[label] " << samples.size() << " of " << before << " samples kept\n";
  if (f.report) out << style_distribution_report(samples, c.task);
  if (!c.output_path.empty()) write_corpus(samples, c.output_path);
  else if (!f.report) out << serialize_corpus(samples);
  return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Content planning and style-controlled generation"};
  app.name("plangen");
  app.require_subcommand(1);

  KeyedFlags train_f, gen_f, eval_f, label_f, synth_f;

  auto* train = app.add_subcommand("train", "train a model and write the best checkpoint");
  shared_flags(train, train_f);
  train_f.add(train, "--train", "train", "training corpus (JSONL)");
  train_f.add(train, "--dev", "dev", "validation corpus (JSONL)");
  train_f.add(train, "--checkpoint", "checkpoint", "checkpoint directory to write");
  train_f.add(train, "--embeddings", "embeddings", "pretrained word vectors");
  train_f.add(train, "--hidden", "hidden", "hidden size");
  train_f.add(train, "--layers", "layers", "decoder layers");
  train_f.add(train, "--embedding-dim", "embedding_dim", "word embedding size");
  train_f.add(train, "--dropout", "dropout", "dropout between layers");
  train_f.add(train, "--logit-scale", "logit_scale", "scale on the bounded vocabulary logits");
  train_f.add(train, "--copy-spread", "copy_spread", "bank copy spread: uniform or sequential");
  train_f.add(train, "--lr", "lr", "AdaGrad learning rate");
  train_f.add(train, "--batch-size", "batch_size", "mini-batch size");
  train_f.add(train, "--epochs", "max_epochs", "number of epochs");
  train_f.add(train, "--vocab-size", "vocab_size", "vocabulary cap");

  auto* gen = app.add_subcommand("generate", "decode a corpus with a trained checkpoint");
  shared_flags(gen, gen_f);
  std::string dump_plan;
  gen_f.add(gen, "--checkpoint", "checkpoint", "checkpoint directory");
  gen_f.add(gen, "--input", "test", "input corpus (JSONL)");
  gen_f.add(gen, "--output", "output", "generation JSONL (stdout if absent)");
  gen_f.add(gen, "--beam", "beam", "beam size");
  gen_f.add(gen, "--max-sentences", "max_sentences", "plan length cap");
  gen_f.add(gen, "--threshold", "threshold", "selection threshold");
  gen_f.add(gen, "--max-len", "max_len", "tokens per sentence cap");
  bool oracle = false, greedy = false;
  gen->add_flag("--oracle-plan", oracle, "decode with gold selections");
  gen->add_flag("--greedy", greedy, "argmax decoding");
  gen->add_option("--dump-plan", dump_plan, "write executed plans as JSONL");

  auto* eval = app.add_subcommand("evaluate", "score generations against references");
  shared_flags(eval, eval_f);
  std::string generations, references, bins;
  std::size_t n_bins = 10;
  eval->add_option("--generations", generations, "generation JSONL")->required();
  eval->add_option("--references", references, "reference corpus JSONL")->required();
  eval_f.add(eval, "--output", "output", "metric table (stdout if absent)");
  eval->add_option("--bins", bins, "per-bin CSV path");
  eval->add_option("--n-bins", n_bins, "number of F1 bins");

  auto* label = app.add_subcommand("label", "assign sentence styles to a corpus");
  shared_flags(label, label_f);
  LabelFlags lf;
  label->add_option("--input", lf.input, "corpus JSONL")->required();
  label_f.add(label, "--output", "output", "labeled corpus JSONL");
  label->add_flag("--report", lf.report, "print the style distribution");
  label->add_flag("--no-prune", lf.no_prune, "keep samples whose sentences are all functional");
  label->add_flag("--align", lf.align, "recompute selection labels from content words");
  label->add_flag("--extract-keyphrases", lf.extract, "rebuild banks from target sentences");

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
  shared_flags(synth, synth_f);
  std::size_t n = 64;
  std::string synth_out;
  synth->add_option("--n", n, "number of samples");
  synth->add_option("--out", synth_out, "output JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (train->parsed()) {
      RunConfig c = load_config(train_f.config_path, train_f.overrides(false));
      return run_train(c, out, err);
    }
    if (gen->parsed()) {
      Overrides o = gen_f.overrides(true);
      if (oracle) o.emplace_back("oracle_plan", "true");
      if (greedy) o.emplace_back("greedy", "true");
      RunConfig c = load_config(gen_f.config_path, o);
      bool task_given = false;
      for (const auto& [k, v] : o) task_given |= k == "task";
      if (!gen_f.config_path.empty())
        for (const auto& [k, v] : parse_config_text(read_file(gen_f.config_path)))
          task_given |= k == "task";
      return run_generate(c, task_given, dump_plan, out, err);
    }
    if (eval->parsed()) {
      RunConfig c = load_config(eval_f.config_path, eval_f.overrides(true));
      return run_evaluate(c, generations, references, bins, n_bins, out, err);
    }
    if (label->parsed()) {
      RunConfig c = load_config(label_f.config_path, label_f.overrides(true));
      return run_label(c, lf, out, err);
    }
    if (synth->parsed()) {
      RunConfig c = load_config(synth_f.config_path, synth_f.overrides(true));
      log_config(err, "synth", c);
      write_corpus(generate_synthetic_corpus(c.seed(), n), synth_out);
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace plangen
