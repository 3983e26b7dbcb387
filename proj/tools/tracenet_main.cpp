// Command-line front end: gen, embed, train, eval, baseline, gradcheck.
#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstring>
#include <fstream>
#include <iostream>
#include <string>

#include "tracenet/commands.hpp"
#include "tracenet/errors.hpp"

using namespace tracenet;
using nlohmann::json;

namespace {

struct Options {
  GlobalOptions global;
  GenOptions gen;
  EmbedOptions embed;
  TrainOptions train;
  EvalOptions eval;
  std::size_t baseline_n = 1000000;
  std::size_t grad_seeds = 10;
  bool inject_fault = false;
  std::string semantic_mode = "tracewalk";
  std::string task = "all";
};

// The --config file is read before flag parsing so explicit flags win.
std::string find_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) return argv[i + 1];
    if (std::strncmp(argv[i], "--config=", 9) == 0) return argv[i] + 9;
  }
  return {};
}

template <typename T>
void take(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

void apply_config(const std::string& path, Options& o) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open config");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(0, path + ": " + e.what());
  }
  if (!doc.is_object()) throw SchemaError("config must be a JSON object");
  try {
    take(doc, "seed", o.global.seed);
    take(doc, "workers", o.global.workers);
    take(doc, "out_dir", o.global.out_dir);
    if (doc.contains("gen")) {
      const json& g = doc["gen"];
      take(g, "graphs", o.gen.graphs);
      take(g, "variants", o.gen.variants);
      take(g, "n_ops", o.gen.n_ops);
      take(g, "cross_pairs", o.gen.cross_pairs);
      take(g, "test_fraction", o.gen.test_fraction);
      take(g, "max_depth", o.gen.max_depth);
      take(g, "max_activities", o.gen.max_activities);
      take(g, "max_traces", o.gen.max_traces);
    }
    if (doc.contains("embed")) {
      const json& e = doc["embed"];
      take(e, "dataset", o.embed.dataset);
      take(e, "mode", o.embed.mode);
      take(e, "dim", o.embed.dim);
      take(e, "window", o.embed.window);
      take(e, "epochs", o.embed.epochs);
      take(e, "lr", o.embed.lr);
      take(e, "max_traces", o.embed.max_traces);
      take(e, "max_len", o.embed.max_len);
      take(e, "walks_per_node", o.embed.walks_per_node);
      take(e, "walk_len", o.embed.walk_len);
      take(e, "words", o.embed.words);
      take(e, "text_corpus", o.embed.text_corpus);
    }
    if (doc.contains("train")) {
      const json& t = doc["train"];
      take(t, "dataset", o.train.dataset);
      take(t, "node_vectors", o.train.node_vectors);
      take(t, "word_vectors", o.train.word_vectors);
      take(t, "val_fraction", o.train.val_fraction);
      take(t, "log_every", o.train.log_every);
    }
    if (doc.contains("model")) {
      o.train.model = config_from_json(doc["model"], o.train.model);
      o.semantic_mode = std::string(to_string(o.train.model.semantic_mode));
      o.task = std::to_string(task_number(o.train.model.task_mode));
    }
    if (doc.contains("eval")) {
      const json& e = doc["eval"];
      take(e, "dataset", o.eval.dataset);
      take(e, "model_dir", o.eval.model_dir);
      take(e, "tasks", o.eval.tasks);
      take(e, "split", o.eval.split);
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
}

int run_command(CLI::App& app, Options& o) {
  if (app.got_subcommand("gen")) {
    const GenReport r = cmd_gen(o.global, o.gen);
    fmt::print("graphs: {} base + {} mutated\npairs: {} ({} train, {} test)\ndataset: {}\n", r.base_graphs,
               r.mutated_graphs, r.pairs, r.train_pairs, r.test_pairs, r.dataset_path);
  } else if (app.got_subcommand("embed")) {
    const EmbedReport r = cmd_embed(o.global, o.embed);
    fmt::print("graphs: {}\n", r.graphs);
    if (!r.node_path.empty()) fmt::print("node vectors: {} -> {}\n", r.node_vectors, r.node_path);
    if (!r.word_path.empty()) fmt::print("word vectors: {} -> {}\n", r.word_vectors, r.word_path);
  } else if (app.got_subcommand("train")) {
    o.train.model.semantic_mode = parse_semantic_mode(o.semantic_mode);
    o.train.model.task_mode = parse_task_mode(o.task);
    const TrainReport r = cmd_train(o.global, o.train, &std::cerr);
    fmt::print("examples: {} train, {} validation\nepochs: {} (best {}, early stop: {})\nbest val loss: {:.6f}\n",
               r.train_examples, r.val_examples, r.result.history.size(), r.result.best_epoch,
               r.result.early_stopped ? "yes" : "no", r.result.best_val_loss);
    if (r.missing_embeddings) fmt::print("missing node embeddings: {}\n", r.missing_embeddings);
    fmt::print("checkpoint: {}\n", r.checkpoint_path);
  } else if (app.got_subcommand("eval")) {
    const EvalReport r = cmd_eval(o.global, o.eval);
    std::cout << format_metrics_table(r);
  } else if (app.got_subcommand("baseline")) {
    const BaselineReport r = cmd_baseline(o.baseline_n, o.global.seed);
    fmt::print("n = {}  seed = {}\nestimate of E|p-q| = {:.10f}\n|estimate - 1/3| = {:.3e}  (4 sigma/sqrt(n) = {:.3e})\n",
               r.n, r.seed, r.estimate, r.error, r.clt_bound);
    fmt::print("finite-n closed form 1/3 - 1/(2n^2), n=1000: {:.10f}\n", r.closed_form_1000);
    fmt::print("direct grid sum, n=1000:                     {:.10f}\n", r.direct_sum_1000);
    return r.n > 1 && r.error >= r.clt_bound ? kExitFailure : kExitOk;
  } else if (app.got_subcommand("gradcheck")) {
    const GradcheckReport r = cmd_gradcheck(o.global.seed, o.grad_seeds, o.inject_fault);
    for (const GradcheckLine& l : r.lines) {
      fmt::print("{:<16} max rel err {:.3e}  {}\n", l.layer, l.max_rel_error, l.pass ? "PASS" : "FAIL");
    }
    if (!r.pass()) {
      const auto worst = std::max_element(r.lines.begin(), r.lines.end(), [](const auto& a, const auto& b) {
        return a.max_rel_error < b.max_rel_error;
      });
      fmt::print(stderr, "gradient check failed; worst offender: {} {}\n", worst->layer, worst->worst);
      return kExitFailure;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Process graph / text consistency toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--seed", o.global.seed, "Random seed")->capture_default_str();
  app.add_option("--workers", o.global.workers, "Worker threads")->capture_default_str();
  app.add_option("--out-dir", o.global.out_dir, "Output directory")->capture_default_str();
  app.add_option("--config", config_path, "JSON config file (flags override it)");

  auto* gen = app.add_subcommand("gen", "Generate a labeled dataset");
  gen->add_option("--graphs", o.gen.graphs, "Base graphs")->capture_default_str();
  gen->add_option("--variants", o.gen.variants, "Mutated variants per base graph")->capture_default_str();
  gen->add_option("--n-ops", o.gen.n_ops, "Mutation counts cycled over the variants")->delimiter(',');
  gen->add_option("--cross-pairs", o.gen.cross_pairs, "Cross-family pairs per base")->capture_default_str();
  gen->add_option("--test-fraction", o.gen.test_fraction, "Share of families in the test split")->capture_default_str();
  gen->add_option("--max-depth", o.gen.max_depth)->capture_default_str();
  gen->add_option("--max-activities", o.gen.max_activities)->capture_default_str();
  gen->add_option("--max-traces", o.gen.max_traces, "Trace cap for gold labels")->capture_default_str();

  auto* embed = app.add_subcommand("embed", "Train node and word vectors");
  embed->add_option("--dataset", o.embed.dataset, "Dataset JSONL");
  embed->add_option("--mode", o.embed.mode, "tracewalk | deepwalk | none")->capture_default_str();
  embed->add_option("--dim", o.embed.dim)->capture_default_str();
  embed->add_option("--window", o.embed.window)->capture_default_str();
  embed->add_option("--epochs", o.embed.epochs)->capture_default_str();
  embed->add_option("--lr", o.embed.lr)->capture_default_str();
  embed->add_option("--max-traces", o.embed.max_traces)->capture_default_str();
  embed->add_option("--max-len", o.embed.max_len)->capture_default_str();
  embed->add_option("--walks", o.embed.walks_per_node, "Structural walks per node")->capture_default_str();
  embed->add_option("--walk-len", o.embed.walk_len)->capture_default_str();
  embed->add_flag("!--no-words", o.embed.words, "Skip the word vectors");
  embed->add_option("--text-corpus", o.embed.text_corpus, "Plain-text corpus for the word vectors");

  auto* train = app.add_subcommand("train", "Train the consistency model");
  ModelConfig& m = o.train.model;
  train->add_option("--dataset", o.train.dataset, "Dataset JSONL");
  train->add_option("--node-vectors", o.train.node_vectors);
  train->add_option("--word-vectors", o.train.word_vectors);
  train->add_option("--semantic-mode", o.semantic_mode, "tracewalk | deepwalk | none")->capture_default_str();
  train->add_option("--task", o.task, "activities|gateways|all or 1|2|3")->capture_default_str();
  train->add_option("--gamma", m.gamma)->capture_default_str();
  train->add_option("--epochs", m.max_epochs)->capture_default_str();
  train->add_option("--batch", m.batch)->capture_default_str();
  train->add_option("--lr", m.lr)->capture_default_str();
  train->add_option("--lr-late", m.lr_late)->capture_default_str();
  train->add_option("--lr-drop-epoch", m.lr_drop_epoch)->capture_default_str();
  train->add_option("--patience", m.patience)->capture_default_str();
  train->add_option("--hidden", m.hidden_units)->capture_default_str();
  train->add_option("--widths", m.filter_widths)->delimiter(',');
  train->add_option("--filters", m.filters_per_width, "Filters per width")->delimiter(',');
  train->add_option("--max-tokens", m.max_tokens)->capture_default_str();
  train->add_option("--max-nodes", m.max_nodes)->capture_default_str();
  train->add_option("--val-fraction", o.train.val_fraction)->capture_default_str();
  train->add_option("--log-every", o.train.log_every)->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Evaluate a trained model");
  eval->add_option("--dataset", o.eval.dataset, "Dataset JSONL");
  eval->add_option("--model-dir", o.eval.model_dir);
  eval->add_option("--tasks", o.eval.tasks, "all | 1 | 2 | 3 | model")->capture_default_str();
  eval->add_option("--split", o.eval.split, "test | train | all")->capture_default_str();

  auto* baseline = app.add_subcommand("baseline", "Random-checker expectation check");
  baseline->add_option("--n", o.baseline_n, "Samples")->capture_default_str();

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  grad->add_option("--seeds", o.grad_seeds)->capture_default_str();
  grad->add_flag("--inject-fault", o.inject_fault, "Skew analytic gradients (must fail)");

  try {
    const std::string cfg = find_config(argc, argv);
    if (!cfg.empty()) apply_config(cfg, o);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_code_for(e);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    return run_command(app, o);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_code_for(e);
  }
}
