// mbc: generate, solve, train, evaluate and inspect multilevel critical node games.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "mbc/curriculum.hpp"
#include "mbc/eval.hpp"
#include "mbc/io.hpp"
#include "mbc/oracle.hpp"
#include "mbc/parallel.hpp"
#include "mbc/rl.hpp"
#include "mbc/rng.hpp"

namespace fs = std::filesystem;
using namespace mbc;
using io::Json;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return (v && *v) ? std::string(v) : fallback;
}

int default_threads() { return std::stoi(env_or("MBC_THREADS", "1")); }
fs::path default_out() { return env_or("MBC_OUT_DIR", "out"); }

struct ConfigOptions {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    app->add_option("--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
    app->add_option("--preset", preset, "Distribution preset (D1, D2, desk; _dir/_w suffixes)");
    app->add_option("--seed", seed, "Master seed (overrides the config)");
  }

  io::ExperimentConfig load() const {
    io::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = io::read_experiment(config_path);
    if (!preset.empty()) {
      cfg.distribution_name = preset;
      cfg.distribution = DistributionConfig::preset(preset);
      if (config_path.empty()) cfg.model = ModelConfig::desk(cfg.distribution.nodes.hi);
    }
    if (seed) cfg.seed = *seed;
    if (config_path.empty()) cfg.output_dir = default_out();
    return cfg;
  }
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

// ---- generate ----

struct GenerateArgs {
  ConfigOptions cfg;
  int count = 100;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  const auto cfg = a.cfg.load();
  std::vector<io::InstanceRecord> records;
  records.reserve(a.count);
  for (int i = 0; i < a.count; ++i) {
    GameState s = sample_instance(cfg.distribution, derive_seed(cfg.seed, "instance", i));
    std::string variant = io::variant_of(s.graph);
    records.push_back({"inst-" + std::to_string(i), std::move(variant), std::move(s), {}, {}, {}});
  }
  const fs::path out = a.out.empty() ? cfg.output_dir / "instances.jsonl" : fs::path(a.out);
  io::write_instances(out, records);
  std::cerr << "wrote " << records.size() << " instances to " << out << "\n";
  return 0;
}

// ---- solve ----

struct SolveArgs {
  std::string in;
  std::string out;
  bool force = false;
  int max_nodes = 16;
  int max_budget = 6;
  int threads = 1;
};

int run_solve(const SolveArgs& a) {
  auto records = io::read_instances(a.in);
  std::vector<char> todo(records.size(), 0);
  int skipped = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.exact_value && !a.force) continue;
    if (r.state.graph.size() > a.max_nodes || r.state.budgets.total() > a.max_budget) {
      std::cerr << "warning: instance '" << r.id << "' exceeds the oracle bound (n="
                << r.state.graph.size() << ", B=" << r.state.budgets.total() << "), skipped\n";
      ++skipped;
      continue;
    }
    todo[i] = 1;
  }
  parallel_for(static_cast<int>(records.size()), a.threads, [&](int i) {
    if (!todo[i]) return;
    auto& r = records[i];
    const auto t0 = std::chrono::steady_clock::now();
    const OracleResult res = minimax_value(r.state);
    r.exact_value = res.value;
    r.action_values = res.action_values;
    r.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (todo[i]) {
      std::cerr << records[i].id << ": value " << *records[i].exact_value << " in "
                << fmt(*records[i].solve_seconds) << " s\n";
    }
  }
  io::write_instances(a.out.empty() ? fs::path(a.in) : fs::path(a.out), records);
  std::cerr << "solved " << std::count(todo.begin(), todo.end(), 1) << ", skipped " << skipped << "\n";
  return 0;
}

// ---- train ----

struct TrainArgs {
  ConfigOptions cfg;
  std::string mode;
  std::string out;
  std::string resume;
  int threads = 1;
  std::optional<int> episodes, epochs, train_size, val_size;
  std::optional<std::int64_t> max_updates;
};

Json seeds_json(const std::string& mode, std::uint64_t seed, int stages) {
  Json s;
  s["master"] = seed;
  if (mode == "cur") {
    for (int j = 0; j < stages; ++j) s["stage_" + std::to_string(j)] = derive_seed(seed, "stage", j);
  } else {
    s["init"] = derive_seed(seed, "init");
  }
  return s;
}

void write_manifest(const fs::path& dir, const std::string& mode, const io::ExperimentConfig& cfg,
                    const std::vector<fs::path>& outputs, int stages) {
  Json m;
  m["mode"] = mode;
  m["config_hash"] = io::content_hash(io::to_json(cfg).dump());
  m["seeds"] = seeds_json(mode, cfg.seed, stages);
  Json files = Json::object();
  for (const auto& p : outputs) files[fs::relative(p, dir).generic_string()] = io::file_hash(p);
  m["outputs"] = files;
  std::ofstream(dir / "manifest.json") << m.dump(2) << "\n";
}

int run_train(const TrainArgs& a) {
  auto cfg = a.cfg.load();
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (a.train_size) cfg.train.train_size = *a.train_size;
  if (a.val_size) cfg.train.val_size = *a.val_size;
  if (a.episodes) cfg.rl.episodes = *a.episodes;
  if (a.max_updates) cfg.rl.max_updates = *a.max_updates;
  cfg.train.threads = cfg.rl.threads = a.threads;
  cfg.rl.seed = cfg.seed;

  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << io::to_json(cfg).dump(2) << "\n";

  if (a.mode == "cur") {
    std::optional<ExpertList> resume;
    if (!a.resume.empty()) {
      resume = io::read_expert_list(a.resume);
      if (!resume->experts().empty() && !(resume->experts().begin()->second.config == cfg.model)) {
        throw std::runtime_error("resume: checkpoint model config differs from the experiment config");
      }
    }
    const fs::path experts_dir = dir / "experts";
    const auto stages = enumerate_stages(cfg.distribution);
    auto result = run_curriculum(
        cfg.distribution, cfg.model, cfg.train, cfg.seed, resume ? &*resume : nullptr,
        [&](const StageLog& log, const ExpertList& experts) {
          std::cerr << "stage " << log.stage.label() << ": updates " << log.updates << ", best val mse "
                    << fmt(log.best_val_mse) << ", data " << fmt(log.dataset_ms / 1000) << " s, train "
                    << fmt(log.train_ms / 1000) << " s\n";
          io::write_expert_list(experts_dir, experts);  // partial lists allow resuming
        });
    io::write_expert_list(experts_dir, result.experts);
    io::write_curve_csv(dir / "curve.csv", result.curve);
    std::vector<fs::path> outputs{experts_dir / "experts.json"};
    for (const auto& [stage, net] : result.experts.experts()) {
      outputs.push_back(experts_dir / (stage.label() + ".ckpt"));
    }
    write_manifest(dir, a.mode, cfg, outputs, static_cast<int>(stages.size()));
    std::cerr << "trained " << result.experts.size() << " experts into " << experts_dir << "\n";
    return 0;
  }

  if (a.mode != "dqn" && a.mode != "mc") throw std::invalid_argument("unknown train mode '" + a.mode + "'");
  const RlResult result = a.mode == "dqn" ? multil_dqn_train(cfg.rl, cfg.distribution, cfg.model)
                                          : multil_mc_train(cfg.rl, cfg.distribution, cfg.model);
  const fs::path ckpt = dir / (a.mode + ".ckpt");
  io::write_checkpoint(ckpt, io::Checkpoint{result.net, std::nullopt, Json{{"trainer", a.mode}}});
  io::write_rl_curve_csv(dir / "curve.csv", result.curve);
  write_manifest(dir, a.mode, cfg, {ckpt}, 0);
  std::cerr << a.mode << ": " << result.episodes << " episodes, " << result.updates << " updates\n";
  return 0;
}

// ---- eval ----

struct EvalArgs {
  std::string dataset;
  std::string policy;
  std::string checkpoint;
  std::string config_path;
  std::string report;
  int episodes = 10;
  std::uint64_t seed = 0;
  int threads = 1;
};

void check_config(const std::string& config_path, ModelConfig ckpt, HeadKind head) {
  if (config_path.empty()) return;
  ModelConfig expected = io::read_experiment(config_path).model;
  expected.head = head;
  ckpt.head = head;
  if (!(expected == ckpt)) {
    throw std::runtime_error("checkpoint model config does not match " + config_path + ": checkpoint " +
                             io::to_json(ckpt).dump() + " vs config " + io::to_json(expected).dump());
  }
}

int run_eval(const EvalArgs& a) {
  const auto records = io::read_instances(a.dataset);
  const auto data = io::solved_dataset(records);
  if (data.empty()) throw std::invalid_argument("dataset '" + a.dataset + "' is empty");

  std::unique_ptr<Policy> policy;
  ExpertList experts;
  ValueNetwork net;
  std::unique_ptr<NetworkValuer> valuer;
  auto need_checkpoint = [&] {
    if (a.checkpoint.empty()) throw std::invalid_argument("policy '" + a.policy + "' needs --checkpoint");
  };
  if (a.policy == "oracle") {
    policy = std::make_unique<OraclePolicy>();
  } else if (a.policy == "random") {
    policy = std::make_unique<RandomPolicy>(a.episodes);
  } else if (a.policy == "experts" || a.policy == "cur") {
    need_checkpoint();
    experts = io::read_expert_list(a.checkpoint);
    for (const auto& [stage, e] : experts.experts()) check_config(a.config_path, e.config, HeadKind::Value);
    policy = std::make_unique<GreedyPolicy>(experts, "cur");
  } else if (a.policy == "dqn" || a.policy == "mc") {
    need_checkpoint();
    net = io::read_checkpoint(a.checkpoint).net;
    const HeadKind head = a.policy == "dqn" ? HeadKind::Q : HeadKind::Value;
    if (net.config.head != head) throw std::runtime_error("checkpoint head does not match policy " + a.policy);
    check_config(a.config_path, net.config, head);
    if (head == HeadKind::Q) {
      policy = std::make_unique<QNetworkPolicy>(net);
    } else {
      valuer = std::make_unique<NetworkValuer>(net);
      policy = std::make_unique<GreedyPolicy>(*valuer, "mc");
    }
  } else {
    throw std::invalid_argument("unknown policy '" + a.policy + "'");
  }

  const MetricsReport m = evaluate_policy(data, *policy, a.seed, a.threads);
  const fs::path report = a.report.empty() ? default_out() / "report.csv" : fs::path(a.report);
  io::append_report_csv(report, {fs::path(a.dataset).filename().string(), policy->name(), m, a.seed});
  std::cout << policy->name() << ": eta " << fmt(m.eta) << " zeta " << fmt(m.zeta) << " over "
            << m.n_instances << " instances (" << m.n_excluded << " with v*=0 excluded from eta), "
            << fmt(m.mean_time_s) << " s/instance\n";
  return 0;
}

// ---- inspect ----

struct InspectArgs {
  std::string instance;
  std::string id;
  std::string experts;
  std::string checkpoint;
  bool oracle = false;
  bool csv = false;
  std::optional<double> tolerance;
};

int run_inspect(const InspectArgs& a) {
  const auto records = io::read_instances(a.instance);
  if (records.empty()) throw std::invalid_argument("no instance in '" + a.instance + "'");
  const io::InstanceRecord* rec = &records.front();
  if (!a.id.empty()) {
    auto it = std::find_if(records.begin(), records.end(), [&](const auto& r) { return r.id == a.id; });
    if (it == records.end()) throw std::invalid_argument("no instance with id '" + a.id + "'");
    rec = &*it;
  }
  if (is_terminal(rec->state)) throw std::invalid_argument("instance '" + rec->id + "' is terminal");

  std::unique_ptr<StateValuer> owned;
  ExpertList experts;
  ValueNetwork net;
  const StateValuer* valuer = nullptr;
  if (a.oracle) {
    owned = std::make_unique<OracleValuer>();
    valuer = owned.get();
  } else if (!a.experts.empty()) {
    experts = io::read_expert_list(a.experts);
    valuer = &experts;
  } else if (!a.checkpoint.empty()) {
    net = io::read_checkpoint(a.checkpoint).net;
    if (net.config.head != HeadKind::Value) throw std::invalid_argument("inspect needs a value-head checkpoint");
    owned = std::make_unique<NetworkValuer>(net);
    valuer = owned.get();
  } else {
    throw std::invalid_argument("choose one of --oracle, --experts or --checkpoint");
  }

  const auto rows = inspect_action_values(rec->state, *valuer, a.tolerance.value_or(a.oracle ? 0.0 : 1e-6));
  if (a.csv) {
    io::write_inspection_csv(std::cout, rows);
    return 0;
  }
  const auto phase = current_phase(rec->state);
  std::cout << "instance " << rec->id << ", phase " << (phase ? phase_name(*phase) : "none") << "\n";
  std::cout << std::left << std::setw(8) << "node" << std::setw(26) << "value" << "optimal\n";
  for (const auto& r : rows) {
    std::cout << std::setw(8) << r.node << std::setw(26) << fmt(r.value) << (r.optimal ? "*" : "") << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilevel critical node games: exact solving and learned heuristics"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Sample game instances");
  gen.cfg.add(g);
  g->add_option("--count", gen.count, "Number of instances")->check(CLI::NonNegativeNumber);
  g->add_option("-o,--out", gen.out, "Output file (default $MBC_OUT_DIR/instances.jsonl)");

  SolveArgs solve;
  solve.threads = default_threads();
  auto* s = app.add_subcommand("solve", "Attach exact values and per-action values");
  s->add_option("-i,--in", solve.in, "Instance file")->required()->check(CLI::ExistingFile);
  s->add_option("-o,--out", solve.out, "Output file (default: rewrite the input)");
  s->add_flag("--force", solve.force, "Re-solve records that already carry a value");
  s->add_option("--max-nodes", solve.max_nodes, "Skip instances with more nodes");
  s->add_option("--max-budget", solve.max_budget, "Skip instances with a larger total budget");
  s->add_option("--threads", solve.threads, "Worker threads (env MBC_THREADS)");

  TrainArgs train;
  train.threads = default_threads();
  auto* t = app.add_subcommand("train", "Train the curriculum experts or a baseline");
  t->add_option("mode", train.mode, "cur, dqn or mc")->required()->check(CLI::IsMember({"cur", "dqn", "mc"}));
  train.cfg.add(t);
  t->add_option("-o,--out", train.out, "Output directory (default: config output_dir or $MBC_OUT_DIR)");
  t->add_option("--resume", train.resume, "Expert directory to resume from (cur)")->check(CLI::ExistingDirectory);
  t->add_option("--threads", train.threads, "Worker threads (env MBC_THREADS)");
  t->add_option("--episodes", train.episodes, "Training episodes (dqn, mc)");
  t->add_option("--max-updates", train.max_updates, "Update cap (dqn, mc)");
  t->add_option("--epochs", train.epochs, "Epochs per stage (cur)");
  t->add_option("--train-size", train.train_size, "Training records per stage (cur)");
  t->add_option("--val-size", train.val_size, "Validation records per stage (cur)");

  EvalArgs ev;
  ev.threads = default_threads();
  auto* e = app.add_subcommand("eval", "Score a policy against exact values");
  e->add_option("-d,--dataset", ev.dataset, "Solved instance file")->required()->check(CLI::ExistingFile);
  e->add_option("-p,--policy", ev.policy, "oracle, random, experts, dqn or mc")
      ->required()
      ->check(CLI::IsMember({"oracle", "random", "experts", "cur", "dqn", "mc"}));
  e->add_option("-c,--checkpoint", ev.checkpoint, "Expert directory or checkpoint file");
  e->add_option("--config", ev.config_path, "Reject checkpoints whose model differs from this config")
      ->check(CLI::ExistingFile);
  e->add_option("--report", ev.report, "Report CSV to append to (default $MBC_OUT_DIR/report.csv)");
  e->add_option("--episodes", ev.episodes, "Random-policy episodes per instance")->check(CLI::PositiveNumber);
  e->add_option("--seed", ev.seed, "Evaluation seed");
  e->add_option("--threads", ev.threads, "Worker threads (env MBC_THREADS)");

  InspectArgs ins;
  auto* in = app.add_subcommand("inspect", "Per-node action values for the current phase");
  in->add_option("-i,--instance", ins.instance, "Instance file")->required()->check(CLI::ExistingFile);
  in->add_option("--id", ins.id, "Record id (default: first record)");
  in->add_flag("--oracle", ins.oracle, "Use exact values");
  in->add_option("--experts", ins.experts, "Expert directory")->check(CLI::ExistingDirectory);
  in->add_option("--checkpoint", ins.checkpoint, "Value-head checkpoint")->check(CLI::ExistingFile);
  in->add_flag("--csv", ins.csv, "Emit CSV instead of a table");
  in->add_option("--tolerance", ins.tolerance, "Co-optimality tolerance (default 0 for --oracle, 1e-6 otherwise)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (g->parsed()) return run_generate(gen);
    if (s->parsed()) return run_solve(solve);
    if (t->parsed()) return run_train(train);
    if (e->parsed()) return run_eval(ev);
    if (in->parsed()) return run_inspect(ins);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
