#include "o2orl/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "o2orl/agent_io.hpp"
#include "o2orl/config.hpp"
#include "o2orl/datagen.hpp"
#include "o2orl/train.hpp"

namespace o2orl {

namespace fs = std::filesystem;

namespace {

constexpr const char* kUsage =
    "usage: o2orl <command> [--config=FILE] [--key=value ...]\n"
    "commands:\n"
    "  gen-data   train a reference policy and write the dataset tiers\n"
    "  pretrain   offline pre-training on a dataset\n"
    "  finetune   online fine-tuning from a pretrained checkpoint\n"
    "  evaluate   run a checkpoint's policy and report returns\n"
    "  sweep      grid of finetune runs (fixed alpha values or kp/kd gains)\n";

ConfigMap parse_config(const std::vector<std::string>& args, std::size_t first) {
  ConfigMap map = ConfigMap::defaults();
  // first pass: config files, in order; second pass: flag overrides
  for (std::size_t i = first; i < args.size(); ++i) {
    const std::string& arg = args[i];
    if (arg.rfind("--config=", 0) == 0) map.load_file(arg.substr(9));
  }
  for (std::size_t i = first; i < args.size(); ++i) {
    const std::string& arg = args[i];
    if (arg.rfind("--config=", 0) == 0) continue;
    if (arg.rfind("--", 0) != 0) throw UsageError("unexpected argument '" + arg + "'");
    const std::size_t eq = arg.find('=');
    if (eq == std::string::npos) throw UsageError("expected --key=value, got '" + arg + "'");
    map.set(arg.substr(2, eq - 2), arg.substr(eq + 1));
  }
  return map;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing required ") + what + " path");
  if (!fs::exists(path)) throw UsageError(std::string("missing ") + what + " file '" + path + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

fs::path prepare_output_dir(const ConfigMap& map) {
  const fs::path dir = map.get_string("output_dir");
  fs::create_directories(dir);
  write_text(dir / "resolved_config.txt", map.resolved_text());
  return dir;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

int cmd_gen_data(const ConfigMap& map) {
  DataGenConfig cfg = DataGenConfig::from(map);
  const fs::path dir = prepare_output_dir(map);
  std::vector<Tier> wanted;
  if (cfg.tier == "all") {
    wanted = {Tier::random, Tier::medium, Tier::medium_replay, Tier::medium_expert, Tier::expert};
  } else {
    wanted = {tier_from_string(cfg.tier)};
  }
  GeneratedDatasets generated = generate_tiers(cfg, wanted);
  std::cout << describe(make_env_spec(cfg.env_id)) << '\n';
  std::cout << "references: R_random=" << generated.refs.r_random
            << " R_expert=" << generated.refs.r_expert
            << " (n=" << generated.refs.n_reference_episodes << " episodes)\n";
  std::cout << "trainer snapshots (step: normalized eval):";
  const std::size_t stride = std::max<std::size_t>(1, generated.trainer_trace.size() / 15);
  for (std::size_t i = 0; i < generated.trainer_trace.size(); i += stride)
    std::cout << ' ' << generated.trainer_trace[i].first << ": "
              << normalize_return(generated.trainer_trace[i].second, generated.refs) << ',';
  std::cout << '\n';
  if (generated.medium_snapshot_step >= 0)
    std::cout << "medium snapshot: step " << generated.medium_snapshot_step << " normalized "
              << generated.medium_snapshot_norm << '\n';
  for (auto& [tier, dataset] : generated.tiers) {
    const fs::path path = dir / (cfg.env_id + "_" + to_string(tier) + ".ds");
    save_dataset(path.string(), dataset);
    std::cout << "wrote " << path.string() << ": " << dataset.size() << " transitions, "
              << dataset.n_episodes() << " episodes, mean normalized return "
              << dataset.mean_normalized_return() << '\n';
  }
  return 0;
}

int cmd_pretrain(const ConfigMap& map) {
  RunConfig cfg = RunConfig::from(map);
  require_file(cfg.dataset_path, "dataset");
  const fs::path dir = prepare_output_dir(map);
  const OfflineDataset dataset = load_dataset(cfg.dataset_path);
  Agent<float> agent(cfg.agent, make_env_spec(cfg.env_id), derive_seed(cfg.seed, "init"));
  const TrainResult result = pretrain_offline(cfg, dataset, agent);
  write_curve_csv((dir / "curve.csv").string(), result.curve);
  write_timing_csv((dir / "timing.csv").string(), result.timing);
  save_agent_file((dir / "agent_final.ckpt").string(), agent, cfg.alpha.alpha_offline,
                  cfg.alpha.alpha_offline);
  std::cout << "pretrain done: " << result.critic_updates << " critic updates, "
            << result.actor_updates << " actor updates, final eval normalized "
            << result.final_eval_norm << '\n';
  return 0;
}

int cmd_finetune(const ConfigMap& map) {
  RunConfig cfg = RunConfig::from(map);
  require_file(cfg.dataset_path, "dataset");
  require_file(cfg.checkpoint_path, "checkpoint");
  const fs::path dir = prepare_output_dir(map);
  const OfflineDataset dataset = load_dataset(cfg.dataset_path);
  AgentCheckpoint<float> ckpt = load_agent_file<float>(cfg.checkpoint_path);
  const TrainResult result = finetune_online(cfg, dataset, ckpt.agent, cfg.alpha.alpha_offline);
  write_curve_csv((dir / "curve.csv").string(), result.curve);
  write_timing_csv((dir / "timing.csv").string(), result.timing);
  save_agent_file((dir / "agent_final.ckpt").string(), ckpt.agent, cfg.alpha.alpha_offline,
                  result.final_alpha);
  std::cout << "finetune done: " << result.episodes_completed << " episodes, final alpha "
            << result.final_alpha << ", eval normalized " << result.initial_eval_norm << " -> "
            << result.final_eval_norm << '\n';
  return 0;
}

int cmd_evaluate(const ConfigMap& map) {
  RunConfig cfg = RunConfig::from(map);
  require_file(cfg.checkpoint_path, "checkpoint");
  AgentCheckpoint<float> ckpt = load_agent_file<float>(cfg.checkpoint_path);
  const EnvSpec spec = ckpt.agent.env();
  const EvalStats stats = evaluate_policy(ckpt.agent.actor(), spec, cfg.eval_episodes,
                                          derive_seed(cfg.seed, "eval"));
  std::cout << "episodes " << cfg.eval_episodes << " mean " << stats.mean << " std " << stats.stddev;
  if (!cfg.dataset_path.empty()) {
    require_file(cfg.dataset_path, "dataset");
    const OfflineDataset dataset = load_dataset(cfg.dataset_path);
    std::cout << " normalized " << normalize_return(stats.mean, dataset.refs);
  }
  std::cout << '\n';
  return 0;
}

int cmd_sweep(const ConfigMap& map) {
  RunConfig base = RunConfig::from(map);
  require_file(base.dataset_path, "dataset");
  require_file(base.checkpoint_path, "checkpoint");
  const fs::path dir = prepare_output_dir(map);
  const OfflineDataset dataset = load_dataset(base.dataset_path);
  const std::string parameter = map.get_string("sweep.parameter");

  struct Arm {
    std::string label;
    RunConfig cfg;
  };
  std::vector<Arm> arms;
  if (parameter == "alpha") {
    for (double value : map.get_double_list("sweep.alpha_values")) {
      RunConfig cfg = base;
      cfg.alpha_adaptive = false;
      cfg.alpha_fixed = value;
      arms.push_back({"alpha" + format_value(value), cfg});
    }
  } else {
    for (double kp : map.get_double_list("sweep.kp_values")) {
      for (double kd : map.get_double_list("sweep.kd_values")) {
        RunConfig cfg = base;
        cfg.alpha_adaptive = true;
        cfg.alpha.kp = kp;
        cfg.alpha.kd = kd;
        arms.push_back({"kp" + format_value(kp) + "_kd" + format_value(kd), cfg});
      }
    }
  }
  for (const Arm& arm : arms) {
    AgentCheckpoint<float> ckpt = load_agent_file<float>(base.checkpoint_path);
    const TrainResult result = finetune_online(arm.cfg, dataset, ckpt.agent, arm.cfg.alpha.alpha_offline);
    const fs::path curve = dir / ("curve_" + arm.label + ".csv");
    write_curve_csv(curve.string(), result.curve);
    write_timing_csv((dir / ("timing_" + arm.label + ".csv")).string(), result.timing);
    std::cout << arm.label << ": eval normalized " << result.initial_eval_norm << " -> "
              << result.final_eval_norm << " (" << curve.string() << ")\n";
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  try {
    if (args.empty() || args[0] == "--help" || args[0] == "help") {
      std::cout << kUsage;
      return args.empty() ? 2 : 0;
    }
    const std::string& command = args[0];
    const ConfigMap map = parse_config(args, 1);
    if (command == "gen-data") return cmd_gen_data(map);
    if (command == "pretrain") return cmd_pretrain(map);
    if (command == "finetune") return cmd_finetune(map);
    if (command == "evaluate") return cmd_evaluate(map);
    if (command == "sweep") return cmd_sweep(map);
    throw UsageError("unknown command '" + command + "'");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n' << kUsage;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace o2orl
