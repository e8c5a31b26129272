#include "ltlshape/config.hpp"
#include "ltlshape/dfa.hpp"
#include "ltlshape/formula.hpp"
#include "ltlshape/oracle.hpp"
#include "ltlshape/runner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace ltlshape;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kCheckFailed = 2;

std::vector<std::string> split_ap(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty())
      out.push_back(item);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path())
    fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

int cmd_compile(const std::string& formula, const std::string& ap, const std::string& dfa_path,
                const std::string& out_dir, bool raw) {
  Dfa dfa;
  if (!dfa_path.empty()) {
    dfa = dfa_from_json(read_file(dfa_path));
  } else {
    if (formula.empty() || ap.empty()) {
      std::cerr << "compile needs --dfa or both --formula and --ap\n";
      return kUsage;
    }
    PropositionSet props(split_ap(ap));
    try {
      dfa = compile(parse(formula, props), props);
    } catch (const ParseError& e) {
      std::cerr << "parse error " << e.what() << "\n  " << formula << "\n  "
                << std::string(e.position(), ' ') << "^\n";
      return kUsage;
    }
    if (!raw)
      dfa = minimize(dfa);
  }
  TaskModel task(dfa);
  std::cout << task_report(task);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "dfa.json", to_json(task.dfa) + "\n");
    write_file(fs::path(out_dir) / "dfa.dot", to_dot(task.dfa));
    write_file(fs::path(out_dir) / "report.txt", task_report(task));
    std::cout << "wrote " << out_dir << "/{dfa.json,dfa.dot,report.txt}\n";
  }
  return kOk;
}

void print_summary(const nlohmann::ordered_json& s) {
  auto show = [&](const char* key) {
    const auto& v = s[key];
    std::cout << "  " << key << ": ";
    if (v["mean"].is_null())
      std::cout << "n/a\n";
    else
      std::cout << v["mean"].get<double>() << " +/- " << v["ci95"].get<double>() << " (95% CI, n=" << v["n"] << ")\n";
  };
  std::cout << s["name"].get<std::string>() << " [" << s["reward"].get<std::string>() << ", theta "
            << s["theta"].get<double>() << "]\n";
  show("final_success_rate");
  show("final_norm_return");
  show("final_empirical_b");
  show("rounds");
}

int cmd_run(const ExperimentConfig& base, const std::string& out_override, std::size_t workers) {
  auto points = expand_sweep(base);
  nlohmann::ordered_json all = nlohmann::ordered_json::array();
  for (auto& [label, cfg] : points) {
    if (!out_override.empty())
      cfg.output = points.size() > 1 ? fs::path(out_override) / label : fs::path(out_override);
    auto trials = run_trials(cfg, workers);
    auto summary = write_run(cfg, trials);
    print_summary(summary);
    std::cout << "  outputs: " << cfg.output.string() << "\n";
    all.push_back(summary);
  }
  if (points.size() > 1) {
    fs::path root = out_override.empty() ? base.output : fs::path(out_override);
    write_file(root / "sweep_summary.json", all.dump(2) + "\n");
  }
  return kOk;
}

int cmd_evaluate(const ExperimentConfig& cfg, std::size_t episodes, bool random) {
  auto task = build_task(cfg);
  auto env = build_env(cfg);
  EvalMetrics m;
  std::uint64_t seed = cfg.learner.seed;
  if (random) {
    m = evaluate(*env, task, uniform_policy(env->action_count()), episodes, seed);
  } else {
    double theta = cfg.reward.auto_theta ? default_theta(*task) : cfg.reward.theta;
    RewardContext ctx(cfg.reward.kind, task, cfg.reward.eta0, theta);
    AdaptiveSchedule sched{cfg.schedule.interval, cfg.schedule.lambda, cfg.schedule.eval_rollouts};
    auto r = train(*env, ctx, sched, cfg.learner.q, cfg.learner.budget, seed, cfg.learner.eval);
    m = evaluate(*env, task, greedy_policy(r.q), episodes, seed + 1);
    std::cout << "trained " << r.log.episodes << " episodes, " << r.context.round() << " adaptive rounds\n";
  }
  nlohmann::ordered_json j{{"policy", random ? "uniform" : "greedy"},
                           {"episodes", m.episodes},
                           {"success_rate", m.success_rate},
                           {"norm_return", m.norm_return},
                           {"empirical_b", m.empirical_b}};
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int cmd_oracle(const ExperimentConfig& cfg, const std::string& out) {
  if (!build_env(cfg)->enumerable()) {
    std::cerr << "refusing oracle run: environment '" << cfg.env.name
              << "' is simulator-only and cannot be enumerated\n";
    return kUsage;
  }
  auto report = oracle_report(cfg);
  std::string text = report.dump(2) + "\n";
  if (!out.empty())
    write_file(out, text);
  for (const auto& c : report["checks"]) {
    std::cout << (c["pass"].get<bool>() ? "pass" : "FAIL") << "  " << c["check"].get<std::string>();
    if (c.contains("kind"))
      std::cout << " " << c["kind"].get<std::string>();
    if (c.contains("policy"))
      std::cout << " " << c["policy"].get<std::string>() << " = " << c["trajectory_return"].get<double>();
    if (c.contains("b_star"))
      std::cout << " b* = " << c["b_star"];
    if (c.contains("report"))
      std::cout << " rounds = " << c["report"]["rounds"] << ", b = " << c["report"]["final_b"];
    std::cout << "\n";
  }
  return report["pass"].get<bool>() ? kOk : kCheckFailed;
}

int cmd_verify_map(const std::string& path) {
  GridMap m = GridMap::load(path);
  auto report = verify_map(m, example_map_constraints(m));
  std::cout << report.str();
  return report.all_pass() ? kOk : kCheckFailed;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive reward shaping for co-safe LTL tasks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string formula, ap, dfa_path, out_dir, config, out;
  bool raw = false, random = false;
  std::size_t workers = 0, episodes = 100;

  auto* compile_cmd = app.add_subcommand("compile", "compile a formula or load an automaton and report distances");
  compile_cmd->add_option("-f,--formula", formula, "co-safe LTL formula");
  compile_cmd->add_option("-a,--ap", ap, "comma-separated propositions, e.g. o,b,y");
  compile_cmd->add_option("--dfa", dfa_path, "automaton JSON file instead of a formula");
  compile_cmd->add_option("-o,--out", out_dir, "directory for dfa.json, dfa.dot and report.txt");
  compile_cmd->add_flag("--no-minimize", raw, "keep the unminimized automaton");

  auto* run_cmd = app.add_subcommand("run", "train all trials of an experiment config");
  auto* sweep_cmd = app.add_subcommand("sweep", "run every point of a config's sweep block");
  for (auto* c : {run_cmd, sweep_cmd}) {
    c->add_option("config", config, "experiment config (JSON)")->required();
    c->add_option("-o,--out", out, "output directory (overrides the config)");
    c->add_option("-w,--workers", workers, "parallel trials (default: LTLSHAPE_WORKERS or all cores)");
  }

  auto* eval_cmd = app.add_subcommand("evaluate", "train one trial and evaluate its greedy policy");
  eval_cmd->add_option("config", config, "experiment config (JSON)")->required();
  eval_cmd->add_option("-n,--episodes", episodes, "evaluation episodes")->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--random", random, "evaluate a uniformly random policy instead");

  auto* oracle_cmd = app.add_subcommand("oracle", "exact checks on the enumerated product");
  oracle_cmd->add_option("config", config, "experiment config (JSON)")->required();
  oracle_cmd->add_option("-o,--out", out, "write the JSON report here");

  auto* map_cmd = app.add_subcommand("verify-map", "check the example map's step counts");
  map_cmd->add_option("map", config, "map file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (workers == 0)
      workers = worker_count();
    if (*compile_cmd)
      return cmd_compile(formula, ap, dfa_path, out_dir, raw);
    if (*map_cmd)
      return cmd_verify_map(config);
    ExperimentConfig cfg = load_config(config);
    if (*run_cmd)
      return cmd_run(cfg, out, workers);
    if (*sweep_cmd) {
      if (cfg.sweep.is_null() || cfg.sweep.empty()) {
        std::cerr << "config has no sweep block\n";
        return kUsage;
      }
      return cmd_run(cfg, out, workers);
    }
    if (*eval_cmd)
      return cmd_evaluate(cfg, episodes, random);
    if (*oracle_cmd)
      return cmd_oracle(cfg, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error " << e.what() << "\n";
    return kUsage;
  } catch (const NotEnumerable& e) {
    std::cerr << "refusing oracle run: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
