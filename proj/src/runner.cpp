#include "ltlshape/runner.hpp"

#include "ltlshape/oracle.hpp"
#include "ltlshape/seed.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace ltlshape {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string provenance(const ExperimentConfig& cfg) {
  return "# ltlshape " + std::string(kVersion) + " config=" + cfg.hash();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
}

constexpr std::string_view kCsvHeader = "trial,step,episodes,success_rate,norm_return,empirical_b,round_k\n";

std::string trial_rows(const TrialOutcome& t) {
  std::string out;
  for (const auto& e : t.log.evals)
    out += std::to_string(t.trial) + "," + std::to_string(e.step) + "," + std::to_string(e.episodes) + "," +
           fmt(e.success_rate) + "," + fmt(e.norm_return) + "," + std::to_string(e.empirical_b) + "," +
           std::to_string(e.round) + "\n";
  return out;
}

} // namespace

Stat mean_ci(const std::vector<double>& xs) {
  Stat s;
  s.n = xs.size();
  if (xs.empty())
    return s;
  for (double x : xs)
    s.mean += x;
  s.mean /= double(xs.size());
  if (xs.size() < 2)
    return s;
  double var = 0.0;
  for (double x : xs)
    var += (x - s.mean) * (x - s.mean);
  var /= double(xs.size() - 1);
  boost::math::students_t dist(double(xs.size() - 1));
  double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  s.ci95 = t * std::sqrt(var / double(xs.size()));
  return s;
}

std::size_t worker_count() {
  if (const char* w = std::getenv("LTLSHAPE_WORKERS")) {
    char* end = nullptr;
    long n = std::strtol(w, &end, 10);
    if (end != w && *end == '\0' && n > 0)
      return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<TrialOutcome> run_trials(const ExperimentConfig& cfg, std::size_t workers) {
  auto task = build_task(cfg);
  std::vector<TrialOutcome> out(cfg.learner.trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < out.size();) {
      try {
        auto env = build_env(cfg);
        double theta = cfg.reward.auto_theta ? default_theta(*task) : cfg.reward.theta;
        RewardContext ctx(cfg.reward.kind, task, cfg.reward.eta0, theta);
        AdaptiveSchedule sched{cfg.schedule.interval, cfg.schedule.lambda, cfg.schedule.eval_rollouts};
        std::uint64_t seed = split_seed(cfg.learner.seed, i);
        auto r = train(*env, ctx, sched, cfg.learner.q, cfg.learner.budget, seed, cfg.learner.eval);
        out[i] = {i, seed, std::move(r.log), r.context.round()};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(workers, out.size()); ++w)
    pool.emplace_back(work);
  work();
  for (auto& t : pool)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
  return out;
}

std::string metrics_csv(const ExperimentConfig& cfg, const std::vector<TrialOutcome>& trials) {
  std::string out = provenance(cfg) + "\n" + std::string(kCsvHeader);
  for (const auto& t : trials)
    out += trial_rows(t);
  return out;
}

ordered_json run_summary(const ExperimentConfig& cfg, const std::vector<TrialOutcome>& trials) {
  std::vector<double> success, norm, b, rounds;
  ordered_json per = ordered_json::array();
  for (const auto& t : trials) {
    ordered_json row{{"trial", t.trial}, {"seed", t.seed}, {"episodes", t.log.episodes},
                     {"steps", t.log.steps},  {"rounds", t.final_round}};
    if (!t.log.evals.empty()) {
      const auto& e = t.log.evals.back();
      success.push_back(e.success_rate);
      norm.push_back(e.norm_return);
      b.push_back(double(e.empirical_b));
      row["final_success_rate"] = e.success_rate;
      row["final_norm_return"] = e.norm_return;
      row["final_empirical_b"] = e.empirical_b;
    }
    rounds.push_back(double(t.final_round));
    per.push_back(row);
  }
  auto stat = [](const std::vector<double>& xs) {
    Stat s = mean_ci(xs);
    if (s.n == 0)
      return ordered_json{{"mean", nullptr}, {"ci95", nullptr}, {"n", 0}};
    return ordered_json{{"mean", s.mean}, {"ci95", s.ci95}, {"n", s.n}};
  };
  return {{"name", cfg.name},
          {"version", kVersion},
          {"config_hash", cfg.hash()},
          {"reward", to_string(cfg.reward.kind)},
          {"theta", cfg.reward.theta},
          {"trials", trials.size()},
          {"final_success_rate", stat(success)},
          {"final_norm_return", stat(norm)},
          {"final_empirical_b", stat(b)},
          {"rounds", stat(rounds)},
          {"per_trial", per}};
}

ordered_json round_audit(const std::vector<TrialOutcome>& trials) {
  ordered_json out = ordered_json::array();
  for (const auto& t : trials) {
    ordered_json rs = ordered_json::array();
    for (const auto& r : t.log.rounds)
      rs.push_back({{"episode", r.episode}, {"success_rate", r.success_rate}, {"b", r.b}, {"eta", r.eta},
                    {"round", r.round}});
    out.push_back({{"trial", t.trial}, {"rounds", rs}});
  }
  return out;
}

ordered_json write_run(const ExperimentConfig& cfg, const std::vector<TrialOutcome>& trials) {
  fs::create_directories(cfg.output / "trials");
  for (const auto& t : trials) {
    char name[32];
    std::snprintf(name, sizeof name, "trial_%03zu.csv", t.trial);
    write_file(cfg.output / "trials" / name, provenance(cfg) + "\n" + std::string(kCsvHeader) + trial_rows(t));
  }
  // Merge the per-trial files in trial order.
  std::string merged = provenance(cfg) + "\n" + std::string(kCsvHeader);
  for (const auto& t : trials) {
    char name[32];
    std::snprintf(name, sizeof name, "trial_%03zu.csv", t.trial);
    std::ifstream in(cfg.output / "trials" / name);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    while (std::getline(in, line))
      merged += line + "\n";
  }
  write_file(cfg.output / "metrics.csv", merged);
  ordered_json audit{{"config_hash", cfg.hash()}, {"version", kVersion}, {"trials", round_audit(trials)}};
  write_file(cfg.output / "rounds.json", audit.dump(2) + "\n");
  auto summary = run_summary(cfg, trials);
  write_file(cfg.output / "summary.json", summary.dump(2) + "\n");
  return summary;
}

std::string task_report(const TaskModel& task) {
  std::ostringstream out;
  const auto& names = task.dfa.names();
  out << "states " << task.dfa.size() << ", initial q" << task.dfa.initial() << "\n";
  for (StateId q = 0; q < task.dfa.size(); ++q) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", task.base[q]);
    out << "d(q" << q << ") = " << buf << "  B" << task.partition.index_of(q);
    if (task.dfa.is_accepting(q))
      out << "  accepting";
    if (task.analysis.is_trap(q))
      out << "  trap";
    if (q < names.size() && !names[q].empty())
      out << "  " << names[q];
    out << "\n";
  }
  for (std::size_t i = 0; i < task.partition.size(); ++i) {
    out << "B" << i << " = {";
    const auto& s = task.partition.set(i);
    for (std::size_t k = 0; k < s.size(); ++k)
      out << (k ? "," : "") << "q" << s[k];
    out << "}\n";
  }
  return out.str();
}

ordered_json oracle_report(const ExperimentConfig& cfg) {
  auto task = build_task(cfg);
  auto env = build_env(cfg);
  const double gamma = cfg.learner.q.gamma;
  EnumeratedProduct product = enumerate_product(*env, task, gamma);
  ordered_json checks = ordered_json::array();
  bool all = true;
  auto add = [&](ordered_json c) {
    all = all && c["pass"].get<bool>();
    checks.push_back(std::move(c));
  };

  for (const auto& name : cfg.oracle.checks) {
    if (name == "best_progression") {
      std::size_t b = best_progression(product);
      ordered_json c{{"check", name}, {"b_star", b}, {"product_states", product.size()}};
      bool pass = true;
      if (cfg.oracle.expected.contains("best_progression")) {
        pass = b == cfg.oracle.expected["best_progression"].get<std::size_t>();
        c["expected"] = cfg.oracle.expected["best_progression"];
      }
      c["pass"] = pass;
      add(std::move(c));
    } else if (name == "theorem") {
      for (RewardKind k : cfg.oracle.kinds) {
        auto rep = theorem_check(product, k, cfg.reward.theta, cfg.reward.eta0, cfg.oracle.round_cap);
        bool within = rep.rounds <= task->partition.size();
        add({{"check", name},
             {"kind", to_string(k)},
             {"pass", rep.ok() && within},
             {"rounds_within_partition", within},
             {"report", ordered_json::parse(rep.json())}});
      }
    } else if (name == "examples") {
      const auto* grid = dynamic_cast<const FlagGrid*>(env.get());
      if (!grid) {
        add({{"check", name}, {"pass", false}, {"error", "examples need a flag_grid environment"}});
        continue;
      }
      auto policies = example_policies(*grid, *task);
      const auto& exp = cfg.oracle.expected.value("examples", nlohmann::json::object());
      std::size_t round_b = exp.value("round_b", std::size_t{1});
      for (RewardKind k : {RewardKind::Progression, RewardKind::Hybrid, RewardKind::AdaptiveProgression,
                           RewardKind::AdaptiveHybrid}) {
        RewardContext ctx(k, task, cfg.reward.eta0, cfg.reward.theta);
        if (is_adaptive(k))
          ctx = ctx.advance_round(round_b);
        for (std::size_t i = 0; i < policies.size(); ++i) {
          const auto& pol = policies[i];
          double tr = trajectory_return(pol.trajectory, ctx, gamma);
          double pe = policy_evaluation(product, ProductPolicy::open_loop(pol.actions, pol.fill), ctx);
          ordered_json c{{"check", name},   {"kind", to_string(k)},
                         {"round", ctx.round()}, {"policy", pol.name},
                         {"trajectory_return", tr}, {"policy_evaluation", pe}};
          bool pass = std::fabs(tr - pe) <= 1e-9;
          std::string key(to_string(k));
          if (exp.contains(key) && i < exp[key].size()) {
            double want = exp[key][i].get<double>();
            c["expected"] = want;
            pass = pass && std::fabs(tr - want) <= cfg.oracle.tolerance;
          }
          c["pass"] = pass;
          add(std::move(c));
        }
      }
    } else {
      add({{"check", name}, {"pass", false}, {"error", "unknown check"}});
    }
  }
  return {{"name", cfg.name},
          {"version", kVersion},
          {"config_hash", cfg.hash()},
          {"environment", env->name()},
          {"partition_size", task->partition.size()},
          {"pass", all},
          {"checks", checks}};
}

} // namespace ltlshape
