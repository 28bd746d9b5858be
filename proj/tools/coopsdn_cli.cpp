// Command-line front end: validates scenario configs, runs trials, emits
// metrics and traces.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>
#include <vector>

#include "coopsdn/config.hpp"
#include "coopsdn/sim.hpp"

namespace {

using namespace coopsdn;

int log_level() {  // 0 = error, 1 = info, 2 = debug
  const char* env = std::getenv("COOP_SDN_LOG");
  if (!env) return 0;
  std::string v(env);
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct LoadedConfig {
  ScenarioConfig cfg;
  int exit_code = 0;
};

// Resolves --config / --preset plus overrides; exit_code nonzero on failure.
LoadedConfig load_config(const std::string& config_path,
                         const std::string& preset, const std::string& profile,
                         std::optional<int> trials,
                         std::optional<std::uint64_t> seed,
                         const std::string& out, const std::string& format,
                         const std::string& trace_dir) {
  LoadedConfig lc;
  if (!config_path.empty()) {
    auto text = read_file(config_path);
    if (!text) {
      std::cerr << "IO_ERROR: cannot read " << config_path << "\n";
      lc.exit_code = 3;
      return lc;
    }
    std::vector<std::string> errors;
    try {
      ConfigNode root = parse_config_text(*text);
      auto cfg = build_scenario_config(root, errors);
      if (!cfg) {
        for (const auto& e : errors) std::cerr << "error: " << e << "\n";
        lc.exit_code = 2;
        return lc;
      }
      lc.cfg = *cfg;
    } catch (const ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      lc.exit_code = 2;
      return lc;
    }
    if (!profile.empty()) {
      auto prof = latency_profile(profile);
      if (!prof) {
        std::cerr << "error: unknown profile '" << profile << "'\n";
        lc.exit_code = 2;
        return lc;
      }
      lc.cfg.scenario.profile = *prof;
    }
  } else {
    try {
      lc.cfg = preset_scenario_config(preset.empty() ? "geni-fig3" : preset,
                                      profile.empty() ? "zero" : profile);
    } catch (const ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      lc.exit_code = 2;
      return lc;
    }
  }
  if (trials) lc.cfg.trials = *trials;
  if (seed) lc.cfg.seed = *seed;
  if (!out.empty()) lc.cfg.metrics_path = out;
  if (!format.empty()) lc.cfg.format = format;
  if (!trace_dir.empty()) lc.cfg.trace_dir = trace_dir;
  return lc;
}

int cmd_validate(const std::string& path) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << "IO_ERROR: cannot read " << path << "\n";
    return 3;
  }
  std::vector<std::string> errors;
  try {
    ConfigNode root = parse_config_text(*text);
    auto cfg = build_scenario_config(root, errors);
    if (cfg) {
      std::cout << "ok\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    errors.push_back(e.what());
  }
  for (const auto& e : errors) std::cout << "error: " << e << "\n";
  return 2;
}

std::vector<RunResult> run_trials(const ScenarioConfig& cfg, bool parallel) {
  std::vector<RunResult> results(static_cast<std::size_t>(cfg.trials));
  auto one = [&](int i) {
    Simulation sim(cfg.scenario, cfg.seed + static_cast<std::uint64_t>(i));
    results[static_cast<std::size_t>(i)] = sim.run(i);
  };
  if (parallel) {
    std::vector<std::thread> workers;
    for (int i = 0; i < cfg.trials; ++i) workers.emplace_back(one, i);
    for (auto& w : workers) w.join();
  } else {
    for (int i = 0; i < cfg.trials; ++i) one(i);
  }
  return results;
}

std::string render_metrics(const std::vector<RunResult>& results,
                           const std::string& format) {
  std::vector<const MetricRecord*> all;
  for (const auto& r : results)
    for (const auto& m : r.metrics) all.push_back(&m);
  if (format == "csv") {
    std::string out = "name,trial,value_ms\n";
    for (const auto* m : all)
      out += m->name + "," + std::to_string(m->trial) + "," +
             format_ms(m->value_us) + "\n";
    return out;
  }
  // structured: one section per metric
  std::map<std::string, std::vector<const MetricRecord*>> by_name;
  for (const auto* m : all) by_name[m->name].push_back(m);
  std::string out = "metrics:\n";
  for (const auto& [name, records] : by_name) {
    out += "  " + name + ":\n    values_ms:";
    TimeUs sum = 0;
    for (const auto* m : records) {
      out += " " + format_ms(m->value_us);
      sum += m->value_us;
    }
    out += "\n    mean_ms: " +
           format_ms(sum / static_cast<TimeUs>(records.size())) + "\n";
  }
  return out;
}

void print_means(const std::vector<RunResult>& results) {
  std::map<std::string, std::pair<TimeUs, int>> acc;
  for (const auto& r : results)
    for (const auto& m : r.metrics) {
      acc[m.name].first += m.value_us;
      acc[m.name].second += 1;
    }
  for (const auto& [name, v] : acc)
    std::cout << name << " mean: " << format_ms(v.first / v.second) << " ms ("
              << v.second << " trials)\n";
}

int cmd_run(const ScenarioConfig& cfg, bool parallel) {
  try {
    auto results = run_trials(cfg, parallel);
    if (!cfg.metrics_path.empty()) {
      std::ofstream out(cfg.metrics_path);
      if (!out) {
        std::cerr << "IO_ERROR: cannot write " << cfg.metrics_path << "\n";
        return 3;
      }
      out << render_metrics(results, cfg.format);
    } else {
      std::cout << render_metrics(results, cfg.format);
    }
    if (!cfg.trace_dir.empty()) {
      std::filesystem::create_directories(cfg.trace_dir);
      for (std::size_t i = 0; i < results.size(); ++i) {
        std::ofstream t(cfg.trace_dir + "/trace_" + std::to_string(i) + ".txt");
        if (!t) {
          std::cerr << "IO_ERROR: cannot write trace in " << cfg.trace_dir << "\n";
          return 3;
        }
        t << results[i].trace;
      }
    }
    print_means(results);
    if (log_level() >= 2)
      for (const auto& r : results) std::cerr << r.trace;
    return 0;
  } catch (const SimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_trace(const ScenarioConfig& cfg, int trial) {
  try {
    Simulation sim(cfg.scenario, cfg.seed + static_cast<std::uint64_t>(trial));
    RunResult r = sim.run(trial);
    std::istringstream in(r.trace);
    std::string line;
    while (std::getline(in, line)) {
      auto sp = line.find(' ');
      TimeUs us = std::stoll(line.substr(0, sp));
      std::cout << "t=" << format_ms(us) << "ms " << line.substr(sp + 1) << "\n";
    }
    return 0;
  } catch (const SimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative SDN-based IoT defense simulator"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a scenario config");
  validate->add_option("path", validate_path, "Config file")->required();

  std::string config_path, preset, profile, out, format, trace_dir;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  bool parallel = false;
  int trial = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Scenario config file");
    cmd->add_option("--preset", preset, "Built-in topology preset");
    cmd->add_option("--profile", profile, "Latency profile: geni|hardware|zero");
    cmd->add_option("--trials", trials, "Number of trials");
    cmd->add_option("--seed", seed, "Base seed (trial i uses seed+i)");
    cmd->add_option("--out", out, "Metrics output path");
    cmd->add_option("--format", format, "csv|structured");
    cmd->add_option("--trace-dir", trace_dir, "Write per-trial traces here");
  };
  auto* run = app.add_subcommand("run", "Run trials and emit metrics");
  add_common(run);
  run->add_flag("--parallel", parallel, "Run trials on worker threads");

  auto* trace = app.add_subcommand("trace", "Print one trial's timeline");
  add_common(trace);
  trace->add_option("--trial", trial, "Trial index");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand(validate)) return cmd_validate(validate_path);

  auto lc = load_config(config_path, preset, profile, trials, seed, out,
                        format, trace_dir);
  if (lc.exit_code) return lc.exit_code;
  if (app.got_subcommand(run)) return cmd_run(lc.cfg, parallel);
  return cmd_trace(lc.cfg, trial);
}
