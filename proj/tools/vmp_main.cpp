// vmp: command-line surface of the via-point movement-primitive library.
// One command = one process; library writes are atomic and advisory-locked.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vmplib/batch_oracle.hpp"
#include "vmplib/detect.hpp"
#include "vmplib/errors.hpp"
#include "vmplib/io.hpp"
#include "vmplib/library.hpp"
#include "vmplib/synth.hpp"
#include "vmplib/vmp.hpp"

namespace {

using nlohmann::json;
using vmpl::io::format_double;

// --- configuration -----------------------------------------------------------

// Defaults come from an optional JSON config file; command-line flags win.
vmpl::LibraryConfig load_config(const std::string& path) {
  vmpl::LibraryConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw vmpl::ParseError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw vmpl::ParseError(path + ": " + e.what());
  }
  const json basis = doc.value("basis", json::object());
  cfg.basis = vmpl::BasisConfig::uniform(basis.value("k", cfg.basis.k),
                                         basis.value("ridge", cfg.basis.ridge));
  const json detect = doc.value("detect", json::object());
  if (detect.contains("strategy"))
    cfg.detect.strategy = vmpl::strategy_from_string(detect["strategy"].get<std::string>());
  cfg.detect.theta = detect.value("theta", cfg.detect.theta);
  cfg.detect.alpha = detect.value("alpha", cfg.detect.alpha);
  cfg.detect.max_viapoints = detect.value("max_viapoints", cfg.detect.max_viapoints);
  cfg.detect.prune_epsilon = detect.value("prune_epsilon", cfg.detect.prune_epsilon);
  const json solver = doc.value("solver", json::object());
  cfg.detect.solver.initial_step = solver.value("initial_step", cfg.detect.solver.initial_step);
  cfg.detect.solver.shrink = solver.value("shrink", cfg.detect.solver.shrink);
  cfg.detect.solver.grow = solver.value("grow", cfg.detect.solver.grow);
  cfg.detect.solver.max_iterations =
      solver.value("max_iterations", cfg.detect.solver.max_iterations);
  cfg.detect.solver.tolerance = solver.value("tolerance", cfg.detect.solver.tolerance);
  return cfg;
}

// Detection flags shared by detect / eval-detect; only flags the user passed
// override the configured values.
struct DetectFlags {
  std::string strategy;
  double theta = 0.0;
  double alpha = 0.0;
  int max_n = 0;
  double prune_epsilon = 0.0;
  CLI::Option* o_strategy = nullptr;
  CLI::Option* o_theta = nullptr;
  CLI::Option* o_alpha = nullptr;
  CLI::Option* o_max_n = nullptr;
  CLI::Option* o_prune = nullptr;

  void attach(CLI::App* cmd) {
    o_strategy = cmd->add_option("--strategy", strategy,
                                 "max_distance | brute_force | weighted_average");
    o_theta = cmd->add_option("--theta", theta, "distance threshold");
    o_alpha = cmd->add_option("--alpha", alpha, "rotation weight of the pose distance");
    o_max_n = cmd->add_option("--max-n", max_n, "via-point budget");
    o_prune = cmd->add_option("--prune-epsilon", prune_epsilon, "relative pruning tolerance");
  }
  void apply(vmpl::DetectConfig& cfg) const {
    if (o_strategy->count()) cfg.strategy = vmpl::strategy_from_string(strategy);
    if (o_theta->count()) cfg.theta = theta;
    if (o_alpha->count()) cfg.alpha = alpha;
    if (o_max_n->count()) cfg.max_viapoints = max_n;
    if (o_prune->count()) cfg.prune_epsilon = prune_epsilon;
  }
};

// --- small helpers -------------------------------------------------------------

vmpl::Library open_library(const std::string& path) {
  if (!vmpl::io::file_exists(path)) throw vmpl::ParseError("library file not found: " + path);
  return vmpl::io::load_library(path);
}

vmpl::Pose parse_pose(const std::string& text) {
  std::vector<double> v;
  std::istringstream in(text);
  std::string field;
  while (std::getline(in, field, ',')) {
    try {
      v.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw vmpl::ParseError("bad pose component '" + field + "' in '" + text + "'");
    }
  }
  if (v.size() != 7)
    throw vmpl::ParseError("pose must have 7 comma-separated values (x,y,z,qw,qx,qy,qz)");
  vmpl::Quaternion q(v[3], v[4], v[5], v[6]);
  if (std::abs(q.norm() - 1.0) > 1e-3)
    throw vmpl::BadQuaternion("pose quaternion norm " + format_double(q.norm()) +
                              " is not within 1e-3 of 1");
  return vmpl::Pose(vmpl::Vec3(v[0], v[1], v[2]), q.normalized());
}

vmpl::ViaTarget parse_via(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos)
    throw vmpl::ParseError("via-point must look like phase:x,y,z,qw,qx,qy,qz");
  double phase = 0.0;
  try {
    phase = std::stod(text.substr(0, colon));
  } catch (const std::exception&) {
    throw vmpl::ParseError("bad via-point phase in '" + text + "'");
  }
  return {phase, parse_pose(text.substr(colon + 1))};
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw vmpl::ParseError("cannot write " + out_path);
    out << content;
  }
}

std::vector<std::string> sorted_csv_files(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw vmpl::ParseError("not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv")
      files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw vmpl::ParseError("no .csv demonstrations in " + dir);
  return files;
}

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
};

Stats stats_of(const std::vector<double>& v) {
  Stats s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
  if (v.size() > 1) {
    double acc = 0.0;
    for (double x : v) acc += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(acc / double(v.size() - 1));
  }
  return s;
}

// --- subcommand bodies -----------------------------------------------------------

int run_synth(const std::string& family, std::uint64_t seed, int samples,
              const std::string& out) {
  vmpl::synth::SynthOptions opt;
  opt.family = vmpl::synth::family_from_string(family);
  opt.seed = seed;
  opt.samples = samples;
  const vmpl::Demonstration demo = vmpl::synth::generate(opt);
  emit(out, vmpl::io::trajectory_csv(demo.times, demo.poses));
  return 0;
}

int run_rollout(const std::string& lib_path, const std::string& id, const std::string& start,
                const std::string& goal, const std::vector<std::string>& vias, int samples,
                const std::string& out) {
  const vmpl::Library lib = open_library(lib_path);
  vmpl::RolloutRequest request;
  request.samples = samples;
  if (!start.empty()) request.start = parse_pose(start);
  if (!goal.empty()) request.goal = parse_pose(goal);
  if (!vias.empty()) {
    std::vector<vmpl::ViaTarget> targets;
    for (const std::string& v : vias) targets.push_back(parse_via(v));
    request.vias = std::move(targets);
  }
  vmpl::SolverConfig solver = lib.config().detect.solver;
  solver.dist_alpha = lib.config().detect.alpha;
  const vmpl::RolloutPlan plan =
      vmpl::plan_rollout(lib.entry(id), lib.config().basis, request, solver);
  if (!plan.all_converged)
    std::cerr << "warning: a via-point solve did not reach tolerance; trajectory is best-effort\n";
  emit(out, vmpl::io::trajectory_csv(plan.times, plan.poses));
  return 0;
}

int run_detect(const std::string& lib_path, const std::string& id, const std::string& demo_path,
               const DetectFlags& flags) {
  const vmpl::Library lib = open_library(lib_path);
  vmpl::DetectConfig cfg = lib.config().detect;
  flags.apply(cfg);
  const vmpl::Demonstration demo = vmpl::io::read_trajectory(demo_path);
  const vmpl::DetectResult result =
      vmpl::greedy_detect(lib.config().basis, lib.weight_mean(id), demo, cfg);

  std::string out = "viapoints:\nphase,x,y,z,qw,qx,qy,qz\n";
  for (const vmpl::ViaTarget& t : result.targets) {
    out += format_double(t.phase);
    for (double c : {t.target.position.x(), t.target.position.y(), t.target.position.z(),
                     t.target.orientation.w(), t.target.orientation.x(),
                     t.target.orientation.y(), t.target.orientation.z()}) {
      out += ',';
      out += format_double(c);
    }
    out += '\n';
  }
  out += "report:\nviapoints,mean_distance,max_distance,elapsed_seconds\n";
  for (const vmpl::DetectIteration& it : result.iterations)
    out += std::to_string(it.viapoint_count) + ',' + format_double(it.mean_distance) + ',' +
           format_double(it.max_distance) + ',' + format_double(it.elapsed_seconds) + '\n';
  out += "final:\nmean_distance,max_distance,reached_threshold,total_seconds\n";
  out += format_double(result.final_mean_distance) + ',' +
         format_double(result.final_max_distance) + ',' +
         (result.reached_threshold ? "1" : "0") + ',' + format_double(result.total_seconds) +
         '\n';
  std::cout << out;
  return 0;
}

int run_eval(const std::string& lib_path, const std::string& demos_dir,
             const std::string& manifest_path, const std::string& out,
             const vmpl::LibraryConfig& config) {
  std::ifstream in(manifest_path);
  if (!in) throw vmpl::ParseError("cannot open manifest " + manifest_path);
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw vmpl::ParseError(manifest_path + ": " + e.what());
  }
  if (!manifest.contains("modes") || !manifest["modes"].is_array())
    throw vmpl::ParseError(manifest_path + ": expected a top-level \"modes\" array");

  namespace fs = std::filesystem;
  vmpl::Library lib(config);
  std::vector<std::string> labels;
  std::vector<std::string> lib_ids;
  std::vector<std::pair<std::string, std::vector<vmpl::Demonstration>>> groups;
  for (const json& mode : manifest["modes"]) {
    const std::string label = mode.at("id").get<std::string>();
    std::vector<vmpl::Demonstration> demos;
    for (const json& rel : mode.at("demos")) {
      const std::string path = (fs::path(demos_dir) / rel.get<std::string>()).string();
      demos.push_back(vmpl::io::read_trajectory(path));
    }
    if (demos.empty()) throw vmpl::ParseError("mode " + label + " lists no demonstrations");
    std::string id;
    for (std::size_t i = 0; i < demos.size(); ++i) {
      if (i == 0)
        id = lib.add(demos[i], label);
      else
        lib.improve(id, demos[i], label);
    }
    labels.push_back(label);
    lib_ids.push_back(id);
    groups.emplace_back(label, std::move(demos));
  }
  vmpl::io::save_library(lib, lib_path);

  const std::vector<vmpl::oracle::ModeBatch> batch =
      vmpl::oracle::batch_fit_library(groups, config.basis);
  std::vector<Eigen::VectorXd> incremental, reference;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    incremental.push_back(lib.entry(lib_ids[i]).model.weights.mean());
    reference.push_back(batch[i].weights.mean);
  }
  const vmpl::oracle::ComparisonReport report =
      vmpl::oracle::compare(labels, incremental, reference);
  emit(out, report.csv());
  return 0;
}

int run_eval_detect(const std::string& demos_dir, const std::string& strategies_arg,
                    const std::string& budgets_arg, const DetectFlags& flags,
                    const std::string& out, const vmpl::LibraryConfig& config) {
  std::vector<vmpl::Strategy> strategies;
  if (strategies_arg == "all") {
    strategies = {vmpl::Strategy::MaxDistance, vmpl::Strategy::BruteForce,
                  vmpl::Strategy::WeightedAverage};
  } else {
    std::istringstream ss(strategies_arg);
    std::string item;
    while (std::getline(ss, item, ','))
      strategies.push_back(vmpl::strategy_from_string(item));
  }
  std::vector<int> budgets;
  {
    std::istringstream ss(budgets_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        budgets.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw vmpl::ParseError("bad via-point budget '" + item + "'");
      }
    }
  }
  if (strategies.empty() || budgets.empty())
    throw vmpl::ParseError("need at least one strategy and one budget");

  std::vector<vmpl::Demonstration> demos;
  for (const std::string& f : sorted_csv_files(demos_dir))
    demos.push_back(vmpl::io::read_trajectory(f));

  vmpl::Library lib(config);
  std::string id;
  for (std::size_t i = 0; i < demos.size(); ++i) {
    if (i == 0)
      id = lib.add(demos[i]);
    else
      lib.improve(id, demos[i]);
  }
  const Eigen::VectorXd w = lib.weight_mean(id);

  vmpl::DetectConfig base_cfg = config.detect;
  flags.apply(base_cfg);

  std::string report = "strategy,max_viapoints,mean_distance,std_distance,mean_seconds\n";
  {
    std::vector<double> base;
    for (const vmpl::Demonstration& demo : demos) {
      const vmpl::ViaPointSet plain(demo.poses.front(), demo.poses.back());
      const auto d = vmpl::per_sample_distances(
          demo, vmpl::rollout(config.basis, w, plain, demo.phases), base_cfg.alpha);
      base.push_back(std::accumulate(d.begin(), d.end(), 0.0) / double(d.size()));
    }
    const Stats s = stats_of(base);
    report += "none,0," + format_double(s.mean) + ',' + format_double(s.stddev) + ",0\n";
  }
  for (vmpl::Strategy strategy : strategies) {
    for (int budget : budgets) {
      vmpl::DetectConfig cfg = base_cfg;
      cfg.strategy = strategy;
      cfg.max_viapoints = budget;
      std::vector<double> means, seconds;
      for (const vmpl::Demonstration& demo : demos) {
        const vmpl::DetectResult r = vmpl::greedy_detect(config.basis, w, demo, cfg);
        means.push_back(r.final_mean_distance);
        seconds.push_back(r.total_seconds);
      }
      const Stats sm = stats_of(means);
      const Stats st = stats_of(seconds);
      report += vmpl::strategy_name(strategy) + ',' + std::to_string(budget) + ',' +
                format_double(sm.mean) + ',' + format_double(sm.stddev) + ',' +
                format_double(st.mean) + '\n';
    }
  }
  emit(out, report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental full-pose via-point movement primitive library"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config with basis/detect/solver defaults")
      ->check(CLI::ExistingFile);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic demonstration");
  std::string synth_family = "pouring", synth_out;
  std::uint64_t synth_seed = 0;
  int synth_samples = 200;
  synth->add_option("--family", synth_family,
                    "geodesic | bump | pouring | bimodal-a | bimodal-b")
      ->check(CLI::IsMember({"geodesic", "bump", "pouring", "bimodal-a", "bimodal-b"}));
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--samples", synth_samples, "number of rows")->check(CLI::Range(2, 100000));
  synth->add_option("--out", synth_out, "output file (default: stdout)");

  // add / improve / remove / merge / split / assign
  std::string lib_path, demo_path, mode_id, mode_id_b, label, candidates_arg;

  auto* add = app.add_subcommand("add", "learn a new mode from a demonstration");
  add->add_option("lib", lib_path)->required();
  add->add_option("demo", demo_path)->required();
  add->add_option("--label", label, "audit-log label (default: the demo path)");

  auto* improve = app.add_subcommand("improve", "fold a demonstration into an existing mode");
  improve->add_option("lib", lib_path)->required();
  improve->add_option("id", mode_id)->required();
  improve->add_option("demo", demo_path)->required();
  improve->add_option("--label", label);

  auto* remove = app.add_subcommand("remove", "delete a mode");
  remove->add_option("lib", lib_path)->required();
  remove->add_option("id", mode_id)->required();

  auto* merge = app.add_subcommand("merge", "merge two modes into one");
  merge->add_option("lib", lib_path)->required();
  merge->add_option("idA", mode_id)->required();
  merge->add_option("idB", mode_id_b)->required();

  auto* split = app.add_subcommand("split", "split a mode on a demonstration");
  split->add_option("lib", lib_path)->required();
  split->add_option("id", mode_id)->required();
  split->add_option("demo", demo_path)->required();
  split->add_option("--label", label);

  auto* assign = app.add_subcommand("assign", "pick the most likely mode for a demonstration");
  assign->add_option("lib", lib_path)->required();
  assign->add_option("demo", demo_path)->required();
  assign->add_option("--candidates", candidates_arg, "comma-separated mode ids (default: all)");

  // rollout
  auto* rollout = app.add_subcommand("rollout", "execute a mode as a trajectory");
  std::string ro_start, ro_goal, ro_out;
  std::vector<std::string> ro_vias;
  int ro_samples = 200;
  rollout->add_option("lib", lib_path)->required();
  rollout->add_option("id", mode_id)->required();
  rollout->add_option("--start", ro_start, "x,y,z,qw,qx,qy,qz (default: learned start)");
  rollout->add_option("--goal", ro_goal, "x,y,z,qw,qx,qy,qz (default: learned goal)");
  rollout->add_option("--via", ro_vias, "phase:x,y,z,qw,qx,qy,qz (repeatable)");
  rollout->add_option("--samples", ro_samples)->check(CLI::Range(2, 1000000));
  rollout->add_option("--out", ro_out, "output file (default: stdout)");

  // detect
  auto* detect = app.add_subcommand("detect", "detect via-points of a demonstration");
  DetectFlags detect_flags;
  detect->add_option("lib", lib_path)->required();
  detect->add_option("id", mode_id)->required();
  detect->add_option("demo", demo_path)->required();
  detect_flags.attach(detect);

  // eval
  auto* eval = app.add_subcommand("eval", "incremental-vs-batch comparison report");
  std::string eval_demos, eval_manifest, eval_out;
  eval->add_option("lib", lib_path)->required();
  eval->add_option("--demos", eval_demos, "demonstration directory")->required();
  eval->add_option("--modes", eval_manifest, "JSON manifest: {\"modes\":[{\"id\",\"demos\"}]}")
      ->required();
  eval->add_option("--out", eval_out, "output file (default: stdout)");

  // eval-detect
  auto* eval_detect = app.add_subcommand("eval-detect", "detection strategy comparison table");
  std::string ed_demos, ed_strategies = "all", ed_budgets = "1,3", ed_out;
  DetectFlags ed_flags;
  eval_detect->add_option("--demos", ed_demos, "demonstration directory")->required();
  eval_detect->add_option("--strategies", ed_strategies, "all or comma-separated list");
  eval_detect->add_option("--budgets", ed_budgets, "comma-separated via-point budgets");
  ed_flags.attach(eval_detect);
  eval_detect->add_option("--out", ed_out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const vmpl::LibraryConfig config = load_config(config_path);

    if (synth->parsed()) return run_synth(synth_family, synth_seed, synth_samples, synth_out);

    if (add->parsed()) {
      vmpl::Library lib = vmpl::io::file_exists(lib_path) ? vmpl::io::load_library(lib_path)
                                                          : vmpl::Library(config);
      const std::string id =
          lib.add(vmpl::io::read_trajectory(demo_path), label.empty() ? demo_path : label);
      vmpl::io::save_library(lib, lib_path);
      std::cout << id << "\n";
      return 0;
    }
    if (improve->parsed()) {
      vmpl::Library lib = open_library(lib_path);
      lib.improve(mode_id, vmpl::io::read_trajectory(demo_path),
                  label.empty() ? demo_path : label);
      vmpl::io::save_library(lib, lib_path);
      return 0;
    }
    if (remove->parsed()) {
      vmpl::Library lib = open_library(lib_path);
      lib.remove(mode_id);
      vmpl::io::save_library(lib, lib_path);
      return 0;
    }
    if (merge->parsed()) {
      vmpl::Library lib = open_library(lib_path);
      const std::string id = lib.merge(mode_id, mode_id_b);
      vmpl::io::save_library(lib, lib_path);
      std::cout << id << "\n";
      return 0;
    }
    if (split->parsed()) {
      vmpl::Library lib = open_library(lib_path);
      const auto [id_a, id_b] = lib.split(mode_id, vmpl::io::read_trajectory(demo_path),
                                          label.empty() ? demo_path : label);
      vmpl::io::save_library(lib, lib_path);
      std::cout << id_a << " " << id_b << "\n";
      return 0;
    }
    if (assign->parsed()) {
      const vmpl::Library lib = open_library(lib_path);
      std::vector<std::string> candidates;
      std::istringstream ss(candidates_arg);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) candidates.push_back(item);
      std::cout << lib.assign(vmpl::io::read_trajectory(demo_path), candidates) << "\n";
      return 0;
    }
    if (rollout->parsed())
      return run_rollout(lib_path, mode_id, ro_start, ro_goal, ro_vias, ro_samples, ro_out);
    if (detect->parsed()) return run_detect(lib_path, mode_id, demo_path, detect_flags);
    if (eval->parsed()) return run_eval(lib_path, eval_demos, eval_manifest, eval_out, config);
    if (eval_detect->parsed())
      return run_eval_detect(ed_demos, ed_strategies, ed_budgets, ed_flags, ed_out, config);
  } catch (const vmpl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.error_class());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
