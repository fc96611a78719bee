#include "vmplib/detect.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include "vmplib/errors.hpp"

namespace vmpl {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

std::vector<double> reconstruction_distances(const BasisConfig& basis,
                                             const Eigen::VectorXd& w_origin,
                                             const ViaPointSet& vps, const Demonstration& demo,
                                             double alpha) {
  return per_sample_distances(demo, rollout(basis, w_origin, vps, demo.phases), alpha);
}

// Demonstration phases usable as via-point locations: strictly interior, not
// already occupied, not blacklisted.
std::vector<std::size_t> eligible_indices(const Demonstration& demo, const ViaPointSet& vps,
                                          const std::set<double>& blacklist) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < demo.size(); ++i) {
    const double phi = demo.phases[i];
    if (!(phi > 0.0 && phi < 1.0)) continue;
    if (vps.contains_phase(phi)) continue;
    if (blacklist.count(phi)) continue;
    out.push_back(i);
  }
  return out;
}

}  // namespace

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::MaxDistance: return "max_distance";
    case Strategy::BruteForce: return "brute_force";
    case Strategy::WeightedAverage: return "weighted_average";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "max_distance") return Strategy::MaxDistance;
  if (name == "brute_force") return Strategy::BruteForce;
  if (name == "weighted_average") return Strategy::WeightedAverage;
  throw ParseError("unknown strategy: " + name +
                   " (expected max_distance, brute_force or weighted_average)");
}

std::vector<double> per_sample_distances(const Demonstration& demo,
                                         const std::vector<Pose>& reconstruction, double alpha) {
  if (reconstruction.size() != demo.size())
    throw LengthMismatch("reconstruction length does not match demonstration");
  std::vector<double> d(demo.size());
  for (std::size_t i = 0; i < demo.size(); ++i)
    d[i] = dist_m(demo.poses[i], reconstruction[i], alpha);
  return d;
}

double select_max_distance(const Demonstration& demo, const std::vector<double>& distances) {
  if (distances.size() != demo.size())
    throw LengthMismatch("distance array does not match demonstration");
  std::size_t best = 0;
  for (std::size_t i = 1; i < distances.size(); ++i)
    if (distances[i] > distances[best]) best = i;  // ties keep the smaller phase
  if (distances[best] < 1e-12) throw NoDeviation();
  return demo.phases[best];
}

double select_weighted_average(const Demonstration& demo, const std::vector<double>& distances) {
  if (distances.size() != demo.size())
    throw LengthMismatch("distance array does not match demonstration");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    num += distances[i] * demo.phases[i];
    den += distances[i];
  }
  if (den < 1e-15) throw NoDeviation("distance-weighted phase undefined: zero total deviation");
  return num / den;
}

ViaPointSet prune_viapoints(const BasisConfig& basis, const Eigen::VectorXd& w_origin,
                            const Demonstration& demo, const ViaPointSet& vps,
                            double prune_epsilon, double alpha) {
  ViaPointSet pruned = vps;
  bool removed = true;
  while (removed && pruned.interior_count() > 0) {
    removed = false;
    const double current = mean_of(reconstruction_distances(basis, w_origin, pruned, demo, alpha));
    const std::vector<double> order = pruned.insertion_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const ViaPointSet candidate = pruned.removed(*it);
      const double mean =
          mean_of(reconstruction_distances(basis, w_origin, candidate, demo, alpha));
      if (mean - current < prune_epsilon * (current + 1e-12)) {
        pruned = candidate;
        removed = true;
        break;  // rescan with the updated baseline
      }
    }
  }
  return pruned;
}

DetectResult greedy_detect(const BasisConfig& basis, const Eigen::VectorXd& w_origin,
                           const Demonstration& demo, const DetectConfig& config) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto elapsed = [&t0] {
    return std::chrono::duration<double>(clock::now() - t0).count();
  };

  SolverConfig solver = config.solver;
  solver.dist_alpha = config.alpha;

  DetectResult result{ViaPointSet(demo.poses.front(), demo.poses.back()), {}, {}, 0, 0, 0, false};
  std::set<double> blacklist;
  std::vector<double> dist =
      reconstruction_distances(basis, w_origin, result.viapoints, demo, config.alpha);
  result.iterations.push_back({0, mean_of(dist), max_of(dist), elapsed()});

  while (static_cast<int>(result.viapoints.interior_count()) < config.max_viapoints) {
    if (max_of(dist) < config.theta) {
      result.reached_threshold = true;
      break;
    }
    const std::vector<std::size_t> eligible = eligible_indices(demo, result.viapoints, blacklist);
    if (eligible.empty()) break;

    std::size_t pick = eligible.front();
    ViaPointSolution pick_solution;
    bool have_solution = false;
    bool exhausted = false;

    switch (config.strategy) {
      case Strategy::MaxDistance: {
        for (std::size_t i : eligible)
          if (dist[i] > dist[pick]) pick = i;
        break;
      }
      case Strategy::WeightedAverage: {
        const double phi_star = select_weighted_average(demo, dist);
        double best_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i : eligible) {
          const double gap = std::abs(demo.phases[i] - phi_star);
          if (gap < best_gap) {
            best_gap = gap;
            pick = i;
          }
        }
        break;
      }
      case Strategy::BruteForce: {
        double best_mean = std::numeric_limits<double>::infinity();
        bool found = false;
        for (std::size_t i : eligible) {
          const double phi = demo.phases[i];
          const ViaPointSolution sol = solve_elementary_viapoint(
              demo.poses[i], phi, basis, w_origin, result.viapoints, solver);
          if (!sol.converged) {
            blacklist.insert(phi);
            continue;
          }
          const ViaPointSet candidate = result.viapoints.inserted(phi, sol.elementary_pose);
          const double mean =
              mean_of(reconstruction_distances(basis, w_origin, candidate, demo, config.alpha));
          if (mean < best_mean) {  // strict: ties keep the smaller phase
            best_mean = mean;
            pick = i;
            pick_solution = sol;
            found = true;
          }
        }
        if (!found) {
          exhausted = true;
          break;
        }
        have_solution = true;
        break;
      }
    }
    if (exhausted) break;

    {
      const double phi = demo.phases[pick];
      if (!have_solution) {
        pick_solution = solve_elementary_viapoint(demo.poses[pick], phi, basis, w_origin,
                                                  result.viapoints, solver);
        if (!pick_solution.converged) {
          blacklist.insert(phi);
          continue;
        }
      }
      const ViaPointSet candidate = result.viapoints.inserted(phi, pick_solution.elementary_pose);
      const std::vector<double> cand_dist =
          reconstruction_distances(basis, w_origin, candidate, demo, config.alpha);
      if (mean_of(cand_dist) >= mean_of(dist)) {
        blacklist.insert(phi);  // insertion did not help here; never retry it
        continue;
      }
      result.viapoints = candidate;
      result.targets.push_back({phi, demo.poses[pick]});
      dist = cand_dist;
      result.iterations.push_back({static_cast<int>(result.viapoints.interior_count()),
                                   mean_of(dist), max_of(dist), elapsed()});
      if (max_of(dist) < config.theta) {
        result.reached_threshold = true;
        break;
      }
    }
  }

  result.viapoints = prune_viapoints(basis, w_origin, demo, result.viapoints,
                                     config.prune_epsilon, config.alpha);
  std::erase_if(result.targets, [&](const ViaTarget& t) {
    return !result.viapoints.contains_phase(t.phase);
  });
  dist = reconstruction_distances(basis, w_origin, result.viapoints, demo, config.alpha);
  result.final_mean_distance = mean_of(dist);
  result.final_max_distance = max_of(dist);
  result.reached_threshold = result.final_max_distance < config.theta;
  result.total_seconds = elapsed();
  return result;
}

}  // namespace vmpl
