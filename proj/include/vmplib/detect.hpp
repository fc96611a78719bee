#ifndef VMPLIB_DETECT_HPP
#define VMPLIB_DETECT_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "vmplib/vmp.hpp"

// Via-point detection: compare a demonstration against the model rollout,
// pick deviation phases by one of three strategies, solve the matching
// elementary via-points, and keep only insertions that reduce the mean
// reconstruction distance.

namespace vmpl {

enum class Strategy { MaxDistance, BruteForce, WeightedAverage };

std::string strategy_name(Strategy s);
Strategy strategy_from_string(const std::string& name);

struct DetectConfig {
  Strategy strategy = Strategy::WeightedAverage;
  double theta = 0.005;       // distance threshold: stop when max distance is below
  double alpha = 0.1;         // rotation weight of the pose distance
  int max_viapoints = 3;      // interior via-point budget
  double prune_epsilon = 0.05;
  SolverConfig solver{};      // dist_alpha is overridden by `alpha`
};

// Weighted pose distance per sample between a demonstration and a
// reconstruction evaluated at the demonstration phases.
std::vector<double> per_sample_distances(const Demonstration& demo,
                                         const std::vector<Pose>& reconstruction, double alpha);

// Phase of the largest per-sample distance; ties resolve toward the smaller
// phase. Throws NoDeviation when every distance is below 1e-12.
double select_max_distance(const Demonstration& demo, const std::vector<double>& distances);

// Distance-weighted mean phase, snapped to the nearest demonstration phase.
// Throws NoDeviation when the distances sum to (numerically) zero.
double select_weighted_average(const Demonstration& demo, const std::vector<double>& distances);

struct ViaTarget {
  double phase = 0.0;
  Pose target;  // demonstrated pose the trajectory should pass through
};

struct DetectIteration {
  int viapoint_count = 0;       // interior via-points after this step
  double mean_distance = 0.0;
  double max_distance = 0.0;
  double elapsed_seconds = 0.0; // since detection start
};

struct DetectResult {
  ViaPointSet viapoints;             // includes start and goal
  std::vector<ViaTarget> targets;    // demonstrated targets that survived pruning
  std::vector<DetectIteration> iterations;
  double final_mean_distance = 0.0;
  double final_max_distance = 0.0;
  double total_seconds = 0.0;
  bool reached_threshold = false;
};

// Greedy detection loop: insert via-points one at a time until the budget is
// exhausted or the max distance falls below theta; insertions that do not
// reduce the mean distance are rejected and their phases blacklisted. Ends
// with a pruning pass that removes via-points whose removal costs less than
// prune_epsilon (relative).
DetectResult greedy_detect(const BasisConfig& basis, const Eigen::VectorXd& w_origin,
                           const Demonstration& demo, const DetectConfig& config);

// Removal pass on an existing via-point set, most recent insertions first.
ViaPointSet prune_viapoints(const BasisConfig& basis, const Eigen::VectorXd& w_origin,
                            const Demonstration& demo, const ViaPointSet& vps,
                            double prune_epsilon, double alpha);

}  // namespace vmpl

#endif
