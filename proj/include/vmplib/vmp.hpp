#ifndef VMPLIB_VMP_HPP
#define VMPLIB_VMP_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "vmplib/manifold.hpp"
#include "vmplib/moments.hpp"

// Full-pose via-point movement primitive core. A trajectory is an elementary
// piecewise geodesic through the via-points plus a shape modulation: a
// weighted sum of normalized radial basis functions whose weight blocks live
// in the tangent space at the start pose and are stored, aligned, in the
// tangent space at the manifold origin.

namespace vmpl {

constexpr int kPoseDim = 7;  // 3 linear + 4 ambient angular coordinates

struct BasisConfig {
  int k = 20;
  std::vector<double> centers;  // strictly increasing, first 0, last 1
  double width = 1.0 / 19.0;
  double ridge = 1e-6;

  static BasisConfig uniform(int k = 20, double ridge = 1e-6);

  bool operator==(const BasisConfig& other) const = default;
};

// Normalized Gaussian RBF activations; entries sum to 1.
Eigen::VectorXd basis_row(double phi, const BasisConfig& basis);

struct Demonstration {
  std::vector<double> times;    // seconds, strictly increasing
  std::vector<Pose> poses;      // hemisphere-aligned sequentially
  std::vector<double> phases;   // derived, phases.front()=0, back()=1

  std::size_t size() const { return poses.size(); }
  double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
};

// phi_n = (t_n - t_1) / (t_N - t_1)
std::vector<double> compute_phases(const std::vector<double>& times);

// Ordered via-points; always contains phase 0 (start) and 1 (goal).
// Orientations are kept sign-aligned along the chain so the piecewise
// geodesic is continuous as a quaternion path.
class ViaPointSet {
 public:
  ViaPointSet(const Pose& start, const Pose& goal);

  void insert(double phase, const Pose& pose);
  void remove(double phase);

  ViaPointSet inserted(double phase, const Pose& pose) const;
  ViaPointSet removed(double phase) const;

  const Pose& start() const { return points_.front().second; }
  const Pose& goal() const { return points_.back().second; }

  bool contains_phase(double phase) const;
  std::size_t size() const { return points_.size(); }
  std::size_t interior_count() const { return points_.size() - 2; }
  const std::vector<std::pair<double, Pose>>& points() const { return points_; }

  // Interior phases, most recently inserted last.
  const std::vector<double>& insertion_order() const { return insertion_order_; }

 private:
  void canonicalize();

  std::vector<std::pair<double, Pose>> points_;  // sorted by phase
  std::vector<double> insertion_order_;
};

// Piecewise-geodesic elementary trajectory; exact at every via-point phase.
Pose elementary(double phi, const ViaPointSet& vps);

struct VmpModel {
  BasisConfig basis;
  MomentEstimator weights;  // over R^{7k}, anchored at the origin tangent
  std::string id;
};

// Fits the shape-modulation weights of a demonstration: residuals of the
// samples against the start-goal geodesic, transported to the start tangent
// space, ridge-regressed onto the basis, then aligned to the origin tangent.
Eigen::VectorXd fit_weights(const Demonstration& demo, const BasisConfig& basis);

Eigen::VectorXd align_to_origin(const Eigen::VectorXd& w_h0, const Pose& h0, const Pose& h1);
Eigen::VectorXd align_from_origin(const Eigen::VectorXd& w_origin, const Pose& h0, const Pose& h1);

// Shape modulation Psi(phi) * w as a tangent vector (blocks of w combined by
// the basis activations).
TangentVector modulation(const BasisConfig& basis, const Eigen::VectorXd& w, double phi);

// Zero the components of every angular weight block along the base
// quaternion; analytically a no-op, kills roundoff drift.
Eigen::VectorXd project_weight_blocks(const Eigen::VectorXd& w, const Quaternion& base);

std::vector<Pose> rollout(const BasisConfig& basis, const Eigen::VectorXd& w_origin,
                          const ViaPointSet& vps, const std::vector<double>& phases);

struct SolverConfig {
  double initial_step = 0.5;
  double shrink = 0.5;
  double grow = 1.2;
  int max_iterations = 500;
  double tolerance = 1e-8;  // weighted pose distance
  double dist_alpha = 0.1;  // rotation weight of the convergence metric
};

struct ViaPointSolution {
  Pose elementary_pose;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Finds the elementary pose h_v such that the trajectory with a via-point
// (phi_v, h_v) passes through y_target at phi_v, via Riemannian gradient
// descent with adaptive stepsize. Never throws on non-convergence: the best
// iterate and its residual are returned with converged=false.
ViaPointSolution solve_elementary_viapoint(const Pose& y_target, double phi_v,
                                           const BasisConfig& basis,
                                           const Eigen::VectorXd& w_origin,
                                           const ViaPointSet& vps,
                                           const SolverConfig& solver = {});

}  // namespace vmpl

#endif
