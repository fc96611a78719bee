#ifndef VMPLIB_MOMENTS_HPP
#define VMPLIB_MOMENTS_HPP

#include <Eigen/Dense>
#include <utility>

#include "vmplib/errors.hpp"

// Bounded-memory Gaussian estimation via non-central moments. State is
// (n, mu_hat, S_hat) with mu_hat = E[X], S_hat = E[X X^T]; memory is O(d^2)
// regardless of how many samples were folded in. All of init/update/merge are
// exactly equivalent to batch estimation over the flattened sample history;
// split is assumption-based.

namespace vmpl {

struct MomentSplit;

class MomentEstimator {
 public:
  MomentEstimator() = default;

  static MomentEstimator from_sample(const Eigen::VectorXd& x);

  // Restore from persisted state.
  static MomentEstimator from_state(double n, const Eigen::VectorXd& mu_hat,
                                    const Eigen::MatrixXd& s_hat);

  void update(const Eigen::VectorXd& x);

  static MomentEstimator merged(const MomentEstimator& a, const MomentEstimator& b);

  // Split into two modes assuming x is the mean of one of them and both
  // contributed equally; each child's count is further reduced by
  // n_reduction (default 1/2) and floored at 1.
  MomentSplit split(const Eigen::VectorXd& x, double n_reduction = 0.5) const;

  // Unbiased covariance n/(n-1) * (S_hat - mu mu^T), symmetrized. n >= 2.
  Eigen::MatrixXd covariance() const;

  double count() const { return n_; }
  Eigen::Index dimension() const { return mu_.size(); }
  const Eigen::VectorXd& mean() const { return mu_; }
  const Eigen::MatrixXd& second_moment() const { return s_; }

  // Scale the effective sample count (used when task models are split).
  void reduce_count(double factor, double floor_at = 1.0);

 private:
  double n_ = 0.0;
  Eigen::VectorXd mu_;
  Eigen::MatrixXd s_;
};

struct MomentSplit {
  MomentEstimator a;
  MomentEstimator b;
  bool degenerate = false;  // coincident child means; covariances fell back to eps*I
};

}  // namespace vmpl

#endif
