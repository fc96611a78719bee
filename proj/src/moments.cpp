#include "vmplib/moments.hpp"

#include <algorithm>
#include <cmath>

namespace vmpl {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

void check_dimension(const MomentEstimator& est, Eigen::Index d, const char* op) {
  if (est.dimension() != d)
    throw DimensionMismatch(std::string(op) + ": estimator dimension " +
                            std::to_string(est.dimension()) + " vs sample dimension " +
                            std::to_string(d));
}

}  // namespace

MomentEstimator MomentEstimator::from_sample(const Eigen::VectorXd& x) {
  MomentEstimator est;
  est.n_ = 1.0;
  est.mu_ = x;
  est.s_ = symmetrized(x * x.transpose());
  return est;
}

MomentEstimator MomentEstimator::from_state(double n, const Eigen::VectorXd& mu_hat,
                                            const Eigen::MatrixXd& s_hat) {
  if (s_hat.rows() != mu_hat.size() || s_hat.cols() != mu_hat.size())
    throw DimensionMismatch("moment state: S_hat shape does not match mu_hat");
  MomentEstimator est;
  est.n_ = n;
  est.mu_ = mu_hat;
  est.s_ = s_hat;
  return est;
}

void MomentEstimator::update(const Eigen::VectorXd& x) {
  if (n_ == 0.0) {
    *this = from_sample(x);
    return;
  }
  check_dimension(*this, x.size(), "update");
  mu_ = (n_ * mu_ + x) / (n_ + 1.0);
  s_ = symmetrized((n_ * s_ + x * x.transpose()) / (n_ + 1.0));
  n_ += 1.0;
}

MomentEstimator MomentEstimator::merged(const MomentEstimator& a, const MomentEstimator& b) {
  check_dimension(b, a.dimension(), "merge");
  MomentEstimator c;
  c.n_ = a.n_ + b.n_;
  const double wa = a.n_ / c.n_;
  const double wb = b.n_ / c.n_;
  c.mu_ = wa * a.mu_ + wb * b.mu_;
  c.s_ = symmetrized(wa * a.s_ + wb * b.s_);
  return c;
}

MomentSplit MomentEstimator::split(const Eigen::VectorXd& x,
                                                    double n_reduction) const {
  if (n_ < 2.0) throw UndefinedError("split: requires n >= 2");
  check_dimension(*this, x.size(), "split");

  MomentSplit out;
  const Eigen::VectorXd mu_a = x;
  const Eigen::VectorXd mu_b = 2.0 * mu_ - x;
  const double n_child = std::max(0.5 * n_ * n_reduction, 1.0);

  const double gap = (mu_a - mu_b).norm();
  out.degenerate = gap < 1e-9;
  const double sigma2 = out.degenerate ? 1e-8 : (gap / 3.0) * (gap / 3.0);

  // Invert the covariance relation so that covariance() reproduces sigma^2 I.
  const Eigen::Index d = mu_.size();
  const Eigen::MatrixXd iso =
      (n_child - 1.0) / n_child * sigma2 * Eigen::MatrixXd::Identity(d, d);

  out.a.n_ = n_child;
  out.a.mu_ = mu_a;
  out.a.s_ = symmetrized(iso + mu_a * mu_a.transpose());
  out.b.n_ = n_child;
  out.b.mu_ = mu_b;
  out.b.s_ = symmetrized(iso + mu_b * mu_b.transpose());
  return out;
}

Eigen::MatrixXd MomentEstimator::covariance() const {
  if (n_ < 2.0) throw UndefinedError("covariance: undefined for n < 2");
  return symmetrized(n_ / (n_ - 1.0) * (s_ - mu_ * mu_.transpose()));
}

void MomentEstimator::reduce_count(double factor, double floor_at) {
  n_ = std::max(n_ * factor, floor_at);
}

}  // namespace vmpl
