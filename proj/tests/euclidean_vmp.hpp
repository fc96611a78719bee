#ifndef TESTS_EUCLIDEAN_VMP_HPP
#define TESTS_EUCLIDEAN_VMP_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

// Self-contained flat-space (R^3, identity orientation) movement primitive
// used as an independent reference: when every pose of a problem keeps the
// identity orientation, the manifold machinery must reduce to this
// implementation exactly (up to solver/regression tolerances). Deliberately
// shares no code with the library under test.

namespace euclid {

struct Via {
  double phase;
  Eigen::Vector3d point;
};

// Piecewise-linear interpolation through (phase, point) knots that must
// include phase 0 and 1.
inline Eigen::Vector3d elementary(double phi, std::vector<Via> vias) {
  std::sort(vias.begin(), vias.end(), [](const Via& a, const Via& b) { return a.phase < b.phase; });
  phi = std::clamp(phi, 0.0, 1.0);
  for (std::size_t i = 0; i + 1 < vias.size(); ++i) {
    if (phi <= vias[i + 1].phase) {
      const double lo = vias[i].phase;
      const double hi = vias[i + 1].phase;
      const double s = hi > lo ? (phi - lo) / (hi - lo) : 0.0;
      return (1.0 - s) * vias[i].point + s * vias[i + 1].point;
    }
  }
  return vias.back().point;
}

inline Eigen::VectorXd basis_row(double phi, const std::vector<double>& centers, double width) {
  Eigen::VectorXd psi(centers.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double d = phi - centers[static_cast<std::size_t>(i)];
    psi(i) = std::exp(-0.5 * d * d / (width * width));
  }
  return psi / psi.sum();
}

// Ridge regression of positional residuals (sample minus start-goal line)
// onto the normalized basis; one shared normal matrix, three right-hand
// sides. Returns the k x 3 weight matrix.
inline Eigen::MatrixXd fit_weights(const std::vector<double>& phases,
                                   const std::vector<Eigen::Vector3d>& points,
                                   const std::vector<double>& centers, double width,
                                   double ridge) {
  const auto n = static_cast<Eigen::Index>(phases.size());
  const auto k = static_cast<Eigen::Index>(centers.size());
  if (n < std::max<Eigen::Index>(2, k)) throw std::runtime_error("too few samples");
  const Eigen::Vector3d start = points.front();
  const Eigen::Vector3d goal = points.back();
  Eigen::MatrixXd B(n, k);
  Eigen::MatrixXd R(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double phi = phases[static_cast<std::size_t>(i)];
    B.row(i) = basis_row(phi, centers, width).transpose();
    const Eigen::Vector3d line = (1.0 - phi) * start + phi * goal;
    R.row(i) = (points[static_cast<std::size_t>(i)] - line).transpose();
  }
  Eigen::MatrixXd normal = B.transpose() * B;
  normal.diagonal().array() += ridge;
  return normal.ldlt().solve(B.transpose() * R);
}

inline Eigen::Vector3d modulation(double phi, const Eigen::MatrixXd& w,
                                  const std::vector<double>& centers, double width) {
  return w.transpose() * basis_row(phi, centers, width);
}

// Closed form for the elementary point a via-point constraint requires in
// flat space: the modulation is additive, so h_v = y_v - f(phi_v).
inline Eigen::Vector3d viapoint_closed_form(const Eigen::Vector3d& y_target, double phi_v,
                                            const Eigen::MatrixXd& w,
                                            const std::vector<double>& centers, double width) {
  return y_target - modulation(phi_v, w, centers, width);
}

inline Eigen::Vector3d rollout_at(double phi, const std::vector<Via>& vias,
                                  const Eigen::MatrixXd& w, const std::vector<double>& centers,
                                  double width) {
  return elementary(phi, vias) + modulation(phi, w, centers, width);
}

}  // namespace euclid

#endif
