#include "vmplib/vmp.hpp"

#include <algorithm>
#include <cmath>

#include "vmplib/errors.hpp"

namespace vmpl {

namespace {

// Unit direction every model is aligned to at the origin: pure +x translation.
Eigen::Matrix<double, 7, 1> origin_direction() {
  Eigen::Matrix<double, 7, 1> d = Eigen::Matrix<double, 7, 1>::Zero();
  d(0) = 1.0;
  return d;
}

struct OriginAlignment {
  bool rotate = false;
  AlignmentRotation rotation;
};

// Rotation that maps the transported start-goal direction onto the canonical
// origin direction. Skipped when start and goal (nearly) coincide.
OriginAlignment make_origin_alignment(const Pose& h0, const Pose& h1) {
  OriginAlignment out;
  const TangentVector d01 = log_m(h0, h1);
  const double norm01 = d01.pooled().norm();
  if (norm01 < 1e-12) return out;
  TangentVector unit = d01;
  unit.linear /= norm01;
  unit.angular /= norm01;
  const TangentVector at_origin = transport_m(h0, Pose::origin(), unit);
  out.rotation = minimal_rotation(at_origin.pooled(), origin_direction());
  out.rotate = true;
  return out;
}

}  // namespace

BasisConfig BasisConfig::uniform(int k, double ridge) {
  if (k < 2) throw RankDeficient("basis needs at least 2 functions, got " + std::to_string(k));
  BasisConfig cfg;
  cfg.k = k;
  cfg.centers.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) cfg.centers[static_cast<std::size_t>(i)] = double(i) / double(k - 1);
  cfg.width = 1.0 / double(k - 1);
  cfg.ridge = ridge;
  return cfg;
}

Eigen::VectorXd basis_row(double phi, const BasisConfig& basis) {
  const int k = basis.k;
  Eigen::VectorXd row(k);
  const double inv = 1.0 / (2.0 * basis.width * basis.width);
  for (int i = 0; i < k; ++i) {
    const double d = phi - basis.centers[static_cast<std::size_t>(i)];
    row(i) = std::exp(-d * d * inv);
  }
  row /= row.sum();
  return row;
}

std::vector<double> compute_phases(const std::vector<double>& times) {
  if (times.size() < 2) throw TooFewSamples("need at least 2 samples to compute phases");
  const double span = times.back() - times.front();
  if (!(span > 0.0)) throw NonMonotoneTime("time span is not positive");
  std::vector<double> phases(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1]))
      throw NonMonotoneTime("time stamps not strictly increasing at row " + std::to_string(i + 1));
    phases[i] = (times[i] - times.front()) / span;
  }
  phases.front() = 0.0;
  phases.back() = 1.0;
  return phases;
}

ViaPointSet::ViaPointSet(const Pose& start, const Pose& goal) {
  points_.emplace_back(0.0, start);
  points_.emplace_back(1.0, goal);
  canonicalize();
}

void ViaPointSet::canonicalize() {
  for (std::size_t i = 1; i < points_.size(); ++i)
    points_[i].second.orientation =
        points_[i].second.orientation.aligned_to(points_[i - 1].second.orientation);
}

bool ViaPointSet::contains_phase(double phase) const {
  return std::any_of(points_.begin(), points_.end(),
                     [phase](const auto& p) { return p.first == phase; });
}

void ViaPointSet::insert(double phase, const Pose& pose) {
  if (!(phase > 0.0 && phase < 1.0))
    throw InvalidViaPoint("via-point phase must lie strictly inside (0,1)");
  if (contains_phase(phase)) throw InvalidViaPoint("duplicate via-point phase");
  auto it = std::lower_bound(points_.begin(), points_.end(), phase,
                             [](const auto& p, double v) { return p.first < v; });
  points_.insert(it, {phase, pose});
  insertion_order_.push_back(phase);
  canonicalize();
}

void ViaPointSet::remove(double phase) {
  if (!(phase > 0.0 && phase < 1.0)) throw InvalidViaPoint("cannot remove start or goal");
  auto it = std::find_if(points_.begin(), points_.end(),
                         [phase](const auto& p) { return p.first == phase; });
  if (it == points_.end()) throw InvalidViaPoint("no via-point at the requested phase");
  points_.erase(it);
  insertion_order_.erase(std::find(insertion_order_.begin(), insertion_order_.end(), phase));
  canonicalize();
}

ViaPointSet ViaPointSet::inserted(double phase, const Pose& pose) const {
  ViaPointSet copy = *this;
  copy.insert(phase, pose);
  return copy;
}

ViaPointSet ViaPointSet::removed(double phase) const {
  ViaPointSet copy = *this;
  copy.remove(phase);
  return copy;
}

Pose elementary(double phi, const ViaPointSet& vps) {
  const auto& pts = vps.points();
  if (phi <= 0.0) return pts.front().second;
  if (phi >= 1.0) return pts.back().second;
  auto hi = std::lower_bound(pts.begin(), pts.end(), phi,
                             [](const auto& p, double v) { return p.first < v; });
  if (hi->first == phi) return hi->second;  // exact at via-point phases
  auto lo = hi - 1;
  const double s = (phi - lo->first) / (hi->first - lo->first);
  return geodesic_m(lo->second, hi->second, s);
}

Eigen::VectorXd fit_weights(const Demonstration& demo, const BasisConfig& basis) {
  const std::size_t n = demo.size();
  const std::size_t needed = std::max<std::size_t>(2, static_cast<std::size_t>(basis.k));
  if (n < needed)
    throw TooFewSamples("fit needs at least " + std::to_string(needed) + " samples, got " +
                        std::to_string(n));
  if (demo.phases.size() != n || demo.times.size() != n)
    throw LengthMismatch("demonstration arrays disagree in length");

  const Pose& h0 = demo.poses.front();
  const Pose& h1 = demo.poses.back();
  const ViaPointSet plain(h0, h1);

  Eigen::MatrixXd B(n, basis.k);
  Eigen::MatrixXd R(n, kPoseDim);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = demo.phases[i];
    B.row(static_cast<Eigen::Index>(i)) = basis_row(phi, basis).transpose();
    const Pose ref = elementary(phi, plain);
    Pose sample = demo.poses[i];
    sample.orientation = sample.orientation.aligned_to(ref.orientation);
    const TangentVector res = transport_m(ref, h0, log_m(ref, sample));
    R.row(static_cast<Eigen::Index>(i)) = res.pooled().transpose();
  }

  Eigen::MatrixXd normal = B.transpose() * B;
  normal.diagonal().array() += basis.ridge;
  if (basis.ridge <= 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
    if (!lu.isInvertible())
      throw RankDeficient("basis normal matrix is singular and no ridge is set");
  }
  const Eigen::MatrixXd W = normal.ldlt().solve(B.transpose() * R);  // k x 7

  Eigen::VectorXd w_h0(kPoseDim * basis.k);
  for (int i = 0; i < basis.k; ++i)
    w_h0.segment<kPoseDim>(kPoseDim * i) = W.row(i).transpose();
  w_h0 = project_weight_blocks(w_h0, h0.orientation);
  return align_to_origin(w_h0, h0, h1);
}

Eigen::VectorXd project_weight_blocks(const Eigen::VectorXd& w, const Quaternion& base) {
  if (w.size() % kPoseDim != 0) throw DimensionMismatch("weight vector length not a multiple of 7");
  Eigen::VectorXd out = w;
  const int k = static_cast<int>(w.size()) / kPoseDim;
  for (int i = 0; i < k; ++i) {
    auto ang = out.segment<4>(kPoseDim * i + 3);
    ang = project_tangent_s3(base, ang);
  }
  return out;
}

Eigen::VectorXd align_to_origin(const Eigen::VectorXd& w_h0, const Pose& h0, const Pose& h1) {
  if (w_h0.size() % kPoseDim != 0)
    throw DimensionMismatch("weight vector length not a multiple of 7");
  const OriginAlignment align = make_origin_alignment(h0, h1);
  const Pose o = Pose::origin();
  const int k = static_cast<int>(w_h0.size()) / kPoseDim;
  Eigen::VectorXd out(w_h0.size());
  for (int i = 0; i < k; ++i) {
    TangentVector block = TangentVector::from_pooled(w_h0.segment<kPoseDim>(kPoseDim * i));
    Eigen::Matrix<double, 7, 1> pooled = transport_m(h0, o, block).pooled();
    if (align.rotate) pooled = align.rotation.apply(pooled);
    out.segment<kPoseDim>(kPoseDim * i) = pooled;
  }
  return project_weight_blocks(out, o.orientation);
}

Eigen::VectorXd align_from_origin(const Eigen::VectorXd& w_origin, const Pose& h0,
                                  const Pose& h1) {
  if (w_origin.size() % kPoseDim != 0)
    throw DimensionMismatch("weight vector length not a multiple of 7");
  const OriginAlignment align = make_origin_alignment(h0, h1);
  const Pose o = Pose::origin();
  const int k = static_cast<int>(w_origin.size()) / kPoseDim;
  Eigen::VectorXd out(w_origin.size());
  for (int i = 0; i < k; ++i) {
    Eigen::Matrix<double, 7, 1> pooled = w_origin.segment<kPoseDim>(kPoseDim * i);
    if (align.rotate) pooled = align.rotation.apply_inverse(pooled);
    const TangentVector block = TangentVector::from_pooled(pooled);
    out.segment<kPoseDim>(kPoseDim * i) = transport_m(o, h0, block).pooled();
  }
  return project_weight_blocks(out, h0.orientation);
}

TangentVector modulation(const BasisConfig& basis, const Eigen::VectorXd& w, double phi) {
  if (w.size() != kPoseDim * basis.k)
    throw DimensionMismatch("weight vector does not match basis size");
  const Eigen::VectorXd psi = basis_row(phi, basis);
  Eigen::Map<const Eigen::Matrix<double, kPoseDim, Eigen::Dynamic>> blocks(w.data(), kPoseDim,
                                                                           basis.k);
  const Eigen::Matrix<double, 7, 1> pooled = blocks * psi;
  return TangentVector::from_pooled(pooled);
}

std::vector<Pose> rollout(const BasisConfig& basis, const Eigen::VectorXd& w_origin,
                          const ViaPointSet& vps, const std::vector<double>& phases) {
  const Pose& h0 = vps.start();
  const Eigen::VectorXd w_h0 = align_from_origin(w_origin, h0, vps.goal());
  std::vector<Pose> out;
  out.reserve(phases.size());
  for (double phi : phases) {
    const Pose h = elementary(phi, vps);
    const TangentVector f = modulation(basis, w_h0, phi);
    out.push_back(exp_m(h, transport_m(h0, h, f)));
  }
  return out;
}

ViaPointSolution solve_elementary_viapoint(const Pose& y_target, double phi_v,
                                           const BasisConfig& basis,
                                           const Eigen::VectorXd& w_origin,
                                           const ViaPointSet& vps, const SolverConfig& solver) {
  if (!(phi_v > 0.0 && phi_v < 1.0))
    throw InvalidViaPoint("via-point phase must lie strictly inside (0,1)");
  const Pose& h0 = vps.start();
  const Eigen::VectorXd w_h0 = align_from_origin(w_origin, h0, vps.goal());
  // The modulation at phi_v does not depend on the via-point being solved for,
  // so it is fixed throughout the descent.
  const TangentVector f_h0 = modulation(basis, w_h0, phi_v);

  const auto evaluate = [&](const Pose& h) -> std::pair<Pose, double> {
    const Pose y = exp_m(h, transport_m(h0, h, f_h0));
    return {y, dist_m(y, y_target, solver.dist_alpha)};
  };

  ViaPointSolution sol;
  Pose h = y_target;
  auto [y, J] = evaluate(h);
  double step = solver.initial_step;
  int iter = 0;
  while (J >= solver.tolerance && iter < solver.max_iterations && step > 1e-16) {
    ++iter;
    Pose target = y_target;
    target.orientation = target.orientation.aligned_to(y.orientation);
    const TangentVector grad = log_m(y, target);
    TangentVector delta = transport_m(y, h, grad);
    delta.linear *= 2.0 * step;
    delta.angular *= 2.0 * step;
    const Pose h_new = exp_m(h, delta);
    const auto [y_new, J_new] = evaluate(h_new);
    if (J_new < J) {
      h = h_new;
      y = y_new;
      J = J_new;
      step *= solver.grow;
    } else {
      step *= solver.shrink;
    }
  }
  sol.elementary_pose = h;
  sol.residual = J;
  sol.iterations = iter;
  sol.converged = J < solver.tolerance;
  return sol;
}

}  // namespace vmpl
