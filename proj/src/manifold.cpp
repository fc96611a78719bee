#include "vmplib/manifold.hpp"

#include <algorithm>
#include <cmath>

namespace vmpl {

namespace {

constexpr double kAntipodalDot = -1.0 + 1e-6;
constexpr double kDegenerateAlign = 1e-8;

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

Quaternion exp_s3(const Quaternion& base, const Vec4& v) {
  const double theta = v.norm();
  if (theta == 0.0) return base;
  Vec4 q = base.coeffs() * std::cos(theta) + (v / theta) * std::sin(theta);
  return Quaternion(q).normalized();
}

Vec4 log_s3(const Quaternion& base, const Quaternion& target) {
  const double dot = clamp_unit(base.dot(target));
  if (dot < kAntipodalDot) throw AntipodalError();
  Vec4 perp = target.coeffs() - base.coeffs() * dot;
  const double pnorm = perp.norm();
  if (pnorm < 1e-15) return Vec4::Zero();
  return perp * (std::acos(dot) / pnorm);
}

Vec4 transport_s3(const Quaternion& from, const Quaternion& to, const Vec4& v) {
  const Vec4 u = log_s3(from, to);
  const double theta = u.norm();
  if (theta < 1e-15) return v;
  const Vec4 e = u / theta;
  // The geodesic direction e at `from` arrives at `to` as
  // cos(theta)*e - sin(theta)*from; the orthogonal remainder is unchanged.
  const double c = e.dot(v);
  Vec4 out = v + c * ((std::cos(theta) - 1.0) * e - std::sin(theta) * from.coeffs());
  return project_tangent_s3(to, out);
}

Eigen::Matrix4d transport_matrix_s3(const Quaternion& from, const Quaternion& to) {
  const Vec4 u = log_s3(from, to);
  const double theta = u.norm();
  if (theta < 1e-15) return Eigen::Matrix4d::Identity();
  const Vec4 e = u / theta;
  Vec4 shift = (std::cos(theta) - 1.0) * e - std::sin(theta) * from.coeffs();
  return Eigen::Matrix4d::Identity() + shift * e.transpose();
}

Vec4 project_tangent_s3(const Quaternion& base, const Vec4& v) {
  return v - base.coeffs() * base.coeffs().dot(v);
}

Pose exp_m(const Pose& base, const TangentVector& v) {
  return Pose(base.position + v.linear, exp_s3(base.orientation, v.angular));
}

TangentVector log_m(const Pose& base, const Pose& target) {
  return TangentVector(target.position - base.position,
                       log_s3(base.orientation, target.orientation));
}

TangentVector transport_m(const Pose& from, const Pose& to, const TangentVector& v) {
  return TangentVector(v.linear, transport_s3(from.orientation, to.orientation, v.angular));
}

Pose geodesic_m(const Pose& a, const Pose& b, double s) {
  const TangentVector d = log_m(a, b);
  return exp_m(a, TangentVector(s * d.linear, s * d.angular));
}

double dist_m(const Pose& a, const Pose& b, double alpha) {
  const double dp = (a.position - b.position).norm();
  const double dq = std::acos(clamp_unit(std::abs(a.orientation.dot(b.orientation))));
  return dp + alpha * dq;
}

Vec7 AlignmentRotation::rotate(const Vec7& w, double angle) const {
  if (degenerate_) return w;
  const double cu = u_.dot(w);
  const double cv = v_.dot(w);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return w + (c - 1.0) * (cu * u_ + cv * v_) + s * (cu * v_ - cv * u_);
}

AlignmentRotation minimal_rotation(const Vec7& u, const Vec7& v) {
  const double dot = clamp_unit(u.dot(v));
  if (1.0 - std::abs(dot) < kDegenerateAlign) return AlignmentRotation();
  Vec7 q = v - dot * u;
  q /= q.norm();
  return AlignmentRotation(u, q, std::acos(dot));
}

}  // namespace vmpl
