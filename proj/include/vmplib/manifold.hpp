#ifndef VMPLIB_MANIFOLD_HPP
#define VMPLIB_MANIFOLD_HPP

#include <Eigen/Dense>
#include <cmath>

#include "vmplib/errors.hpp"

// Closed-form Riemannian primitives on the unit-quaternion sphere S^3 and on
// the full-pose product manifold M = R^3 x S^3. Quaternions are points of the
// ambient R^4 (w, x, y, z); tangent vectors of S^3 are kept in ambient R^4
// coordinates so the pooled product tangent is 7-dimensional.

namespace vmpl {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec7 = Eigen::Matrix<double, 7, 1>;

class Quaternion {
 public:
  Quaternion() : q_(1.0, 0.0, 0.0, 0.0) {}
  Quaternion(double w, double x, double y, double z) : q_(w, x, y, z) {}
  explicit Quaternion(const Vec4& wxyz) : q_(wxyz) {}

  static Quaternion identity() { return Quaternion(); }

  static Quaternion from_axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (n < 1e-300) return Quaternion();
    const Vec3 u = axis / n;
    const double h = 0.5 * angle;
    return Quaternion(std::cos(h), std::sin(h) * u.x(), std::sin(h) * u.y(), std::sin(h) * u.z());
  }

  // Hamilton product (this applied first, rhs in the local frame).
  Quaternion operator*(const Quaternion& r) const {
    return Quaternion(w() * r.w() - x() * r.x() - y() * r.y() - z() * r.z(),
                      w() * r.x() + x() * r.w() + y() * r.z() - z() * r.y(),
                      w() * r.y() - x() * r.z() + y() * r.w() + z() * r.x(),
                      w() * r.z() + x() * r.y() - y() * r.x() + z() * r.w());
  }

  double w() const { return q_(0); }
  double x() const { return q_(1); }
  double y() const { return q_(2); }
  double z() const { return q_(3); }

  const Vec4& coeffs() const { return q_; }
  double dot(const Quaternion& other) const { return q_.dot(other.q_); }
  double norm() const { return q_.norm(); }

  Quaternion normalized() const { return Quaternion(Vec4(q_ / q_.norm())); }
  Quaternion negated() const { return Quaternion(Vec4(-q_)); }

  // Sign-flipped copy lying in the hemisphere of `base` (same rotation).
  Quaternion aligned_to(const Quaternion& base) const {
    return dot(base) < 0.0 ? negated() : *this;
  }

 private:
  Vec4 q_;  // (w, x, y, z), unit norm
};

struct Pose {
  Vec3 position = Vec3::Zero();
  Quaternion orientation;

  Pose() = default;
  Pose(const Vec3& p, const Quaternion& q) : position(p), orientation(q) {}

  static Pose origin() { return Pose(); }
};

// Element of T_p M in ambient coordinates: 3 linear + 4 angular.
struct TangentVector {
  Vec3 linear = Vec3::Zero();
  Vec4 angular = Vec4::Zero();

  TangentVector() = default;
  TangentVector(const Vec3& lin, const Vec4& ang) : linear(lin), angular(ang) {}

  Vec7 pooled() const {
    Vec7 v;
    v << linear, angular;
    return v;
  }
  static TangentVector from_pooled(const Vec7& v) {
    return TangentVector(v.head<3>(), v.tail<4>());
  }

  double norm() const { return pooled().norm(); }
};

// Rotation in the plane spanned by two orthonormal 7-vectors, identity on the
// orthogonal complement. Degenerate (identity) when source and target
// directions coincide or oppose.
class AlignmentRotation {
 public:
  AlignmentRotation() : degenerate_(true), angle_(0.0) {}
  AlignmentRotation(const Vec7& plane_u, const Vec7& plane_v, double angle)
      : degenerate_(false), angle_(angle), u_(plane_u), v_(plane_v) {}

  bool degenerate() const { return degenerate_; }
  double angle() const { return angle_; }

  Vec7 apply(const Vec7& w) const { return rotate(w, angle_); }
  Vec7 apply_inverse(const Vec7& w) const { return rotate(w, -angle_); }

 private:
  Vec7 rotate(const Vec7& w, double angle) const;

  bool degenerate_;
  double angle_;
  Vec7 u_ = Vec7::Zero();  // orthonormal plane basis
  Vec7 v_ = Vec7::Zero();
};

// --- S^3 primitives ---------------------------------------------------------

Quaternion exp_s3(const Quaternion& base, const Vec4& v);
Vec4 log_s3(const Quaternion& base, const Quaternion& target);
Vec4 transport_s3(const Quaternion& from, const Quaternion& to, const Vec4& v);

// 4x4 matrix of transport_s3(from, to, .); linear on tangent vectors at from.
Eigen::Matrix4d transport_matrix_s3(const Quaternion& from, const Quaternion& to);

// --- product manifold M = R^3 x S^3 ----------------------------------------

Pose exp_m(const Pose& base, const TangentVector& v);
TangentVector log_m(const Pose& base, const Pose& target);
TangentVector transport_m(const Pose& from, const Pose& to, const TangentVector& v);
Pose geodesic_m(const Pose& a, const Pose& b, double s);

// d_{R^3} + alpha * d_{S^3}; rotation part is arccos(|<q_a,q_b>|), so the
// quaternion double cover contributes zero.
double dist_m(const Pose& a, const Pose& b, double alpha);

// Rotation mapping unit tangent u onto unit tangent v (both at the same base
// pose), acting only in span{u, v}.
AlignmentRotation minimal_rotation(const Vec7& u, const Vec7& v);

// Remove the component of an angular tangent along the base quaternion.
Vec4 project_tangent_s3(const Quaternion& base, const Vec4& v);

}  // namespace vmpl

#endif
