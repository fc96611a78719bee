#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "euclidean_vmp.hpp"
#include "test_support.hpp"
#include "vmplib/errors.hpp"
#include "vmplib/vmp.hpp"

using namespace vmpl;

namespace {

const double kPi = std::acos(-1.0);

// Constant-orientation demonstration whose positions wiggle around the
// straight line; exercises the Euclidean reduction.
Demonstration flat_demo(int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(0.02, 0.06);
  const double a1 = amp(rng), a2 = amp(rng);
  Demonstration demo;
  const Vec3 start(0, 0, 0);
  const Vec3 goal(0.4, 0.1, -0.2);
  for (int i = 0; i < samples; ++i) {
    const double phi = double(i) / (samples - 1);
    Vec3 p = (1.0 - phi) * start + phi * goal;
    p.x() += a1 * std::sin(2.0 * kPi * phi);
    p.z() += a2 * std::sin(kPi * phi);
    demo.times.push_back(1.5 * phi);
    demo.poses.emplace_back(p, Quaternion::identity());
  }
  demo.phases = compute_phases(demo.times);
  return demo;
}

std::vector<Eigen::Vector3d> positions_of(const Demonstration& demo) {
  std::vector<Eigen::Vector3d> out;
  for (const Pose& p : demo.poses) out.push_back(p.position);
  return out;
}

}  // namespace

TEST_CASE("basis_row frozen values") {
  BasisConfig two = BasisConfig::uniform(2);
  const Eigen::VectorXd mid = basis_row(0.5, two);
  CHECK(mid(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mid(1) == doctest::Approx(0.5).epsilon(1e-15));

  const BasisConfig basis = BasisConfig::uniform(20);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double phi = uni(rng);
    const Eigen::VectorXd psi = basis_row(phi, basis);
    CHECK(std::abs(psi.sum() - 1.0) < 1e-12);
    CHECK(psi.minCoeff() >= 0.0);
  }

  // Activation peaks at the matching center.
  for (int i = 0; i < basis.k; ++i) {
    const Eigen::VectorXd psi = basis_row(basis.centers[std::size_t(i)], basis);
    Eigen::Index argmax;
    psi.maxCoeff(&argmax);
    CHECK(argmax == i);
  }

  CHECK_THROWS_AS((void)BasisConfig::uniform(1), RankDeficient);
}

TEST_CASE("compute_phases frozen values") {
  CHECK(compute_phases({0, 1, 2}) == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(compute_phases({3.5, 9.5}) == std::vector<double>{0.0, 1.0});

  // Affine invariance of the time axis.
  const std::vector<double> base = compute_phases({0, 0.4, 1.0, 1.6, 2.0});
  const std::vector<double> scaled = compute_phases({10, 12, 15, 18, 20});
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(base[i] == doctest::Approx(scaled[i]).epsilon(1e-15));

  CHECK_THROWS_AS((void)compute_phases({0.0}), TooFewSamples);
  CHECK_THROWS_AS((void)compute_phases({0, 1, 1}), NonMonotoneTime);
  CHECK_THROWS_AS((void)compute_phases({0, 2, 1}), NonMonotoneTime);
}

TEST_CASE("via-point set ordering and lookup") {
  std::mt19937_64 rng(5);
  const Pose start = support::random_pose(rng);
  Pose goal = support::random_pose(rng);
  goal.orientation = goal.orientation.aligned_to(start.orientation);

  ViaPointSet vps(start, goal);
  CHECK(vps.size() == 2);
  CHECK(vps.interior_count() == 0);
  CHECK(vps.contains_phase(0.0));
  CHECK(vps.contains_phase(1.0));

  const Pose mid = geodesic_m(start, goal, 0.5);
  vps.insert(0.5, mid);
  vps.insert(0.25, geodesic_m(start, goal, 0.25));
  CHECK(vps.interior_count() == 2);
  CHECK(vps.points()[1].first == 0.25);  // sorted by phase
  CHECK(vps.insertion_order() == std::vector<double>{0.5, 0.25});

  CHECK_THROWS_AS(vps.insert(0.5, mid), InvalidViaPoint);   // duplicate phase
  CHECK_THROWS_AS(vps.insert(1.5, mid), InvalidViaPoint);   // outside (0,1)
  CHECK_THROWS_AS(vps.remove(0.0), InvalidViaPoint);        // endpoints immutable
  CHECK_THROWS_AS(vps.remove(0.9), InvalidViaPoint);        // absent phase

  vps.remove(0.25);
  CHECK(vps.interior_count() == 1);
  CHECK(vps.insertion_order() == std::vector<double>{0.5});
}

TEST_CASE("elementary trajectory frozen values") {
  std::mt19937_64 rng(9);
  const Pose start = support::random_pose(rng);
  Pose goal = support::random_pose(rng);
  goal.orientation = goal.orientation.aligned_to(start.orientation);
  const ViaPointSet plain(start, goal);

  // Without interior via-points this is the start-goal geodesic.
  const Pose mid = elementary(0.5, plain);
  const Pose ref = geodesic_m(start, goal, 0.5);
  CHECK(dist_m(mid, ref, 1.0) < 1e-12);

  // Exact (stored) poses at the via-point phases.
  ViaPointSet vps(start, goal);
  const Pose via = support::random_pose(rng);
  vps.insert(0.3, via);
  const auto& stored = vps.points()[1].second;
  const Pose at_via = elementary(0.3, vps);
  CHECK(at_via.position == stored.position);
  CHECK(at_via.orientation.coeffs() == stored.orientation.coeffs());

  // Euclidean positions {0: 0, 0.5: 2, 1: 3} evaluated at 0.25 -> 1.
  const Pose e0(Vec3(0, 0, 0), Quaternion::identity());
  const Pose e1(Vec3(3, 0, 0), Quaternion::identity());
  ViaPointSet line(e0, e1);
  line.insert(0.5, Pose(Vec3(2, 0, 0), Quaternion::identity()));
  CHECK(elementary(0.25, line).position.x() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(elementary(0.75, line).position.x() == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("fit_weights on a geodesic demo is numerically zero") {
  std::mt19937_64 rng(15);
  const Pose start = support::random_pose(rng);
  Pose goal = support::random_pose(rng);
  goal.orientation = goal.orientation.aligned_to(start.orientation);

  Demonstration demo;
  const int n = 120;
  for (int i = 0; i < n; ++i) {
    const double phi = double(i) / (n - 1);
    demo.times.push_back(2.0 * phi);
    demo.poses.push_back(geodesic_m(start, goal, phi));
  }
  demo.phases = compute_phases(demo.times);

  const Eigen::VectorXd w = fit_weights(demo, BasisConfig::uniform(20));
  CHECK(w.size() == 7 * 20);
  CHECK(w.norm() < 1e-8);
}

TEST_CASE("fit_weights input validation") {
  Demonstration tiny;
  tiny.times = {0.0, 1.0};
  tiny.poses = {Pose(), Pose(Vec3(1, 0, 0), Quaternion::identity())};
  tiny.phases = compute_phases(tiny.times);
  CHECK_THROWS_AS((void)fit_weights(tiny, BasisConfig::uniform(20)), TooFewSamples);
}

TEST_CASE("Euclidean reduction of the fit") {
  const Demonstration demo = flat_demo(200, 77);
  const BasisConfig basis = BasisConfig::uniform(20);
  const Eigen::VectorXd w = fit_weights(demo, basis);

  const Eigen::MatrixXd ref =
      euclid::fit_weights(demo.phases, positions_of(demo), basis.centers, basis.width,
                          basis.ridge);

  // The oracle lives in the start-pose frame; undo the origin alignment
  // before comparing block by block.
  const Eigen::VectorXd w_h0 =
      align_from_origin(w, demo.poses.front(), demo.poses.back());
  for (int i = 0; i < basis.k; ++i) {
    const Eigen::Vector3d lin = w_h0.segment<3>(7 * i);
    const Eigen::Vector4d ang = w_h0.segment<4>(7 * i + 3);
    CHECK((lin - ref.row(i).transpose()).norm() < 1e-10);
    CHECK(ang.norm() < 1e-10);  // nothing leaks into the angular blocks
  }

  // Rollout against the Euclidean oracle at fresh phases.
  ViaPointSet vps(demo.poses.front(), demo.poses.back());
  std::vector<double> phases;
  for (int i = 0; i <= 50; ++i) phases.push_back(double(i) / 50);
  const std::vector<Pose> ys = rollout(basis, w, vps, phases);
  const std::vector<euclid::Via> evias = {{0.0, demo.poses.front().position},
                                          {1.0, demo.poses.back().position}};
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const Eigen::Vector3d ref_pos =
        euclid::rollout_at(phases[i], evias, ref, basis.centers, basis.width);
    CHECK((ys[i].position - ref_pos).norm() < 1e-9);
    CHECK(std::abs(ys[i].orientation.dot(Quaternion::identity())) >
          1.0 - 1e-9);  // orientation stays put
  }
}

TEST_CASE("fitted rollout reconstructs a smooth demo") {
  const Demonstration demo = support::bump_demo(200, 0.45, 0.05);
  const BasisConfig basis = BasisConfig::uniform(20);
  const Eigen::VectorXd w = fit_weights(demo, basis);
  const ViaPointSet vps(demo.poses.front(), demo.poses.back());
  const std::vector<Pose> ys = rollout(basis, w, vps, demo.phases);
  double worst = 0.0;
  for (std::size_t i = 0; i < demo.size(); ++i)
    worst = std::max(worst, dist_m(demo.poses[i], ys[i], 0.1));
  CHECK(worst < 5e-3);
}

TEST_CASE("origin alignment roundtrip") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Pose h0 = support::random_pose(rng);
    Pose h1 = support::random_pose(rng);
    h1.orientation = h1.orientation.aligned_to(h0.orientation);

    Eigen::VectorXd w(7 * 8);
    std::normal_distribution<double> normal(0.0, 0.3);
    for (int i = 0; i < w.size(); ++i) w(i) = normal(rng);
    w = project_weight_blocks(w, h0.orientation);

    const Eigen::VectorXd w_o = align_to_origin(w, h0, h1);
    const Eigen::VectorXd back = align_from_origin(w_o, h0, h1);
    CHECK((back - w).norm() < 1e-10);

    // Origin-anchored blocks are tangent at the origin quaternion.
    for (int i = 0; i < 8; ++i) {
      const Eigen::Vector4d ang = w_o.segment<4>(7 * i + 3);
      CHECK(std::abs(ang(0)) < 1e-9);  // origin orientation is (1,0,0,0)
    }
  }

  // Coincident start/goal at the origin: alignment is the identity map.
  const Pose origin = Pose::origin();
  Eigen::VectorXd w(7 * 3);
  w.setZero();
  w(0) = 0.2;
  w(5) = -0.1;
  const Eigen::VectorXd w_o = align_to_origin(w, origin, origin);
  CHECK((w_o - w).norm() == 0.0);
}

TEST_CASE("zero weights reproduce the elementary trajectory bitwise") {
  std::mt19937_64 rng(25);
  const Pose start = support::random_pose(rng);
  Pose goal = support::random_pose(rng);
  goal.orientation = goal.orientation.aligned_to(start.orientation);
  ViaPointSet vps(start, goal);
  vps.insert(0.37, support::random_pose(rng));
  vps.insert(0.81, support::random_pose(rng));

  const BasisConfig basis = BasisConfig::uniform(20);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(7 * basis.k);
  std::vector<double> phases;
  for (int i = 0; i <= 1000; ++i) phases.push_back(double(i) / 1000);

  const std::vector<Pose> ys = rollout(basis, zero, vps, phases);
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const Pose h = elementary(phases[i], vps);
    CHECK(ys[i].position == h.position);
    CHECK(ys[i].orientation.coeffs() == h.orientation.coeffs());
  }
}

TEST_CASE("rollout is continuous across via-point phases") {
  const Demonstration demo = support::bump_demo(150, 0.5, 0.06);
  const BasisConfig basis = BasisConfig::uniform(20);
  const Eigen::VectorXd w = fit_weights(demo, basis);

  ViaPointSet vps(demo.poses.front(), demo.poses.back());
  const SolverConfig solver;
  const Pose target = exp_m(elementary(0.4, vps), TangentVector(Vec3(0, 0.02, 0.03), Vec4::Zero()));
  const ViaPointSolution sol = solve_elementary_viapoint(target, 0.4, basis, w, vps, solver);
  REQUIRE(sol.converged);
  vps.insert(0.4, sol.elementary_pose);

  const double delta = 1e-4;
  std::vector<double> phases;
  for (double phi = 0.0; phi <= 1.0 + 1e-12; phi += delta) phases.push_back(std::min(phi, 1.0));
  const std::vector<Pose> ys = rollout(basis, w, vps, phases);
  double worst = 0.0;
  for (std::size_t i = 1; i < ys.size(); ++i)
    worst = std::max(worst, dist_m(ys[i - 1], ys[i], 0.1));
  CHECK(worst < 1e-2);
}

TEST_CASE("via-point solver with zero weights returns the target") {
  std::mt19937_64 rng(33);
  const Pose start = support::random_pose(rng);
  Pose goal = support::random_pose(rng);
  goal.orientation = goal.orientation.aligned_to(start.orientation);
  const ViaPointSet vps(start, goal);
  const BasisConfig basis = BasisConfig::uniform(20);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(7 * basis.k);

  Pose target = geodesic_m(start, goal, 0.6);
  target.position += Vec3(0.05, -0.02, 0.01);
  const ViaPointSolution sol = solve_elementary_viapoint(target, 0.6, basis, zero, vps);
  CHECK(sol.converged);
  CHECK(dist_m(sol.elementary_pose, target, 0.1) < 1e-7);
}

TEST_CASE("via-point solver pins the rollout to the target") {
  const Demonstration demo = support::bump_demo(160, 0.55, 0.05);
  const BasisConfig basis = BasisConfig::uniform(20);
  const Eigen::VectorXd w = fit_weights(demo, basis);
  const ViaPointSet base(demo.poses.front(), demo.poses.back());

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> phase_draw(0.15, 0.85);
  std::normal_distribution<double> jitter(0.0, 0.02);
  int converged = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const double phi_v = phase_draw(rng);
    Pose target = elementary(phi_v, base);
    target.position += Vec3(jitter(rng), jitter(rng), jitter(rng));
    const Vec4 wiggle = support::random_tangent_s3(rng, target.orientation, 0.05);
    target.orientation = exp_s3(target.orientation, wiggle);

    const ViaPointSolution sol = solve_elementary_viapoint(target, phi_v, basis, w, base);
    if (!sol.converged) continue;
    ++converged;
    const ViaPointSet with_via = base.inserted(phi_v, sol.elementary_pose);
    const std::vector<Pose> ys = rollout(basis, w, with_via, {phi_v});
    CHECK(dist_m(ys.front(), target, 0.1) < 1e-6);
  }
  CHECK(converged >= 24);  // the solver should essentially always converge here
}

TEST_CASE("Euclidean via-point closed form") {
  const Demonstration demo = flat_demo(180, 91);
  const BasisConfig basis = BasisConfig::uniform(20);
  const Eigen::VectorXd w = fit_weights(demo, basis);
  const Eigen::MatrixXd ref =
      euclid::fit_weights(demo.phases, positions_of(demo), basis.centers, basis.width,
                          basis.ridge);
  const ViaPointSet base(demo.poses.front(), demo.poses.back());

  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> phase_draw(0.1, 0.9);
  std::normal_distribution<double> jitter(0.0, 0.03);
  for (int trial = 0; trial < 20; ++trial) {
    const double phi_v = phase_draw(rng);
    Pose target = elementary(phi_v, base);
    target.position += Vec3(jitter(rng), jitter(rng), jitter(rng));

    const ViaPointSolution sol = solve_elementary_viapoint(target, phi_v, basis, w, base);
    REQUIRE(sol.converged);
    const Eigen::Vector3d closed = euclid::viapoint_closed_form(
        target.position, phi_v, ref, basis.centers, basis.width);
    CHECK((sol.elementary_pose.position - closed).norm() < 1e-8);
    CHECK(std::abs(sol.elementary_pose.orientation.dot(Quaternion::identity())) > 1.0 - 1e-8);
  }
}

TEST_CASE("solver residual is non-increasing to convergence") {
  const Demonstration demo = support::bump_demo(140, 0.5, 0.05);
  const BasisConfig basis = BasisConfig::uniform(20);
  const Eigen::VectorXd w = fit_weights(demo, basis);
  const ViaPointSet base(demo.poses.front(), demo.poses.back());

  Pose target = elementary(0.33, base);
  target.position += Vec3(0.04, 0.02, -0.03);
  SolverConfig cfg;
  cfg.tolerance = 1e-10;
  const ViaPointSolution sol = solve_elementary_viapoint(target, 0.33, basis, w, base, cfg);
  CHECK(sol.converged);
  CHECK(sol.residual < 1e-10);
  CHECK(sol.iterations <= cfg.max_iterations);
}
