#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "test_support.hpp"
#include "vmplib/batch_oracle.hpp"
#include "vmplib/errors.hpp"
#include "vmplib/library.hpp"
#include "vmplib/synth.hpp"

using namespace vmpl;
using oracle::BatchGaussian;

namespace {
const double kPi = std::acos(-1.0);

Eigen::VectorXd scalar(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}
}  // namespace

TEST_CASE("batch_gaussian frozen values") {
  const BatchGaussian g = oracle::batch_gaussian({scalar(1), scalar(3)});
  CHECK(g.mean(0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g.covariance(0, 0) == doctest::Approx(2.0).epsilon(1e-15));

  // Identical samples: zero covariance.
  const BatchGaussian same = oracle::batch_gaussian({scalar(4), scalar(4), scalar(4)});
  CHECK(same.covariance.norm() == 0.0);

  // A single sample has a mean but no covariance.
  const BatchGaussian one = oracle::batch_gaussian({scalar(7)});
  CHECK(one.mean(0) == 7.0);
  CHECK(one.covariance.size() == 0);

  CHECK_THROWS_AS((void)oracle::batch_gaussian({}), TooFewSamples);
}

TEST_CASE("batch_gaussian agrees with the incremental estimator") {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> normal(0.0, 3.0);
  std::vector<Eigen::VectorXd> samples;
  MomentEstimator inc;
  for (int i = 0; i < 64; ++i) {
    Eigen::VectorXd x(4);
    for (int j = 0; j < 4; ++j) x(j) = normal(rng);
    samples.push_back(x);
    if (i == 0)
      inc = MomentEstimator::from_sample(x);
    else
      inc.update(x);
  }
  const BatchGaussian ref = oracle::batch_gaussian(samples);
  CHECK((inc.mean() - ref.mean).norm() / std::max(1.0, ref.mean.norm()) < 1e-12);
  CHECK((inc.covariance() - ref.covariance).norm() / std::max(1.0, ref.covariance.norm()) <
        1e-12);
}

TEST_CASE("batch_frechet_mean frozen values") {
  std::mt19937_64 rng(66);
  const Quaternion q = support::random_unit_quaternion(rng);
  CHECK((oracle::batch_frechet_mean({q}).coeffs() - q.coeffs()).norm() < 1e-12);

  // Two quaternions: geodesic midpoint.
  const Quaternion id = Quaternion::identity();
  const Quaternion rz90 = Quaternion::from_axis_angle(Vec3(0, 0, 1), kPi / 2);
  const Quaternion mid = oracle::batch_frechet_mean({id, rz90});
  const Quaternion rz45 = Quaternion::from_axis_angle(Vec3(0, 0, 1), kPi / 4);
  CHECK((mid.coeffs() - rz45.coeffs()).norm() < 1e-10);

  // Symmetric set around the identity.
  const Quaternion nz90 = Quaternion::from_axis_angle(Vec3(0, 0, 1), -kPi / 2);
  const Quaternion sym = oracle::batch_frechet_mean({id, rz90, nz90});
  CHECK(std::abs(std::abs(sym.dot(id)) - 1.0) < 1e-10);
}

TEST_CASE("batch_fit_library pools fitted weights per group") {
  const BasisConfig basis = BasisConfig::uniform(20);
  std::vector<Demonstration> group;
  for (std::uint64_t seed = 0; seed < 3; ++seed)
    group.push_back(synth::generate({synth::Family::Bump, seed, 100}));

  const auto batches = oracle::batch_fit_library(
      {{"solo", {group[0]}}, {"trio", group}}, basis);
  REQUIRE(batches.size() == 2);
  CHECK(batches[0].label == "solo");
  CHECK((batches[0].weights.mean - fit_weights(group[0], basis)).norm() < 1e-15);

  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(7 * basis.k);
  for (const Demonstration& d : group) pooled += fit_weights(d, basis);
  pooled /= 3.0;
  CHECK((batches[1].weights.mean - pooled).norm() / pooled.norm() < 1e-13);
}

TEST_CASE("compare reports per-block RMS differences") {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(14);
  Eigen::VectorXd b = a;

  // Identical means: an all-zero report.
  const auto zero = oracle::compare({"m"}, {a}, {b});
  REQUIRE(zero.rows.size() == 1);
  CHECK(zero.rows[0].translation_rms == 0.0);
  CHECK(zero.rows[0].rotation_rms_deg == 0.0);

  // A pure rotation-block difference shows up only in the rotation column,
  // converted to degrees.
  b(3) = kPi / 180.0;  // one degree in the first angular block
  const auto rot = oracle::compare({"m"}, {a}, {b});
  CHECK(rot.rows[0].translation_rms == 0.0);
  CHECK(rot.rows[0].rotation_rms_deg ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));  // RMS over 2 blocks

  // A pure translation difference shows up only in the translation column.
  b = a;
  b(0) = 0.003;
  const auto trans = oracle::compare({"m"}, {a}, {b});
  CHECK(trans.rows[0].rotation_rms_deg == 0.0);
  CHECK(trans.rows[0].translation_rms ==
        doctest::Approx(0.003 / std::sqrt(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS((void)oracle::compare({"m"}, {a, b}, {a}), ModeCountMismatch);

  // CSV rendering carries one line per mode plus a header.
  const std::string csv = trans.csv();
  CHECK(csv.find("mode,translation_rms") != std::string::npos);
  CHECK(csv.find("\nm,") != std::string::npos);
}

TEST_CASE("incremental library equals the oracle end to end") {
  Library lib;
  std::vector<Demonstration> demos;
  for (std::uint64_t seed = 90; seed < 95; ++seed)
    demos.push_back(synth::generate({synth::Family::Pouring, seed, 100}));

  const std::string id = lib.add(demos[0]);
  for (std::size_t i = 1; i < demos.size(); ++i) lib.improve(id, demos[i]);

  const auto batches = oracle::batch_fit_library({{id, demos}}, lib.config().basis);
  const auto report = oracle::compare({id}, {lib.entry(id).model.weights.mean()},
                                      {batches[0].weights.mean});
  CHECK(report.rows[0].translation_relative < 1e-12);
  CHECK(report.rows[0].rotation_relative < 1e-12);
}
