#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "vmplib/batch_oracle.hpp"
#include "vmplib/errors.hpp"
#include "vmplib/moments.hpp"

using namespace vmpl;

namespace {

Eigen::VectorXd scalar(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}

}  // namespace

TEST_CASE("single-sample initialization") {
  Eigen::VectorXd x(2);
  x << 1, 2;
  const MomentEstimator est = MomentEstimator::from_sample(x);
  CHECK(est.count() == 1.0);
  CHECK((est.mean() - x).norm() == 0.0);

  Eigen::MatrixXd outer(2, 2);
  outer << 1, 2, 2, 4;
  CHECK((est.second_moment() - outer).norm() == 0.0);
  CHECK_THROWS_AS((void)est.covariance(), UndefinedError);

  const MomentEstimator zero = MomentEstimator::from_sample(Eigen::VectorXd::Zero(2));
  CHECK(zero.mean().norm() == 0.0);
  CHECK(zero.second_moment().norm() == 0.0);
}

TEST_CASE("update matches hand-computed moments on {1,3}") {
  MomentEstimator est = MomentEstimator::from_sample(scalar(1));
  est.update(scalar(3));
  CHECK(est.count() == 2.0);
  CHECK(est.mean()(0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(est.second_moment()(0, 0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(est.covariance()(0, 0) == doctest::Approx(2.0).epsilon(1e-15));

  // Samples {0,2} give unit mean and variance 2 as well.
  MomentEstimator other = MomentEstimator::from_sample(scalar(0));
  other.update(scalar(2));
  CHECK(other.covariance()(0, 0) == doctest::Approx(2.0).epsilon(1e-15));

  // Updating with the current mean keeps the mean fixed.
  const Eigen::VectorXd mu = est.mean();
  est.update(mu);
  CHECK((est.mean() - mu).norm() < 1e-15);

  CHECK_THROWS_AS(est.update(Eigen::VectorXd::Zero(3)), DimensionMismatch);
}

TEST_CASE("identical samples have zero covariance") {
  Eigen::VectorXd x(3);
  x << 0.4, -1.2, 2.5;
  MomentEstimator est = MomentEstimator::from_sample(x);
  for (int i = 0; i < 9; ++i) est.update(x);
  CHECK(est.covariance().norm() < 1e-12);
}

TEST_CASE("merge frozen arithmetic") {
  // 6-sample and 3-sample modes combine their means with weights 2/3 and 1/3.
  MomentEstimator a = MomentEstimator::from_sample(scalar(1));
  for (int i = 0; i < 5; ++i) a.update(scalar(1));
  MomentEstimator b = MomentEstimator::from_sample(scalar(4));
  for (int i = 0; i < 2; ++i) b.update(scalar(4));
  const MomentEstimator c = MomentEstimator::merged(a, b);
  CHECK(c.count() == 9.0);
  CHECK(c.mean()(0) == doctest::Approx(2.0 / 3.0 * 1 + 1.0 / 3.0 * 4).epsilon(1e-15));

  // Self-merge keeps mean and raw second moment and doubles the count; the
  // unbiased covariance rescales with the Bessel factor: 2(S - mu^2) = 2 for
  // the pair {0, 2} becomes (4/3)(S - mu^2) = 4/3 at n = 4.
  MomentEstimator d = MomentEstimator::from_sample(scalar(0));
  d.update(scalar(2));
  const MomentEstimator dd = MomentEstimator::merged(d, d);
  CHECK(dd.count() == 4.0);
  CHECK((dd.mean() - d.mean()).norm() < 1e-15);
  CHECK((dd.second_moment() - d.second_moment()).norm() < 1e-15);
  CHECK(dd.covariance()(0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

  // Merging two singletons equals the sequential estimate.
  const MomentEstimator ex = MomentEstimator::from_sample(scalar(-1));
  const MomentEstimator ey = MomentEstimator::from_sample(scalar(5));
  MomentEstimator seq = MomentEstimator::from_sample(scalar(-1));
  seq.update(scalar(5));
  const MomentEstimator un = MomentEstimator::merged(ex, ey);
  CHECK((un.mean() - seq.mean()).norm() < 1e-15);
  CHECK((un.second_moment() - seq.second_moment()).norm() < 1e-15);

  Eigen::VectorXd wide(2);
  wide << 1, 2;
  CHECK_THROWS_AS((void)MomentEstimator::merged(a, MomentEstimator::from_sample(wide)),
                  DimensionMismatch);
}

TEST_CASE("split frozen arithmetic") {
  // Joint mean 0 (8 alternating samples) split on the demonstration at 3:
  // children at +-3, sigma = gap/3 = 2, default count reduction 8 -> 2 each.
  MomentEstimator joint = MomentEstimator::from_sample(scalar(-1));
  for (int i = 1; i < 8; ++i) joint.update(scalar(i % 2 == 1 ? 1 : -1));
  REQUIRE(joint.count() == 8.0);
  REQUIRE(joint.mean()(0) == doctest::Approx(0.0).epsilon(1e-15));

  const MomentSplit parts = joint.split(scalar(3));
  CHECK_FALSE(parts.degenerate);
  CHECK(parts.a.mean()(0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(parts.b.mean()(0) == doctest::Approx(-3.0).epsilon(1e-15));
  CHECK(parts.a.count() == doctest::Approx(2.0));
  CHECK(parts.b.count() == doctest::Approx(2.0));
  CHECK(parts.a.covariance()(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(parts.b.covariance()(0, 0) == doctest::Approx(4.0).epsilon(1e-12));

  // A 4-sample parent floors the child counts at 1 (covariance undefined).
  MomentEstimator small = MomentEstimator::from_sample(scalar(-2));
  small.update(scalar(2));
  small.update(scalar(-2));
  small.update(scalar(2));
  const MomentSplit floored = small.split(scalar(3));
  CHECK(floored.a.count() == doctest::Approx(1.0));
  CHECK(floored.b.count() == doctest::Approx(1.0));

  // Mean recomposition: merging the children recovers the parent mean.
  const MomentEstimator back = MomentEstimator::merged(parts.a, parts.b);
  CHECK((back.mean() - joint.mean()).norm() < 1e-12);

  // Splitting on the current mean is the degenerate path.
  const MomentSplit degen = joint.split(joint.mean());
  CHECK(degen.degenerate);
  CHECK((degen.a.mean() - degen.b.mean()).norm() < 1e-15);

  CHECK_THROWS_AS((void)MomentEstimator::from_sample(scalar(1)).split(scalar(2)), UndefinedError);
}

TEST_CASE("covariance is symmetric PSD") {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    MomentEstimator est;
    for (int i = 0; i < 40; ++i) {
      Eigen::VectorXd x(5);
      for (int j = 0; j < 5; ++j) x(j) = normal(rng);
      if (i == 0)
        est = MomentEstimator::from_sample(x);
      else
        est.update(x);
    }
    const Eigen::MatrixXd cov = est.covariance();
    CHECK((cov - cov.transpose()).norm() < 1e-10);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    CHECK(eig.eigenvalues().minCoeff() > -1e-8);
  }
}

TEST_CASE("random interleavings of update and merge match the batch oracle") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 2.0);
  std::uniform_int_distribution<int> coin(0, 3);

  for (int sequence = 0; sequence < 120; ++sequence) {
    const int dim = 1 + int(sequence % 4);
    std::vector<MomentEstimator> pool;
    std::vector<std::vector<Eigen::VectorXd>> histories;

    const auto draw = [&] {
      Eigen::VectorXd x(dim);
      for (int j = 0; j < dim; ++j) x(j) = normal(rng);
      return x;
    };

    for (int step = 0; step < 30; ++step) {
      const int action = coin(rng);
      if (pool.empty() || action == 0) {
        const Eigen::VectorXd x = draw();
        pool.push_back(MomentEstimator::from_sample(x));
        histories.push_back({x});
      } else if (action == 1 && pool.size() >= 2) {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        std::size_t i = pick(rng), j = pick(rng);
        if (i == j) continue;
        if (i > j) std::swap(i, j);
        pool[i] = MomentEstimator::merged(pool[i], pool[j]);
        histories[i].insert(histories[i].end(), histories[j].begin(), histories[j].end());
        pool.erase(pool.begin() + long(j));
        histories.erase(histories.begin() + long(j));
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        const std::size_t i = pick(rng);
        const Eigen::VectorXd x = draw();
        pool[i].update(x);
        histories[i].push_back(x);
      }
    }

    for (std::size_t i = 0; i < pool.size(); ++i) {
      const oracle::BatchGaussian ref = oracle::batch_gaussian(histories[i]);
      const double mean_scale = std::max(1.0, ref.mean.norm());
      CHECK((pool[i].mean() - ref.mean).norm() / mean_scale < 1e-12);
      if (histories[i].size() >= 2) {
        const double cov_scale = std::max(1.0, ref.covariance.norm());
        CHECK((pool[i].covariance() - ref.covariance).norm() / cov_scale < 1e-12);
      }
    }
  }
}

TEST_CASE("reduce_count scales and floors") {
  MomentEstimator est = MomentEstimator::from_sample(scalar(1));
  est.update(scalar(2));
  est.update(scalar(3));
  est.update(scalar(4));
  const Eigen::VectorXd mu = est.mean();
  est.reduce_count(0.5);
  CHECK(est.count() == doctest::Approx(2.0));
  CHECK((est.mean() - mu).norm() == 0.0);  // moments untouched
  est.reduce_count(0.25);
  CHECK(est.count() == doctest::Approx(1.0));  // floored
}
