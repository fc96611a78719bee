#ifndef VMPLIB_BATCH_ORACLE_HPP
#define VMPLIB_BATCH_ORACLE_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "vmplib/manifold.hpp"
#include "vmplib/vmp.hpp"

// Batch references the incremental library is checked against. These keep
// every sample in memory on purpose; they are the ground truth for the
// equivalence claims, not part of the bounded-memory pipeline.

namespace vmpl::oracle {

struct BatchGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // 0x0 when fewer than 2 samples
};

// Two-pass sample mean and unbiased covariance.
BatchGaussian batch_gaussian(const std::vector<Eigen::VectorXd>& samples);

// Iterative tangent-mean of unit quaternions (inputs hemisphere-aligned to
// the running estimate). Throws NoConvergence after max_iterations.
Quaternion batch_frechet_mean(const std::vector<Quaternion>& samples, double tolerance = 1e-12,
                              int max_iterations = 1000);

struct ModeBatch {
  std::string label;
  BatchGaussian weights;  // over the origin-aligned weight space
};

// Fits every demonstration of every group and pools the weights per group.
std::vector<ModeBatch> batch_fit_library(
    const std::vector<std::pair<std::string, std::vector<Demonstration>>>& groups,
    const BasisConfig& basis);

struct ComparisonRow {
  std::string label;
  double translation_rms = 0.0;     // over the linear weight blocks, position units
  double rotation_rms_deg = 0.0;    // over the angular weight blocks, degrees
  double translation_relative = 0.0;
  double rotation_relative = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::string csv() const;
};

// Row-per-mode difference between incremental and batch weight means. The
// two lists must correspond element-wise.
ComparisonReport compare(const std::vector<std::string>& labels,
                         const std::vector<Eigen::VectorXd>& incremental_means,
                         const std::vector<Eigen::VectorXd>& batch_means);

}  // namespace vmpl::oracle

#endif
