#include "vmplib/batch_oracle.hpp"

#include <cmath>
#include <sstream>

#include "vmplib/errors.hpp"

namespace vmpl::oracle {

BatchGaussian batch_gaussian(const std::vector<Eigen::VectorXd>& samples) {
  if (samples.empty()) throw TooFewSamples("batch gaussian needs at least 1 sample");
  const Eigen::Index d = samples.front().size();
  for (const auto& s : samples)
    if (s.size() != d) throw DimensionMismatch("batch gaussian: inconsistent sample dimensions");

  BatchGaussian out;
  out.mean = Eigen::VectorXd::Zero(d);
  for (const auto& s : samples) out.mean += s;
  out.mean /= double(samples.size());

  if (samples.size() >= 2) {
    out.covariance = Eigen::MatrixXd::Zero(d, d);
    for (const auto& s : samples) {
      const Eigen::VectorXd c = s - out.mean;
      out.covariance += c * c.transpose();
    }
    out.covariance /= double(samples.size()) - 1.0;
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  }
  return out;
}

Quaternion batch_frechet_mean(const std::vector<Quaternion>& samples, double tolerance,
                              int max_iterations) {
  if (samples.empty()) throw TooFewSamples("batch Frechet mean needs at least 1 sample");
  Quaternion mean = samples.front().normalized();
  for (int iter = 0; iter < max_iterations; ++iter) {
    Vec4 step = Vec4::Zero();
    for (const Quaternion& q : samples)
      step += log_s3(mean, q.normalized().aligned_to(mean));
    step /= double(samples.size());
    if (step.norm() < tolerance) return mean;
    mean = exp_s3(mean, step);
  }
  throw NoConvergence("batch Frechet mean did not converge in " +
                      std::to_string(max_iterations) + " iterations");
}

std::vector<ModeBatch> batch_fit_library(
    const std::vector<std::pair<std::string, std::vector<Demonstration>>>& groups,
    const BasisConfig& basis) {
  std::vector<ModeBatch> out;
  out.reserve(groups.size());
  for (const auto& [label, demos] : groups) {
    std::vector<Eigen::VectorXd> weights;
    weights.reserve(demos.size());
    for (const Demonstration& demo : demos) weights.push_back(fit_weights(demo, basis));
    out.push_back({label, batch_gaussian(weights)});
  }
  return out;
}

namespace {

constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

struct BlockRms {
  double translation = 0.0;
  double rotation = 0.0;
};

BlockRms block_rms(const Eigen::VectorXd& v) {
  const int k = static_cast<int>(v.size()) / kPoseDim;
  double lin = 0.0, ang = 0.0;
  for (int i = 0; i < k; ++i) {
    lin += v.segment<3>(kPoseDim * i).squaredNorm();
    ang += v.segment<4>(kPoseDim * i + 3).squaredNorm();
  }
  return {std::sqrt(lin / k), std::sqrt(ang / k)};
}

}  // namespace

ComparisonReport compare(const std::vector<std::string>& labels,
                         const std::vector<Eigen::VectorXd>& incremental_means,
                         const std::vector<Eigen::VectorXd>& batch_means) {
  if (labels.size() != incremental_means.size() || labels.size() != batch_means.size())
    throw ModeCountMismatch("comparison inputs disagree in mode count");
  ComparisonReport report;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Eigen::VectorXd& inc = incremental_means[i];
    const Eigen::VectorXd& bat = batch_means[i];
    if (inc.size() != bat.size() || inc.size() % kPoseDim != 0)
      throw DimensionMismatch("comparison: weight vectors disagree in size");
    const BlockRms diff = block_rms(inc - bat);
    const BlockRms ref = block_rms(bat);
    ComparisonRow row;
    row.label = labels[i];
    row.translation_rms = diff.translation;
    row.rotation_rms_deg = diff.rotation * kRadToDeg;
    row.translation_relative = diff.translation / (ref.translation + 1e-300);
    row.rotation_relative = diff.rotation / (ref.rotation + 1e-300);
    report.rows.push_back(row);
  }
  return report;
}

std::string ComparisonReport::csv() const {
  std::ostringstream os;
  os << "mode,translation_rms,rotation_rms_deg,translation_relative,rotation_relative\n";
  os.precision(17);
  for (const ComparisonRow& r : rows)
    os << r.label << ',' << r.translation_rms << ',' << r.rotation_rms_deg << ','
       << r.translation_relative << ',' << r.rotation_relative << '\n';
  return os.str();
}

}  // namespace vmpl::oracle
