#ifndef VMPLIB_LIBRARY_HPP
#define VMPLIB_LIBRARY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vmplib/detect.hpp"
#include "vmplib/moments.hpp"
#include "vmplib/vmp.hpp"

// Movement-primitive library: one Gaussian per mode over the origin-aligned
// weight space, plus per-mode task-parameter statistics (start, goal,
// via-point slots, duration). Memory is bounded: every operation folds the
// demonstration into fixed-size moment state.

namespace vmpl {

// Incremental mean and second moment of unit quaternions: the mean is updated
// by a geodesic step, the tangent-space moments are parallel-transported to
// the new mean before accumulation.
class FrechetEstimator {
 public:
  FrechetEstimator() = default;

  static FrechetEstimator from_sample(const Quaternion& q);
  static FrechetEstimator from_state(double n, const Quaternion& mean,
                                     const Eigen::Matrix4d& second_moment);

  void update(const Quaternion& q);
  static FrechetEstimator merged(const FrechetEstimator& a, const FrechetEstimator& b);

  double count() const { return n_; }
  const Quaternion& mean() const { return mean_; }
  const Eigen::Matrix4d& second_moment() const { return s_; }

  // (n / (n-1)) * second moment of the tangent logs at the mean; throws
  // UndefinedError for n < 2.
  Eigen::Matrix4d covariance() const;

  void reduce_count(double factor, double floor_at = 1.0);

 private:
  double n_ = 0.0;
  Quaternion mean_;
  Eigen::Matrix4d s_ = Eigen::Matrix4d::Zero();  // tangent moments at mean_
};

struct PoseEstimator {
  MomentEstimator position;  // 3-D Euclidean moments
  FrechetEstimator orientation;

  static PoseEstimator from_sample(const Pose& p);
  void update(const Pose& p);
  static PoseEstimator merged(const PoseEstimator& a, const PoseEstimator& b);
  void reduce_count(double factor, double floor_at = 1.0);

  double count() const { return orientation.count(); }
  Pose mean() const;
};

struct ViaSlot {
  MomentEstimator phase;  // 1-D
  PoseEstimator pose;
};

// Task-parameter statistics of one mode. Detected via-points are matched to
// existing slots by phase proximity; unmatched ones open new slots.
struct TaskModel {
  PoseEstimator start;
  PoseEstimator goal;
  std::vector<ViaSlot> viapoints;
  MomentEstimator duration;  // 1-D, seconds

  static constexpr double kPhaseMatchWindow = 0.1;

  static TaskModel from_demo(const Demonstration& demo, const std::vector<ViaTarget>& targets);
  void update(const Demonstration& demo, const std::vector<ViaTarget>& targets);
  static TaskModel merged(const TaskModel& a, const TaskModel& b);
  void reduce_count(double factor, double floor_at = 1.0);
};

struct LibraryConfig {
  BasisConfig basis = BasisConfig::uniform();
  DetectConfig detect{};
};

struct LibraryEntry {
  VmpModel model;
  TaskModel task;
};

// Audit record of one applied operation: name, the mode ids it touched or
// produced, and a caller-supplied label for the demonstration input (if any).
struct LogRecord {
  std::string op;
  std::vector<std::string> ids;
  std::string input;
};

class Library {
 public:
  Library() : Library(LibraryConfig{}) {}
  explicit Library(LibraryConfig config) : config_(std::move(config)) {}

  // --- the five spatial operations ---------------------------------------
  std::string add(const Demonstration& demo, const std::string& input_label = "");
  void improve(const std::string& id, const Demonstration& demo,
               const std::string& input_label = "");
  void remove(const std::string& id);
  std::string merge(const std::string& id_a, const std::string& id_b);
  std::pair<std::string, std::string> split(const std::string& id, const Demonstration& demo,
                                            const std::string& input_label = "");

  // Most likely mode for a demonstration: Mahalanobis distance in weight
  // space when every candidate has a defined covariance, Euclidean distance
  // otherwise. Empty candidate list means "all modes".
  std::string assign(const Demonstration& demo,
                     const std::vector<std::string>& candidates = {}) const;

  // --- queries -------------------------------------------------------------
  const LibraryEntry& entry(const std::string& id) const;
  bool contains(const std::string& id) const { return entries_.count(id) > 0; }
  std::vector<std::string> ids() const;  // ascending numeric order
  std::size_t size() const { return entries_.size(); }
  const LibraryConfig& config() const { return config_; }
  const std::vector<LogRecord>& log() const { return log_; }
  std::uint64_t next_id_counter() const { return next_id_; }

  // Origin-aligned weight mean of a mode, tangent-projected for use.
  Eigen::VectorXd weight_mean(const std::string& id) const;

  // --- persistence support ---------------------------------------------
  static Library restore(LibraryConfig config, std::map<std::string, LibraryEntry> entries,
                         std::vector<LogRecord> log, std::uint64_t next_id);
  const std::map<std::string, LibraryEntry>& entries() const { return entries_; }

 private:
  std::string fresh_id();
  LibraryEntry& mutable_entry(const std::string& id);
  std::vector<ViaTarget> detect_targets(const Eigen::VectorXd& weight_mean,
                                        const Demonstration& demo) const;

  LibraryConfig config_;
  std::map<std::string, LibraryEntry> entries_;
  std::vector<LogRecord> log_;
  std::uint64_t next_id_ = 1;
};

// Numeric part of an id like "mp12"; used for deterministic ordering.
std::uint64_t id_number(const std::string& id);

// --- execution-time rollout ------------------------------------------------

struct RolloutRequest {
  std::optional<Pose> start;
  std::optional<Pose> goal;
  // Trajectory targets the rollout must pass through; when unset, the mode's
  // learned via-point slots are used.
  std::optional<std::vector<ViaTarget>> vias;
  int samples = 200;
};

struct RolloutPlan {
  std::vector<double> times;
  std::vector<Pose> poses;
  ViaPointSet viapoints;
  bool all_converged = true;
};

RolloutPlan plan_rollout(const LibraryEntry& entry, const BasisConfig& basis,
                         const RolloutRequest& request, const SolverConfig& solver = {});

// Re-applies a recorded operation sequence onto a fresh library; the resolver
// maps each record's input label back to its demonstration.
Library replay_log(const LibraryConfig& config, const std::vector<LogRecord>& log,
                   const std::function<Demonstration(const std::string&)>& resolve);

}  // namespace vmpl

#endif
