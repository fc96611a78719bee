#include "vmplib/library.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vmplib/errors.hpp"

namespace vmpl {

namespace {

Eigen::Matrix4d symmetrized(const Eigen::Matrix4d& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

// --- FrechetEstimator --------------------------------------------------------

FrechetEstimator FrechetEstimator::from_sample(const Quaternion& q) {
  FrechetEstimator est;
  est.n_ = 1.0;
  est.mean_ = q.normalized();
  est.s_.setZero();
  return est;
}

FrechetEstimator FrechetEstimator::from_state(double n, const Quaternion& mean,
                                              const Eigen::Matrix4d& second_moment) {
  FrechetEstimator est;
  est.n_ = n;
  est.mean_ = mean;
  est.s_ = second_moment;
  return est;
}

void FrechetEstimator::update(const Quaternion& q) {
  if (n_ == 0.0) {
    *this = from_sample(q);
    return;
  }
  const Quaternion sample = q.normalized().aligned_to(mean_);
  const Vec4 towards = log_s3(mean_, sample);
  const Quaternion new_mean = exp_s3(mean_, Vec4(towards / (n_ + 1.0)));
  const Eigen::Matrix4d t = transport_matrix_s3(mean_, new_mean);
  s_ = symmetrized(t * s_ * t.transpose());
  const Vec4 l = log_s3(new_mean, sample.aligned_to(new_mean));
  s_ = symmetrized((n_ * s_ + l * l.transpose()) / (n_ + 1.0));
  mean_ = new_mean;
  n_ += 1.0;
}

FrechetEstimator FrechetEstimator::merged(const FrechetEstimator& a, const FrechetEstimator& b) {
  if (a.n_ == 0.0) return b;
  if (b.n_ == 0.0) return a;
  const double n_c = a.n_ + b.n_;
  const Quaternion mean_b = b.mean_.aligned_to(a.mean_);
  const Vec4 towards = log_s3(a.mean_, mean_b);
  const Quaternion mean_c = exp_s3(a.mean_, Vec4(towards * (b.n_ / n_c)));
  const Eigen::Matrix4d t_a = transport_matrix_s3(a.mean_, mean_c);
  const Quaternion mean_c_for_b = mean_c.aligned_to(b.mean_);
  const Eigen::Matrix4d t_b = transport_matrix_s3(b.mean_, mean_c_for_b);
  FrechetEstimator out;
  out.n_ = n_c;
  out.mean_ = mean_c;
  out.s_ = symmetrized((a.n_ * (t_a * a.s_ * t_a.transpose()) +
                        b.n_ * (t_b * b.s_ * t_b.transpose())) /
                       n_c);
  return out;
}

Eigen::Matrix4d FrechetEstimator::covariance() const {
  if (n_ < 2.0) throw UndefinedError("orientation covariance needs at least 2 samples");
  return symmetrized(s_ * (n_ / (n_ - 1.0)));
}

void FrechetEstimator::reduce_count(double factor, double floor_at) {
  n_ = std::max(n_ * factor, floor_at);
}

// --- PoseEstimator -----------------------------------------------------------

PoseEstimator PoseEstimator::from_sample(const Pose& p) {
  return {MomentEstimator::from_sample(p.position), FrechetEstimator::from_sample(p.orientation)};
}

void PoseEstimator::update(const Pose& p) {
  position.update(p.position);
  orientation.update(p.orientation);
}

PoseEstimator PoseEstimator::merged(const PoseEstimator& a, const PoseEstimator& b) {
  return {MomentEstimator::merged(a.position, b.position),
          FrechetEstimator::merged(a.orientation, b.orientation)};
}

void PoseEstimator::reduce_count(double factor, double floor_at) {
  position.reduce_count(factor, floor_at);
  orientation.reduce_count(factor, floor_at);
}

Pose PoseEstimator::mean() const { return Pose(position.mean(), orientation.mean()); }

// --- TaskModel ---------------------------------------------------------------

TaskModel TaskModel::from_demo(const Demonstration& demo, const std::vector<ViaTarget>& targets) {
  TaskModel task;
  task.start = PoseEstimator::from_sample(demo.poses.front());
  task.goal = PoseEstimator::from_sample(demo.poses.back());
  task.duration = MomentEstimator::from_sample(Eigen::VectorXd::Constant(1, demo.duration()));
  for (const ViaTarget& t : targets)
    task.viapoints.push_back({MomentEstimator::from_sample(Eigen::VectorXd::Constant(1, t.phase)),
                              PoseEstimator::from_sample(t.target)});
  return task;
}

void TaskModel::update(const Demonstration& demo, const std::vector<ViaTarget>& targets) {
  start.update(demo.poses.front());
  goal.update(demo.poses.back());
  duration.update(Eigen::VectorXd::Constant(1, demo.duration()));
  for (const ViaTarget& t : targets) {
    ViaSlot* best = nullptr;
    double best_gap = kPhaseMatchWindow;
    for (ViaSlot& slot : viapoints) {
      const double gap = std::abs(slot.phase.mean()(0) - t.phase);
      if (gap <= best_gap) {
        best_gap = gap;
        best = &slot;
      }
    }
    if (best != nullptr) {
      best->phase.update(Eigen::VectorXd::Constant(1, t.phase));
      best->pose.update(t.target);
    } else {
      viapoints.push_back({MomentEstimator::from_sample(Eigen::VectorXd::Constant(1, t.phase)),
                           PoseEstimator::from_sample(t.target)});
    }
  }
  std::sort(viapoints.begin(), viapoints.end(),
            [](const ViaSlot& a, const ViaSlot& b) { return a.phase.mean()(0) < b.phase.mean()(0); });
}

TaskModel TaskModel::merged(const TaskModel& a, const TaskModel& b) {
  TaskModel out;
  out.start = PoseEstimator::merged(a.start, b.start);
  out.goal = PoseEstimator::merged(a.goal, b.goal);
  out.duration = MomentEstimator::merged(a.duration, b.duration);
  out.viapoints = a.viapoints;
  std::vector<bool> used(out.viapoints.size(), false);
  for (const ViaSlot& slot_b : b.viapoints) {
    const double phase_b = slot_b.phase.mean()(0);
    std::size_t best = out.viapoints.size();
    double best_gap = TaskModel::kPhaseMatchWindow;
    for (std::size_t i = 0; i < out.viapoints.size(); ++i) {
      if (used[i]) continue;
      const double gap = std::abs(out.viapoints[i].phase.mean()(0) - phase_b);
      if (gap <= best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best < out.viapoints.size()) {
      out.viapoints[best].phase = MomentEstimator::merged(out.viapoints[best].phase, slot_b.phase);
      out.viapoints[best].pose = PoseEstimator::merged(out.viapoints[best].pose, slot_b.pose);
      used[best] = true;
    } else {
      out.viapoints.push_back(slot_b);
    }
  }
  std::sort(out.viapoints.begin(), out.viapoints.end(),
            [](const ViaSlot& a2, const ViaSlot& b2) {
              return a2.phase.mean()(0) < b2.phase.mean()(0);
            });
  return out;
}

void TaskModel::reduce_count(double factor, double floor_at) {
  start.reduce_count(factor, floor_at);
  goal.reduce_count(factor, floor_at);
  duration.reduce_count(factor, floor_at);
  for (ViaSlot& slot : viapoints) {
    slot.phase.reduce_count(factor, floor_at);
    slot.pose.reduce_count(factor, floor_at);
  }
}

// --- Library -----------------------------------------------------------------

std::uint64_t id_number(const std::string& id) {
  if (id.size() < 3 || id.compare(0, 2, "mp") != 0)
    throw UnknownId(id);
  std::uint64_t n = 0;
  for (std::size_t i = 2; i < id.size(); ++i) {
    const char c = id[i];
    if (c < '0' || c > '9') throw UnknownId(id);
    n = n * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return n;
}

std::string Library::fresh_id() { return "mp" + std::to_string(next_id_++); }

LibraryEntry& Library::mutable_entry(const std::string& id) {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw UnknownId(id);
  return it->second;
}

const LibraryEntry& Library::entry(const std::string& id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw UnknownId(id);
  return it->second;
}

std::vector<std::string> Library::ids() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [id, unused] : entries_) out.push_back(id);
  std::sort(out.begin(), out.end(),
            [](const std::string& a, const std::string& b) { return id_number(a) < id_number(b); });
  return out;
}

Eigen::VectorXd Library::weight_mean(const std::string& id) const {
  return project_weight_blocks(entry(id).model.weights.mean(), Quaternion::identity());
}

std::vector<ViaTarget> Library::detect_targets(const Eigen::VectorXd& weight_mean,
                                               const Demonstration& demo) const {
  return greedy_detect(config_.basis, weight_mean, demo, config_.detect).targets;
}

std::string Library::add(const Demonstration& demo, const std::string& input_label) {
  const Eigen::VectorXd w = fit_weights(demo, config_.basis);
  LibraryEntry entry;
  entry.model.basis = config_.basis;
  entry.model.weights = MomentEstimator::from_sample(w);
  const std::vector<ViaTarget> targets = detect_targets(w, demo);
  entry.task = TaskModel::from_demo(demo, targets);
  const std::string id = fresh_id();
  entry.model.id = id;
  entries_.emplace(id, std::move(entry));
  log_.push_back({"add", {id}, input_label});
  return id;
}

void Library::improve(const std::string& id, const Demonstration& demo,
                      const std::string& input_label) {
  LibraryEntry& current = mutable_entry(id);
  const Eigen::VectorXd w = fit_weights(demo, config_.basis);

  LibraryEntry updated = current;
  updated.model.weights.update(w);
  // Detection compares the demonstration against the mode's generalization,
  // i.e. the updated weight mean, not the demonstration's own fit.
  const Eigen::VectorXd mean =
      project_weight_blocks(updated.model.weights.mean(), Quaternion::identity());
  const std::vector<ViaTarget> targets = detect_targets(mean, demo);
  updated.task.update(demo, targets);

  current = std::move(updated);
  log_.push_back({"improve", {id}, input_label});
}

void Library::remove(const std::string& id) {
  if (entries_.erase(id) == 0) throw UnknownId(id);
  log_.push_back({"remove", {id}, ""});
}

std::string Library::merge(const std::string& id_a, const std::string& id_b) {
  const LibraryEntry& a = entry(id_a);
  const LibraryEntry& b = entry(id_b);
  if (id_a == id_b) throw UndefinedError("cannot merge a mode with itself");
  if (!(a.model.basis == b.model.basis))
    throw BasisMismatch("modes use different basis configurations");

  LibraryEntry merged;
  merged.model.basis = a.model.basis;
  merged.model.weights = MomentEstimator::merged(a.model.weights, b.model.weights);
  merged.task = TaskModel::merged(a.task, b.task);

  const std::string id_c = fresh_id();
  merged.model.id = id_c;
  entries_.erase(id_a);
  entries_.erase(id_b);
  entries_.emplace(id_c, std::move(merged));
  log_.push_back({"merge", {id_a, id_b, id_c}, ""});
  return id_c;
}

std::pair<std::string, std::string> Library::split(const std::string& id,
                                                   const Demonstration& demo,
                                                   const std::string& input_label) {
  const LibraryEntry& parent = entry(id);
  if (parent.model.weights.count() < 2.0)
    throw UndefinedError("split needs a mode with at least 2 observations");

  const Eigen::VectorXd w = fit_weights(demo, config_.basis);
  const MomentSplit parts = parent.model.weights.split(w);

  LibraryEntry child_a;
  child_a.model.basis = parent.model.basis;
  child_a.model.weights = parts.a;
  LibraryEntry child_b;
  child_b.model.basis = parent.model.basis;
  child_b.model.weights = parts.b;

  // Task statistics follow both children with reduced confidence; the
  // triggering demonstration is then counted into child A.
  TaskModel task = parent.task;
  task.reduce_count(0.25, 1.0);
  child_a.task = task;
  child_b.task = task;
  const Eigen::VectorXd mean_a =
      project_weight_blocks(child_a.model.weights.mean(), Quaternion::identity());
  child_a.task.update(demo, detect_targets(mean_a, demo));

  const std::string id_a = fresh_id();
  const std::string id_b = fresh_id();
  child_a.model.id = id_a;
  child_b.model.id = id_b;
  entries_.erase(id);
  entries_.emplace(id_a, std::move(child_a));
  entries_.emplace(id_b, std::move(child_b));
  log_.push_back({"split", {id, id_a, id_b}, input_label});
  return {id_a, id_b};
}

std::string Library::assign(const Demonstration& demo,
                            const std::vector<std::string>& candidates) const {
  std::vector<std::string> pool = candidates.empty() ? ids() : candidates;
  if (pool.empty()) throw NoCandidates();
  std::sort(pool.begin(), pool.end(),
            [](const std::string& a, const std::string& b) { return id_number(a) < id_number(b); });
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  bool all_have_covariance = true;
  for (const std::string& id : pool) {
    const LibraryEntry& e = entry(id);
    if (!(e.model.basis == config_.basis))
      throw BasisMismatch("candidate " + id + " uses a different basis configuration");
    if (e.model.weights.count() < 2.0) all_have_covariance = false;
  }

  const Eigen::VectorXd w = fit_weights(demo, config_.basis);
  std::string best;
  double best_score = std::numeric_limits<double>::infinity();
  for (const std::string& id : pool) {
    const LibraryEntry& e = entry(id);
    const Eigen::VectorXd diff = w - e.model.weights.mean();
    double score;
    if (all_have_covariance) {
      Eigen::MatrixXd sigma = e.model.weights.covariance();
      sigma.diagonal().array() += 1e-6;
      score = diff.dot(sigma.ldlt().solve(diff));
    } else {
      score = diff.squaredNorm();
    }
    if (score < best_score) {  // strict: ties keep the smaller id
      best_score = score;
      best = id;
    }
  }
  return best;
}

Library Library::restore(LibraryConfig config, std::map<std::string, LibraryEntry> entries,
                         std::vector<LogRecord> log, std::uint64_t next_id) {
  Library lib(std::move(config));
  lib.entries_ = std::move(entries);
  lib.log_ = std::move(log);
  lib.next_id_ = next_id;
  return lib;
}

// --- rollout planning -------------------------------------------------------

RolloutPlan plan_rollout(const LibraryEntry& entry, const BasisConfig& basis,
                         const RolloutRequest& request, const SolverConfig& solver) {
  if (request.samples < 2) throw TooFewSamples("rollout needs at least 2 samples");
  const Pose start = request.start.value_or(entry.task.start.mean());
  const Pose goal = request.goal.value_or(entry.task.goal.mean());

  std::vector<ViaTarget> vias;
  if (request.vias.has_value()) {
    vias = *request.vias;
  } else {
    for (const ViaSlot& slot : entry.task.viapoints)
      vias.push_back({slot.phase.mean()(0), slot.pose.mean()});
  }
  std::sort(vias.begin(), vias.end(),
            [](const ViaTarget& a, const ViaTarget& b) { return a.phase < b.phase; });

  const Eigen::VectorXd w =
      project_weight_blocks(entry.model.weights.mean(), Quaternion::identity());

  RolloutPlan plan{{}, {}, ViaPointSet(start, goal), true};
  for (const ViaTarget& via : vias) {
    const double phi = std::clamp(via.phase, 1e-6, 1.0 - 1e-6);
    if (plan.viapoints.contains_phase(phi)) continue;
    const ViaPointSolution sol =
        solve_elementary_viapoint(via.target, phi, basis, w, plan.viapoints, solver);
    if (!sol.converged) plan.all_converged = false;
    plan.viapoints.insert(phi, sol.elementary_pose);
  }

  const double duration = std::max(entry.task.duration.mean()(0), 1e-9);
  plan.times.resize(static_cast<std::size_t>(request.samples));
  std::vector<double> phases(plan.times.size());
  for (std::size_t i = 0; i < phases.size(); ++i) {
    phases[i] = double(i) / double(request.samples - 1);
    plan.times[i] = phases[i] * duration;
  }
  plan.poses = rollout(basis, w, plan.viapoints, phases);
  return plan;
}

Library replay_log(const LibraryConfig& config, const std::vector<LogRecord>& log,
                   const std::function<Demonstration(const std::string&)>& resolve) {
  Library lib(config);
  for (const LogRecord& record : log) {
    if (record.op == "add") {
      lib.add(resolve(record.input), record.input);
    } else if (record.op == "improve") {
      lib.improve(record.ids.at(0), resolve(record.input), record.input);
    } else if (record.op == "remove") {
      lib.remove(record.ids.at(0));
    } else if (record.op == "merge") {
      lib.merge(record.ids.at(0), record.ids.at(1));
    } else if (record.op == "split") {
      lib.split(record.ids.at(0), resolve(record.input), record.input);
    } else {
      throw CorruptFile("unknown operation in log: " + record.op);
    }
  }
  return lib;
}

}  // namespace vmpl
