#include "vmplib/io.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "vmplib/errors.hpp"

namespace vmpl::io {

using nlohmann::json;

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

// --- trajectories ------------------------------------------------------------

namespace {

double parse_field(const std::string& field, const std::string& origin, std::size_t row) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw ParseError(origin + ": row " + std::to_string(row) + ": bad number '" + field + "'");
  return value;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw ParseError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ParseError("cannot rename " + tmp + " to " + path);
}

// Advisory lock held for the duration of a save.
class FileLock {
 public:
  explicit FileLock(const std::string& path) : path_(path + ".lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ >= 0) ::flock(fd_, LOCK_EX);
  }
  ~FileLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  std::string path_;
  int fd_ = -1;
};

}  // namespace

Demonstration parse_trajectory(const std::string& text, const std::string& origin) {
  Demonstration demo;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    if (line.rfind("t,", 0) == 0 || line.rfind("#", 0) == 0) continue;  // header or comment
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 8)
      throw ParseError(origin + ": row " + std::to_string(row) + ": expected 8 fields, got " +
                       std::to_string(fields.size()));
    double v[8];
    for (int i = 0; i < 8; ++i) v[i] = parse_field(fields[static_cast<std::size_t>(i)], origin, row);
    Quaternion q(v[4], v[5], v[6], v[7]);
    if (std::abs(q.norm() - 1.0) > 1e-3)
      throw BadQuaternion(origin + ": row " + std::to_string(row) + ": quaternion norm " +
                          format_double(q.norm()) + " is not within 1e-3 of 1");
    // Repair mild denormalization, but keep already-unit quaternions bitwise
    // so that write/read round-trips exactly.
    if (std::abs(q.norm() - 1.0) > 1e-12) q = q.normalized();
    demo.times.push_back(v[0]);
    demo.poses.emplace_back(Vec3(v[1], v[2], v[3]), q);
  }
  if (demo.size() < 2) throw TooFewSamples(origin + ": need at least 2 samples");

  if (demo.poses.front().orientation.w() < 0.0)
    for (Pose& p : demo.poses) p.orientation = p.orientation.negated();
  for (std::size_t i = 1; i < demo.poses.size(); ++i)
    demo.poses[i].orientation =
        demo.poses[i].orientation.aligned_to(demo.poses[i - 1].orientation);

  try {
    demo.phases = compute_phases(demo.times);
  } catch (const NonMonotoneTime& e) {
    throw NonMonotoneTime(origin + ": " + e.what());
  }
  return demo;
}

Demonstration read_trajectory(const std::string& path) {
  return parse_trajectory(read_file(path), path);
}

std::string trajectory_csv(const std::vector<double>& times, const std::vector<Pose>& poses) {
  if (times.size() != poses.size())
    throw LengthMismatch("trajectory times and poses disagree in length");
  std::string out = "t,x,y,z,qw,qx,qy,qz\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Pose& p = poses[i];
    out += format_double(times[i]);
    for (double c : {p.position.x(), p.position.y(), p.position.z(), p.orientation.w(),
                     p.orientation.x(), p.orientation.y(), p.orientation.z()}) {
      out += ',';
      out += format_double(c);
    }
    out += '\n';
  }
  return out;
}

void write_trajectory(const std::string& path, const std::vector<double>& times,
                      const std::vector<Pose>& poses) {
  write_file_atomic(path, trajectory_csv(times, poses));
}

// --- library persistence ------------------------------------------------------

namespace {

constexpr int kLibraryVersion = 1;

json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols)
      throw CorruptFile("ragged matrix in library file");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json to_json(const MomentEstimator& est) {
  return {{"n", est.count()}, {"mean", to_json(est.mean())},
          {"second_moment", to_json(est.second_moment())}};
}

MomentEstimator moments_from_json(const json& j) {
  return MomentEstimator::from_state(j.at("n").get<double>(), vector_from_json(j.at("mean")),
                                     matrix_from_json(j.at("second_moment")));
}

json to_json(const FrechetEstimator& est) {
  return {{"n", est.count()},
          {"mean", to_json(Eigen::VectorXd(est.mean().coeffs()))},
          {"second_moment", to_json(Eigen::MatrixXd(est.second_moment()))}};
}

FrechetEstimator frechet_from_json(const json& j) {
  const Eigen::VectorXd mean = vector_from_json(j.at("mean"));
  if (mean.size() != 4) throw CorruptFile("orientation mean must have 4 entries");
  return FrechetEstimator::from_state(j.at("n").get<double>(), Quaternion(Vec4(mean)),
                                      matrix_from_json(j.at("second_moment")));
}

json to_json(const PoseEstimator& est) {
  return {{"position", to_json(est.position)}, {"orientation", to_json(est.orientation)}};
}

PoseEstimator pose_estimator_from_json(const json& j) {
  return {moments_from_json(j.at("position")), frechet_from_json(j.at("orientation"))};
}

json to_json(const TaskModel& task) {
  json slots = json::array();
  for (const ViaSlot& slot : task.viapoints)
    slots.push_back({{"phase", to_json(slot.phase)}, {"pose", to_json(slot.pose)}});
  return {{"start", to_json(task.start)},
          {"goal", to_json(task.goal)},
          {"viapoints", slots},
          {"duration", to_json(task.duration)}};
}

TaskModel task_from_json(const json& j) {
  TaskModel task;
  task.start = pose_estimator_from_json(j.at("start"));
  task.goal = pose_estimator_from_json(j.at("goal"));
  task.duration = moments_from_json(j.at("duration"));
  for (const json& slot : j.at("viapoints"))
    task.viapoints.push_back(
        {moments_from_json(slot.at("phase")), pose_estimator_from_json(slot.at("pose"))});
  return task;
}

json to_json(const BasisConfig& basis) {
  return {{"k", basis.k}, {"centers", basis.centers}, {"width", basis.width},
          {"ridge", basis.ridge}};
}

BasisConfig basis_from_json(const json& j) {
  BasisConfig basis;
  basis.k = j.at("k").get<int>();
  basis.centers = j.at("centers").get<std::vector<double>>();
  basis.width = j.at("width").get<double>();
  basis.ridge = j.at("ridge").get<double>();
  return basis;
}

json to_json(const SolverConfig& solver) {
  return {{"initial_step", solver.initial_step}, {"shrink", solver.shrink},
          {"grow", solver.grow},                 {"max_iterations", solver.max_iterations},
          {"tolerance", solver.tolerance},       {"dist_alpha", solver.dist_alpha}};
}

SolverConfig solver_from_json(const json& j) {
  SolverConfig solver;
  solver.initial_step = j.at("initial_step").get<double>();
  solver.shrink = j.at("shrink").get<double>();
  solver.grow = j.at("grow").get<double>();
  solver.max_iterations = j.at("max_iterations").get<int>();
  solver.tolerance = j.at("tolerance").get<double>();
  solver.dist_alpha = j.at("dist_alpha").get<double>();
  return solver;
}

json to_json(const DetectConfig& detect) {
  return {{"strategy", strategy_name(detect.strategy)},
          {"theta", detect.theta},
          {"alpha", detect.alpha},
          {"max_viapoints", detect.max_viapoints},
          {"prune_epsilon", detect.prune_epsilon},
          {"solver", to_json(detect.solver)}};
}

DetectConfig detect_from_json(const json& j) {
  DetectConfig detect;
  detect.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  detect.theta = j.at("theta").get<double>();
  detect.alpha = j.at("alpha").get<double>();
  detect.max_viapoints = j.at("max_viapoints").get<int>();
  detect.prune_epsilon = j.at("prune_epsilon").get<double>();
  detect.solver = solver_from_json(j.at("solver"));
  return detect;
}

}  // namespace

std::string oplog_path(const std::string& library_path) { return library_path + ".oplog.json"; }

bool file_exists(const std::string& path) { return ::access(path.c_str(), F_OK) == 0; }

void save_library(const Library& library, const std::string& path) {
  json modes = json::object();
  for (const auto& [id, entry] : library.entries()) {
    modes[id] = {{"weights", to_json(entry.model.weights)}, {"task", to_json(entry.task)}};
  }
  json doc = {{"format", "vmp-library"},
              {"version", kLibraryVersion},
              {"config", {{"basis", to_json(library.config().basis)},
                          {"detect", to_json(library.config().detect)}}},
              {"next_id", library.next_id_counter()},
              {"modes", modes}};

  json records = json::array();
  for (const LogRecord& r : library.log())
    records.push_back({{"op", r.op}, {"ids", r.ids}, {"input", r.input}});
  json logdoc = {{"format", "vmp-oplog"}, {"version", kLibraryVersion}, {"records", records}};

  FileLock lock(path);
  write_file_atomic(path, doc.dump(1) + "\n");
  write_file_atomic(oplog_path(path), logdoc.dump(1) + "\n");
}

Library load_library(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw CorruptFile(path + ": " + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "vmp-library")
      throw CorruptFile(path + ": not a library file");
    if (doc.at("version").get<int>() != kLibraryVersion)
      throw VersionMismatch(path + ": unsupported library version " +
                            doc.at("version").dump());

    LibraryConfig config;
    config.basis = basis_from_json(doc.at("config").at("basis"));
    config.detect = detect_from_json(doc.at("config").at("detect"));

    std::map<std::string, LibraryEntry> entries;
    for (const auto& [id, mode] : doc.at("modes").items()) {
      LibraryEntry entry;
      entry.model.basis = config.basis;
      entry.model.id = id;
      entry.model.weights = moments_from_json(mode.at("weights"));
      entry.task = task_from_json(mode.at("task"));
      entries.emplace(id, std::move(entry));
    }

    std::vector<LogRecord> log;
    const std::string lp = oplog_path(path);
    if (file_exists(lp)) {
      json logdoc = json::parse(read_file(lp));
      if (logdoc.at("format").get<std::string>() != "vmp-oplog")
        throw CorruptFile(lp + ": not an operation log");
      if (logdoc.at("version").get<int>() != kLibraryVersion)
        throw VersionMismatch(lp + ": unsupported log version");
      for (const json& r : logdoc.at("records"))
        log.push_back({r.at("op").get<std::string>(), r.at("ids").get<std::vector<std::string>>(),
                       r.at("input").get<std::string>()});
    }

    return Library::restore(std::move(config), std::move(entries), std::move(log),
                            doc.at("next_id").get<std::uint64_t>());
  } catch (const json::exception& e) {
    throw CorruptFile(path + ": " + e.what());
  }
}

}  // namespace vmpl::io
