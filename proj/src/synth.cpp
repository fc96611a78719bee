#include "vmplib/synth.hpp"

#include <cmath>
#include <random>

#include "vmplib/errors.hpp"

namespace vmpl::synth {

namespace {

double bump(double phi, double center, double sigma) {
  const double d = (phi - center) / sigma;
  return std::exp(-0.5 * d * d);
}

struct Draw {
  std::mt19937_64 rng;
  explicit Draw(std::uint64_t seed) : rng(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }
};

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::Geodesic: return "geodesic";
    case Family::Bump: return "bump";
    case Family::Pouring: return "pouring";
    case Family::BimodalA: return "bimodal-a";
    case Family::BimodalB: return "bimodal-b";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "geodesic") return Family::Geodesic;
  if (name == "bump") return Family::Bump;
  if (name == "pouring") return Family::Pouring;
  if (name == "bimodal-a") return Family::BimodalA;
  if (name == "bimodal-b") return Family::BimodalB;
  throw ParseError("unknown demonstration family: " + name);
}

Demonstration generate(const SynthOptions& options) {
  if (options.samples < 2) throw TooFewSamples("synthetic demonstration needs >= 2 samples");
  // Family id is folded into the seed so paired families differ even when the
  // caller reuses seeds across families.
  Draw draw(options.seed * 6364136223846793005ull + static_cast<std::uint64_t>(options.family) +
            1442695040888963407ull);

  const Vec3 p0(draw.uniform(-0.01, 0.01), draw.uniform(-0.01, 0.01), draw.uniform(-0.01, 0.01));
  const Vec3 p1 = Vec3(0.30, 0.05, 0.10) + Vec3(draw.uniform(-0.01, 0.01),
                                                draw.uniform(-0.01, 0.01),
                                                draw.uniform(-0.01, 0.01));
  const Quaternion q0 =
      Quaternion::from_axis_angle(Vec3(0.0, 0.0, 1.0), draw.uniform(-0.05, 0.05));
  const Quaternion q1 =
      Quaternion::from_axis_angle(Vec3(0.2, 0.3, 1.0), 0.5 + draw.uniform(-0.05, 0.05));
  const Pose start(p0, q0);
  const Pose goal(p1, q1);
  const ViaPointSet base(start, goal);

  // Per-demo shape parameters; the pouring amplitude is the task-relevant
  // variation, the rest is mild jitter.
  const double pour_amp = draw.uniform(0.05, 0.15);
  const double pour_tilt = 1.5 * pour_amp;
  const double bump_amp_z = draw.uniform(0.05, 0.07);
  const double bump_amp_y = draw.uniform(0.02, 0.04);
  const double bimodal_amp = 0.08 + draw.uniform(-0.005, 0.005);
  const double bimodal_twist = 0.25 + draw.uniform(-0.02, 0.02);
  const double duration = 2.0 + draw.uniform(0.0, 1.0);

  Demonstration demo;
  demo.times.resize(static_cast<std::size_t>(options.samples));
  demo.poses.resize(static_cast<std::size_t>(options.samples));
  for (int i = 0; i < options.samples; ++i) {
    const double phi = double(i) / double(options.samples - 1);
    demo.times[static_cast<std::size_t>(i)] = phi * duration;

    Pose pose = elementary(phi, base);
    Vec3 offset = Vec3::Zero();
    Quaternion local = Quaternion::identity();
    switch (options.family) {
      case Family::Geodesic:
        break;
      case Family::Bump:
        offset.z() += bump_amp_z * bump(phi, 0.40, 0.10);
        offset.y() += bump_amp_y * bump(phi, 0.55, 0.12);
        local = Quaternion::from_axis_angle(Vec3(1, 0, 0), 0.15 * bump(phi, 0.5, 0.15));
        break;
      case Family::Pouring: {
        // Asymmetric double bump: dominant dip plus a late shoulder, with the
        // tilt following the same profile (amplitude is the per-demo task
        // variation, as when pouring different amounts).
        const double profile = bump(phi, 0.42, 0.14) + 0.5 * bump(phi, 0.70, 0.10);
        offset.z() -= pour_amp * profile;
        offset.y() += 0.25 * pour_amp * profile;
        local = Quaternion::from_axis_angle(Vec3(1, 0, 0), pour_tilt * profile);
        break;
      }
      case Family::BimodalA:
        offset.z() += bimodal_amp * bump(phi, 0.40, 0.10);
        local = Quaternion::from_axis_angle(Vec3(0, 0, 1), bimodal_twist * bump(phi, 0.40, 0.12));
        break;
      case Family::BimodalB:
        offset.z() -= bimodal_amp * bump(phi, 0.60, 0.10);
        local = Quaternion::from_axis_angle(Vec3(1, 0, 0), -bimodal_twist * bump(phi, 0.60, 0.12));
        break;
    }
    pose.position += offset;
    pose.orientation = (pose.orientation * local).normalized();
    demo.poses[static_cast<std::size_t>(i)] = pose;
  }

  // Canonical hemisphere: first sample toward identity, then sequential.
  if (demo.poses.front().orientation.w() < 0.0)
    for (Pose& p : demo.poses) p.orientation = p.orientation.negated();
  for (std::size_t i = 1; i < demo.poses.size(); ++i)
    demo.poses[i].orientation = demo.poses[i].orientation.aligned_to(demo.poses[i - 1].orientation);

  demo.phases = compute_phases(demo.times);
  return demo;
}

}  // namespace vmpl::synth
