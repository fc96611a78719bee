#ifndef VMPLIB_SYNTH_HPP
#define VMPLIB_SYNTH_HPP

#include <cstdint>
#include <string>

#include "vmplib/vmp.hpp"

// Seeded synthetic demonstrations on a desk-scale workspace (meters). All
// families share the same start/goal distribution and differ in the shape of
// the deviation from the start-goal geodesic, so family membership is a
// weight-space property.

namespace vmpl::synth {

enum class Family {
  Geodesic,   // exactly the start-goal geodesic; zero shape modulation
  Bump,       // one smooth positional bump plus a mild orientation wobble
  Pouring,    // pronounced mid-trajectory dip with a correlated tilt
  BimodalA,   // bump up early plus positive twist
  BimodalB,   // bump down late plus opposite tilt
};

std::string family_name(Family f);
Family family_from_string(const std::string& name);

struct SynthOptions {
  Family family = Family::Pouring;
  std::uint64_t seed = 0;
  int samples = 200;
};

Demonstration generate(const SynthOptions& options);

}  // namespace vmpl::synth

#endif
