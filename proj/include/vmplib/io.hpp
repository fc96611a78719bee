#ifndef VMPLIB_IO_HPP
#define VMPLIB_IO_HPP

#include <string>
#include <vector>

#include "vmplib/library.hpp"
#include "vmplib/vmp.hpp"

// File formats. Trajectories are CSV rows t,x,y,z,qw,qx,qy,qz; libraries are
// versioned JSON documents with deterministic key order and value-lossless
// doubles, so save -> load -> save is byte-identical. The operation log is a
// sidecar file (<library>.oplog.json): it grows with usage while the library
// file itself stays demonstration-count independent.

namespace vmpl::io {

// Shortest representation that parses back to the identical double.
std::string format_double(double value);

// Ingest: validates monotone time and quaternion norms (tolerance 1e-3,
// renormalized after the check), canonicalizes the quaternion signs, derives
// phases. Throws ParseError/NonMonotoneTime/BadQuaternion with row numbers.
Demonstration read_trajectory(const std::string& path);
Demonstration parse_trajectory(const std::string& text, const std::string& origin);

std::string trajectory_csv(const std::vector<double>& times, const std::vector<Pose>& poses);
void write_trajectory(const std::string& path, const std::vector<double>& times,
                      const std::vector<Pose>& poses);

std::string oplog_path(const std::string& library_path);

// Atomic (write-temp-then-rename) and advisory-locked; writes the sidecar
// log alongside.
void save_library(const Library& library, const std::string& path);
Library load_library(const std::string& path);

bool file_exists(const std::string& path);

}  // namespace vmpl::io

#endif
