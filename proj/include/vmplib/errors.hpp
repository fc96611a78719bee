#ifndef VMPLIB_ERRORS_HPP
#define VMPLIB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vmpl {

// Exit-code classes used by the CLI: 2 usage, 3 data, 4 numerical.
enum class ErrorClass { Usage = 2, Data = 3, Numerical = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const { return cls_; }

 private:
  ErrorClass cls_;
};

struct AntipodalError : Error {
  explicit AntipodalError(const std::string& what = "log map undefined for antipodal quaternions")
      : Error(ErrorClass::Numerical, what) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what) : Error(ErrorClass::Data, what) {}
};

struct UndefinedError : Error {
  explicit UndefinedError(const std::string& what) : Error(ErrorClass::Data, what) {}
};

struct NonMonotoneTime : Error {
  explicit NonMonotoneTime(const std::string& what) : Error(ErrorClass::Data, what) {}
};

struct RankDeficient : Error {
  explicit RankDeficient(const std::string& what) : Error(ErrorClass::Numerical, what) {}
};

struct TooFewSamples : Error {
  explicit TooFewSamples(const std::string& what) : Error(ErrorClass::Data, what) {}
};

struct LengthMismatch : Error {
  explicit LengthMismatch(const std::string& what) : Error(ErrorClass::Data, what) {}
};

struct InvalidViaPoint : Error {
  explicit InvalidViaPoint(const std::string& what) : Error(ErrorClass::Data, what) {}
};

struct NoDeviation : Error {
  explicit NoDeviation(const std::string& what = "all per-sample distances are zero")
      : Error(ErrorClass::Numerical, what) {}
};

struct NoConvergence : Error {
  explicit NoConvergence(const std::string& what) : Error(ErrorClass::Numerical, what) {}
};

struct UnknownId : Error {
  explicit UnknownId(const std::string& id) : Error(ErrorClass::Data, "unknown mode id: " + id) {}
};

struct BasisMismatch : Error {
  explicit BasisMismatch(const std::string& what) : Error(ErrorClass::Data, what) {}
};

struct NoCandidates : Error {
  explicit NoCandidates(const std::string& what = "no candidate modes given")
      : Error(ErrorClass::Data, what) {}
};

struct ModeCountMismatch : Error {
  explicit ModeCountMismatch(const std::string& what) : Error(ErrorClass::Data, what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(ErrorClass::Data, what) {}
};

struct BadQuaternion : Error {
  explicit BadQuaternion(const std::string& what) : Error(ErrorClass::Data, what) {}
};

struct VersionMismatch : Error {
  explicit VersionMismatch(const std::string& what) : Error(ErrorClass::Data, what) {}
};

struct CorruptFile : Error {
  explicit CorruptFile(const std::string& what) : Error(ErrorClass::Data, what) {}
};

}  // namespace vmpl

#endif
