#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace relearn {

using count_t = std::size_t;

// Error hierarchy. Every named failure mode in the library derives from
// Error so callers can catch one type at the CLI boundary.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& msg) : Error("shape mismatch: " + msg) {}
};

struct NotPositiveDefinite : Error {
  explicit NotPositiveDefinite(const std::string& msg)
      : Error("not positive definite: " + msg) {}
};

struct DegenerateDegree : Error {
  explicit DegenerateDegree(const std::string& msg)
      : Error("degenerate degree: " + msg) {}
};

struct AllFiltered : Error {
  explicit AllFiltered(const std::string& msg) : Error("all filtered: " + msg) {}
};

struct MissingAltitude : Error {
  explicit MissingAltitude(const std::string& msg)
      : Error("missing altitude: " + msg) {}
};

struct IndexOverlap : Error {
  explicit IndexOverlap(const std::string& msg) : Error("index overlap: " + msg) {}
};

struct SpecExceedsNodes : Error {
  explicit SpecExceedsNodes(const std::string& msg)
      : Error("deviation spec exceeds nodes: " + msg) {}
};

struct PartitionInvalid : Error {
  explicit PartitionInvalid(const std::string& msg)
      : Error("invalid partition: " + msg) {}
};

struct SegmentTooShort : Error {
  explicit SegmentTooShort(const std::string& msg)
      : Error("segment too short: " + msg) {}
};

struct NonFiniteGradient : Error {
  explicit NonFiniteGradient(const std::string& msg)
      : Error("non-finite gradient: " + msg) {}
};

struct DegenerateSequence : Error {
  explicit DegenerateSequence(const std::string& msg)
      : Error("degenerate sequence: " + msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error("io error: " + msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error("config error: " + msg) {}
};

}  // namespace relearn
