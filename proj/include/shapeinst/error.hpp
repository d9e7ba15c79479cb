#pragma once

#include <stdexcept>
#include <string>

namespace shapeinst {

enum class ErrorKind {
  structural,          // shape/size mismatch, ragged input, bad indices
  degenerate_geometry, // collinear points, zero-length contour
  no_intersection,     // plane misses the mesh
  rank,                // regression ran out of rank
  out_of_range,        // index outside the valid domain
  spec,                // invalid generator/config parameters
  parse,               // malformed input file
  io,                  // file system failure
  numerical,           // zero variance, non-finite values
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by SIMPLS when the deflated cross-product vanishes. component() is
/// one-based, matching how component counts are quoted everywhere else.
class RankError : public Error {
 public:
  RankError(int component, const std::string& what)
      : Error(ErrorKind::rank, what), component_(component) {}

  int component() const { return component_; }

 private:
  int component_;
};

}  // namespace shapeinst
