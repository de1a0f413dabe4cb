#pragma once

#include <stdexcept>
#include <string>

namespace curvem {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate or inconsistent geometry (zero tangents, coincident endpoints, ...).
class GeometryError : public Error {
  using Error::Error;
};

/// Topologically invalid mesh or mesh that violates a quality requirement.
class MeshError : public Error {
  using Error::Error;
};

/// Argument outside the domain of a function (e.g. curve parameter out of range).
class DomainError : public Error {
  using Error::Error;
};

/// Invalid run configuration or input file.
class ConfigError : public Error {
  using Error::Error;
};

/// Problem data could not be evaluated.
class DataError : public Error {
  using Error::Error;
};

/// Operation called outside its contract (programming error on the caller side).
class ContractError : public Error {
  using Error::Error;
};

/// Broken internal invariant; indicates a bug or numerical breakdown.
class InternalError : public Error {
  using Error::Error;
};

/// Factorization met a non-positive pivot.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& what, long pivot) : Error(what), pivot_(pivot) {}
  long pivot() const noexcept { return pivot_; }

 private:
  long pivot_;
};

}  // namespace curvem
