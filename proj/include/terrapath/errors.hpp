#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace terrapath {

/// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller handed in something outside an operation's domain.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed point-cloud file. Carries the byte offset where parsing stopped.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : InputError(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Schema violation in a JSON document; `path()` is a JSON pointer.
class SchemaError : public InputError {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : InputError(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Bad configuration value; `key()` names the offending key.
class ConfigError : public InputError {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : InputError(key + ": " + what), key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Tolerance expansion hit tol_max without finding terrain under a waypoint.
class NoTerrainFound : public Error {
 public:
  NoTerrainFound(const std::string& what, double x, double y)
      : Error(what), x_(x), y_(y) {}

  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }

 private:
  double x_;
  double y_;
};

class StandoffUnresolved : public Error {
 public:
  using Error::Error;
};

/// Hemisphere expansion hit r_max with no point below the waypoint.
class NoTargetFound : public Error {
 public:
  using Error::Error;
};

class PlanEmpty : public Error {
 public:
  using Error::Error;
};

}  // namespace terrapath
