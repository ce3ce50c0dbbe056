#pragma once

#include <stdexcept>
#include <string>

namespace topolearn {

/// Failure classes. The command line tool maps each one to its own exit code.
enum class ErrorKind {
  Config,
  Data,
  Numerical,
  Assumption,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

struct AssumptionViolation : Error {
  explicit AssumptionViolation(const std::string& what) : Error(ErrorKind::Assumption, what) {}
};

}  // namespace topolearn
