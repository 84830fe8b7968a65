#pragma once

#include <stdexcept>
#include <string>

namespace sdl {

// Error taxonomy shared by the whole library. The C API and the CLI map
// kinds onto stable numeric codes, so new kinds go at the end.
enum class ErrorKind {
  Config,      // bad hyperparameter, malformed config file, unknown key
  Data,        // bad input data: labels out of range, non-finite features
  Dimension,   // shape mismatch between operands
  Io,          // file missing, bad magic, truncated payload
  Numeric,     // singular system, non-finite intermediate
  Divergence,  // objective increased beyond tolerance in the convex pipeline
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ErrorKind::Config, m) {}
};
struct DataError : Error {
  explicit DataError(const std::string& m) : Error(ErrorKind::Data, m) {}
};
struct DimensionError : Error {
  explicit DimensionError(const std::string& m) : Error(ErrorKind::Dimension, m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorKind::Io, m) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error(ErrorKind::Numeric, m) {}
};
struct DivergenceError : Error {
  explicit DivergenceError(const std::string& m) : Error(ErrorKind::Divergence, m) {}
};

}  // namespace sdl
