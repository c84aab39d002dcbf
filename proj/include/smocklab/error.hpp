#pragma once

#include <stdexcept>
#include <string>

namespace smocklab {

enum class ErrorKind {
  InvalidSpec,
  Conflict,
  NotFound,
  Schema,
  UnsupportedVersion,
  Degenerate,
  Input,
  Solver,
  Io,
};

const char* to_string(ErrorKind kind);

/// Library-wide exception. `where` carries a JSON pointer for schema errors and
/// a pipeline stage tag for errors propagated out of full_pipeline.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string where = {})
      : std::runtime_error(message), kind_(kind), where_(std::move(where)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& where() const { return where_; }

 private:
  ErrorKind kind_;
  std::string where_;
};

}  // namespace smocklab
