#include "smocklab/error.hpp"

namespace smocklab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSpec: return "invalid-spec";
    case ErrorKind::Conflict: return "conflict";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::UnsupportedVersion: return "unsupported-version";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Input: return "input";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace smocklab
