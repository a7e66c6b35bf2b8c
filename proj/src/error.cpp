#include "visitlab/error.hpp"

namespace visitlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::structure: return "structure";
    case ErrorKind::non_stationary: return "non-stationary";
    case ErrorKind::shape: return "shape";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::exactness: return "exactness";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::resource: return "resource";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

}  // namespace visitlab
