#pragma once

#include <stdexcept>
#include <string>

namespace densityclust {

enum class ErrorKind {
  parameter,   // bad argument or configuration value
  io,          // file could not be read or written
  data,        // input content is unusable (no data, malformed rows, schema)
  not_found,   // requested cluster id does not exist
  structural,  // inconsistent inputs (dimension mismatch, disconnected region)
  internal,    // broken internal invariant
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Process exit codes used by the command-line tool.
inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parameter: return 1;
    case ErrorKind::io: return 2;
    case ErrorKind::data:
    case ErrorKind::structural:
    case ErrorKind::internal: return 3;
    case ErrorKind::not_found: return 4;
  }
  return 3;
}

}  // namespace densityclust
