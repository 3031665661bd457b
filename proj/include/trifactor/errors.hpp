#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trifactor {

enum class ErrorKind {
  Index,     // out-of-range exporter/importer/period index
  Numeric,   // non-finite input, rank deficiency, non-convergence
  Contract,  // caller violated a documented precondition
  Config,    // k_max or other settings incompatible with the data
  Domain,    // argument outside a function's mathematical domain
  Data,      // malformed or unbalanced input files
  Io,        // filesystem failures
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` says which family of
/// failure occurred so callers (the CLI in particular) can map it to an exit
/// code without a catch ladder.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Same kind, message prefixed with `context: `.
  Error with_context(std::string_view context) const {
    return Error(kind_, std::string(context) + ": " + what());
  }

 private:
  ErrorKind kind_;
};

}  // namespace trifactor
