#pragma once

// Command-line front end: decompose, simulate and select.
//
// Exit codes: 0 success, 1 data or numeric failure, 2 usage error. Every
// error is written to the error stream as one line of JSON.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace trifactor {

struct RunConfig {
  std::size_t k_max = 8;
  std::optional<double> omega_override;
  double confidence_level = 0.95;
  bool standardize = false;
  std::filesystem::path output_dir = ".";
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;  // 0 = all hardware threads
  bool allow_self_pairs = false;

  /// Throws Config when k_max < 1, the level is outside (0, 1) or the omega
  /// override is not a positive finite number.
  void validate() const;
};

/// Seed used by `simulate` when none is given.
inline constexpr std::uint64_t kDefaultSeed = 12345;

/// `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace trifactor
