#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lipext/cli/instance.hpp"
#include "lipext/cli/report.hpp"

namespace lipext::cli {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kPrecondition = 2;
inline constexpr int kUsage = 64;
inline constexpr int kData = 65;
}  // namespace exit_code

struct Options {
  std::string command;
  std::string instance_path;
  std::optional<std::string> out;
  /// Overrides every check tolerance (defaults: 1e-9 exact, 1e-6 optimized).
  std::optional<double> tolerance;
  std::size_t max_atoms = 12;
  Format format = Format::kJson;
  std::optional<std::uint64_t> seed;
  bool timing = true;
  /// Extension commands write the extended map back out as an instance here.
  std::optional<std::string> emit_instance;
};

const std::vector<std::string>& command_names();

/// Runs one command on a loaded instance. Data errors propagate as
/// exceptions; everything else ends up in the report and its exit code.
Report execute(const Options& options, const Instance& instance,
               std::optional<Instance>* emitted = nullptr);

/// Full command line: argument parsing, loading, execution, output.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lipext::cli
