#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipext/core.hpp"

namespace lipext::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// JSON has no infinities; they are written as the strings "inf" / "-inf".
Json number(double v);
Json numbers(std::span<const double> v);
Json matrix(const Matrix& m);
Json check_json(const CheckResult& c);

enum class SuiteStatus { kPassed, kFailed, kPrecondition, kSkipped };
std::string to_string(SuiteStatus s);

struct Suite {
  std::string name;
  SuiteStatus status = SuiteStatus::kPassed;
  /// Why a suite was skipped or refused, with the module's witness.
  std::string reason;
  std::string witness;
  std::vector<CheckResult> checks;
  Json result = Json::object();

  void add(CheckResult c) { checks.push_back(std::move(c)); }
  /// kPassed or kFailed from the checks, unless already refused or skipped.
  void settle();
};

enum class Format { kJson, kCsv };

struct ReportError {
  std::string kind;
  std::string message;
  std::string pointer;
  std::size_t line = 0;
  std::size_t column = 0;
};

struct Report {
  std::string command;
  std::string instance;
  std::optional<std::uint64_t> seed;
  std::vector<Suite> suites;
  std::optional<ReportError> error;
  int exit_code = 0;

  /// Deterministic rendering; timing is appended only when `elapsed_ms` is set.
  std::string render(Format format, std::optional<double> elapsed_ms) const;
};

}  // namespace lipext::cli
