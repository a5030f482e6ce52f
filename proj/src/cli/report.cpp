#include "lipext/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lipext::cli {

Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json numbers(std::span<const double> v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

Json matrix(const Matrix& m) {
  Json out = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) out.push_back(numbers(m.row(i)));
  return out;
}

Json check_json(const CheckResult& c) {
  Json j;
  j["name"] = c.name;
  j["bound"] = number(c.bound);
  j["achieved"] = number(c.achieved);
  j["holds"] = c.holds;
  if (!c.holds) j["witness"] = c.witness;
  return j;
}

std::string to_string(SuiteStatus s) {
  switch (s) {
    case SuiteStatus::kPassed: return "passed";
    case SuiteStatus::kFailed: return "failed";
    case SuiteStatus::kPrecondition: return "precondition";
    case SuiteStatus::kSkipped: return "skipped";
  }
  return "unknown";
}

void Suite::settle() {
  if (status == SuiteStatus::kPrecondition || status == SuiteStatus::kSkipped) return;
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.holds; });
  if (!ok) status = SuiteStatus::kFailed;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double v) {
  const Json j = number(v);
  return j.is_string() ? j.get<std::string>() : j.dump();
}

}  // namespace

std::string Report::render(Format format, std::optional<double> elapsed_ms) const {
  if (format == Format::kCsv) {
    std::ostringstream os;
    os << "suite,status,check,bound,achieved,holds,witness\n";
    for (const Suite& s : suites) {
      if (s.checks.empty()) {
        os << csv_field(s.name) << ',' << to_string(s.status) << ",,,,," << csv_field(s.witness)
           << '\n';
      }
      for (const CheckResult& c : s.checks) {
        os << csv_field(s.name) << ',' << to_string(s.status) << ',' << csv_field(c.name) << ','
           << csv_number(c.bound) << ',' << csv_number(c.achieved) << ','
           << (c.holds ? "true" : "false") << ',' << csv_field(c.witness) << '\n';
      }
    }
    if (error) os << "error," << csv_field(error->kind) << ",,,,," << csv_field(error->message) << '\n';
    if (elapsed_ms) os << "timing,,elapsed_ms,," << csv_number(*elapsed_ms) << ",,\n";
    return os.str();
  }

  Json root;
  root["tool"] = "lipext";
  root["version"] = kToolVersion;
  root["command"] = command;
  root["instance"] = instance;
  if (seed) root["seed"] = *seed;
  root["exit_code"] = exit_code;
  Json js = Json::array();
  for (const Suite& s : suites) {
    Json j;
    j["name"] = s.name;
    j["status"] = to_string(s.status);
    if (!s.reason.empty()) j["reason"] = s.reason;
    if (!s.witness.empty()) j["witness"] = s.witness;
    Json checks = Json::array();
    for (const CheckResult& c : s.checks) checks.push_back(check_json(c));
    j["checks"] = checks;
    if (!s.result.empty()) j["result"] = s.result;
    js.push_back(j);
  }
  root["suites"] = js;
  if (error) {
    Json e;
    e["kind"] = error->kind;
    e["message"] = error->message;
    if (!error->pointer.empty()) e["pointer"] = error->pointer;
    if (error->line) {
      e["line"] = error->line;
      e["column"] = error->column;
    }
    root["error"] = e;
  }
  if (elapsed_ms) root["timing"]["elapsed_ms"] = number(*elapsed_ms);
  return root.dump(2) + "\n";
}

}  // namespace lipext::cli
