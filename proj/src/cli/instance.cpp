#include "lipext/cli/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace lipext::cli {

using Json = nlohmann::ordered_json;

InputError::InputError(std::string message, std::string pointer, std::size_t line,
                       std::size_t column)
    : Error(pointer.empty() ? message : pointer + ": " + message),
      message_(std::move(message)),
      pointer_(std::move(pointer)),
      line_(line),
      column_(column) {}

namespace {

std::string at(const std::string& base, const std::string& key) { return base + "/" + key; }
std::string at(const std::string& base, std::size_t index) {
  return base + "/" + std::to_string(index);
}

const Json& require(const Json& obj, const std::string& key, const std::string& ptr) {
  if (!obj.is_object()) throw InputError("expected an object", ptr);
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError("missing required field", at(ptr, key));
  return *it;
}

const Json* optional_field(const Json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number(const Json& v, const std::string& ptr) {
  if (!v.is_number()) throw InputError("expected a number", ptr);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InputError("number is not finite", ptr);
  return d;
}

double positive(const Json& v, const std::string& ptr) {
  const double d = number(v, ptr);
  if (!(d > 0.0)) throw InputError("must be positive", ptr);
  return d;
}

Vector number_array(const Json& v, const std::string& ptr) {
  if (!v.is_array()) throw InputError("expected an array of numbers", ptr);
  Vector out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], at(ptr, i)));
  return out;
}

Matrix number_matrix(const Json& v, const std::string& ptr, std::optional<std::size_t> cols) {
  if (!v.is_array() || v.empty()) throw InputError("expected a nonempty array of rows", ptr);
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < v.size(); ++i) {
    rows.push_back(number_array(v[i], at(ptr, i)));
    const std::size_t want = cols ? *cols : rows.front().size();
    if (rows.back().size() != want) {
      throw InputError("row has " + std::to_string(rows.back().size()) + " entries, expected " +
                           std::to_string(want),
                       at(ptr, i));
    }
  }
  return Matrix::from_rows(rows);
}

// 1-based line and column of the character at `index`.
std::size_t line_of(const std::string& text, std::size_t index, std::size_t& column) {
  index = std::min(index, text.size());
  std::size_t line = 1;
  std::size_t line_start = 0;
  for (std::size_t i = 0; i < index; ++i) {
    if (text[i] == '\n') {
      ++line;
      line_start = i + 1;
    }
  }
  column = index - line_start + 1;
  return line;
}

SpaceSpec parse_space(const Json& v, const std::string& ptr, std::optional<std::size_t> atoms) {
  if (!v.is_object()) throw InputError("expected an object", ptr);
  SpaceSpec s;
  const Json& p = require(v, "p", ptr);
  if (p.is_string()) {
    if (p.get<std::string>() != "inf") throw InputError("p must be a number >= 1 or \"inf\"", at(ptr, "p"));
    s.p = Exponent::infinity();
  } else {
    const double pv = number(p, at(ptr, "p"));
    if (pv < 1.0) throw InputError("p must be >= 1", at(ptr, "p"));
    s.p = Exponent(pv);
  }
  if (const Json* w = optional_field(v, "weights")) {
    s.weights = number_array(*w, at(ptr, "weights"));
    try {
      FiniteMeasureSpace check(*s.weights);
    } catch (const ValidationError& e) {
      throw InputError(e.what(), at(ptr, "weights"));
    }
    atoms = s.weights->size();
  }
  if (const Json* sc = optional_field(v, "scale")) {
    s.scale = number_array(*sc, at(ptr, "scale"));
    if (atoms && s.scale.size() != *atoms)
      throw InputError("scale needs one entry per atom (" + std::to_string(*atoms) + ")",
                       at(ptr, "scale"));
    for (std::size_t i = 0; i < s.scale.size(); ++i)
      if (!(s.scale[i] > 0.0)) throw InputError("scale must be positive", at(at(ptr, "scale"), i));
  }
  return s;
}

std::string subset_key(Subset a, std::size_t n) {
  std::string key(n, '0');
  for (std::size_t i = 0; i < n; ++i)
    if (contains(a, i)) key[i] = '1';
  return key;
}

PhiSpec parse_phi(const Json& v, const std::string& ptr, std::size_t atoms) {
  if (!v.is_object()) throw InputError("expected an object", ptr);
  const Json& kind = require(v, "kind", ptr);
  PhiSpec phi;
  if (kind == "indicator-norm") {
    phi.kind = PhiSpec::Kind::kIndicatorNorm;
    phi.K = positive(require(v, "K", ptr), at(ptr, "K"));
    phi.Z = parse_space(require(v, "Z", ptr), at(ptr, "Z"), atoms);
  } else if (kind == "table") {
    phi.kind = PhiSpec::Kind::kTable;
    if (atoms > kMaxEnumerationAtoms) throw InputError("too many atoms for a phi table", ptr);
    const Json& values = require(v, "values", ptr);
    const std::string vptr = at(ptr, "values");
    if (!values.is_object()) throw InputError("expected an object keyed by subset strings", vptr);
    const std::size_t count = std::size_t{1} << atoms;
    phi.table.assign(count, 0.0);
    std::vector<bool> seen(count, false);
    for (const auto& [key, value] : values.items()) {
      const std::string kptr = at(vptr, key);
      if (key.size() != atoms || key.find_first_not_of("01") != std::string::npos)
        throw InputError("subset keys are strings of " + std::to_string(atoms) + " '0'/'1' characters",
                         kptr);
      Subset a = 0;
      for (std::size_t i = 0; i < atoms; ++i)
        if (key[i] == '1') a |= Subset{1} << i;
      phi.table[a] = number(value, kptr);
      if (phi.table[a] < 0.0) throw InputError("phi must be nonnegative", kptr);
      seen[a] = true;
    }
    for (Subset a = 0; a < count; ++a)
      if (!seen[a]) throw InputError("missing value for subset " + subset_key(a, atoms), vptr);
  } else {
    throw InputError("kind must be \"indicator-norm\" or \"table\"", at(ptr, "kind"));
  }
  return phi;
}

Json space_json(const SpaceSpec& s) {
  Json j;
  if (s.p.is_infinite())
    j["p"] = "inf";
  else
    j["p"] = s.p.value();
  if (s.weights) j["weights"] = *s.weights;
  if (!s.scale.empty()) j["scale"] = s.scale;
  return j;
}

Json phi_json(const PhiSpec& phi, std::size_t atoms) {
  Json j;
  if (phi.kind == PhiSpec::Kind::kIndicatorNorm) {
    j["kind"] = "indicator-norm";
    j["K"] = phi.K;
    j["Z"] = space_json(*phi.Z);
  } else {
    j["kind"] = "table";
    Json values = Json::object();
    for (Subset a = 0; a < phi.table.size(); ++a) values[subset_key(a, atoms)] = phi.table[a];
    j["values"] = values;
  }
  return j;
}

}  // namespace

SampledMap Instance::map() const {
  if (!map_values) throw InputError("this command needs a map", "/map");
  return SampledMap(subset, *map_values);
}

BfsSpec Instance::bfs(const SpaceSpec& spec) const {
  if (spec.weights) return BfsSpec(FiniteMeasureSpace(*spec.weights), spec.p, spec.scale);
  if (!measure) throw InputError("a function space needs the instance measure", "/measure");
  return BfsSpec(*measure, spec.p, spec.scale);
}

SetFunctionTable Instance::phi_table(const PhiSpec& spec, std::size_t limit) const {
  if (!measure) throw InputError("phi needs the instance measure", "/measure");
  if (spec.kind == PhiSpec::Kind::kIndicatorNorm)
    return indicator_norm_set_function(bfs(*spec.Z), spec.K, limit);
  subset_count(measure->size(), limit);
  return SetFunctionTable(*measure, spec.table);
}

Instance parse_instance(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t column = 0;
    const std::size_t line = line_of(text, e.byte == 0 ? 0 : e.byte - 1, column);
    throw InputError("invalid JSON at line " + std::to_string(line) + ", column " +
                         std::to_string(column),
                     "", line, column);
  }
  if (!root.is_object()) throw InputError("instance must be a JSON object", "");

  Instance inst;
  const Json& version = require(root, "version", "");
  if (!version.is_number_integer() || version.get<int>() != 1)
    throw InputError("unsupported schema version (expected 1)", "/version");

  // Metric space.
  const Json& ms = require(root, "metric_space", "");
  Matrix dist = number_matrix(require(ms, "dist", "/metric_space"), "/metric_space/dist", std::nullopt);
  if (dist.rows() != dist.cols()) throw InputError("distance matrix must be square", "/metric_space/dist");
  const std::size_t n = dist.rows();
  const MetricReport report = validate_metric(dist);
  if (!report.ok()) {
    const MetricViolation& v = report.violations.front();
    throw InputError("not a metric: " + v.describe(),
                     "/metric_space/dist/" + std::to_string(v.i) + "/" + std::to_string(v.j));
  }
  std::vector<std::string> labels;
  if (const Json* l = optional_field(ms, "labels")) {
    if (!l->is_array() || l->size() != n)
      throw InputError("labels need one string per point", "/metric_space/labels");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(*l)[i].is_string()) throw InputError("expected a string", at("/metric_space/labels", i));
      labels.push_back((*l)[i].get<std::string>());
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  inst.metric_space = FiniteMetricSpace(labels, dist);

  // Subset S.
  if (const Json* s = optional_field(root, "subset")) {
    if (!s->is_array() || s->empty()) throw InputError("subset must be a nonempty array", "/subset");
    std::vector<bool> seen(n, false);
    for (std::size_t k = 0; k < s->size(); ++k) {
      const Json& e = (*s)[k];
      if (!e.is_number_integer() || e.get<long long>() < 0 ||
          static_cast<std::size_t>(e.get<long long>()) >= n)
        throw InputError("subset entries are point indices below " + std::to_string(n), at("/subset", k));
      const auto idx = static_cast<std::size_t>(e.get<long long>());
      if (seen[idx]) throw InputError("point listed twice", at("/subset", k));
      seen[idx] = true;
      inst.subset.push_back(idx);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) inst.subset.push_back(i);
  }

  // Measure.
  std::optional<std::size_t> atoms;
  if (const Json* m = optional_field(root, "measure")) {
    const Vector w = number_array(require(*m, "weights", "/measure"), "/measure/weights");
    if (w.empty()) throw InputError("at least one atom is required", "/measure/weights");
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] < 0.0) throw InputError("weight must be nonnegative", at("/measure/weights", i));
    if (w.size() > 63) throw InputError("at most 63 atoms are supported", "/measure/weights");
    if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; }))
      throw InputError("at least one weight must be positive", "/measure/weights");
    inst.measure = FiniteMeasureSpace(w);
    atoms = w.size();
  }

  if (const Json* s = optional_field(root, "space")) inst.space = parse_space(*s, "/space", atoms);
  if (const Json* s = optional_field(root, "space2")) inst.space2 = parse_space(*s, "/space2", atoms);

  if (const Json* m = optional_field(root, "map")) {
    const Json& values = require(*m, "values", "/map");
    inst.map_values = number_matrix(values, "/map/values", atoms);
    if (inst.map_values->rows() != inst.subset.size())
      throw InputError("map needs one row per point of the subset (" +
                           std::to_string(inst.subset.size()) + ")",
                       "/map/values");
  }

  if (const Json* p = optional_field(root, "phi")) {
    if (!atoms) throw InputError("phi needs a measure", "/measure");
    inst.phi = parse_phi(*p, "/phi", *atoms);
  }

  if (const Json* c = optional_field(root, "constants")) {
    if (!c->is_object()) throw InputError("expected an object", "/constants");
    for (const char* key : {"K", "K0", "K1"}) {
      if (const Json* v = optional_field(*c, key)) {
        const double d = positive(*v, at("/constants", key));
        if (std::string(key) == "K") inst.constants.K = d;
        if (std::string(key) == "K0") inst.constants.K0 = d;
        if (std::string(key) == "K1") inst.constants.K1 = d;
      }
    }
    if (const Json* v = optional_field(*c, "theta")) {
      const double t = number(*v, "/constants/theta");
      if (!(t > 0.0 && t < 1.0)) throw InputError("theta must lie in (0, 1)", "/constants/theta");
      inst.constants.theta = t;
    }
    if (const Json* v = optional_field(*c, "p_interp")) {
      const double p = number(*v, "/constants/p_interp");
      if (p < 1.0) throw InputError("p_interp must be >= 1 (p < 1 is not a K-method norm)", "/constants/p_interp");
      inst.constants.p_interp = p;
    }
  }

  if (const Json* s = optional_field(root, "seed")) {
    if (!s->is_number_unsigned()) throw InputError("seed must be a nonnegative integer", "/seed");
    inst.seed = s->get<std::uint64_t>();
  }

  if (const Json* t = optional_field(root, "t")) {
    inst.t_values = number_array(*t, "/t");
    for (std::size_t i = 0; i < inst.t_values->size(); ++i)
      if (!((*inst.t_values)[i] > 0.0)) throw InputError("t must be positive", at("/t", i));
  }

  if (const Json* lm = optional_field(root, "linear_map")) {
    LinearMapSpec spec;
    spec.E0 = parse_space(require(*lm, "E0", "/linear_map"), "/linear_map/E0", std::nullopt);
    spec.E1 = parse_space(require(*lm, "E1", "/linear_map"), "/linear_map/E1", std::nullopt);
    if (!spec.E0.weights || !spec.E1.weights || spec.E0.weights->size() != spec.E1.weights->size())
      throw InputError("E0 and E1 need weights of the same length", "/linear_map");
    const std::size_t m = spec.E0.weights->size();
    for (const char* key : {"E0", "E1"}) {
      const SpaceSpec& s = std::string(key) == "E0" ? spec.E0 : spec.E1;
      if (!s.scale.empty() && s.scale.size() != m)
        throw InputError("scale needs one entry per coordinate", at(at("/linear_map", key), "scale"));
    }
    spec.matrix = number_matrix(require(*lm, "matrix", "/linear_map"), "/linear_map/matrix", m);
    if (!atoms || spec.matrix.rows() != *atoms)
      throw InputError("matrix needs one row per atom of the measure", "/linear_map/matrix");
    const Json& tv = require(*lm, "test_vectors", "/linear_map");
    const Matrix tests = number_matrix(tv, "/linear_map/test_vectors", m);
    for (std::size_t i = 0; i < tests.rows(); ++i) {
      const auto row = tests.row(i);
      spec.test_vectors.emplace_back(row.begin(), row.end());
    }
    if (const Json* p = optional_field(*lm, "phi0")) spec.phi0 = parse_phi(*p, "/linear_map/phi0", *atoms);
    if (const Json* p = optional_field(*lm, "phi1")) spec.phi1 = parse_phi(*p, "/linear_map/phi1", *atoms);
    inst.linear_map = std::move(spec);
  }
  return inst;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open instance file " + path, "");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str());
}

std::string dump_instance(const Instance& inst) {
  Json root;
  root["version"] = inst.version;
  root["metric_space"]["labels"] = inst.metric_space.labels();
  root["metric_space"]["dist"] = inst.metric_space.distances().to_rows();
  root["subset"] = inst.subset;
  if (inst.measure) root["measure"]["weights"] = inst.measure->weights();
  if (inst.space) root["space"] = space_json(*inst.space);
  if (inst.space2) root["space2"] = space_json(*inst.space2);
  if (inst.map_values) root["map"]["values"] = inst.map_values->to_rows();
  if (inst.phi) root["phi"] = phi_json(*inst.phi, inst.measure->size());
  Json c = Json::object();
  if (inst.constants.K) c["K"] = *inst.constants.K;
  if (inst.constants.K0) c["K0"] = *inst.constants.K0;
  if (inst.constants.K1) c["K1"] = *inst.constants.K1;
  if (inst.constants.theta) c["theta"] = *inst.constants.theta;
  if (inst.constants.p_interp) c["p_interp"] = *inst.constants.p_interp;
  if (!c.empty()) root["constants"] = c;
  if (inst.seed) root["seed"] = *inst.seed;
  if (inst.t_values) root["t"] = *inst.t_values;
  if (inst.linear_map) {
    const LinearMapSpec& lm = *inst.linear_map;
    Json j;
    j["matrix"] = lm.matrix.to_rows();
    j["E0"] = space_json(lm.E0);
    j["E1"] = space_json(lm.E1);
    j["test_vectors"] = lm.test_vectors;
    if (lm.phi0) j["phi0"] = phi_json(*lm.phi0, inst.measure->size());
    if (lm.phi1) j["phi1"] = phi_json(*lm.phi1, inst.measure->size());
    root["linear_map"] = j;
  }
  return root.dump(2) + "\n";
}

}  // namespace lipext::cli
