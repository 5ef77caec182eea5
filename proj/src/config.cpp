#include "bmol/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace bmol {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

// flattened key -> (value, source line)
using KeyMap = std::map<std::string, Entry>;

void flatten_json(const nlohmann::json& j, const std::string& prefix,
                  KeyMap& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      flatten_json(it.value(), key, out);
    }
    return;
  }
  std::string value;
  if (j.is_string())
    value = j.get<std::string>();
  else if (j.is_array()) {
    std::ostringstream ss;
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) ss << ",";
      if (j[i].is_string())
        ss << j[i].get<std::string>();
      else
        ss << j[i].dump();
    }
    value = ss.str();
  } else {
    value = j.dump();
  }
  out[prefix] = {value, 0};
}

KeyMap parse_keys(const std::string& text) {
  KeyMap keys;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("config: JSON parse error: ") +
                                  e.what());
    }
    flatten_json(j, "", keys);
    return keys;
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    keys[key] = {value, lineno};
  }
  return keys;
}

[[noreturn]] void bad_value(const std::string& key, const Entry& e,
                            const std::string& why) {
  std::string where =
      e.line > 0 ? " (line " + std::to_string(e.line) + ")" : "";
  throw std::invalid_argument("config key '" + key + "'" + where + ": " + why);
}

class Reader {
 public:
  explicit Reader(KeyMap keys) : keys_(std::move(keys)) {}

  bool has(const std::string& key) const { return keys_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) {
    auto it = keys_.find(key);
    if (it == keys_.end()) return fallback;
    used_.insert(key);
    return it->second.value;
  }

  double number(const std::string& key, double fallback) {
    auto it = keys_.find(key);
    if (it == keys_.end()) return fallback;
    used_.insert(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second.value, &pos);
      if (pos != it->second.value.size())
        bad_value(key, it->second, "not a number");
      return v;
    } catch (const std::invalid_argument&) {
      bad_value(key, it->second, "not a number");
    } catch (const std::out_of_range&) {
      bad_value(key, it->second, "out of range");
    }
  }

  long integer(const std::string& key, long fallback) {
    auto it = keys_.find(key);
    if (it == keys_.end()) return fallback;
    const double v = number(key, 0.0);
    const long n = static_cast<long>(v);
    if (static_cast<double>(n) != v) bad_value(key, it->second, "not an integer");
    return n;
  }

  const Entry* entry(const std::string& key) const {
    auto it = keys_.find(key);
    return it == keys_.end() ? nullptr : &it->second;
  }

  void mark_used(const std::string& key) { used_.insert(key); }

  void reject_unknown() const {
    for (const auto& [key, e] : keys_) {
      if (used_.count(key)) continue;
      std::string where =
          e.line > 0 ? " (line " + std::to_string(e.line) + ")" : "";
      throw std::invalid_argument("config: unknown key '" + key + "'" + where);
    }
  }

 private:
  KeyMap keys_;
  std::set<std::string> used_;
};

FunctionSpec read_function(Reader& r, const std::string& prefix) {
  FunctionSpec spec;
  spec.name = r.str(prefix + ".name", spec.name);
  spec.scale = r.number(prefix + ".scale", spec.scale);
  spec.center = static_cast<int>(r.integer(prefix + ".center", spec.center));
  spec.value = r.number(prefix + ".value", spec.value);
  spec.seed = static_cast<std::uint64_t>(r.integer(prefix + ".seed", 1));
  spec.path = r.str(prefix + ".file", spec.path);
  const auto names = known_function_names();
  if (std::find(names.begin(), names.end(), spec.name) == names.end()) {
    const Entry* e = r.entry(prefix + ".name");
    bad_value(prefix + ".name", e ? *e : Entry{},
              "unknown generator '" + spec.name + "'");
  }
  return spec;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  Reader r(parse_keys(text));
  RunConfig c;

  if (!r.has("space.side"))
    throw std::invalid_argument("config: missing required key 'space.side'");
  c.space_side = static_cast<int>(r.integer("space.side", 0));
  c.space_dim = static_cast<int>(r.integer("space.dim", c.space_dim));
  const std::string boundary = r.str("space.boundary", "reflecting");
  try {
    c.space_boundary = boundary_from_string(boundary);
  } catch (const std::invalid_argument& e) {
    const Entry* en = r.entry("space.boundary");
    bad_value("space.boundary", en ? *en : Entry{}, e.what());
  }

  const std::string kind = r.str("operator.kind", "laplacian");
  try {
    c.operator_kind = operator_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    const Entry* en = r.entry("operator.kind");
    bad_value("operator.kind", en ? *en : Entry{}, e.what());
  }
  c.operator_potential = r.number("operator.potential", c.operator_potential);
  c.operator_potential_file =
      r.str("operator.potential_file", c.operator_potential_file);
  c.operator_lambda_b = r.number("operator.lambda_b", c.operator_lambda_b);

  // either a single function block or function.list = name,name,...
  if (r.has("function.list")) {
    for (const std::string& name : split_list(r.str("function.list", ""))) {
      FunctionSpec spec;
      spec.name = name;
      const auto names = known_function_names();
      if (std::find(names.begin(), names.end(), name) == names.end())
        bad_value("function.list", *r.entry("function.list"),
                  "unknown generator '" + name + "'");
      c.functions.push_back(spec);
    }
    r.mark_used("function.list");
  } else if (r.has("function.name") || r.has("function.scale") ||
             r.has("function.file")) {
    c.functions.push_back(read_function(r, "function"));
  }
  if (c.functions.empty()) c.functions.push_back(FunctionSpec{});

  const std::string pipelines = r.str("pipeline.run", "all");
  const std::set<std::string> known = {"jn", "gj", "decompose", "carleson",
                                       "hardy"};
  if (pipelines == "all") {
    c.pipelines = known;
  } else {
    for (const std::string& p : split_list(pipelines)) {
      if (!known.count(p))
        bad_value("pipeline.run", *r.entry("pipeline.run"),
                  "unknown pipeline '" + p + "'");
      c.pipelines.insert(p);
    }
  }

  c.lattices = static_cast<int>(r.integer("lattices.count", c.lattices));
  c.seed = static_cast<std::uint64_t>(r.integer("seed", 1));
  c.theta = r.number("theta", c.theta);
  c.eps_factor = r.number("eps.factor", c.eps_factor);
  c.c0 = r.number("c0", c.c0);
  c.radii_per_octave =
      static_cast<int>(r.integer("balls.radii_per_octave", c.radii_per_octave));
  if (r.has("lambda.multipliers")) {
    c.lambda_multipliers.clear();
    for (const std::string& item :
         split_list(r.str("lambda.multipliers", "")))
      c.lambda_multipliers.push_back(std::stod(item));
  }
  c.max_iter = static_cast<int>(r.integer("iterate.max_iter", c.max_iter));
  c.rho_target = r.number("iterate.rho_target", c.rho_target);

  r.reject_unknown();
  validate_config(c);
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const RunConfig& c) {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
  };
  if (c.space_dim != 1 && c.space_dim != 2) fail("space.dim must be 1 or 2");
  if (c.space_side < 2) fail("space.side must be >= 2");
  const std::int64_t total = c.space_dim == 1
                                 ? c.space_side
                                 : static_cast<std::int64_t>(c.space_side) *
                                       c.space_side;
  if (total > 65536) fail("space.side^dim exceeds 65536 points");
  if (c.operator_kind == OperatorKind::schrodinger && c.operator_potential < 0)
    fail("operator.potential must be >= 0");
  if (c.operator_kind == OperatorKind::bessel && c.operator_lambda_b <= 0)
    fail("operator.lambda_b must be > 0");
  if (c.lattices < 1) fail("lattices.count must be >= 1");
  if (c.theta <= 0.0 || c.theta >= 1.0) fail("theta must be in (0,1)");
  if (c.eps_factor <= 1.0) fail("eps.factor must be > 1");
  if (c.c0 <= 0.0) fail("c0 must be > 0");
  if (c.radii_per_octave < 1) fail("balls.radii_per_octave must be >= 1");
  if (c.lambda_multipliers.empty()) fail("lambda.multipliers must be nonempty");
  for (double m : c.lambda_multipliers)
    if (m <= 0.0) fail("lambda.multipliers must be positive");
  if (c.max_iter < 1) fail("iterate.max_iter must be >= 1");
  if (c.rho_target <= 0.0 || c.rho_target >= 1.0)
    fail("iterate.rho_target must be in (0,1)");
}

}  // namespace bmol
