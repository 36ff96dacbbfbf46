#include "expocol/config.h"

#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "expocol/errors.h"

namespace expocol {

using nlohmann::json;

std::string_view problem_name(Problem p) {
  switch (p) {
    case Problem::kTestOne:
      return "test_one";
    case Problem::kTestTwo:
      return "test_two";
    case Problem::kPlaneWave:
      return "plane_wave";
    case Problem::kCustom:
      return "custom";
  }
  return "custom";
}

std::filesystem::path ExperimentConfig::reference_cache_dir() const {
  return cache_dir ? *cache_dir : out_dir / "reference_cache";
}

namespace {

// Recursive descent over:
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | '+' unary | atom
//   atom   := number | 'pi' | 'sqrt' '(' expr ')' | '(' expr ')'
class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  double parse() {
    const double v = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    if (!std::isfinite(v)) fail("result is not finite");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("cannot evaluate expression '" + std::string(text_) + "': " + msg);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool consume_word(std::string_view word) {
    skip_space();
    if (text_.substr(pos_, word.size()) == word) {
      const std::size_t end = pos_ + word.size();
      if (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                                 text_[end] == '_')) {
        return false;
      }
      pos_ = end;
      return true;
    }
    return false;
  }

  double expr() {
    double v = term();
    while (true) {
      if (consume('+')) {
        v += term();
      } else if (consume('-')) {
        v -= term();
      } else {
        return v;
      }
    }
  }

  double term() {
    double v = unary();
    while (true) {
      if (consume('*')) {
        v *= unary();
      } else if (consume('/')) {
        v /= unary();
      } else {
        return v;
      }
    }
  }

  double unary() {
    if (consume('-')) return -unary();
    if (consume('+')) return unary();
    return atom();
  }

  double atom() {
    if (consume('(')) {
      const double v = expr();
      if (!consume(')')) fail("missing ')'");
      return v;
    }
    if (consume_word("pi")) return std::numbers::pi;
    if (consume_word("sqrt")) {
      if (!consume('(')) fail("expected '(' after sqrt");
      const double v = expr();
      if (!consume(')')) fail("missing ')'");
      if (v < 0.0) fail("sqrt of a negative number");
      return std::sqrt(v);
    }
    skip_space();
    const char* begin = text_.data() + pos_;
    char* end = nullptr;
    const std::string rest(begin, text_.size() - pos_);
    const double v = std::strtod(rest.c_str(), &end);
    const std::size_t used = static_cast<std::size_t>(end - rest.c_str());
    if (used == 0) fail("expected a number");
    pos_ += used;
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

[[noreturn]] void schema_error(const std::string& field, const std::string& msg) {
  throw ConfigError("config field '" + field + "': " + msg);
}

double number_field(const json& value, const std::string& field) {
  double v = 0.0;
  if (value.is_number()) {
    v = value.get<double>();
  } else if (value.is_string()) {
    try {
      v = evaluate_expression(value.get<std::string>());
    } catch (const ConfigError& e) {
      schema_error(field, e.what());
    }
  } else {
    schema_error(field, "expected a number or an expression string");
  }
  if (!std::isfinite(v)) schema_error(field, "must be finite");
  return v;
}

long integer_field(const json& value, const std::string& field) {
  if (value.is_number_integer()) return value.get<long>();
  if (value.is_number_float()) {
    const double d = value.get<double>();
    if (d == std::floor(d) && std::abs(d) < 1e15) return static_cast<long>(d);
  }
  schema_error(field, "expected an integer");
}

bool bool_field(const json& value, const std::string& field) {
  if (!value.is_boolean()) schema_error(field, "expected true or false");
  return value.get<bool>();
}

std::string string_field(const json& value, const std::string& field) {
  if (!value.is_string()) schema_error(field, "expected a string");
  return value.get<std::string>();
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.contains(it.key())) schema_error(prefix + it.key(), "unknown key");
  }
}

Problem parse_problem(const std::string& s) {
  if (s == "test_one") return Problem::kTestOne;
  if (s == "test_two") return Problem::kTestTwo;
  if (s == "plane_wave") return Problem::kPlaneWave;
  if (s == "custom") return Problem::kCustom;
  schema_error("problem", "expected test_one, test_two, plane_wave or custom, got '" + s + "'");
}

DatumKind parse_datum_kind(const std::string& s) {
  if (s == "cosine") return DatumKind::kCosine;
  if (s == "inverse_sin2") return DatumKind::kInverseSin2;
  if (s == "plane_wave") return DatumKind::kPlaneWave;
  if (s == "constant") return DatumKind::kConstant;
  if (s == "random") return DatumKind::kRandom;
  schema_error("initial.kind",
               "expected cosine, inverse_sin2, plane_wave, constant or random, got '" + s + "'");
}

std::vector<double> default_stepsizes() {
  // 0.1 / 2^i, i = 2..5
  return {0.1 / 4.0, 0.1 / 8.0, 0.1 / 16.0, 0.1 / 32.0};
}

void apply_preset(ExperimentConfig& cfg) {
  switch (cfg.problem) {
    case Problem::kTestOne:
      cfg.lambda = -2.0;
      cfg.grid = {1, 128, 4.0 * std::numbers::sqrt2 * std::numbers::pi};
      cfg.initial = {DatumKind::kCosine, 0.5, 0.025, {1}};
      cfg.methods = {Method::parse("ecm2"), Method::parse("ecm3")};
      cfg.stepsizes = default_stepsizes();
      cfg.t_end = 10.0;
      break;
    case Problem::kTestTwo:
      cfg.lambda = -1.0;
      cfg.grid = {1, 128, 2.0 * std::numbers::pi};
      cfg.initial = {DatumKind::kInverseSin2, 0.0, 0.0, {1}};
      cfg.methods = {Method::parse("ecm2"), Method::parse("ecm3")};
      cfg.stepsizes = default_stepsizes();
      cfg.t_end = 10.0;
      break;
    case Problem::kPlaneWave:
      cfg.lambda = -2.0;
      cfg.grid = {1, 32, 2.0 * std::numbers::pi};
      cfg.initial = {DatumKind::kPlaneWave, 0.0, 0.8, {1}};
      cfg.methods = {Method::parse("ecm2"), Method::parse("ecm3")};
      cfg.stepsizes = default_stepsizes();
      cfg.t_end = 1.0;
      break;
    case Problem::kCustom:
      cfg.lambda = -1.0;
      cfg.grid = {1, 64, 2.0 * std::numbers::pi};
      cfg.methods = {Method::parse("ecm2")};
      cfg.stepsizes = {0.01};
      cfg.t_end = 1.0;
      break;
  }
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.grid.dim < 1) schema_error("grid.d", "must be >= 1");
  if (cfg.grid.n < 4 || cfg.grid.n % 2 != 0) schema_error("grid.n", "must be even and >= 4");
  if (!(cfg.grid.period > 0.0)) schema_error("grid.period", "must be positive");
  if (cfg.methods.empty()) schema_error("methods", "must not be empty");
  if (cfg.stepsizes.empty()) schema_error("stepsizes", "must not be empty");
  for (std::size_t i = 0; i < cfg.stepsizes.size(); ++i) {
    if (!(cfg.stepsizes[i] > 0.0)) schema_error("stepsizes", "entries must be positive");
    if (i > 0 && !(cfg.stepsizes[i] < cfg.stepsizes[i - 1])) {
      schema_error("stepsizes", "must be strictly decreasing");
    }
  }
  if (!(cfg.t_end >= 0.0)) schema_error("t_end", "must be non-negative");
  if (cfg.alpha < 0.0) schema_error("alpha", "must be non-negative");
  if (!(cfg.fp_tol > 0.0)) schema_error("fp_tol", "must be positive");
  if (cfg.fp_max_iter < 1) schema_error("fp_max_iter", "must be >= 1");
  if (cfg.stride && *cfg.stride < 1) schema_error("stride", "must be >= 1");
  if (cfg.jobs < 1) schema_error("jobs", "must be >= 1");
  if (cfg.initial.mode.empty() ||
      cfg.initial.mode.size() > static_cast<std::size_t>(cfg.grid.dim)) {
    schema_error("initial.mode", "needs between 1 and d entries");
  }
  for (int k : cfg.initial.mode) {
    if (k < -cfg.grid.n / 2 || k >= cfg.grid.n / 2) {
      schema_error("initial.mode", "wavenumber outside the grid band");
    }
  }
}

}  // namespace

double evaluate_expression(std::string_view text) { return ExpressionParser(text).parse(); }

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc,
                 {"problem", "lambda", "grid", "initial", "methods", "stepsizes", "t_end",
                  "out_dir", "cache_dir", "alpha", "seed", "fp_tol", "fp_max_iter", "stride",
                  "dealias", "jobs", "plot"},
                 "");

  ExperimentConfig cfg;
  if (doc.contains("problem")) cfg.problem = parse_problem(string_field(doc["problem"], "problem"));
  apply_preset(cfg);

  if (cfg.problem == Problem::kCustom && !doc.contains("initial")) {
    schema_error("initial", "required for the custom problem");
  }

  if (doc.contains("lambda")) cfg.lambda = number_field(doc["lambda"], "lambda");
  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    if (!g.is_object()) schema_error("grid", "expected an object");
    reject_unknown(g, {"d", "n", "period"}, "grid.");
    if (g.contains("d")) cfg.grid.dim = static_cast<int>(integer_field(g["d"], "grid.d"));
    if (g.contains("n")) cfg.grid.n = static_cast<int>(integer_field(g["n"], "grid.n"));
    if (g.contains("period")) cfg.grid.period = number_field(g["period"], "grid.period");
  }
  if (doc.contains("initial")) {
    const json& i = doc["initial"];
    if (!i.is_object()) schema_error("initial", "expected an object");
    reject_unknown(i, {"kind", "base", "amplitude", "mode"}, "initial.");
    if (!i.contains("kind")) schema_error("initial.kind", "required");
    cfg.initial = InitialDatum{};
    cfg.initial.kind = parse_datum_kind(string_field(i["kind"], "initial.kind"));
    if (i.contains("base")) cfg.initial.base = number_field(i["base"], "initial.base");
    if (i.contains("amplitude")) {
      cfg.initial.amplitude = number_field(i["amplitude"], "initial.amplitude");
    }
    if (i.contains("mode")) {
      const json& m = i["mode"];
      cfg.initial.mode.clear();
      if (m.is_array()) {
        for (const auto& e : m) {
          cfg.initial.mode.push_back(static_cast<int>(integer_field(e, "initial.mode")));
        }
      } else {
        cfg.initial.mode.push_back(static_cast<int>(integer_field(m, "initial.mode")));
      }
    }
  }
  if (doc.contains("methods")) {
    const json& m = doc["methods"];
    if (!m.is_array()) schema_error("methods", "expected an array of method names");
    cfg.methods.clear();
    for (const auto& e : m) {
      try {
        cfg.methods.push_back(Method::parse(string_field(e, "methods")));
      } catch (const std::invalid_argument& ex) {
        schema_error("methods", ex.what());
      }
    }
  }
  if (doc.contains("stepsizes")) {
    const json& s = doc["stepsizes"];
    if (!s.is_array()) schema_error("stepsizes", "expected an array");
    cfg.stepsizes.clear();
    for (const auto& e : s) cfg.stepsizes.push_back(number_field(e, "stepsizes"));
  }
  if (doc.contains("t_end")) cfg.t_end = number_field(doc["t_end"], "t_end");
  if (doc.contains("out_dir")) cfg.out_dir = string_field(doc["out_dir"], "out_dir");
  if (doc.contains("cache_dir")) cfg.cache_dir = string_field(doc["cache_dir"], "cache_dir");
  if (doc.contains("alpha")) cfg.alpha = number_field(doc["alpha"], "alpha");
  if (doc.contains("seed")) {
    const long s = integer_field(doc["seed"], "seed");
    if (s < 0) schema_error("seed", "must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (doc.contains("fp_tol")) cfg.fp_tol = number_field(doc["fp_tol"], "fp_tol");
  if (doc.contains("fp_max_iter")) {
    cfg.fp_max_iter = static_cast<int>(integer_field(doc["fp_max_iter"], "fp_max_iter"));
  }
  if (doc.contains("stride")) cfg.stride = integer_field(doc["stride"], "stride");
  if (doc.contains("dealias")) cfg.dealias = bool_field(doc["dealias"], "dealias");
  if (doc.contains("jobs")) cfg.jobs = static_cast<int>(integer_field(doc["jobs"], "jobs"));
  if (doc.contains("plot")) cfg.plot = bool_field(doc["plot"], "plot");

  validate(cfg);
  return cfg;
}

void apply_overrides(json& doc, std::span<const std::string> overrides) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + item + "' is not of the form key=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string raw = item.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
      if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
      if (!node->is_object()) throw ConfigError("override key '" + key + "' crosses a non-object");
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      node = &(*node)[part];
      if (node->is_null()) *node = json::object();
      start = dot + 1;
    }
  }
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::span<const std::string> overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1;
    for (std::size_t i = 0; i + 1 < offset; ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ": JSON parse error: " +
                      e.what());
  }
  apply_overrides(doc, overrides);
  return config_from_json(doc);
}

}  // namespace expocol
