#include "curvwork/cli/config.hpp"

#include "curvwork/errors.hpp"
#include "curvwork/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace curvwork::cli {
namespace {

using stochastic::Vec2;

std::string type_name(const Json& j) { return j.type_name(); }

}  // namespace

Reader::Reader(const Json& node, std::string path) : node_(&node), path_(std::move(path)) {
  if (!node.is_object()) {
    throw ValidationError("config " + (path_.empty() ? std::string("/") : path_) + ": expected an object, found " +
                          type_name(node));
  }
}

void Reader::fail(const std::string& key, const std::string& message) const {
  throw ValidationError("config " + at(key) + ": " + message);
}

bool Reader::has(const std::string& key) const { return node_->contains(key) && !(*node_)[key].is_null(); }

Reader Reader::child(const std::string& key) const {
  if (!has(key)) fail(key, "required block is missing");
  const Json& j = (*node_)[key];
  if (!j.is_object()) fail(key, "expected an object, found " + type_name(j));
  return Reader(j, at(key));
}

double Reader::number(const std::string& key) const {
  if (!has(key)) fail(key, "required number is missing");
  const Json& j = (*node_)[key];
  if (!j.is_number()) fail(key, "expected a number, found " + type_name(j));
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(key, "must be finite");
  return v;
}

double Reader::number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

double Reader::positive(const std::string& key) const {
  const double v = number(key);
  if (!(v > 0.0)) fail(key, "must be positive");
  return v;
}

double Reader::positive(const std::string& key, double fallback) const {
  return has(key) ? positive(key) : fallback;
}

double Reader::non_negative(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const double v = number(key);
  if (!(v >= 0.0)) fail(key, "must be >= 0");
  return v;
}

std::size_t Reader::count(const std::string& key, std::size_t fallback, std::size_t minimum) const {
  if (!has(key)) return fallback;
  const Json& j = (*node_)[key];
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(key, "expected an integer, found " + type_name(j));
  const auto v = j.get<long long>();
  if (v < static_cast<long long>(minimum)) fail(key, "must be >= " + std::to_string(minimum));
  return static_cast<std::size_t>(v);
}

std::uint64_t Reader::unsigned64(const std::string& key) const {
  if (!has(key)) fail(key, "required integer is missing");
  const Json& j = (*node_)[key];
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<long long>() < 0) fail(key, "must be a non-negative 64-bit integer");
    return static_cast<std::uint64_t>(j.get<long long>());
  }
  fail(key, "expected an integer, found " + type_name(j));
}

bool Reader::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const Json& j = (*node_)[key];
  if (!j.is_boolean()) fail(key, "expected true or false, found " + type_name(j));
  return j.get<bool>();
}

std::string Reader::string(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  const Json& j = (*node_)[key];
  if (!j.is_string()) fail(key, "expected a string, found " + type_name(j));
  return j.get<std::string>();
}

std::vector<double> Reader::numbers(const std::string& key) const {
  if (!has(key)) fail(key, "required array is missing");
  const Json& j = (*node_)[key];
  if (!j.is_array()) fail(key, "expected an array, found " + type_name(j));
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) fail(key + "/" + std::to_string(k), "expected a number, found " + type_name(j[k]));
    out.push_back(j[k].get<double>());
    if (!std::isfinite(out.back())) fail(key + "/" + std::to_string(k), "must be finite");
  }
  return out;
}

Vec2 Reader::pair(const std::string& key) const {
  const auto v = numbers(key);
  if (v.size() != 2) fail(key, "expected two numbers");
  return Vec2(v[0], v[1]);
}

std::vector<Vec2> Reader::pairs(const std::string& key) const {
  if (!has(key)) fail(key, "required array is missing");
  const Json& j = (*node_)[key];
  if (!j.is_array()) fail(key, "expected an array of [x, y] pairs, found " + type_name(j));
  std::vector<Vec2> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string where = key + "/" + std::to_string(k);
    if (!j[k].is_array() || j[k].size() != 2 || !j[k][0].is_number() || !j[k][1].is_number()) {
      fail(where, "expected [x, y]");
    }
    out.emplace_back(j[k][0].get<double>(), j[k][1].get<double>());
    if (!out.back().allFinite()) fail(where, "must be finite");
  }
  return out;
}

Vec2 Reader::pair(const std::string& key, const Vec2& fallback) const { return has(key) ? pair(key) : fallback; }

std::vector<double> Reader::range(const std::string& key) const {
  const auto v = numbers(key);
  if (v.size() != 3) fail(key, "expected [min, max, count]");
  if (!(v[1] > v[0])) fail(key, "max must exceed min");
  if (v[2] < 2.0 || v[2] != std::floor(v[2]) || v[2] > 1e6) fail(key, "count must be an integer in [2, 1e6]");
  const auto n = static_cast<std::size_t>(v[2]);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = v[0] + (v[1] - v[0]) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return out;
}

void Reader::allow_only(std::initializer_list<const char*> allowed) const {
  for (const auto& [key, value] : node_->items()) {
    (void)value;
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!ok) fail(key, "unknown key");
  }
}

const char* model_mode_name(ModelMode mode) {
  switch (mode) {
    case ModelMode::Thermal: return "thermal";
    case ModelMode::Coherent: return "coherent";
    case ModelMode::Generic: return "generic";
  }
  return "unknown";
}

geometry::ControlModel ModelSpec::control_model() const {
  switch (mode) {
    case ModelMode::Thermal:
      return geometry::thermal_qubit(beta);
    case ModelMode::Coherent:
      if (detailed_balance) {
        throw ValidationError("config /model: line integrals need fixed rates (detailed_balance gives surface data only)");
      }
      return geometry::fixed_basis_qubit(gamma_down, gamma_up, geometry::StationaryMode::AnalyticFixedBasis);
    case ModelMode::Generic:
      return geometry::fixed_basis_qubit(gamma_down, gamma_up, geometry::StationaryMode::NullSpace);
  }
  throw ValidationError("config /model: unknown mode");
}

geometry::CurvatureField ModelSpec::curvature_field() const {
  switch (mode) {
    case ModelMode::Thermal:
      return geometry::CurvatureField::thermal_baseline(beta);
    case ModelMode::Coherent:
      if (detailed_balance) return geometry::CurvatureField::coherent_detailed_balance(gamma, beta);
      return geometry::CurvatureField::coherent(gamma_down + gamma_up, bias());
    case ModelMode::Generic:
      return geometry::CurvatureField::finite_difference(
          std::make_shared<const geometry::ControlModel>(control_model()), 0, 1, geometry::Coords::Zero(2));
  }
  throw ValidationError("config /model: unknown mode");
}

stochastic::Connection ModelSpec::connection() const {
  switch (mode) {
    case ModelMode::Thermal:
      return stochastic::thermal_connection(beta);
    case ModelMode::Coherent:
      if (detailed_balance) throw ValidationError("config /model: a connection needs fixed rates");
      return stochastic::coherent_connection(gamma_down, gamma_up);
    case ModelMode::Generic: {
      auto model = std::make_shared<const geometry::ControlModel>(control_model());
      return [model](const Vec2& l) -> Vec2 {
        geometry::Coords c(2);
        c << l.x(), l.y();
        const auto a = geometry::work_one_form(*model, c).components;
        return Vec2(a(0), a(1));
      };
    }
  }
  throw ValidationError("config /model: unknown mode");
}

ModelSpec parse_model(const Reader& m) {
  m.allow_only({"mode", "beta", "temperature", "gamma_down", "gamma_up", "gamma", "p", "detailed_balance"});
  const std::string mode = m.string("mode", "");
  ModelSpec s;
  if (mode == "thermal") {
    s.mode = ModelMode::Thermal;
  } else if (mode == "coherent") {
    s.mode = ModelMode::Coherent;
  } else if (mode == "generic") {
    s.mode = ModelMode::Generic;
  } else {
    m.fail("mode", "must be one of thermal, coherent, generic");
  }
  if (m.has("beta") && m.has("temperature")) m.fail("temperature", "give beta or temperature, not both");
  if (m.has("beta")) {
    s.beta = m.positive("beta");
    s.has_beta = true;
  } else if (m.has("temperature")) {
    s.beta = 1.0 / m.positive("temperature");
    s.has_beta = true;
  }

  if (s.mode == ModelMode::Thermal) {
    for (const char* k : {"gamma_down", "gamma_up", "gamma", "p", "detailed_balance"}) {
      if (m.has(k)) m.fail(k, "not used by the thermal mode");
    }
    if (!s.has_beta) m.fail("beta", "thermal mode needs beta or temperature");
    return s;
  }

  const bool rates = m.has("gamma_down") || m.has("gamma_up");
  const bool gamma_p = m.has("p");
  s.detailed_balance = m.boolean("detailed_balance", false);
  const int chosen = int(rates) + int(gamma_p) + int(s.detailed_balance);
  if (chosen != 1) {
    m.fail("mode", "give exactly one of (gamma_down, gamma_up), (gamma, p) or (gamma, beta, detailed_balance)");
  }
  if (rates) {
    if (m.has("gamma")) m.fail("gamma", "not used with explicit gamma_down/gamma_up");
    s.gamma_down = m.non_negative("gamma_down", 0.0);
    s.gamma_up = m.non_negative("gamma_up", 0.0);
    if (!(s.gamma_down + s.gamma_up > 0.0)) m.fail("gamma_down", "total rate must be positive");
  } else if (gamma_p) {
    s.gamma = m.positive("gamma");
    const double p = m.number("p");
    if (!(p >= -1.0 && p <= 1.0)) m.fail("p", "must lie in [-1, 1]");
    const auto r = geometry::rate_pair_from_p(s.gamma, p);
    s.gamma_down = r.gamma_down;
    s.gamma_up = r.gamma_up;
  } else {
    if (s.mode == ModelMode::Generic) m.fail("detailed_balance", "only available in coherent mode");
    s.gamma = m.positive("gamma");
    if (!s.has_beta) m.fail("beta", "detailed_balance needs beta or temperature");
  }
  s.gamma = s.detailed_balance ? s.gamma : s.gamma_down + s.gamma_up;
  return s;
}

cycles::Protocol parse_protocol(const Reader& p) {
  const std::string type = p.string("type", "");
  cycles::Protocol out;
  if (type == "circle") {
    p.allow_only({"type", "center", "radius", "reversed"});
    const Vec2 c = p.pair("center");
    out = cycles::Protocol::circle(c.x(), c.y(), p.positive("radius"));
  } else if (type == "ellipse") {
    p.allow_only({"type", "center", "a", "b", "reversed"});
    const Vec2 c = p.pair("center");
    out = cycles::Protocol::offset_ellipse(c.x(), c.y(), p.positive("a"), p.positive("b"));
  } else if (type == "polygon") {
    p.allow_only({"type", "vertices", "reversed"});
    std::vector<geometry::Coords> vertices;
    for (const Vec2& v : p.pairs("vertices")) {
      geometry::Coords c(2);
      c << v.x(), v.y();
      vertices.push_back(c);
    }
    if (vertices.size() < 3) p.fail("vertices", "need at least three vertices");
    out = cycles::Protocol::piecewise_linear(std::move(vertices), true);
  } else if (type == "temperature") {
    p.allow_only({"type", "center", "a", "b", "t0", "delta_t", "phi", "reversed"});
    const Vec2 c = p.pair("center");
    out = cycles::Protocol::temperature_modulated(c.x(), c.y(), p.non_negative("a", 0.0), p.non_negative("b", 0.0),
                                                  p.positive("t0"), p.number("delta_t", 0.0), p.number("phi", 0.0));
  } else {
    p.fail("type", "must be one of circle, ellipse, polygon, temperature");
  }
  if (p.boolean("reversed", false)) out = out.reversed();
  return out;
}

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> commands = {"curvature-map", "cycle-work",   "radius-sweep",
                                                    "phase-sweep",   "eta-map",      "sde-ensemble",
                                                    "fp-solve",      "jarzynski",    "selfcheck"};
  return commands;
}

bool is_stochastic_command(const std::string& command) {
  return command == "sde-ensemble" || command == "jarzynski";
}

Json parse_config_text(const std::string& text, const std::string& source_name) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t k = 0; k < limit; ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    if (const auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw ValidationError(source_name + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
  }
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

RunConfig make_run_config(Json document, const Overrides& overrides) {
  if (!document.is_object()) throw ValidationError("config /: expected an object");
  if (overrides.command) {
    if (document.contains("command") && document["command"].is_string() &&
        document["command"].get<std::string>() != *overrides.command) {
      throw ValidationError("config /command: '" + document["command"].get<std::string>() +
                            "' conflicts with the command line '" + *overrides.command + "'");
    }
    document["command"] = *overrides.command;
  }
  const Reader top(document, "");
  top.allow_only({"command", "description", "model", "protocol", "grid", "sweep", "sde", "connection", "ensemble",
                  "fp", "path", "numeric", "output"});
  RunConfig cfg;
  cfg.command = top.string("command", "");
  const auto& cmds = known_commands();
  if (std::find(cmds.begin(), cmds.end(), cfg.command) == cmds.end()) {
    top.fail("command", cfg.command.empty() ? "required string is missing" : "unknown command '" + cfg.command + "'");
  }
  if (!document.contains("numeric")) document["numeric"] = Json::object();
  if (overrides.seed) document["numeric"]["seed"] = *overrides.seed;
  if (overrides.tolerance) {
    if (!(*overrides.tolerance > 0.0) || !std::isfinite(*overrides.tolerance)) {
      throw ValidationError("--tolerance must be a positive number");
    }
    document["numeric"]["tolerance"] = *overrides.tolerance;
  }
  const Reader numeric(document["numeric"], "/numeric");
  numeric.allow_only({"seed", "tolerance", "threads", "nodes", "radial", "angular", "first_law_steps", "h"});
  if (numeric.has("seed")) cfg.seed = numeric.unsigned64("seed");
  cfg.tolerance = numeric.positive("tolerance", 0.0);
  cfg.threads = static_cast<unsigned>(numeric.count("threads", default_thread_count(), 1));
  if (overrides.threads) {
    if (*overrides.threads < 1) throw ValidationError("--threads must be >= 1");
    cfg.threads = *overrides.threads;
  }
  if (document.contains("output")) {
    const Reader output(document["output"], "/output");
    output.allow_only({"dir", "plot"});
    cfg.out_dir = output.string("dir", ".");
    cfg.plot = output.boolean("plot", true);
  }
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
  if (is_stochastic_command(cfg.command) && !cfg.seed) {
    numeric.fail("seed", "stochastic commands need a seed (config or --seed)");
  }

  // Thread count and output location do not change results.
  Json hashed = document;
  hashed.erase("output");
  hashed["numeric"].erase("threads");
  cfg.config_hash = fnv1a_hex(hashed.dump());
  cfg.document = std::move(document);
  return cfg;
}

}  // namespace curvwork::cli
