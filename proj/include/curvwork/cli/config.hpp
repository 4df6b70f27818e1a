#pragma once

// Run configuration: JSON document in, typed blocks out. Every validation
// error names the offending JSON pointer.

#include "curvwork/cycles.hpp"
#include "curvwork/geometry.hpp"
#include "curvwork/stochastic.hpp"

#include <json.hpp>

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace curvwork::cli {

using Json = nlohmann::json;

/// Typed access into a JSON object with pointer-style error paths.
class Reader {
 public:
  Reader(const Json& node, std::string path);

  const std::string& path() const { return path_; }
  std::string at(const std::string& key) const { return path_ + "/" + key; }
  bool has(const std::string& key) const;
  Reader child(const std::string& key) const;

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  double positive(const std::string& key) const;
  double positive(const std::string& key, double fallback) const;
  double non_negative(const std::string& key, double fallback) const;
  std::size_t count(const std::string& key, std::size_t fallback, std::size_t minimum) const;
  std::uint64_t unsigned64(const std::string& key) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  stochastic::Vec2 pair(const std::string& key) const;
  stochastic::Vec2 pair(const std::string& key, const stochastic::Vec2& fallback) const;
  std::vector<stochastic::Vec2> pairs(const std::string& key) const;
  /// (min, max, n) triple with max > min and n >= 2.
  std::vector<double> range(const std::string& key) const;

  /// Rejects keys outside `allowed`.
  void allow_only(std::initializer_list<const char*> allowed) const;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  const Json* node_;
  std::string path_;
};

enum class ModelMode { Thermal, Coherent, Generic };

const char* model_mode_name(ModelMode mode);

struct ModelSpec {
  ModelMode mode = ModelMode::Coherent;
  double beta = 1.0;
  bool has_beta = false;
  double gamma_down = 1.0;
  double gamma_up = 0.0;
  double gamma = 1.0;
  bool detailed_balance = false;  // coherent only: p = tanh(beta eps/2) pointwise

  double bias() const { return geometry::bias_from_rates(gamma_down, gamma_up); }
  /// Planar (omega, g) model for line integrals.
  geometry::ControlModel control_model() const;
  /// Curvature field matching the mode; thermal mode gives the baseline.
  geometry::CurvatureField curvature_field() const;
  stochastic::Connection connection() const;
};

struct RunConfig {
  std::string command;
  Json document;
  std::string config_hash;  // FNV-1a 64 of the effective document, hex
  std::optional<std::uint64_t> seed;
  double tolerance = 0.0;   // 0: command default
  unsigned threads = 1;
  std::string out_dir = ".";
  bool plot = true;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  std::optional<unsigned> threads;
  std::optional<std::string> out_dir;
  std::optional<std::string> command;
};

const std::vector<std::string>& known_commands();
bool is_stochastic_command(const std::string& command);

/// Parses JSON text; syntax errors carry line:column of `source_name`.
Json parse_config_text(const std::string& text, const std::string& source_name);
Json load_config_file(const std::string& path);

/// Validates the top level, applies overrides and computes the hash.
RunConfig make_run_config(Json document, const Overrides& overrides);

std::string fnv1a_hex(const std::string& bytes);

ModelSpec parse_model(const Reader& model);
cycles::Protocol parse_protocol(const Reader& protocol);

}  // namespace curvwork::cli
