#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mftg/core/error.hpp"

namespace mftg::cli {

using nlohmann::json;

/// Typed, range-checked access to a scenario's "params" object. Every failure
/// names the offending field.
class Params {
 public:
  explicit Params(json j, std::string where = "params") : j_(std::move(j)), where_(std::move(where)) {
    if (j_.is_null()) j_ = json::object();
    if (!j_.is_object()) fail(where_, "must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }
  double num(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number()) fail(key, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "must be finite");
    return x;
  }

  double positive(const std::string& key, double fallback) const {
    const double x = num(key, fallback);
    if (!(x > 0.0)) fail(key, "must be positive");
    return x;
  }
  double nonneg(const std::string& key, double fallback) const {
    const double x = num(key, fallback);
    if (x < 0.0) fail(key, "must be nonnegative");
    return x;
  }
  double in_range(const std::string& key, double fallback, double lo, double hi) const {
    const double x = num(key, fallback);
    if (x < lo || x > hi) fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return x;
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t lo = 0,
                    std::size_t hi = std::size_t(1) << 40) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail(key, "must be a nonnegative integer");
    const auto x = v.get<std::size_t>();
    if (x < lo || x > hi) fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return x;
  }

  std::string str(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }

  std::vector<double> nums(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_array()) fail(key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) fail(key, "must contain only finite numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<Params> objects(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_array()) fail(key, "must be an array of objects");
    std::vector<Params> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], where_ + "." + key + "[" + std::to_string(i) + "]");
    return out;
  }

  Params object(const std::string& key) const { return Params(has(key) ? at(key) : json::object(), where_ + "." + key); }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw Error(Errc::ConfigInvalid, where_ + "." + key + ": " + msg);
  }

 private:
  const json& at(const std::string& key) const {
    if (!has(key)) fail(key, "is required");
    return j_.at(key);
  }

  json j_;
  std::string where_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct ScenarioConfig {
  std::string scenario;
  json params = json::object();
  std::uint64_t seed = 0;
  std::string output = "out";
  std::string format = "csv";
  std::string raw;  // file bytes, for the manifest hash
};

inline ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::ConfigInvalid, "config must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (k != "scenario" && k != "params" && k != "seed" && k != "output" && k != "format")
      throw Error(Errc::ConfigInvalid, "unknown top-level field '" + k + "'");
  ScenarioConfig c;
  c.raw = text;
  if (!j.contains("scenario") || !j["scenario"].is_string())
    throw Error(Errc::ConfigInvalid, "scenario: required string field");
  c.scenario = j["scenario"].get<std::string>();
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw Error(Errc::ConfigInvalid, "params: must be an object");
    c.params = j["params"];
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw Error(Errc::ConfigInvalid, "seed: must be a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw Error(Errc::ConfigInvalid, "output: must be a string");
    c.output = j["output"].get<std::string>();
  }
  if (j.contains("format")) {
    if (!j["format"].is_string()) throw Error(Errc::ConfigInvalid, "format: must be a string");
    c.format = j["format"].get<std::string>();
  }
  if (c.format != "csv" && c.format != "json") throw Error(Errc::ConfigInvalid, "format: must be csv or json");
  return c;
}

}  // namespace mftg::cli
