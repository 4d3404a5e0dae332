#pragma once

// Output headers, "key = value" config files and partition sidecars.

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "zml/error.hpp"
#include "zml/mollifier.hpp"

namespace zml {

inline constexpr const char* kVersion = "0.1.0";

using ParamList = std::vector<std::pair<std::string, std::string>>;

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// "# zml <version> <command> key=value ..."
inline std::string output_header(const std::string& command, const ParamList& params) {
  std::string line = std::string("# zml ") + kVersion + " " + command;
  for (const auto& [k, v] : params) line += " " + k + "=" + v;
  return line;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Parses "key = value" lines; '#' starts a comment, blank lines are skipped.
inline ParamList parse_config(std::istream& in) {
  ParamList out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DomainError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw DomainError("config line " + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

inline ParamList read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config file " + path);
  return parse_config(in);
}

inline nlohmann::json partition_to_json(const HarperPartition& p) {
  nlohmann::json j;
  j["k"] = p.k;
  j["T"] = p.T;
  j["log_T"] = p.log_T;
  j["toy"] = p.toy;
  if (!p.toy) {
    j["M"] = p.M;
    j["base"] = p.base;
  }
  j["J"] = p.J;
  j["alphas"] = p.alphas;
  j["ells"] = p.ells;
  j["length_exponent"] = p.toy ? nlohmann::json(nullptr) : nlohmann::json(p.length_exponent());
  auto& iv = j["intervals"] = nlohmann::json::array();
  for (const auto& i : p.intervals) iv.push_back({{"lo", i.lo}, {"hi", i.hi}, {"j", i.index}});
  return j;
}

/// Rebuilds a partition from its sidecar: geometric partitions from (k, T, M,
/// base), toy partitions from the stored intervals and lengths.
inline HarperPartition partition_from_json(const nlohmann::json& j) {
  try {
    const double k = j.at("k").get<double>();
    if (!j.value("toy", false)) {
      const double log_T = j.contains("log_T") ? j.at("log_T").get<double>()
                                               : std::log(j.at("T").get<double>());
      return build_partition_log(k, log_T, j.at("M").get<double>(), j.value("base", 20.0));
    }
    const double T = j.at("T").get<double>();
    std::vector<PrimeInterval> intervals;
    for (const auto& i : j.at("intervals")) {
      intervals.push_back({i.at("lo").get<double>(), i.at("hi").get<double>(), 0});
    }
    return toy_partition(k, T, std::move(intervals), j.at("ells").get<std::vector<int>>());
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("partition json: ") + e.what());
  }
}

inline HarperPartition read_partition_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open partition file " + path);
  try {
    return partition_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError("partition file " + path + ": " + e.what());
  }
}

}  // namespace zml
