#pragma once

#include <string>
#include <vector>

namespace kgen {

inline constexpr const char* kgen_version = "0.1.0";

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_echo;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;
  std::vector<SuiteResult> suites;
  int exit_code = 0;
  std::string error;

  void add(const SuiteResult& s) { suites.push_back(s); }
  bool all_pass() const;
};

// UTC, ISO 8601
std::string utc_timestamp();

// key: value lines; the config echo is indented under "config:".
std::string format_manifest(const RunManifest& m);
void write_manifest(const std::string& path, const RunManifest& m);

}  // namespace kgen
