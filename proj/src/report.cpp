#include "kgen/report.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kgen {

bool RunManifest::all_pass() const {
  for (const auto& s : suites)
    if (!s.pass) return false;
  return true;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_manifest(const RunManifest& m) {
  std::ostringstream os;
  os << "command: " << m.command << "\n";
  os << "version: " << kgen_version << "\n";
  os << "started: " << m.started << "\n";
  os << "finished: " << m.finished << "\n";
  os << "config_path: " << m.config_path << "\n";
  os << "exit_code: " << m.exit_code << "\n";
  os << "status: " << (m.exit_code == 0 ? "pass" : "fail") << "\n";
  if (!m.error.empty()) os << "error: " << m.error << "\n";
  for (const auto& s : m.suites)
    os << "suite." << s.name << ": " << (s.pass ? "pass" : "fail")
       << (s.detail.empty() ? "" : " (" + s.detail + ")") << "\n";
  for (const auto& o : m.outputs) os << "output: " << o << "\n";
  if (!m.config_echo.empty()) {
    os << "config:\n";
    std::istringstream in(m.config_echo);
    std::string line;
    while (std::getline(in, line)) os << "  " << line << "\n";
  }
  return os.str();
}

void write_manifest(const std::string& path, const RunManifest& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path);
  out << format_manifest(m);
}

}  // namespace kgen
