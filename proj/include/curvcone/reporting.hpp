#pragma once

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace curvcone {

/// 17 significant digits: round-trip exact for doubles; machine reports.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// 6 significant digits; human summaries.
inline std::string fmt_g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// FNV-1a 64-bit. Integrity checksum for the run manifest (not cryptographic).
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view s) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(s)));
  return buf;
}

/// Ordered key-value lines ("key = value"), the machine report format.
class KvWriter {
 public:
  void add(std::string key, std::string value) {
    items_.emplace_back(std::move(key), std::move(value));
  }
  void add(std::string key, const char* value) { add(std::move(key), std::string(value)); }
  void add(std::string key, double value) { add(std::move(key), fmt_g17(value)); }
  void add(std::string key, long value) { add(std::move(key), std::to_string(value)); }
  void add(std::string key, int value) { add(std::move(key), std::to_string(value)); }
  void add(std::string key, std::uint64_t value) { add(std::move(key), std::to_string(value)); }
  void add(std::string key, bool value) { add(std::move(key), value ? "true" : "false"); }

  std::string str() const {
    std::string out;
    for (const auto& [k, v] : items_) {
      out += k;
      out += " = ";
      out += v;
      out += "\n";
    }
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

/// One confirmed failure of a checked property; violations are data, and a
/// report passes exactly when it has none.
struct Violation {
  long sample_id = -1;
  double time = 0.0;
  double margin = 0.0;
  double magnitude = 0.0;
  std::string note;
};

/// Per-(n, params, ...) slice of an experiment, as ordered key-value pairs.
struct ReportCell {
  std::string label;
  std::vector<std::pair<std::string, std::string>> values;

  void add(std::string key, std::string value) {
    values.emplace_back(std::move(key), std::move(value));
  }
  void add(std::string key, const char* value) { add(std::move(key), std::string(value)); }
  void add(std::string key, double v) { add(std::move(key), fmt_g17(v)); }
  void add(std::string key, long v) { add(std::move(key), std::to_string(v)); }
  void add(std::string key, int v) { add(std::move(key), std::to_string(v)); }
};

struct ExperimentReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;  // effective settings
  std::vector<ReportCell> cells;
  std::vector<Violation> violations;
  long samples_total = 0;
  long skipped_total = 0;
  double wall_seconds = 0.0;  // human summary only; kept out of the machine report

  bool pass() const { return violations.empty(); }

  /// Canonical machine report: a pure function of (config, seed), byte-stable
  /// across runs and worker counts.
  std::string to_report_text() const {
    KvWriter kv;
    kv.add("report.format", "curvcone/1");
    kv.add("experiment", experiment);
    kv.add("seed", seed);
    for (const auto& [k, v] : config) kv.add("config." + k, v);
    kv.add("samples.total", samples_total);
    kv.add("samples.skipped", skipped_total);
    kv.add("cells.count", static_cast<long>(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string p = "cell." + std::to_string(i) + ".";
      kv.add(p + "label", cells[i].label);
      for (const auto& [k, v] : cells[i].values) kv.add(p + k, v);
    }
    kv.add("violations.count", static_cast<long>(violations.size()));
    for (std::size_t i = 0; i < violations.size(); ++i) {
      const std::string p = "violation." + std::to_string(i) + ".";
      kv.add(p + "sample", violations[i].sample_id);
      kv.add(p + "time", violations[i].time);
      kv.add(p + "margin", violations[i].margin);
      kv.add(p + "magnitude", violations[i].magnitude);
      kv.add(p + "note", violations[i].note);
    }
    kv.add("verdict", pass() ? "pass" : "fail");
    return kv.str();
  }

  std::string to_summary_text() const {
    std::ostringstream os;
    os << experiment << ": " << (pass() ? "pass" : "FAIL") << " (" << samples_total
       << " samples, " << skipped_total << " skipped, " << violations.size()
       << " violations, " << fmt_g6(wall_seconds) << " s)\n";
    for (std::size_t i = 0; i < violations.size() && i < 10; ++i)
      os << "  violation sample=" << violations[i].sample_id
         << " t=" << fmt_g6(violations[i].time)
         << " margin=" << fmt_g6(violations[i].margin) << " " << violations[i].note
         << "\n";
    if (violations.size() > 10)
      os << "  ... " << (violations.size() - 10) << " more\n";
    return os.str();
  }
};

}  // namespace curvcone
