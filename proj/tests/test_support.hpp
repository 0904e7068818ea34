#pragma once

// Shared helpers for the test suites: fixture access, scratch directories and
// a brute-force oracle that recomputes entropies and gains directly from raw
// CSV text without touching the library's parsers or info-theory code.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace testing_support {

inline std::string fixture_path(const std::string& name) { return std::string(PREASSESS_FIXTURE_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Fresh scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("preassess-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Counts-based brute force over a plain comma-separated table whose last
/// column is the label. Quoting is not supported; the fixtures don't use it.
class EnumerationOracle {
 public:
  explicit EnumerationOracle(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      if (header) {
        columns_ = cells;
        header = false;
      } else {
        rows_.push_back(cells);
      }
    }
  }

  static double h(double pass, double fail) {
    const double n = pass + fail;
    double out = 0.0;
    for (double k : {pass, fail}) {
      if (k > 0) out -= (k / n) * std::log2(k / n);
    }
    return out;
  }

  std::pair<int, int> labels() const { return counts_where(-1, ""); }

  double dataset_entropy() const {
    const auto [p, f] = labels();
    return h(p, f);
  }

  double weighted_entropy(const std::string& attribute, const std::string& feature) const {
    const auto [p, f] = counts_where(column(attribute), feature);
    if (p + f == 0) return 0.0;
    return (static_cast<double>(p + f) / static_cast<double>(rows_.size())) * h(p, f);
  }

  double info_gain(const std::string& attribute) const {
    double rest = 0.0;
    for (const auto& v : values(attribute)) rest += weighted_entropy(attribute, v);
    return dataset_entropy() - rest;
  }

  double split_info(const std::string& attribute) const {
    double out = 0.0;
    for (const auto& v : values(attribute)) {
      const auto [p, f] = counts_where(column(attribute), v);
      const double q = static_cast<double>(p + f) / static_cast<double>(rows_.size());
      if (q > 0) out -= q * std::log2(q);
    }
    return out;
  }

  std::set<std::string> values(const std::string& attribute) const {
    std::set<std::string> out;
    const int c = column(attribute);
    for (const auto& r : rows_) out.insert(r[static_cast<std::size_t>(c)]);
    return out;
  }

  std::pair<int, int> counts_where(int col, const std::string& feature) const {
    int p = 0;
    int f = 0;
    for (const auto& r : rows_) {
      if (col >= 0 && r[static_cast<std::size_t>(col)] != feature) continue;
      (r.back() == "Pass" ? p : f) += 1;
    }
    return {p, f};
  }

  std::size_t size() const { return rows_.size(); }

 private:
  int column(const std::string& attribute) const {
    for (std::size_t i = 0; i + 1 < columns_.size(); ++i) {
      if (columns_[i] == attribute) return static_cast<int>(i);
    }
    return -1;
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Fail fraction of a P/F string by character counting.
inline std::pair<std::int64_t, std::int64_t> pf_fail_fraction(const std::string& pf) {
  std::int64_t f = 0;
  for (char c : pf) f += c == 'F';
  return {f, static_cast<std::int64_t>(pf.size())};
}

}  // namespace testing_support
