#include "joco/harness/results.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace joco::harness {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  T v{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw MalformedCsv("malformed CSV " + path.string() + ": line " + std::to_string(line) +
                       ": bad number '" + s + "'");
  }
  return v;
}

// Lines of a file with any trailing carriage return removed.
std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedCsv("malformed CSV " + path.string() + ": cannot open");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void check_header(const std::vector<std::string>& lines, const char* header,
                  const std::filesystem::path& path) {
  if (lines.empty() || lines[0] != header) {
    throw MalformedCsv("malformed CSV " + path.string() + ": expected header '" + header + "'");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<ResultRow> history_rows(const std::string& method, const std::string& problem,
                                    std::uint64_t seed, const method::History& h) {
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < h.size(); ++i) {
    rows.push_back({method, problem, seed, i, h.records[i].f, h.best_so_far[i], h.wall_ms[i]});
  }
  return rows;
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.method, a.problem, a.seed, a.iter) <
           std::tie(b.method, b.problem, b.seed, b.iter);
  });
}

std::string result_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultHeader) + "\n";
  for (const auto& r : rows) {
    out += r.method + "," + r.problem + "," + std::to_string(r.seed) + "," +
           std::to_string(r.iter) + "," + format_double(r.f) + "," + format_double(r.best_f) +
           "," + format_double(r.wall_ms) + "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_result_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  write_text(path, result_csv(rows));
}

std::vector<ResultRow> read_result_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  check_header(lines, kResultHeader, path);
  std::vector<ResultRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split(lines[i]);
    if (f.size() != 7) {
      throw MalformedCsv("malformed CSV " + path.string() + ": line " + std::to_string(i + 1) +
                         ": expected 7 fields");
    }
    ResultRow r;
    r.method = f[0];
    r.problem = f[1];
    r.seed = parse_number<std::uint64_t>(f[2], path, i + 1);
    r.iter = parse_number<std::size_t>(f[3], path, i + 1);
    r.f = parse_number<double>(f[4], path, i + 1);
    r.best_f = parse_number<double>(f[5], path, i + 1);
    r.wall_ms = parse_number<double>(f[6], path, i + 1);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<std::filesystem::path> run_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    if (name == kCombinedFile || name == kSummaryFile) continue;
    out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::map<std::tuple<std::string, std::string, std::size_t>, std::vector<double>> groups;
  for (const auto& r : rows) groups[{r.method, r.problem, r.iter}].push_back(r.best_f);
  std::vector<SummaryRow> out;
  for (const auto& [key, v] : groups) {
    const double n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / n;
    double sem = 0.0;
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      sem = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), mean, sem, v.size()});
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const auto& r : rows) {
    out += r.method + "," + r.problem + "," + std::to_string(r.iter) + "," +
           format_double(r.mean) + "," + format_double(r.sem) + "," + std::to_string(r.n) + "\n";
  }
  return out;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  write_text(path, summary_csv(rows));
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  check_header(lines, kSummaryHeader, path);
  std::vector<SummaryRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split(lines[i]);
    if (f.size() != 6) {
      throw MalformedCsv("malformed CSV " + path.string() + ": line " + std::to_string(i + 1) +
                         ": expected 6 fields");
    }
    rows.push_back({f[0], f[1], parse_number<std::size_t>(f[2], path, i + 1),
                    parse_number<double>(f[3], path, i + 1),
                    parse_number<double>(f[4], path, i + 1),
                    parse_number<std::size_t>(f[5], path, i + 1)});
  }
  return rows;
}

}  // namespace joco::harness
