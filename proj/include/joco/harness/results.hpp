#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "joco/method/types.hpp"

namespace joco::harness {

inline constexpr const char* kResultHeader = "method,problem,seed,iter,f,best_f,wall_ms";
inline constexpr const char* kSummaryHeader = "method,problem,iter,mean_best_f,sem_best_f,n_seeds";
inline constexpr const char* kCombinedFile = "combined.csv";
inline constexpr const char* kSummaryFile = "summary.csv";
inline constexpr const char* kFailuresFile = "failures.txt";

/// A CSV that cannot be parsed; what() names the file.
class MalformedCsv : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ResultRow {
  std::string method;
  std::string problem;
  std::uint64_t seed = 0;
  std::size_t iter = 0;
  double f = 0.0;
  double best_f = 0.0;
  double wall_ms = 0.0;
};

struct SummaryRow {
  std::string method;
  std::string problem;
  std::size_t iter = 0;
  double mean = 0.0;
  double sem = 0.0;
  std::size_t n = 0;
};

/// Shortest text that parses back to the same double (17 significant digits).
std::string format_double(double v);

std::vector<ResultRow> history_rows(const std::string& method, const std::string& problem,
                                    std::uint64_t seed, const method::History& h);

/// Orders by (method, problem, seed, iter).
void sort_rows(std::vector<ResultRow>& rows);

std::string result_csv(const std::vector<ResultRow>& rows);
void write_result_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
/// Throws MalformedCsv on a bad header, field count or number.
std::vector<ResultRow> read_result_csv(const std::filesystem::path& path);

/// Per-run CSVs in `dir`: every *.csv except the combined and summary files,
/// in name order.
std::vector<std::filesystem::path> run_files(const std::filesystem::path& dir);

/// Mean and standard error (sample std with ddof 1 over sqrt(n); 0 when n = 1)
/// of best_f per (method, problem, iter), sorted by that key.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

std::string summary_csv(const std::vector<SummaryRow>& rows);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

/// Writes `text` to `path` in binary mode; throws std::runtime_error on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace joco::harness
