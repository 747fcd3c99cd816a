#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "joco/baselines/baselines.hpp"
#include "joco/harness/results.hpp"

namespace joco::harness {

struct RunConfig {
  std::string problem;
  std::vector<baselines::MethodSpec> methods;
  std::size_t budget = 0;
  std::vector<std::uint64_t> seeds;
  method::TrainConfig train;
  /// Candidates per acquisition step; unset means 1024 for JoCo and TuRBO and
  /// 4096 for vanilla BO.
  std::optional<std::size_t> n_sample;
  std::filesystem::path out_dir;
  std::size_t jobs = 1;
  /// Method column value; empty means method_label(spec).
  std::string label;

  /// Throws std::invalid_argument naming the first problem found.
  void validate() const;
};

/// Method name, plus one suffix per non-default JoCo switch
/// (e.g. "joco-no-updates", "joco-ei").
std::string method_label(const baselines::MethodSpec& spec);

/// "<label>__<problem>__seed<seed>.csv"
std::string run_file_name(const std::string& label, const std::string& problem,
                          std::uint64_t seed);

struct RunFailure {
  std::string label;
  std::string problem;
  std::uint64_t seed = 0;
  std::string error;
};

struct RunReport {
  std::vector<std::filesystem::path> files;
  std::vector<RunFailure> failures;
  bool ok() const { return failures.empty(); }
};

/// Called once per finished run, from the worker thread that ran it.
using RunCallback = std::function<void(const std::string& label, std::uint64_t seed,
                                       const method::History& h)>;

/// Parses "1,2,5-8" into {1, 2, 5, 6, 7, 8}. Throws std::invalid_argument on
/// malformed input or repeated seeds.
std::vector<std::uint64_t> parse_seeds(const std::string& text);

/// Runs every (method, seed) pair on a pool of config.jobs workers, writes one
/// CSV per run, appends failures to failures.txt, then rebuilds combined.csv
/// from all run files in the directory.
RunReport execute(const RunConfig& config, const RunCallback& on_done = {});

/// Concatenation of every run file under `dir`, sorted; written to
/// combined.csv.
std::vector<ResultRow> combine(const std::filesystem::path& dir);

}  // namespace joco::harness
