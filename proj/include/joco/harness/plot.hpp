#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "joco/harness/results.hpp"

namespace joco::harness {

/// Best-so-far chart for one problem: one mean line per method over the
/// evaluation index with a +-1 SEM band and a legend. Output depends only on
/// the rows.
std::string render_svg(const std::string& problem, const std::vector<SummaryRow>& rows);

/// Writes <dir>/<problem>.svg for every problem in `rows` and returns the
/// paths in problem order. Throws std::invalid_argument when rows is empty.
std::vector<std::filesystem::path> write_plots(const std::vector<SummaryRow>& rows,
                                               const std::filesystem::path& dir);

}  // namespace joco::harness
