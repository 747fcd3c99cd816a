#include "joco/harness/runner.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

namespace joco::harness {
namespace {

struct Task {
  baselines::MethodSpec spec;
  std::string label;
  std::uint64_t seed;
};

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad seed list entry: '" + std::string(s) + "'");
  }
  return v;
}

method::TrainConfig train_for(const RunConfig& c, baselines::Method m) {
  method::TrainConfig t = c.train;
  if (c.n_sample) {
    t.n_sample = *c.n_sample;
  } else if (m == baselines::Method::kVanillaBo) {
    t.n_sample = baselines::kVanillaSamples;
  }
  return t;
}

}  // namespace

void RunConfig::validate() const {
  const auto names = problems::problem_names();
  if (std::find(names.begin(), names.end(), problem) == names.end()) {
    throw std::invalid_argument("unknown problem: " + problem);
  }
  if (methods.empty()) throw std::invalid_argument("no method given");
  if (budget == 0) throw std::invalid_argument("budget must be positive");
  if (seeds.empty()) throw std::invalid_argument("no seeds given");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw std::invalid_argument("seeds must be distinct");
  }
  if (n_sample && *n_sample == 0) throw std::invalid_argument("n-sample must be positive");
  train.validate();
  for (const auto& m : methods) {
    if (m.name != baselines::Method::kRandom && budget < train.n_init(budget) + 1) {
      throw std::invalid_argument("budget " + std::to_string(budget) +
                                  " leaves no model-guided evaluations");
    }
  }
}

std::string method_label(const baselines::MethodSpec& spec) {
  std::string s(baselines::method_name(spec.name));
  if (spec.name != baselines::Method::kJoco) return s;
  const method::AblationFlags& f = spec.flags;
  if (!f.joint_training) s += "-no-joint-training";
  if (!f.update_models) s += "-no-updates";
  if (!f.use_trust_region) s += "-no-trust-region";
  if (!f.outcome_uncertainty) s += "-no-outcome-uncertainty";
  if (!f.reward_uncertainty) s += "-no-reward-uncertainty";
  if (f.acquisition == method::Acquisition::kMcEi) s += "-ei";
  return s;
}

std::string run_file_name(const std::string& label, const std::string& problem,
                          std::uint64_t seed) {
  return label + "__" + problem + "__seed" + std::to_string(seed) + ".csv";
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view item(text.data() + start, comma - start);
    const std::size_t dash = item.find('-');
    if (dash == std::string_view::npos) {
      out.push_back(parse_u64(item));
    } else {
      const std::uint64_t lo = parse_u64(item.substr(0, dash));
      const std::uint64_t hi = parse_u64(item.substr(dash + 1));
      if (hi < lo) throw std::invalid_argument("bad seed range: '" + std::string(item) + "'");
      for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    }
    start = comma + 1;
  }
  if (std::set<std::uint64_t>(out.begin(), out.end()).size() != out.size()) {
    throw std::invalid_argument("seeds must be distinct");
  }
  return out;
}

RunReport execute(const RunConfig& config, const RunCallback& on_done) {
  config.validate();
  std::filesystem::create_directories(config.out_dir);

  std::vector<Task> tasks;
  for (const auto& spec : config.methods) {
    const std::string label = config.label.empty() ? method_label(spec) : config.label;
    for (std::uint64_t seed : config.seeds) tasks.push_back({spec, label, seed});
  }

  RunReport report;
  report.files.resize(tasks.size());
  std::vector<std::optional<RunFailure>> failures(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex callback_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      const auto problem = problems::make_problem(config.problem);
      problems::CountingProblem counted(*problem, config.budget);
      const method::History h = baselines::run_method(
          t.spec, counted, config.budget, train_for(config, t.spec.name), t.seed);
      report.files[i] = config.out_dir / run_file_name(t.label, config.problem, t.seed);
      write_result_csv(report.files[i], history_rows(t.label, config.problem, t.seed, h));
      if (!h.error.empty()) failures[i] = RunFailure{t.label, config.problem, t.seed, h.error};
      if (on_done) {
        std::lock_guard lock(callback_mutex);
        on_done(t.label, t.seed, h);
      }
    }
  };

  std::size_t jobs = config.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                      : config.jobs;
  jobs = std::min(jobs, tasks.size());
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (auto& f : failures)
    if (f) report.failures.push_back(std::move(*f));
  if (!report.failures.empty()) {
    std::ofstream out(config.out_dir / kFailuresFile, std::ios::binary | std::ios::app);
    for (const auto& f : report.failures) {
      out << f.label << "," << f.problem << ",seed " << f.seed << ": " << f.error << "\n";
    }
  }
  combine(config.out_dir);
  return report;
}

std::vector<ResultRow> combine(const std::filesystem::path& dir) {
  std::vector<ResultRow> rows;
  for (const auto& p : run_files(dir)) {
    auto part = read_result_csv(p);
    rows.insert(rows.end(), std::make_move_iterator(part.begin()),
                std::make_move_iterator(part.end()));
  }
  sort_rows(rows);
  write_result_csv(dir / kCombinedFile, rows);
  return rows;
}

}  // namespace joco::harness
