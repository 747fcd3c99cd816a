#include "joco/harness/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "joco/harness/plot.hpp"
#include "joco/harness/runner.hpp"

namespace joco::harness {
namespace {

struct RunFlags {
  std::string problem;
  std::string methods = "joco";
  std::size_t budget = 0;
  std::string seeds = "1";
  std::string out;
  std::size_t jobs = 0;
  std::string config;
  bool no_joint = false;
  bool no_updates = false;
  bool no_tr = false;
  bool no_outcome = false;
  bool no_reward = false;
  std::string acquisition = "ts";
  double lr = 0.01;
  std::size_t nb = 20;
  std::size_t epochs_update = 1;
  std::size_t n_sample = 0;
  std::string variants;
};

class BadName : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string default_out() {
  const char* env = std::getenv("JOCO_RESULTS_DIR");
  return env && *env ? env : "results";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Flags from a key = value file, skipping keys already given on the command
// line so the command line wins.
std::vector<std::string> config_args(const std::string& path,
                                     const std::vector<std::string>& given) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  std::vector<std::string> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(n) + ": expected key = value");
    }
    const std::string key = "--" + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const bool on_cli = std::any_of(given.begin(), given.end(), [&](const std::string& a) {
      return a == key || a.rfind(key + "=", 0) == 0;
    });
    if (on_cli) continue;
    if (value == "true") {
      out.push_back(key);
    } else if (value != "false") {
      out.push_back(key);
      out.push_back(value);
    }
  }
  return out;
}

void add_common(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--problem", f.problem, "rosenbrock, langermann, environmental or rover")
      ->required();
  cmd->add_option("--budget", f.budget, "Evaluations per run")->required();
  cmd->add_option("--seeds", f.seeds, "Seed list, e.g. 1,2,5-8");
  cmd->add_option("--out", f.out, "Result directory (default $JOCO_RESULTS_DIR or results)");
  cmd->add_option("--jobs", f.jobs, "Parallel runs (default: available cores)");
  cmd->add_option("--config", f.config, "key = value file of flags");
  cmd->add_option("--lr", f.lr, "Adam learning rate");
  cmd->add_option("--nb", f.nb, "Records per model update");
  cmd->add_option("--epochs-update", f.epochs_update, "Epochs per model update");
  cmd->add_option("--n-sample", f.n_sample,
                  "Candidates per step (default 1024; 4096 for vanilla_bo)");
}

void add_toggles(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--method", f.methods, "joco, random, vanilla_bo, turbo (comma list)");
  cmd->add_flag("--no-joint-training", f.no_joint);
  cmd->add_flag("--no-updates", f.no_updates);
  cmd->add_flag("--no-trust-region", f.no_tr);
  cmd->add_flag("--no-outcome-uncertainty", f.no_outcome);
  cmd->add_flag("--no-reward-uncertainty", f.no_reward);
  cmd->add_option("--acquisition", f.acquisition, "ts or ei")
      ->check(CLI::IsMember({"ts", "ei"}));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

RunConfig base_config(const RunFlags& f) {
  RunConfig c;
  c.problem = f.problem;
  const auto names = problems::problem_names();
  if (std::find(names.begin(), names.end(), c.problem) == names.end()) {
    throw BadName("unknown problem: " + c.problem);
  }
  c.budget = f.budget;
  c.seeds = parse_seeds(f.seeds);
  c.train.learning_rate = f.lr;
  c.train.n_b = f.nb;
  c.train.epochs_update = f.epochs_update;
  if (f.n_sample > 0) c.n_sample = f.n_sample;
  c.out_dir = f.out.empty() ? default_out() : f.out;
  c.jobs = f.jobs;
  return c;
}

method::AblationFlags flags_of(const RunFlags& f) {
  method::AblationFlags a;
  a.joint_training = !f.no_joint;
  a.update_models = !f.no_updates;
  a.use_trust_region = !f.no_tr;
  a.outcome_uncertainty = !f.no_outcome;
  a.reward_uncertainty = !f.no_reward;
  a.acquisition = f.acquisition == "ei" ? method::Acquisition::kMcEi
                                        : method::Acquisition::kThompson;
  return a;
}

std::vector<baselines::MethodSpec> methods_of(const RunFlags& f) {
  std::vector<baselines::MethodSpec> out;
  for (const auto& name : split_list(f.methods)) {
    baselines::Method m;
    try {
      m = baselines::parse_method(name);
    } catch (const std::invalid_argument& e) {
      throw BadName(e.what());
    }
    out.push_back({m, m == baselines::Method::kJoco ? flags_of(f) : method::AblationFlags{}});
  }
  return out;
}

int execute_and_report(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const RunReport r = execute(c, [&](const std::string& label, std::uint64_t seed,
                                     const method::History& h) {
    out << label << " " << c.problem << " seed " << seed << ": " << h.size()
        << " evaluations, best " << format_double(h.best()) << "\n";
  });
  for (const auto& f : r.failures) {
    err << "run failed: " << f.label << " " << f.problem << " seed " << f.seed << ": " << f.error
        << "\n";
  }
  return r.ok() ? kExitOk : kExitRunFailed;
}

// One JoCo configuration of an ablation sweep.
struct Variant {
  std::string label;
  method::AblationFlags flags;
  method::TrainConfig train;
};

std::vector<Variant> expand_variants(const RunFlags& f, const method::TrainConfig& base) {
  const std::vector<std::string> names =
      f.variants.empty()
          ? std::vector<std::string>{"full", "no-joint-training", "no-updates",
                                     "no-trust-region", "no-outcome-uncertainty",
                                     "no-reward-uncertainty", "ei"}
          : split_list(f.variants);
  std::vector<Variant> out;
  for (const auto& n : names) {
    Variant v{"joco", {}, base};
    const auto eq = n.find('=');
    if (n == "full") {
    } else if (n == "no-joint-training") {
      v.flags.joint_training = false;
    } else if (n == "no-updates") {
      v.flags.update_models = false;
    } else if (n == "no-trust-region") {
      v.flags.use_trust_region = false;
    } else if (n == "no-outcome-uncertainty") {
      v.flags.outcome_uncertainty = false;
    } else if (n == "no-reward-uncertainty") {
      v.flags.reward_uncertainty = false;
    } else if (n == "ei") {
      v.flags.acquisition = method::Acquisition::kMcEi;
    } else if (eq != std::string::npos) {
      const std::string key = n.substr(0, eq), value = n.substr(eq + 1);
      try {
        if (key == "nb") {
          v.train.n_b = std::stoul(value);
        } else if (key == "lr") {
          v.train.learning_rate = std::stod(value);
        } else if (key == "epochs-update") {
          v.train.epochs_update = std::stoul(value);
        } else {
          throw BadName("unknown ablation variant: " + n);
        }
      } catch (const std::logic_error& e) {
        if (dynamic_cast<const BadName*>(&e)) throw;
        throw BadName("bad ablation value: " + n);
      }
      v.label = "joco-" + key + value;
      out.push_back(v);
      continue;
    } else {
      throw BadName("unknown ablation variant: " + n);
    }
    v.label = method_label({baselines::Method::kJoco, v.flags});
    out.push_back(v);
  }
  return out;
}

int cmd_aggregate(const std::string& dir_arg, std::ostream& out, std::ostream& err) {
  const std::filesystem::path dir = dir_arg.empty() ? default_out() : dir_arg;
  const auto files = run_files(dir);
  if (files.empty()) {
    err << "no run CSVs in " << dir.string() << "\n";
    return kExitBadInput;
  }
  std::vector<ResultRow> rows;
  for (const auto& p : files) {
    auto part = read_result_csv(p);
    if (part.empty()) throw MalformedCsv("malformed CSV " + p.string() + ": no rows");
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const auto summary = summarize(rows);
  write_summary_csv(dir / kSummaryFile, summary);
  out << "wrote " << (dir / kSummaryFile).string() << " (" << summary.size() << " rows)\n";
  return kExitOk;
}

int cmd_plot(const std::string& summary_arg, const std::string& out_arg, std::ostream& out,
             std::ostream& err) {
  const std::filesystem::path summary =
      summary_arg.empty() ? std::filesystem::path(default_out()) / kSummaryFile
                          : std::filesystem::path(summary_arg);
  const auto rows = read_summary_csv(summary);
  if (rows.empty()) {
    err << "empty summary: " << summary.string() << "\n";
    return kExitBadInput;
  }
  const std::filesystem::path dir =
      out_arg.empty() ? summary.parent_path() : std::filesystem::path(out_arg);
  for (const auto& p : write_plots(rows, dir.empty() ? "." : dir)) out << "wrote " << p.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Composite latent-space Bayesian optimization benchmarks", "joco"};
  app.require_subcommand(1);

  RunFlags run_flags, ablate_flags;
  CLI::App* run = app.add_subcommand("run", "Run methods over seeds and write CSVs");
  add_common(run, run_flags);
  add_toggles(run, run_flags);

  std::string agg_dir;
  CLI::App* aggregate = app.add_subcommand("aggregate", "Mean and SEM of best_f per iteration");
  aggregate->add_option("dir", agg_dir, "Result directory");

  std::string plot_summary, plot_out;
  CLI::App* plot = app.add_subcommand("plot", "SVG convergence chart per problem");
  plot->add_option("summary", plot_summary, "summary.csv path");
  plot->add_option("--out", plot_out, "Output directory (default: next to the summary)");

  CLI::App* ablate = app.add_subcommand("ablate", "Run a sweep of JoCo variants");
  add_common(ablate, ablate_flags);
  ablate->add_option("--variants", ablate_flags.variants,
                     "Comma list: full, no-joint-training, no-updates, no-trust-region, "
                     "no-outcome-uncertainty, no-reward-uncertainty, ei, nb=N, lr=X, "
                     "epochs-update=N (default: full and every switch)");

  // Merge a --config file ahead of parsing; explicit flags take precedence.
  std::vector<std::string> args = args_in;
  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) {
        path = args[i + 1];
      } else if (args[i].rfind("--config=", 0) == 0) {
        path = args[i].substr(9);
      }
      if (path.empty()) continue;
      const auto extra = config_args(path, args);
      args.insert(args.end(), extra.begin(), extra.end());
      break;
    }
  } catch (const std::invalid_argument& e) {
    err << e.what() << "\n";
    return kExitBadName;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*run) {
      RunConfig c = base_config(run_flags);
      c.methods = methods_of(run_flags);
      c.validate();
      return execute_and_report(c, out, err);
    }
    if (*ablate) {
      const RunConfig base = base_config(ablate_flags);
      const auto variants = expand_variants(ablate_flags, base.train);
      int code = kExitOk;
      for (const auto& v : variants) {
        RunConfig c = base;
        c.methods = {{baselines::Method::kJoco, v.flags}};
        c.train = v.train;
        c.label = v.label;
        c.validate();
        code = std::max(code, execute_and_report(c, out, err));
      }
      return code;
    }
    if (*aggregate) return cmd_aggregate(agg_dir, out, err);
    if (*plot) return cmd_plot(plot_summary, plot_out, out, err);
  } catch (const MalformedCsv& e) {
    err << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::invalid_argument& e) {
    err << e.what() << "\n";
    return kExitBadName;
  }
  return kExitOk;
}

}  // namespace joco::harness
