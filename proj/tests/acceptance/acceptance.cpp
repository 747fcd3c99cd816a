// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion to stdout and
// progress to stderr; exits 1 if any selected criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "dense_oracle.hpp"
#include "joco/harness/cli.hpp"
#include "joco/harness/runner.hpp"
#include "joco/method/joco.hpp"
#include "joco/models/gp.hpp"
#include "joco/trustregion/trust_region.hpp"
#include "tr_reference.hpp"

using namespace joco;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::size_t kBudget = 300;
constexpr std::size_t kSeeds = 10;
constexpr std::size_t kSamples = 1024;
constexpr double kFdStep = 1e-5;
constexpr double kFdRel = 1e-4;
constexpr double kFdAbs = 1e-7;
constexpr double kOracleTol = 1e-10;
constexpr double kCompositeTol = 1e-10;
constexpr double kGradSeconds = 120.0;
constexpr double kOracleSeconds = 60.0;
constexpr double kRobustness = 0.20;
// Rover's output encoder is too wide for every coordinate; it gets one
// coordinate per parameter tensor plus this many drawn at random.
constexpr std::size_t kRoverExtraCoords = 100;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool close(double a, double b, double rel, double abs_floor) {
  return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), abs_floor);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

oracle::Matrix rows_of(const ng::Tensor& t) {
  oracle::Matrix out(t.rows(), oracle::Vector(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) out[i][j] = t(i, j);
  return out;
}

oracle::Rbf oracle_kernel(const models::GpHyperparams& h) {
  oracle::Rbf k;
  for (double l : h.log_lengthscales.values()) k.lengthscales.push_back(std::exp(l));
  k.signal_var = std::exp(h.log_signal_var);
  k.noise_var = h.noise_var();
  k.mean = h.mean;
  return k;
}

ng::Tensor uniform_tensor(util::Rng& rng, ng::Shape shape, double lo, double hi) {
  ng::Tensor t(std::move(shape));
  for (double& x : t.values()) x = rng.uniform(lo, hi);
  return t;
}

models::GpHyperparams random_hyp(util::Rng& rng, std::size_t dim) {
  models::GpHyperparams h = models::GpHyperparams::defaults(dim);
  for (double& l : h.log_lengthscales.values()) l = rng.uniform(-0.7, 0.7);
  h.log_signal_var = rng.uniform(-1.0, 1.0);
  h.set_log_noise_var(rng.uniform(std::log(1e-3), std::log(1e-1)));
  h.mean = rng.uniform(-1.0, 1.0);
  return h;
}

// 1 ---------------------------------------------------------------------------

struct Coord {
  std::size_t entry, index;
};

std::vector<Coord> all_coords(const ng::ParamSet& ps) {
  std::vector<Coord> out;
  for (std::size_t e = 0; e < ps.size(); ++e)
    for (std::size_t i = 0; i < ps.at(e).value.size(); ++i) out.push_back({e, i});
  return out;
}

std::vector<Coord> sampled_coords(const ng::ParamSet& ps, util::Rng& rng, std::size_t extra) {
  std::set<std::pair<std::size_t, std::size_t>> picked;
  std::size_t total = 0;
  for (std::size_t e = 0; e < ps.size(); ++e) {
    const std::size_t n = ps.at(e).value.size();
    picked.insert({e, rng.below(n)});
    total += n;
  }
  while (picked.size() < ps.size() + extra && picked.size() < total) {
    std::size_t k = rng.below(total), e = 0;
    while (k >= ps.at(e).value.size()) k -= ps.at(e).value.size(), ++e;
    picked.insert({e, k});
  }
  std::vector<Coord> out;
  for (auto [e, i] : picked) out.push_back({e, i});
  return out;
}

struct GradStats {
  std::size_t coords = 0, bad = 0;
  double worst_rel = 0.0;
  std::string first_bad;
};

void check_instance(const problems::Problem& p, std::uint64_t seed, GradStats& st) {
  auto rng = util::Rng::stream(seed, util::StreamTag::kTest);
  const std::size_t n = 2 + rng.below(9);
  method::History h;
  method::Evaluator eval(p, h);
  std::vector<double> u(p.d());
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : u) v = rng.uniform();
    eval.evaluate_unit(u);
  }
  auto init = util::Rng::stream(seed, util::StreamTag::kModelInit);
  method::JocoModels m = method::JocoModels::create(method::Architecture::for_problem(p), init);
  for (std::size_t j = 0; j <= m.heads(); ++j) {
    const std::string prefix =
        j < m.heads() ? method::JocoModels::head_prefix(j) : method::JocoModels::kRewardPrefix;
    const auto dim = models::read_gp_params(m.params, prefix).log_lengthscales.size();
    const auto hyp = random_hyp(rng, dim);
    m.params.value(models::lengthscale_name(prefix)) = hyp.log_lengthscales;
    m.params.value(models::signal_name(prefix)).fill(hyp.log_signal_var);
    m.params.value(models::noise_name(prefix)).fill(hyp.log_noise_var);
    m.params.value(models::mean_name(prefix)).fill(hyp.mean);
  }
  m.y_norm = method::ColumnStandardizer::fit(method::outputs(h));
  m.f_norm = method::Standardizer::fit(method::rewards(h));
  const method::Batch b = method::make_batch(p, h);

  ng::value_and_grad(m.params, [&](ng::Graph& g) { return method::joco_loss(g, m, b); });
  const std::vector<Coord> coords = p.name() == "rover"
                                        ? sampled_coords(m.params, rng, kRoverExtraCoords)
                                        : all_coords(m.params);
  for (const Coord& c : coords) {
    double& x = m.params.at(c.entry).value.values()[c.index];
    const double saved = x;
    x = saved + kFdStep;
    const double up = method::joco_loss(m, b);
    x = saved - kFdStep;
    const double down = method::joco_loss(m, b);
    x = saved;
    const double fd = (up - down) / (2.0 * kFdStep);
    const double an = m.params.at(c.entry).grad.values()[c.index];
    ++st.coords;
    if (!close(an, fd, kFdRel, kFdAbs) && st.bad++ == 0) {
      st.first_bad = std::string(p.name()) + " instance " + std::to_string(seed) + " " +
                     m.params.at(c.entry).name + "[" + std::to_string(c.index) +
                     "] analytic " + fmt("%.3e", an) + " fd " + fmt("%.3e", fd);
    }
    if (std::abs(an - fd) > kFdAbs) {
      st.worst_rel = std::max(st.worst_rel,
                              std::abs(an - fd) / std::max(std::abs(an), std::abs(fd)));
    }
  }
}

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  GradStats st;
  for (const auto& name : problems::problem_names()) {
    const auto p = problems::make_problem(name);
    for (std::uint64_t s = 1; s <= 50; ++s) check_instance(*p, 1000 + s, st);
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = st.bad == 0 && secs <= kGradSeconds;
  o.detail = std::to_string(st.coords) + " coordinates over 200 instances, " +
             std::to_string(st.bad) + " outside tolerance, worst rel " +
             fmt("%.2e", st.worst_rel) + ", " + fmt("%.1f", secs) + " s";
  if (st.bad) o.detail += " (first: " + st.first_bad + ")";
  return o;
}

// 2 ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  auto rng = util::Rng::stream(2, util::StreamTag::kTest);
  double worst = 0.0;
  auto track = [&](double got, double want) {
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  };
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(8), dim = 1 + rng.below(4), q = 1 + rng.below(6);
    models::ExactGp gp{random_hyp(rng, dim), uniform_tensor(rng, {n, dim}, -1.0, 1.0),
                       uniform_tensor(rng, {n}, -2.0, 2.0)};
    const oracle::Rbf k = oracle_kernel(gp.hyp);
    const oracle::Vector y(gp.y.values().begin(), gp.y.values().end());
    track(models::gp_mll(gp), oracle::gp_log_marginal(k, rows_of(gp.x), y));
    const ng::Tensor qx = uniform_tensor(rng, {q, dim}, -1.5, 1.5);
    const auto post = models::gp_posterior(gp, qx);
    const auto want = oracle::gp_posterior(k, rows_of(gp.x), y, rows_of(qx));
    for (std::size_t a = 0; a < q; ++a) {
      track(post.mean[a], want.mean[a]);
      for (std::size_t c = 0; c < q; ++c) track(post.cov(a, c), want.cov[a][c]);
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= kOracleTol && secs <= kOracleSeconds,
          "100 datasets, worst scaled error " + fmt("%.2e", worst) + ", " +
              fmt("%.2f", secs) + " s"};
}

// 3 ---------------------------------------------------------------------------

tr::TrState feed(tr::TrState s, bool success, double& f_best, const tr::TrConfig& cfg) {
  const double f_new = success ? f_best + 1.0 : f_best;
  s = tr::tr_update(s, f_new, f_best, s.center, cfg);
  f_best = std::max(f_best, f_new);
  return s;
}

Outcome trust_region_machine() {
  std::vector<std::string> broken;
  double f = 0.0;
  {
    const tr::TrConfig cfg = tr::TrConfig::for_dim(10);
    tr::TrState s = tr::TrState::initial({0.5}, cfg);
    for (int i = 0; i < 3; ++i) s = feed(s, true, f, cfg);
    if (s.length != 1.6) broken.push_back("3 successes from 0.8");
    for (int i = 0; i < 3; ++i) s = feed(s, true, f, cfg);
    if (s.length != 1.6) broken.push_back("doubling capped at 1.6");
    s.length = 0.2;
    for (int i = 0; i < 3; ++i) s = feed(s, true, f, cfg);
    if (s.length != 0.4) broken.push_back("3 successes from 0.2");
  }
  {
    const tr::TrConfig cfg = tr::TrConfig::for_dim(10);
    tr::TrState s = tr::TrState::initial({0.5}, cfg);
    for (int i = 0; i < 9; ++i) s = feed(s, false, f, cfg);
    if (s.length != 0.8) broken.push_back("9 of 10 failures");
    s = feed(s, false, f, cfg);
    if (s.length != 0.4) broken.push_back("10 failures halve");
    s = feed(s, true, f, cfg);
    for (int i = 0; i < 9; ++i) s = feed(s, false, f, cfg);
    if (s.length != 0.4) broken.push_back("success resets the failure run");
  }
  {
    tr::TrConfig cfg = tr::TrConfig::for_dim(1);
    tr::TrState s = tr::TrState::initial({0.3}, cfg);
    std::vector<double> lengths;
    for (int i = 0; i < 7; ++i) {
      s = feed(s, false, f, cfg);
      lengths.push_back(s.length);
    }
    const std::vector<double> want = {0.4, 0.2, 0.1, 0.05, 0.025, 0.0125, 0.8};
    if (lengths != want) broken.push_back("collapse below 2^-7 resets to 0.8");
    if (s.restarts != 1 || s.center != std::vector<double>{0.3})
      broken.push_back("restart keeps the center");
  }

  auto rng = util::Rng::stream(3, util::StreamTag::kTest);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const tr::TrConfig cfg = tr::TrConfig::for_dim(1 + rng.below(40));
    std::string events(1 + rng.below(200), 's');
    const double p_success = rng.uniform();
    for (char& e : events) e = rng.uniform() < p_success ? 's' : 'f';
    const auto want =
        oracle::simulate_tr(events, cfg.l_init, cfg.l_min, cfg.l_max, cfg.tau_succ, cfg.tau_fail);
    tr::TrState s = tr::TrState::initial({0.5}, cfg);
    double best = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < events.size() && ok; ++i) {
      s = feed(s, events[i] == 's', best, cfg);
      ok = s.length == want.lengths[i];
    }
    ok = ok && s.restarts == static_cast<int>(want.restarts_at.size());
    if (!ok) ++mismatches;
  }
  std::string detail = std::to_string(broken.size()) + " hand traces broken, " +
                       std::to_string(mismatches) + " of 10000 event strings differ";
  for (const auto& b : broken) detail += "; " + b;
  return {broken.empty() && mismatches == 0, detail};
}

// 4 ---------------------------------------------------------------------------

Outcome composite_consistency() {
  auto rng = util::Rng::stream(4, util::StreamTag::kTest);
  double worst = 0.0;
  std::size_t n = 0;
  for (const auto& name : problems::problem_names()) {
    const auto p = problems::make_problem(name);
    std::vector<double> x(p->d());
    for (int i = 0; i < 1000; ++i) {
      for (std::size_t k = 0; k < x.size(); ++k) x[k] = rng.uniform(p->lower()[k], p->upper()[k]);
      const auto e = p->evaluate(x);
      worst = std::max(worst, std::abs(p->reward(e.y) - e.f));
      ++n;
    }
  }
  return {worst <= kCompositeTol,
          std::to_string(n) + " inputs, worst |f - g(y)| " + fmt("%.2e", worst)};
}

// 5-7, 9 ----------------------------------------------------------------------

struct Finals {
  // (problem, label) -> final best_f per seed
  std::map<std::pair<std::string, std::string>, std::vector<double>> best;
  double seconds = 0.0;
  std::size_t failures = 0;

  double med(const std::string& problem, const std::string& label) const {
    const auto it = best.find({problem, label});
    return it == best.end() || it->second.size() != kSeeds ? NAN : median(it->second);
  }
};

harness::RunConfig comparison(const std::string& problem, const fs::path& root,
                              std::size_t jobs) {
  harness::RunConfig c;
  c.problem = problem;
  c.budget = kBudget;
  for (std::uint64_t s = 1; s <= kSeeds; ++s) c.seeds.push_back(s);
  c.n_sample = kSamples;
  c.out_dir = root / problem;
  c.jobs = jobs;
  return c;
}

Finals run_comparisons(const fs::path& root, std::size_t jobs, bool need5, bool need6,
                       bool need7) {
  using baselines::Method;
  const auto t0 = Clock::now();
  std::vector<harness::RunConfig> configs;
  method::AblationFlags no_updates;
  no_updates.update_models = false;

  for (const std::string problem : {"rosenbrock", "environmental"}) {
    harness::RunConfig c = comparison(problem, root, jobs);
    c.methods.push_back({Method::kJoco, {}});
    if (problem == "environmental" && need6) c.methods.push_back({Method::kJoco, no_updates});
    if (need5 || (need7 && problem == "rosenbrock")) c.methods.push_back({Method::kRandom, {}});
    if (need5) {
      c.methods.push_back({Method::kVanillaBo, {}});
      c.methods.push_back({Method::kTurbo, {}});
    }
    if (problem == "environmental" && !need5 && !need6) continue;
    if (problem == "rosenbrock" && !need5 && !need7) continue;
    configs.push_back(c);
  }
  if (need7) {
    for (std::size_t nb : {10, 40}) {
      harness::RunConfig c = comparison("rosenbrock", root, jobs);
      c.methods = {{Method::kJoco, {}}};
      c.train.n_b = nb;
      c.label = "joco-nb" + std::to_string(nb);
      configs.push_back(c);
    }
  }

  Finals out;
  for (const auto& c : configs) {
    const auto report = harness::execute(c, [&](const std::string& label, std::uint64_t seed,
                                                 const method::History& h) {
      std::fprintf(stderr, "[%7.0f s] %s %s seed %llu best %.6g\n", seconds_since(t0),
                   label.c_str(), c.problem.c_str(), static_cast<unsigned long long>(seed),
                   h.best());
    });
    out.failures += report.failures.size();
    for (const auto& f : report.files) {
      const auto rows = harness::read_result_csv(f);
      if (!rows.empty()) out.best[{rows.back().problem, rows.back().method}].push_back(rows.back().best_f);
    }
  }
  out.seconds = seconds_since(t0);
  return out;
}

Outcome replication(const Finals& r) {
  bool pass = r.failures == 0;
  bool beats_turbo = false;
  std::string detail;
  for (const std::string problem : {"rosenbrock", "environmental"}) {
    const double joco = r.med(problem, "joco"), rnd = r.med(problem, "random"),
                 van = r.med(problem, "vanilla_bo"), tur = r.med(problem, "turbo");
    pass = pass && joco >= rnd && joco >= van;
    beats_turbo = beats_turbo || joco >= tur;
    detail += problem + ": joco " + fmt("%.6g", joco) + ", random " + fmt("%.6g", rnd) +
              ", vanilla_bo " + fmt("%.6g", van) + ", turbo " + fmt("%.6g", tur) + "; ";
  }
  detail += "runs took " + fmt("%.0f", r.seconds) + " s";
  if (r.failures) detail += ", " + std::to_string(r.failures) + " failed runs";
  return {pass && beats_turbo, detail};
}

Outcome no_updates(const Finals& r) {
  const double full = r.med("environmental", "joco");
  const double frozen = r.med("environmental", "joco-no-updates");
  return {frozen <= full, "environmental median no-updates " + fmt("%.6g", frozen) +
                              " vs full " + fmt("%.6g", full)};
}

Outcome robustness(const Finals& r) {
  const double rnd = r.med("rosenbrock", "random");
  const std::vector<std::pair<std::string, std::string>> variants = {
      {"10", "joco-nb10"}, {"20", "joco"}, {"40", "joco-nb40"}};
  std::vector<double> imp;
  std::string detail = "improvement over random median " + fmt("%.6g", rnd) + ":";
  for (const auto& [nb, label] : variants) {
    imp.push_back(r.med("rosenbrock", label) - rnd);
    detail += " n_b=" + nb + " " + fmt("%.6g", imp.back());
  }
  bool pass = true;
  for (std::size_t i = 0; i < imp.size(); ++i)
    for (std::size_t j = i + 1; j < imp.size(); ++j)
      pass = pass && std::abs(imp[i] - imp[j]) <=
                         kRobustness * std::max(std::abs(imp[i]), std::abs(imp[j]));
  return {pass, detail};
}

// 8 ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_wall_ms(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

Outcome determinism(const fs::path& root, std::size_t jobs) {
  std::vector<fs::path> dirs = {root / "determinism_a", root / "determinism_b"};
  for (const auto& d : dirs) {
    fs::remove_all(d);
    std::ostringstream sink;
    const int code = harness::run_cli(
        {"run", "--problem", "environmental", "--method", "joco,random,vanilla_bo,turbo",
         "--budget", "40", "--seeds", "1,2", "--n-sample", "1024", "--jobs",
         std::to_string(jobs), "--out", d.string()},
        sink, sink);
    if (code != harness::kExitOk) return {false, "run exited " + std::to_string(code)};
  }
  std::size_t files = 0, differ = 0;
  for (const auto& p : harness::run_files(dirs[0])) {
    ++files;
    if (without_wall_ms(slurp(p)) != without_wall_ms(slurp(dirs[1] / p.filename()))) ++differ;
  }
  const bool combined_same = without_wall_ms(slurp(dirs[0] / harness::kCombinedFile)) ==
                             without_wall_ms(slurp(dirs[1] / harness::kCombinedFile));
  const bool same_set = harness::run_files(dirs[1]).size() == files;
  return {files == 8 && differ == 0 && combined_same && same_set,
          std::to_string(files) + " run files plus combined.csv, " + std::to_string(differ) +
              " differ"};
}

// 9 ---------------------------------------------------------------------------

Outcome budget_accounting(const fs::path& root) {
  std::size_t runs = 0, bad = 0;
  std::string first_bad;
  for (const auto& dir : fs::directory_iterator(root)) {
    if (!dir.is_directory()) continue;
    for (const auto& p : harness::run_files(dir.path())) {
      ++runs;
      const auto rows = harness::read_result_csv(p);
      const std::size_t budget = dir.path().filename().string().rfind("determinism", 0) == 0
                                     ? 40
                                     : kBudget;
      bool ok = rows.size() == budget;
      double best = -INFINITY;
      for (std::size_t i = 0; i < rows.size() && ok; ++i) {
        best = std::max(best, rows[i].f);
        ok = rows[i].iter == i && rows[i].best_f == best &&
             (i == 0 || rows[i].best_f >= rows[i - 1].best_f);
      }
      if (!ok) {
        ++bad;
        if (first_bad.empty()) first_bad = p.string();
      }
    }
  }
  std::string detail = std::to_string(runs) + " histories, " + std::to_string(bad) + " bad";
  if (!first_bad.empty()) detail += " (first: " + first_bad + ")";
  return {runs > 0 && bad == 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string only = "1-9";
  std::string out = "acceptance_results";
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--only", only, "Criteria to run, e.g. 1-4,8");
  app.add_option("--out", out, "Scratch directory for run CSVs");
  app.add_option("--jobs", jobs, "Parallel runs");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected;
  try {
    for (auto s : harness::parse_seeds(only)) selected.insert(static_cast<int>(s));
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }
  const fs::path root = out;
  fs::remove_all(root);
  fs::create_directories(root);

  const std::vector<std::pair<int, const char*>> names = {
      {1, "gradient correctness"},     {2, "GP oracle equivalence"},
      {3, "trust-region state machine"}, {4, "composite consistency"},
      {5, "directional replication"},  {6, "not updating models"},
      {7, "hyperparameter robustness"}, {8, "determinism"},
      {9, "monotonicity and budget"}};

  std::optional<Finals> finals;
  auto need_finals = [&] {
    if (!finals) {
      finals = run_comparisons(root, jobs, selected.count(5) > 0, selected.count(6) > 0,
                               selected.count(7) > 0);
    }
    return *finals;
  };

  bool all = true;
  for (const auto& [id, name] : names) {
    if (!selected.count(id)) continue;
    Outcome o;
    try {
      switch (id) {
        case 1: o = gradient_correctness(); break;
        case 2: o = oracle_equivalence(); break;
        case 3: o = trust_region_machine(); break;
        case 4: o = composite_consistency(); break;
        case 5: o = replication(need_finals()); break;
        case 6: o = no_updates(need_finals()); break;
        case 7: o = robustness(need_finals()); break;
        case 8: o = determinism(root, jobs); break;
        case 9: o = budget_accounting(root); break;
      }
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %d (%s): %s  %s\n", id, name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
