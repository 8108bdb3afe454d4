#include "bmc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "bmc/rng.hpp"

namespace bmc {

SolverConfig SolverSettings::make(double alpha, std::size_t rank, std::uint64_t seed, std::size_t max_dim) const {
  SolverConfig cfg;
  cfg.alpha = alpha;
  cfg.R = R.value_or(alpha * std::sqrt(static_cast<double>(rank)));
  cfg.tau = tau;
  cfg.max_iters = max_iters;
  cfg.tol = tol;
  cfg.tol_rank = tol_rank;
  cfg.k_init = std::min(k_init == 0 ? rank : k_init, max_dim);
  cfg.k_max = std::min(std::max(k_max == 0 ? cfg.k_init : k_max, cfg.k_init), max_dim);
  cfg.k_growth = std::max<std::size_t>(k_growth, 1);
  cfg.backtracking = backtracking;
  cfg.seed = seed;
  return cfg;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t t = 0; t < count; ++t) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < count; t = next++) {
        try {
          fn(t);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

double sample_mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = sample_mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

namespace {

std::uint64_t trial_seed(std::uint64_t master, std::string_view phase, std::size_t trial) {
  return stream(master, phase).bits(trial);
}

std::string model_name(ObservationModel m) {
  switch (m) {
    case ObservationModel::multi_bernoulli: return "bernoulli";
    case ObservationModel::multinomial: return "multinomial";
    case ObservationModel::all_at_once: return "allatonce";
  }
  return "?";
}

ObservationModel parse_model(const std::string& s) {
  if (s == "bernoulli") return ObservationModel::multi_bernoulli;
  if (s == "multinomial") return ObservationModel::multinomial;
  if (s == "allatonce") return ObservationModel::all_at_once;
  throw std::invalid_argument("unknown observation model '" + s + "'");
}

std::string sweep_name(SweepKind k) {
  switch (k) {
    case SweepKind::gamma_line: return "gamma_line";
    case SweepKind::eta_line: return "eta_line";
    case SweepKind::ternary: return "ternary";
  }
  return "?";
}

SweepKind parse_sweep(const std::string& s) {
  if (s == "gamma_line") return SweepKind::gamma_line;
  if (s == "eta_line") return SweepKind::eta_line;
  if (s == "ternary") return SweepKind::ternary;
  throw std::invalid_argument("unknown sweep kind '" + s + "'");
}

void solver_to_manifest(const SolverSettings& s, Manifest& m) {
  m.set("solver.tau", s.tau);
  m.set("solver.max_iters", s.max_iters);
  m.set("solver.tol", s.tol);
  m.set("solver.tol_rank", s.tol_rank);
  m.set("solver.k_init", s.k_init);
  m.set("solver.k_max", s.k_max);
  m.set("solver.k_growth", s.k_growth);
  m.set("solver.R", s.R ? format_double(*s.R) : std::string("auto"));
  m.set("solver.backtracking", std::string(s.backtracking ? "true" : "false"));
}

SolverSettings solver_from_manifest(const Manifest& m) {
  SolverSettings s;
  s.tau = m.get_double("solver.tau");
  s.max_iters = m.get_u64("solver.max_iters");
  s.tol = m.get_double("solver.tol");
  s.tol_rank = m.get_double("solver.tol_rank");
  s.k_init = m.get_u64("solver.k_init");
  s.k_max = m.get_u64("solver.k_max");
  s.k_growth = m.get_u64("solver.k_growth");
  if (m.get("solver.R") != "auto") s.R = m.get_double("solver.R");
  s.backtracking = m.get("solver.backtracking") == "true";
  return s;
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t t = 0; t < xs.size(); ++t) out += (t ? " " : "") + format_double(xs[t]);
  return out;
}

std::vector<double> split_doubles(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  for (std::string tok; in >> tok;) out.push_back(std::stod(tok));
  return out;
}

}  // namespace

TrialData make_trial(const SyntheticSetup& setup, std::uint64_t master_seed, std::size_t trial) {
  TrialData data;
  data.target = synthesize_target(
      {setup.d1, setup.d2, setup.rank, setup.alpha, trial_seed(master_seed, "target", trial)});
  const SignMatrix y = quantize(data.target.m, setup.qpf, trial_seed(master_seed, "quantize", trial));
  ObservationConfig obs;
  obs.model = setup.obs_model;
  if (setup.obs_model == ObservationModel::multi_bernoulli) {
    obs.rho = setup.rho;
  } else {
    obs.n = static_cast<std::size_t>(std::llround((1.0 - setup.rho) * static_cast<double>(setup.d1 * setup.d2)));
  }
  obs.seed = trial_seed(master_seed, "observe", trial);
  data.observation = sample_observations(y, obs);
  data.solver_seed = trial_seed(master_seed, "solver", trial);
  return data;
}

double run_synthetic_trial(const SyntheticSetup& setup, const SolverSettings& solver,
                           const EntryLossKind& kind, const TrialData& data) {
  const SolverConfig cfg =
      solver.make(setup.alpha, setup.rank, data.solver_seed, std::max(setup.d1, setup.d2));
  const SolveReport report = solve(data.observation, kind, setup.qpf, setup.risk_rho.value_or(setup.rho), cfg);
  return relative_frobenius_error(report.estimate, data.target.m);
}

std::vector<GridPoint> grid_points(const SweepGrid& grid) {
  if (grid.resolution < 2) throw std::invalid_argument("grid resolution must be >= 2");
  std::vector<GridPoint> pts;
  const std::size_t n = grid.resolution;
  switch (grid.kind) {
    case SweepKind::gamma_line:
      for (std::size_t k = 0; k < n; ++k) {
        const double gamma = static_cast<double>(k) / static_cast<double>(n - 1);
        pts.push_back({{gamma}, EntryLossKind::punu(gamma)});
      }
      break;
    case SweepKind::eta_line:
      for (std::size_t k = 0; k < n; ++k) {
        const double eta = (2.0 * static_cast<double>(k) - static_cast<double>(n - 1)) / static_cast<double>(n - 1);
        pts.push_back({{eta}, EntryLossKind::pnu(eta)});
      }
      break;
    case SweepKind::ternary: {
      const double m = static_cast<double>(n);
      for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t j = 0; i + j <= n; ++j) {
          const RiskWeights w{static_cast<double>(i) / m, static_cast<double>(j) / m,
                              static_cast<double>(n - i - j) / m};
          pts.push_back({{w.gamma_pn, w.gamma_pu, w.gamma_nu}, EntryLossKind::tri(w)});
        }
      }
      break;
    }
  }
  return pts;
}

std::string SweepResult::csv_header() const {
  switch (kind) {
    case SweepKind::gamma_line: return "gamma,mean_error,std_error";
    case SweepKind::eta_line: return "eta,mean_error,std_error";
    case SweepKind::ternary: return "gamma_pn,gamma_pu,gamma_nu,mean_error,std_error";
  }
  return "";
}

std::string SweepResult::to_csv() const {
  std::ostringstream out;
  out << csv_header() << '\n';
  for (const auto& row : rows) {
    for (double c : row.coords) out << format_double(c) << ',';
    out << format_double(row.mean_error) << ',' << format_double(row.std_error) << '\n';
  }
  return out.str();
}

const SweepRow& SweepResult::best() const {
  if (rows.empty()) throw std::logic_error("empty sweep");
  return *std::min_element(rows.begin(), rows.end(),
                           [](const SweepRow& a, const SweepRow& b) { return a.mean_error < b.mean_error; });
}

void SweepConfig::to_manifest(Manifest& m) const {
  m.set("sweep.kind", sweep_name(grid.kind));
  m.set("sweep.resolution", grid.resolution);
  m.set("sweep.trials", grid.trials);
  m.set("seed", seed);
  m.set("threads", threads);
  m.set("setup.d1", setup.d1);
  m.set("setup.d2", setup.d2);
  m.set("setup.rank", setup.rank);
  m.set("setup.alpha", setup.alpha);
  m.set("setup.qpf", setup.qpf.to_string());
  m.set("setup.rho", setup.rho);
  m.set("setup.risk_rho", setup.risk_rho ? format_double(*setup.risk_rho) : std::string("same"));
  m.set("setup.obs_model", model_name(setup.obs_model));
  solver_to_manifest(solver, m);
}

SweepConfig SweepConfig::from_manifest(const Manifest& m) {
  SweepConfig c;
  c.grid.kind = parse_sweep(m.get("sweep.kind"));
  c.grid.resolution = m.get_u64("sweep.resolution");
  c.grid.trials = m.get_u64("sweep.trials");
  c.seed = m.get_u64("seed");
  c.threads = m.get_u64("threads");
  c.setup.d1 = m.get_u64("setup.d1");
  c.setup.d2 = m.get_u64("setup.d2");
  c.setup.rank = m.get_u64("setup.rank");
  c.setup.alpha = m.get_double("setup.alpha");
  c.setup.qpf = Qpf::parse(m.get("setup.qpf"));
  c.setup.rho = m.get_double("setup.rho");
  if (m.get("setup.risk_rho") != "same") c.setup.risk_rho = m.get_double("setup.risk_rho");
  c.setup.obs_model = parse_model(m.get("setup.obs_model"));
  c.solver = solver_from_manifest(m);
  return c;
}

SweepResult run_sweep(const SweepConfig& cfg, const ProgressFn& progress) {
  if (cfg.grid.trials == 0) throw std::invalid_argument("trials must be positive");
  const std::vector<GridPoint> pts = grid_points(cfg.grid);
  const std::size_t trials = cfg.grid.trials;

  std::vector<TrialData> data(trials);
  parallel_for(trials, cfg.threads, [&](std::size_t t) { data[t] = make_trial(cfg.setup, cfg.seed, t); });

  std::vector<double> errors(pts.size() * trials, 0.0);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(errors.size(), cfg.threads, [&](std::size_t task) {
    const std::size_t p = task / trials;
    const std::size_t t = task % trials;
    try {
      errors[task] = run_synthetic_trial(cfg.setup, cfg.solver, pts[p].kind, data[t]);
    } catch (const std::exception& e) {
      throw std::runtime_error("grid point " + pts[p].kind.to_string() + ", trial " + std::to_string(t) + ": " +
                               e.what());
    }
    const std::size_t finished = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(pts[p].kind.to_string() + " trial " + std::to_string(t) + " error " + format_double(errors[task]) +
               " [" + std::to_string(finished) + "/" + std::to_string(errors.size()) + "]");
    }
  });

  SweepResult result;
  result.kind = cfg.grid.kind;
  for (std::size_t p = 0; p < pts.size(); ++p) {
    SweepRow row;
    row.coords = pts[p].coords;
    row.trial_errors.assign(errors.begin() + static_cast<std::ptrdiff_t>(p * trials),
                            errors.begin() + static_cast<std::ptrdiff_t>((p + 1) * trials));
    row.mean_error = sample_mean(row.trial_errors);
    row.std_error = sample_std(row.trial_errors);
    result.rows.push_back(std::move(row));
  }
  std::sort(result.rows.begin(), result.rows.end(),
            [](const SweepRow& a, const SweepRow& b) { return a.coords < b.coords; });
  return result;
}

SweepResult run_punu_sweep(SweepConfig cfg, const ProgressFn& progress) {
  cfg.grid.kind = SweepKind::gamma_line;
  return run_sweep(cfg, progress);
}

SweepResult run_pnu_sweep(SweepConfig cfg, const ProgressFn& progress) {
  cfg.grid.kind = SweepKind::eta_line;
  return run_sweep(cfg, progress);
}

SweepResult run_tri_grid(SweepConfig cfg, const ProgressFn& progress) {
  cfg.grid.kind = SweepKind::ternary;
  return run_sweep(cfg, progress);
}

void MovielensConfig::to_manifest(Manifest& m) const {
  m.set("data_path", data_path);
  m.set("n_validation", n_validation);
  m.set("n_test", n_test);
  m.set("trials", trials);
  m.set("seed", seed);
  m.set("threads", threads);
  m.set("threshold", threshold ? format_double(*threshold) : std::string("auto"));
  m.set("rho", rho ? format_double(*rho) : std::string("plugin"));
  m.set("decision_offset", decision_offset);
  m.set("stage1.alphas", join(alphas));
  std::vector<double> r(ranks.begin(), ranks.end());
  m.set("stage1.ranks", join(r));
  m.set("stage2.ternary_resolution", ternary_resolution);
  solver_to_manifest(solver, m);
}

MovielensConfig MovielensConfig::from_manifest(const Manifest& m) {
  MovielensConfig c;
  c.data_path = m.get("data_path");
  c.n_validation = m.get_u64("n_validation");
  c.n_test = m.get_u64("n_test");
  c.trials = m.get_u64("trials");
  c.seed = m.get_u64("seed");
  c.threads = m.get_u64("threads");
  if (m.get("threshold") != "auto") c.threshold = m.get_double("threshold");
  if (m.get("rho") != "plugin") c.rho = m.get_double("rho");
  c.decision_offset = m.get_double("decision_offset");
  c.alphas = split_doubles(m.get("stage1.alphas"));
  c.ranks.clear();
  for (double r : split_doubles(m.get("stage1.ranks"))) c.ranks.push_back(static_cast<std::size_t>(r));
  c.ternary_resolution = m.get_u64("stage2.ternary_resolution");
  c.solver = solver_from_manifest(m);
  return c;
}

std::string mean_error_csv(const std::vector<SignErrorTable>& tables) {
  std::ostringstream out;
  out << "rating,count,error\n";
  auto column = [&](auto&& pick) {
    std::vector<double> xs;
    for (const auto& t : tables) xs.push_back(pick(t));
    return xs;
  };
  std::size_t total = 0;
  for (int r = 1; r <= 5; ++r) {
    std::size_t count = 0;
    for (const auto& t : tables) count += t.count[static_cast<std::size_t>(r - 1)];
    total += count;
    out << r << ',' << count << ',' << format_double(sample_mean(column([r](const SignErrorTable& t) { return t.rate(r); })))
        << '\n';
  }
  out << "overall," << total << ','
      << format_double(sample_mean(column([](const SignErrorTable& t) { return t.overall(); }))) << '\n';
  return out.str();
}

namespace {

struct MovielensSplitData {
  RatingSplit parts;
  TernaryObservation train;
  double rho = 0.0;
};

MovielensSplitData prepare_split(const std::vector<RatingRecord>& records, MatrixShape shape, double threshold,
                                 const MovielensConfig& cfg, std::size_t trial) {
  MovielensSplitData d;
  d.parts = split(records, {cfg.n_validation, cfg.n_test, trial_seed(cfg.seed, "split", trial)});
  d.train = binarize(d.parts.train, threshold, shape).observation;
  d.rho = cfg.rho.value_or(plugin_rho(d.train));
  return d;
}

DenseMatrix solve_movielens(const MovielensSplitData& d, const EntryLossKind& kind, double alpha, std::size_t rank,
                            const MovielensConfig& cfg, std::size_t trial, MatrixShape shape) {
  const SolverConfig sc =
      cfg.solver.make(alpha, rank, trial_seed(cfg.seed, "solver", trial), std::max(shape.users, shape.items));
  return solve(d.train, kind, Qpf::logistic(), d.rho, sc).estimate;
}

}  // namespace

MovielensResult run_movielens(const MovielensConfig& cfg, const ProgressFn& progress) {
  if (cfg.alphas.empty() || cfg.ranks.empty()) throw std::invalid_argument("stage-1 grid is empty");
  if (cfg.trials == 0) throw std::invalid_argument("trials must be positive");
  const Qpf q = Qpf::logistic();
  auto say = [&](const std::string& s) {
    if (progress) progress(s);
  };
  const std::vector<RatingRecord> records = deduplicate(load_movielens(cfg.data_path));
  if (records.empty()) throw std::runtime_error("no ratings in '" + cfg.data_path + "'");
  const MatrixShape shape = shape_of(records);

  MovielensResult result;
  result.threshold = cfg.threshold.value_or(mean_rating(records));
  const MovielensSplitData tuning = prepare_split(records, shape, result.threshold, cfg, 0);
  result.rho = tuning.rho;

  if (cfg.n_validation == 0 && cfg.n_test == 0) {
    result.training_only = true;
    result.best_alpha = cfg.alphas.front();
    result.best_rank = cfg.ranks.front();
    solve_movielens(tuning, EntryLossKind::pn(), result.best_alpha, result.best_rank, cfg, 0, shape);
    say("training-only mode: no held-out samples, no error table");
    return result;
  }
  const bool have_val = cfg.n_validation > 0;
  const auto& select_on = have_val ? tuning.parts.validation : tuning.parts.test;

  // Stage 1: (alpha, r) by PN validation error.
  std::vector<std::pair<double, std::size_t>> cands;
  for (double a : cfg.alphas) {
    for (std::size_t r : cfg.ranks) cands.emplace_back(a, r);
  }
  std::vector<double> stage1(cands.size());
  parallel_for(cands.size(), cfg.threads, [&](std::size_t c) {
    const DenseMatrix x = solve_movielens(tuning, EntryLossKind::pn(), cands[c].first, cands[c].second, cfg, 0, shape);
    stage1[c] = sign_accuracy(x, select_on, result.threshold, q, cfg.decision_offset).overall();
    say("stage1 alpha=" + format_double(cands[c].first) + " r=" + std::to_string(cands[c].second) +
        " error=" + format_double(stage1[c]));
  });
  std::ostringstream s1;
  s1 << "alpha,r,validation_error\n";
  std::size_t best_c = 0;
  for (std::size_t c = 0; c < cands.size(); ++c) {
    s1 << format_double(cands[c].first) << ',' << cands[c].second << ',' << format_double(stage1[c]) << '\n';
    if (stage1[c] < stage1[best_c]) best_c = c;
  }
  result.stage1_csv = s1.str();
  result.best_alpha = cands[best_c].first;
  result.best_rank = cands[best_c].second;

  // Stage 2: TRI weights on the same split.
  const std::vector<GridPoint> pts = grid_points({SweepKind::ternary, cfg.ternary_resolution, 1});
  std::vector<double> val_err(pts.size()), test_err(pts.size());
  parallel_for(pts.size(), cfg.threads, [&](std::size_t p) {
    const DenseMatrix x = solve_movielens(tuning, pts[p].kind, result.best_alpha, result.best_rank, cfg, 0, shape);
    val_err[p] = sign_accuracy(x, select_on, result.threshold, q, cfg.decision_offset).overall();
    test_err[p] = tuning.parts.test.empty()
                      ? 0.0
                      : sign_accuracy(x, tuning.parts.test, result.threshold, q, cfg.decision_offset).overall();
    say("stage2 " + pts[p].kind.to_string() + " validation=" + format_double(val_err[p]) +
        " test=" + format_double(test_err[p]));
  });
  result.grid_validation.kind = result.grid_test.kind = SweepKind::ternary;
  std::size_t best_p = 0;
  for (std::size_t p = 0; p < pts.size(); ++p) {
    result.grid_validation.rows.push_back({pts[p].coords, val_err[p], 0.0, {val_err[p]}});
    result.grid_test.rows.push_back({pts[p].coords, test_err[p], 0.0, {test_err[p]}});
    if (val_err[p] < val_err[best_p]) best_p = p;
  }
  result.best_weights = pts[best_p].kind.weights();

  // Repeated splits: PN baseline against the selected TRI weights.
  const EntryLossKind tri = EntryLossKind::tri(result.best_weights);
  result.pn_validation.resize(cfg.trials);
  result.tri_validation.resize(cfg.trials);
  result.pn_test.resize(cfg.trials);
  result.tri_test.resize(cfg.trials);
  parallel_for(2 * cfg.trials, cfg.threads, [&](std::size_t task) {
    const std::size_t t = task / 2;
    const bool is_tri = task % 2 == 1;
    const MovielensSplitData d = t == 0 ? tuning : prepare_split(records, shape, result.threshold, cfg, t);
    const DenseMatrix x =
        solve_movielens(d, is_tri ? tri : EntryLossKind::pn(), result.best_alpha, result.best_rank, cfg, t, shape);
    auto& val = is_tri ? result.tri_validation[t] : result.pn_validation[t];
    auto& tst = is_tri ? result.tri_test[t] : result.pn_test[t];
    if (!d.parts.validation.empty()) val = sign_accuracy(x, d.parts.validation, result.threshold, q, cfg.decision_offset);
    if (!d.parts.test.empty()) tst = sign_accuracy(x, d.parts.test, result.threshold, q, cfg.decision_offset);
    say(std::string(is_tri ? "tri" : "pn") + " trial " + std::to_string(t) +
        " validation=" + format_double(val.overall()) + " test=" + format_double(tst.overall()));
  });
  return result;
}

}  // namespace bmc
