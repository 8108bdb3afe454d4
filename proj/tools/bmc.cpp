// Command-line driver for the synthetic sweeps, the MovieLens evaluation and
// the QPF constants.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "bmc/experiments.hpp"
#include "bmc/manifest.hpp"
#include "bmc/qpf.hpp"

#ifndef BMC_VERSION
#define BMC_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace bmc;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::size_t trials = 10;
  std::string out = "out";
  std::string qpf;
  std::size_t threads = 1;
  std::string manifest_in;
  bool quiet = false;
};

struct SolverOptions {
  SolverSettings s;
  double R = 0.0;  // 0: derived
  void add(CLI::App* app) {
    app->add_option("--tau", s.tau, "initial step size");
    app->add_option("--max-iters", s.max_iters, "iteration cap per rank");
    app->add_option("--tol", s.tol, "relative objective tolerance");
    app->add_option("--tol-rank", s.tol_rank, "relative estimate change that stops rank growth");
    app->add_option("--k-init", s.k_init, "initial factor rank (0: target rank)");
    app->add_option("--k-max", s.k_max, "largest factor rank (0: k-init)");
    app->add_option("--k-growth", s.k_growth, "rank increment");
    app->add_option("--R", R, "bound on squared factor row norms (default alpha*sqrt(r))");
    app->add_flag("--backtracking,!--no-backtracking", s.backtracking,
                  "monotone step-size backtracking instead of the fixed-step iteration");
  }
  SolverSettings get() const {
    SolverSettings out = s;
    if (R > 0.0) out.R = R;
    return out;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

bool parse_dims(const std::string& text, std::size_t& d1, std::size_t& d2) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) return false;
  try {
    std::size_t used = 0;
    d1 = std::stoul(text.substr(0, x), &used);
    if (used != x) return false;
    d2 = std::stoul(text.substr(x + 1), &used);
    return used == text.size() - x - 1 && d1 > 0 && d2 > 0;
  } catch (const std::exception&) {
    return false;
  }
}

ObservationModel model_from(const std::string& s) {
  if (s == "bernoulli") return ObservationModel::multi_bernoulli;
  if (s == "multinomial") return ObservationModel::multinomial;
  if (s == "allatonce") return ObservationModel::all_at_once;
  throw CLI::ValidationError("--obs-model", "expected bernoulli, multinomial or allatonce");
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ProgressFn progress_fn(bool quiet) {
  if (quiet) return {};
  return [](const std::string& s) { std::cerr << s << '\n'; };
}

std::string sweep_file(SweepKind k) {
  switch (k) {
    case SweepKind::gamma_line: return "punu";
    case SweepKind::eta_line: return "pnu";
    case SweepKind::ternary: return "tri";
  }
  return "sweep";
}

void export_observations(const SweepConfig& cfg, const fs::path& dir) {
  for (std::size_t t = 0; t < cfg.grid.trials; ++t) {
    const TrialData data = make_trial(cfg.setup, cfg.seed, t);
    std::ostringstream out;
    for (const auto& e : data.observation.entries()) out << e.i << ',' << e.j << ',' << int(e.value) << '\n';
    write_text(dir / ("observations_trial" + std::to_string(t) + ".csv"), out.str());
  }
}

int run_synthetic(SweepConfig cfg, const GlobalOptions& g, bool export_obs) {
  const std::string name = sweep_file(cfg.grid.kind);
  const fs::path dir(g.out);
  fs::create_directories(dir);

  const double risk_rho = cfg.setup.risk_rho.value_or(cfg.setup.rho);
  if (risk_rho != cfg.setup.rho) {
    std::cerr << "warning: risk rho " << risk_rho << " differs from sampler rho " << cfg.setup.rho << '\n';
  }

  Manifest m;
  m.set("experiment", "synth-" + name);
  m.set("version", std::string(BMC_VERSION));
  m.set("started", timestamp_utc());
  cfg.to_manifest(m);

  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult result = run_sweep(cfg, progress_fn(g.quiet));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_text(dir / (name + ".csv"), result.to_csv());
  if (export_obs) export_observations(cfg, dir);

  m.set("duration_seconds", secs);
  for (const auto& row : result.rows) {
    std::string key = "result";
    for (double c : row.coords) key += ":" + format_double(c);
    std::string errs;
    for (double e : row.trial_errors) errs += (errs.empty() ? "" : " ") + format_double(e);
    m.set(key, errs);
  }
  const SweepRow& best = result.best();
  std::string where;
  for (double c : best.coords) where += (where.empty() ? "" : ",") + format_double(c);
  m.set("best.coords", where);
  m.set("best.mean_error", best.mean_error);
  m.write((dir / (name + "_manifest.txt")).string());

  std::cout << result.to_csv();
  std::cout << "best " << where << " mean_error " << format_double(best.mean_error) << " (" << secs << " s)\n";
  return 0;
}

int run_movielens_cmd(MovielensConfig cfg, const GlobalOptions& g) {
  const fs::path dir(g.out);
  fs::create_directories(dir);
  Manifest m;
  m.set("experiment", "movielens");
  m.set("version", std::string(BMC_VERSION));
  m.set("started", timestamp_utc());
  cfg.to_manifest(m);

  const auto t0 = std::chrono::steady_clock::now();
  const MovielensResult r = run_movielens(cfg, progress_fn(g.quiet));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  m.set("duration_seconds", secs);
  m.set("threshold_used", r.threshold);
  m.set("rho_used", r.rho);
  if (r.training_only) {
    m.set("mode", "training-only");
    m.write((dir / "movielens_manifest.txt").string());
    std::cout << "training-only mode: no held-out samples, no error table\n";
    return 0;
  }
  m.set("best.alpha", r.best_alpha);
  m.set("best.rank", static_cast<std::uint64_t>(r.best_rank));
  m.set("best.weights", format_double(r.best_weights.gamma_pn) + "," + format_double(r.best_weights.gamma_pu) + "," +
                            format_double(r.best_weights.gamma_nu));
  for (std::size_t t = 0; t < r.pn_validation.size(); ++t) {
    const std::string k = "trial" + std::to_string(t);
    m.set(k + ".pn_validation", r.pn_validation[t].overall());
    m.set(k + ".tri_validation", r.tri_validation[t].overall());
    m.set(k + ".pn_test", r.pn_test[t].overall());
    m.set(k + ".tri_test", r.tri_test[t].overall());
  }

  write_text(dir / "stage1.csv", r.stage1_csv);
  write_text(dir / "tri_grid_validation.csv", r.grid_validation.to_csv());
  write_text(dir / "tri_grid_test.csv", r.grid_test.to_csv());
  const std::string pn_val = mean_error_csv(r.pn_validation), tri_val = mean_error_csv(r.tri_validation);
  write_text(dir / "pn_validation.csv", pn_val);
  write_text(dir / "tri_validation.csv", tri_val);
  write_text(dir / "pn_test.csv", mean_error_csv(r.pn_test));
  write_text(dir / "tri_test.csv", mean_error_csv(r.tri_test));
  m.write((dir / "movielens_manifest.txt").string());

  std::cout << "alpha " << format_double(r.best_alpha) << " r " << r.best_rank << " weights "
            << m.get("best.weights") << " rho " << format_double(r.rho) << '\n';
  std::cout << "PN validation\n" << pn_val << "TRI validation\n" << tri_val;
  std::cout << "(" << secs << " s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary matrix completion from positive and unlabeled entries"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--trials", g.trials, "trials per grid point")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--qpf", g.qpf, "probit:SIGMA | logistic | logistic:S");
  app.add_option("--threads", g.threads, "worker threads")->capture_default_str();
  app.add_flag("--quiet", g.quiet, "suppress progress lines");

  // Synthetic sweeps.
  std::string dims = "100x100", obs_model = "bernoulli";
  SweepConfig sweep;
  std::optional<double> risk_rho;
  std::size_t resolution = 0;
  bool export_obs = false;
  SolverOptions synth_solver;
  synth_solver.s = sweep.solver;
  auto add_synth = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--dims", dims, "D1xD2")->capture_default_str();
    sub->add_option("--rank", sweep.setup.rank, "target rank")->capture_default_str();
    sub->add_option("--alpha", sweep.setup.alpha, "infinity-norm bound")->capture_default_str();
    sub->add_option("--rho", sweep.setup.rho, "misobservation rate")->capture_default_str();
    sub->add_option("--risk-rho", risk_rho, "rho given to the risk (default: --rho)");
    sub->add_option("--obs-model", obs_model, "bernoulli | multinomial | allatonce")->capture_default_str();
    sub->add_option("--resolution", resolution, "grid points per line, or ternary denominator m");
    sub->add_option("--manifest-in", g.manifest_in, "replay the configuration of a previous manifest");
    sub->add_flag("--export-observations", export_obs, "write observations_trialT.csv as i,j,value lines");
    synth_solver.add(sub);
    return sub;
  };
  CLI::App* punu = add_synth("synth-punu", "PUNU risk sweep over gamma in [0,1]");
  add_synth("synth-pnu", "PNU risk sweep over eta in [-1,1]");
  CLI::App* tri = add_synth("synth-tri", "ternary grid over (gamma_pn, gamma_pu, gamma_nu)");

  MovielensConfig ml;
  ml.data_path = "u.data";
  SolverOptions ml_solver;
  ml_solver.s = ml.solver;
  std::optional<double> ml_threshold, ml_rho;
  CLI::App* mlc = app.add_subcommand("movielens", "two-stage PN / TRI evaluation on MovieLens u.data");
  mlc->add_option("--data", ml.data_path, "path to u.data")->capture_default_str();
  mlc->add_option("--n-val", ml.n_validation, "validation samples")->capture_default_str();
  mlc->add_option("--n-test", ml.n_test, "test samples")->capture_default_str();
  mlc->add_option("--threshold", ml_threshold, "binarization threshold (default: mean rating)");
  mlc->add_option("--rho", ml_rho, "misobservation rate (default: plug-in 1 - |train|/(d1 d2))");
  mlc->add_option("--decision-offset", ml.decision_offset, "predict +1 when f(X - offset) >= 1/2")
      ->capture_default_str();
  mlc->add_option("--alphas", ml.alphas, "stage-1 alpha candidates")->delimiter(',');
  mlc->add_option("--ranks", ml.ranks, "stage-1 rank candidates")->delimiter(',');
  mlc->add_option("--resolution", ml.ternary_resolution, "stage-2 ternary denominator m")->capture_default_str();
  mlc->add_option("--manifest-in", g.manifest_in, "replay the configuration of a previous manifest");
  ml_solver.add(mlc);

  std::string const_qpf;
  std::vector<double> const_alphas{0.5, 1.0, 2.0};
  CLI::App* constants = app.add_subcommand("constants", "print L_alpha, beta_alpha and U_alpha");
  constants->add_option("--alpha", const_alphas, "alpha values")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    if (chosen == constants) {
      const Qpf q = Qpf::parse(g.qpf.empty() ? "probit:1" : g.qpf);
      std::cout << "qpf,alpha,L_alpha,beta_alpha,U_alpha\n";
      for (double a : const_alphas) {
        std::cout << q.to_string() << ',' << format_double(a) << ',' << format_double(l_alpha(q, a)) << ','
                  << format_double(beta_alpha(q, a)) << ',' << format_double(u_alpha(q, a)) << '\n';
      }
      return 0;
    }
    if (chosen == mlc) {
      if (!g.manifest_in.empty()) {
        ml = MovielensConfig::from_manifest(Manifest::read(g.manifest_in));
      } else {
        ml.solver = ml_solver.get();
        ml.threshold = ml_threshold;
        ml.rho = ml_rho;
        ml.seed = g.seed;
        ml.threads = g.threads;
        ml.trials = g.trials;
        if (!g.qpf.empty() && Qpf::parse(g.qpf) != Qpf::logistic()) {
          throw std::invalid_argument("movielens uses the logistic QPF");
        }
      }
      return run_movielens_cmd(ml, g);
    }

    if (!g.manifest_in.empty()) {
      sweep = SweepConfig::from_manifest(Manifest::read(g.manifest_in));
    } else {
      if (!parse_dims(dims, sweep.setup.d1, sweep.setup.d2)) {
        throw std::invalid_argument("--dims expects D1xD2, got '" + dims + "'");
      }
      sweep.setup.obs_model = model_from(obs_model);
      sweep.setup.risk_rho = risk_rho;
      sweep.solver = synth_solver.get();
      sweep.seed = g.seed;
      sweep.threads = g.threads;
      sweep.grid.trials = g.trials;
      if (chosen == tri) {
        sweep.grid.kind = SweepKind::ternary;
        sweep.grid.resolution = resolution ? resolution : 20;
        sweep.setup.qpf = Qpf::scaled_logistic(7.0);
      } else {
        sweep.grid.kind = chosen == punu ? SweepKind::gamma_line : SweepKind::eta_line;
        sweep.grid.resolution = resolution ? resolution : 21;
      }
      if (!g.qpf.empty()) sweep.setup.qpf = Qpf::parse(g.qpf);
    }
    return run_synthetic(sweep, g, export_obs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
