#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bmc/manifest.hpp"
#include "bmc/movielens.hpp"
#include "bmc/observation.hpp"
#include "bmc/qpf.hpp"
#include "bmc/risk.hpp"
#include "bmc/solver.hpp"

namespace bmc {

// Solver knobs shared by every experiment; R defaults to alpha * sqrt(r).
struct SolverSettings {
  double tau = 0.01;
  std::size_t max_iters = 1000;
  double tol = 1e-6;
  double tol_rank = 1e-3;
  std::size_t k_init = 0;    // 0: use the target rank
  std::size_t k_max = 0;     // 0: same as k_init
  std::size_t k_growth = 1;
  std::optional<double> R;
  bool backtracking = true;

  SolverConfig make(double alpha, std::size_t rank, std::uint64_t seed, std::size_t max_dim) const;
};

struct SyntheticSetup {
  std::size_t d1 = 100;
  std::size_t d2 = 100;
  std::size_t rank = 10;
  double alpha = 1.0;
  Qpf qpf = Qpf::probit(0.1);
  double rho = 0.85;                      // sampler misobservation rate
  std::optional<double> risk_rho;         // rho given to the risk; defaults to rho
  ObservationModel obs_model = ObservationModel::multi_bernoulli;
};

// One draw of (target, quantization, observation) and the seed for solver init.
struct TrialData {
  SyntheticTarget target;
  TernaryObservation observation;
  std::uint64_t solver_seed = 0;
};

// Seeds depend only on (master_seed, trial), so every grid point of a sweep
// sees the same data and solver start for a given trial.
TrialData make_trial(const SyntheticSetup& setup, std::uint64_t master_seed, std::size_t trial);

double run_synthetic_trial(const SyntheticSetup& setup, const SolverSettings& solver,
                           const EntryLossKind& kind, const TrialData& data);

enum class SweepKind { gamma_line, eta_line, ternary };

struct SweepGrid {
  SweepKind kind = SweepKind::gamma_line;
  std::size_t resolution = 21;  // points per line, or the lattice denominator m
  std::size_t trials = 10;
};

struct GridPoint {
  std::vector<double> coords;  // gamma; eta; or (gamma_pn, gamma_pu, gamma_nu)
  EntryLossKind kind = EntryLossKind::pn();
};

// gamma_k = k/(n-1); eta_k = (2k - (n-1))/(n-1); ternary (i, j, m-i-j)/m.
std::vector<GridPoint> grid_points(const SweepGrid& grid);

struct SweepRow {
  std::vector<double> coords;
  double mean_error = 0.0;
  double std_error = 0.0;
  std::vector<double> trial_errors;
};

struct SweepResult {
  SweepKind kind = SweepKind::gamma_line;
  std::vector<SweepRow> rows;

  std::string csv_header() const;
  std::string to_csv() const;
  const SweepRow& best() const;
};

struct SweepConfig {
  SyntheticSetup setup;
  SolverSettings solver;
  SweepGrid grid;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  void to_manifest(Manifest& m) const;
  static SweepConfig from_manifest(const Manifest& m);
};

using ProgressFn = std::function<void(const std::string&)>;

SweepResult run_sweep(const SweepConfig& cfg, const ProgressFn& progress = {});
SweepResult run_punu_sweep(SweepConfig cfg, const ProgressFn& progress = {});
SweepResult run_pnu_sweep(SweepConfig cfg, const ProgressFn& progress = {});
SweepResult run_tri_grid(SweepConfig cfg, const ProgressFn& progress = {});

// Runs fn(0..count-1) on a bounded pool; fn must only write to its own slot.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

double sample_mean(const std::vector<double>& xs);
double sample_std(const std::vector<double>& xs);

struct MovielensConfig {
  std::string data_path;
  std::size_t n_validation = 5000;
  std::size_t n_test = 5000;
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::optional<double> threshold;  // nullopt: mean rating
  std::optional<double> rho;        // nullopt: plug-in 1 - |train| / (d1 d2)
  double decision_offset = 0.0;
  std::vector<double> alphas{0.5, 1.0, 2.0, 4.0};
  std::vector<std::size_t> ranks{5, 10, 20, 40};
  std::size_t ternary_resolution = 10;
  // Fixed-step iteration: monotone backtracking stalls early on this data.
  SolverSettings solver = [] {
    SolverSettings s;
    s.tau = 0.003;
    s.backtracking = false;
    return s;
  }();

  void to_manifest(Manifest& m) const;
  static MovielensConfig from_manifest(const Manifest& m);
};

struct MovielensResult {
  bool training_only = false;
  double threshold = 0.0;
  double rho = 0.0;
  double best_alpha = 0.0;
  std::size_t best_rank = 0;
  RiskWeights best_weights;
  std::string stage1_csv;           // alpha,r,validation_error
  SweepResult grid_validation;      // stage-2 ternary grid on the tuning split
  SweepResult grid_test;
  std::vector<SignErrorTable> pn_validation, tri_validation, pn_test, tri_test;  // per trial
};

// Means over trials of each per-rating rate, as `rating,count,error`.
std::string mean_error_csv(const std::vector<SignErrorTable>& tables);

MovielensResult run_movielens(const MovielensConfig& cfg, const ProgressFn& progress = {});

}  // namespace bmc
