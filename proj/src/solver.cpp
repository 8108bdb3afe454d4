#include "bmc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bmc/rng.hpp"

namespace bmc {

void SolverConfig::validate(std::size_t d1, std::size_t d2) const {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("solver config: ") + what); };
  if (!(alpha > 0.0)) fail("alpha must be > 0");
  if (!(R > 0.0)) fail("R must be > 0");
  if (!(tau > 0.0)) fail("tau must be > 0");
  if (!(tol > 0.0)) fail("tol must be > 0");
  if (!(tol_rank > 0.0)) fail("tol_rank must be > 0");
  if (max_iters == 0) fail("max_iters must be positive");
  if (window == 0) fail("window must be positive");
  if (k_init == 0 || k_growth == 0) fail("k_init and k_growth must be positive");
  if (k_init > k_max || k_max > std::max(d1, d2)) fail("need k_init <= k_max <= max(d1, d2)");
}

FactorPair gradient_step(const FactorPair& f, const DenseMatrix& g, double tau) {
  if (g.rows() != f.u.rows() || g.cols() != f.v.rows()) throw ShapeError("gradient_step: gradient shape");
  FactorPair out;
  out.u = f.u;
  out.u.noalias() -= tau * (g * f.v);
  out.v = f.v;
  out.v.noalias() -= tau * (g.transpose() * f.u);
  return out;
}

namespace {

void project_rows(DenseMatrix& m, double R) {
  const double bound = std::sqrt(R);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double sq = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) sq += m(i, j) * m(i, j);
    if (sq > R) m.row(i) *= bound / std::sqrt(sq);
  }
}

}  // namespace

FactorPair project_max_norm(const FactorPair& f, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("project_max_norm: R must be > 0");
  FactorPair out = f;
  project_rows(out.u, R);
  project_rows(out.v, R);
  return out;
}

FactorPair rescale_infinity(const FactorPair& f, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("rescale_infinity: alpha must be > 0");
  const double peak = infinity_norm(f.product());
  if (peak <= alpha) return f;
  const double scale = std::sqrt(alpha / peak);
  return {f.u * scale, f.v * scale};
}

FactorPair initial_factors(std::size_t d1, std::size_t d2, std::size_t k, const SolverConfig& cfg) {
  const CounterRng rng = stream(cfg.seed, "init").substream(k);
  auto draw = [](const CounterRng& r, std::size_t rows, std::size_t cols) {
    DenseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index idx = 0; idx < m.size(); ++idx) {
      m.data()[idx] = 2.0 * r.uniform(static_cast<std::uint64_t>(idx)) - 1.0;
    }
    return m;
  };
  FactorPair f{draw(rng.substream(0), d1, k), draw(rng.substream(1), d2, k)};
  const double peak = infinity_norm(f.product());
  if (peak > 0.0) {
    const double c = std::sqrt(0.5 * cfg.alpha / peak);
    f.u *= c;
    f.v *= c;
  }
  return rescale_infinity(project_max_norm(f, cfg.R), cfg.alpha);
}

SolveReport solve_from(const SignMatrix& a, const EntryLossKind& kind, const Qpf& q, double rho,
                       const SolverConfig& cfg, FactorPair start, const IterateObserver& observer) {
  const EntryCoefficients coeffs = entry_coefficients(kind, rho);
  SolveReport report;
  FactorPair f = std::move(start);
  RiskEvaluation current = evaluate_risk(coeffs, q, f.product(), a, true);
  if (!std::isfinite(current.total)) {
    throw SolverError("initial objective is not finite for " + kind.to_string());
  }
  report.objective_trace.push_back(current.total);
  if (observer) observer(f, current.total);

  double tau = cfg.tau;
  std::size_t streak = 0;
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    bool accepted = false;
    bool saw_finite = false;
    FactorPair trial;
    RiskEvaluation next;
    for (std::size_t h = 0; h <= cfg.max_halvings; ++h) {
      trial = rescale_infinity(project_max_norm(gradient_step(f, current.gradient, tau), cfg.R), cfg.alpha);
      next = evaluate_risk(coeffs, q, trial.product(), a, true);
      if (std::isfinite(next.total)) {
        saw_finite = true;
        if (!cfg.backtracking || next.total <= current.total) {
          accepted = true;
          break;
        }
      }
      tau *= 0.5;
      streak = 0;
      ++report.halvings;
    }
    if (!accepted) {
      if (!saw_finite) {
        std::ostringstream msg;
        msg << "objective not finite after " << cfg.max_halvings << " step halvings (tau=" << tau
            << ", iteration " << it << ")";
        throw SolverError(msg.str());
      }
      // No descent even for a vanishing step: stationary for this scheme.
      report.converged = true;
      break;
    }
    f = std::move(trial);
    current = std::move(next);
    report.objective_trace.push_back(current.total);
    report.iterations_used = it + 1;
    if (observer) observer(f, current.total);
    if (cfg.backtracking && ++streak >= cfg.grow_after) {
      tau *= 1.1;
      streak = 0;
    }
    const auto& trace = report.objective_trace;
    if (trace.size() > cfg.window) {
      const double before = trace[trace.size() - 1 - cfg.window];
      const double scale = std::max(std::abs(before), std::numeric_limits<double>::min());
      // Without backtracking the trace need not be monotone, so every step in
      // the window must be small, not just the net change across it.
      double change = before - current.total;
      if (!cfg.backtracking) {
        change = 0.0;
        for (std::size_t s = trace.size() - cfg.window; s < trace.size(); ++s) {
          change = std::max(change, std::abs(trace[s] - trace[s - 1]));
        }
      }
      if (change / scale < cfg.tol) {
        report.converged = true;
        break;
      }
    }
  }
  report.estimate = f.product();
  report.final_k = f.rank();
  report.factors = std::move(f);
  return report;
}

SolveReport solve_fixed_rank(const TernaryObservation& a, const EntryLossKind& kind, const Qpf& q,
                             double rho, const SolverConfig& cfg, std::size_t k,
                             const IterateObserver& observer) {
  if (a.empty()) throw std::invalid_argument("solve: observation set is empty");
  if (k == 0) throw std::invalid_argument("solve: rank must be positive");
  cfg.validate(a.rows(), a.cols());
  FactorPair start = initial_factors(a.rows(), a.cols(), k, cfg);
  return solve_from(a.to_dense(), kind, q, rho, cfg, std::move(start), observer);
}

FactorPair pad_factors(const FactorPair& f, std::size_t extra, const SolverConfig& cfg) {
  const std::size_t k = f.rank();
  const CounterRng rng = stream(cfg.seed, "pad").substream(k);
  const double amp = cfg.warm_noise * cfg.alpha;
  FactorPair out;
  out.u = DenseMatrix::Zero(f.u.rows(), static_cast<Eigen::Index>(k + extra));
  out.v = DenseMatrix::Zero(f.v.rows(), static_cast<Eigen::Index>(k + extra));
  out.u.leftCols(static_cast<Eigen::Index>(k)) = f.u;
  out.v.leftCols(static_cast<Eigen::Index>(k)) = f.v;
  std::uint64_t counter = 0;
  for (Eigen::Index i = 0; i < out.u.rows(); ++i) {
    for (Eigen::Index j = static_cast<Eigen::Index>(k); j < out.u.cols(); ++j) {
      out.u(i, j) = amp * (2.0 * rng.uniform(counter++) - 1.0);
    }
  }
  for (Eigen::Index i = 0; i < out.v.rows(); ++i) {
    for (Eigen::Index j = static_cast<Eigen::Index>(k); j < out.v.cols(); ++j) {
      out.v(i, j) = amp * (2.0 * rng.uniform(counter++) - 1.0);
    }
  }
  return rescale_infinity(project_max_norm(out, cfg.R), cfg.alpha);
}

SolveReport solve(const TernaryObservation& a, const EntryLossKind& kind, const Qpf& q, double rho,
                  const SolverConfig& cfg, const IterateObserver& observer) {
  SolveReport report = solve_fixed_rank(a, kind, q, rho, cfg, cfg.k_init, observer);
  std::size_t total_iters = report.iterations_used;
  const SignMatrix dense = a.to_dense();
  for (std::size_t k = cfg.k_init + cfg.k_growth; k <= cfg.k_max; k += cfg.k_growth) {
    SolveReport next = solve_from(dense, kind, q, rho, cfg, pad_factors(report.factors, cfg.k_growth, cfg), observer);
    total_iters += next.iterations_used;
    const double base = frobenius_norm(report.estimate);
    const double change = base > 0.0 ? relative_frobenius_error(next.estimate, report.estimate)
                                     : frobenius_norm(next.estimate);
    if (change < cfg.tol_rank) break;
    report = std::move(next);
  }
  report.iterations_used = total_iters;
  report.final_k = report.factors.rank();
  return report;
}

}  // namespace bmc
