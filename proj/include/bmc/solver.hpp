#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "bmc/matrix.hpp"
#include "bmc/qpf.hpp"
#include "bmc/risk.hpp"

namespace bmc {

// X = u * v^T with u: d1 x k and v: d2 x k.
struct FactorPair {
  DenseMatrix u;
  DenseMatrix v;

  std::size_t rank() const { return static_cast<std::size_t>(u.cols()); }
  DenseMatrix product() const { return u * v.transpose(); }
};

struct SolverConfig {
  double alpha = 1.0;
  double R = 10.0;           // bound on squared row norms of u and v
  double tau = 1.0;          // initial step size
  std::size_t max_iters = 1000;
  double tol = 1e-6;         // relative objective decrease over the window
  std::size_t window = 5;
  double tol_rank = 1e-3;    // relative change of the estimate between ranks
  std::size_t k_init = 1;
  std::size_t k_max = 1;
  std::size_t k_growth = 1;
  std::size_t grow_after = 20;   // accepted steps before tau *= 1.1
  std::size_t max_halvings = 60;
  double warm_noise = 1e-6;  // times alpha, for the padded column
  // Backtracking keeps the objective monotone (halve tau on any increase).
  // Without it every finite step is taken at a fixed tau, and tau is halved
  // only when the objective stops being finite.
  bool backtracking = true;
  std::uint64_t seed = 0;

  void validate(std::size_t d1, std::size_t d2) const;
};

struct SolveReport {
  DenseMatrix estimate;
  FactorPair factors;
  std::size_t final_k = 0;
  std::vector<double> objective_trace;  // initial objective, then one per accepted step
  std::size_t iterations_used = 0;
  std::size_t halvings = 0;
  bool converged = false;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Called after every accepted iterate (and once for the initial point).
using IterateObserver = std::function<void(const FactorPair&, double objective)>;

// u - tau G v and v - tau G^T u, both from the pre-step pair.
FactorPair gradient_step(const FactorPair& f, const DenseMatrix& g, double tau);
// Rows whose squared l2 norm exceeds R are scaled back to squared norm R.
FactorPair project_max_norm(const FactorPair& f, double R);
// Scales both factors by sqrt(alpha / ||u v^T||_inf) when that norm exceeds alpha.
FactorPair rescale_infinity(const FactorPair& f, double alpha);

// Feasible random start: entries uniform on [-c, c] with c set so the product
// has infinity norm alpha / 2, then projected.
FactorPair initial_factors(std::size_t d1, std::size_t d2, std::size_t k, const SolverConfig& cfg);

// Projected gradient descent from `start`, with backtracking on tau.
SolveReport solve_from(const SignMatrix& a, const EntryLossKind& kind, const Qpf& q, double rho,
                       const SolverConfig& cfg, FactorPair start, const IterateObserver& observer = {});

// Warm start for rank k + extra: the old columns are kept and the new ones are
// filled with noise of amplitude warm_noise * alpha, then re-projected.
FactorPair pad_factors(const FactorPair& f, std::size_t extra, const SolverConfig& cfg);

SolveReport solve_fixed_rank(const TernaryObservation& a, const EntryLossKind& kind, const Qpf& q,
                             double rho, const SolverConfig& cfg, std::size_t k,
                             const IterateObserver& observer = {});

// Rank escalation k_init, k_init + k_growth, ... <= k_max, each rank warm
// started from the previous factors plus a near-zero column. Stops once the
// next rank no longer moves the estimate by tol_rank and returns the report of
// the rank that had already converged.
SolveReport solve(const TernaryObservation& a, const EntryLossKind& kind, const Qpf& q, double rho,
                  const SolverConfig& cfg, const IterateObserver& observer = {});

}  // namespace bmc
