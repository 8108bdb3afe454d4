#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "bmc/matrix.hpp"
#include "bmc/qpf.hpp"

namespace bmc {

struct SynthesisConfig {
  std::size_t d1 = 100;
  std::size_t d2 = 100;
  std::size_t rank = 10;
  double alpha = 1.0;
  std::uint64_t seed = 0;
};

// M = U V^T normalized to infinity norm alpha. `u` already carries the
// normalization factor, so m equals u * v^T up to rounding.
struct SyntheticTarget {
  DenseMatrix m;
  DenseMatrix u;
  DenseMatrix v;
  std::uint64_t seed_used = 0;  // differs from the requested seed only after a redraw
};

SyntheticTarget synthesize_target(const SynthesisConfig& cfg);

// Y_ij = +1 with probability f(M_ij), independently per cell.
SignMatrix quantize(const DenseMatrix& m, const Qpf& q, std::uint64_t seed);

enum class ObservationModel { multi_bernoulli, multinomial, all_at_once };

struct ObservationConfig {
  ObservationModel model = ObservationModel::multi_bernoulli;
  // Exactly one of rho / n. rho is the uniform misobservation rate and is only
  // accepted with a uniform distribution.
  std::optional<double> rho;
  std::optional<std::size_t> n;
  std::optional<SamplingDistribution> pi;  // uniform over the shape of y when unset
  std::uint64_t seed = 0;
};

struct SamplerTelemetry {
  std::size_t draws = 0;       // raw index draws (multinomial counts repeats)
  std::size_t duplicates = 0;  // repeats collapsed into an existing cell
};

TernaryObservation sample_observations(const SignMatrix& y, const ObservationConfig& cfg,
                                       SamplerTelemetry* telemetry = nullptr);

// Drops every -1 observation, leaving a positive-unlabeled observation.
TernaryObservation pu_censor(const TernaryObservation& a);

// Plug-in estimate 1 - |Omega| / (d1 d2).
double plugin_rho(const TernaryObservation& a);

}  // namespace bmc
