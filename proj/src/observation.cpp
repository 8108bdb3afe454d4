#include "bmc/observation.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmc/rng.hpp"

namespace bmc {

namespace {

DenseMatrix uniform_factor(const CounterRng& rng, std::size_t rows, std::size_t cols) {
  DenseMatrix f(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    f.data()[k] = 2.0 * rng.uniform(static_cast<std::uint64_t>(k)) - 1.0;
  }
  return f;
}

}  // namespace

SyntheticTarget synthesize_target(const SynthesisConfig& cfg) {
  if (cfg.d1 == 0 || cfg.d2 == 0) throw std::invalid_argument("target shape must be positive");
  if (cfg.rank == 0 || cfg.rank > std::min(cfg.d1, cfg.d2)) {
    throw std::invalid_argument("target rank must be in [1, min(d1, d2)]");
  }
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");

  for (std::uint64_t seed = cfg.seed;; ++seed) {
    const CounterRng rng = stream(seed, "target");
    DenseMatrix u = uniform_factor(rng.substream(0), cfg.d1, cfg.rank);
    DenseMatrix v = uniform_factor(rng.substream(1), cfg.d2, cfg.rank);
    DenseMatrix m = u * v.transpose();
    const double peak = infinity_norm(m);
    if (peak == 0.0) {
      std::cerr << "synthesize_target: degenerate draw for seed " << seed << ", redrawing\n";
      continue;
    }
    const double scale = cfg.alpha / peak;
    m *= scale;
    u *= scale;
    return {std::move(m), std::move(u), std::move(v), seed};
  }
}

SignMatrix quantize(const DenseMatrix& m, const Qpf& q, std::uint64_t seed) {
  const CounterRng rng = stream(seed, "quantize");
  SignMatrix y(m.rows(), m.cols());
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const double u = rng.uniform(static_cast<std::uint64_t>(k));
    y.data()[k] = (u < q.value(m.data()[k])) ? std::int8_t{1} : std::int8_t{-1};
  }
  return y;
}

TernaryObservation sample_observations(const SignMatrix& y, const ObservationConfig& cfg,
                                       SamplerTelemetry* telemetry) {
  const auto d1 = static_cast<std::size_t>(y.rows());
  const auto d2 = static_cast<std::size_t>(y.cols());
  const std::size_t cells = d1 * d2;
  if (cfg.rho.has_value() == cfg.n.has_value()) {
    throw std::invalid_argument("observation config needs exactly one of rho and n");
  }
  const SamplingDistribution pi = cfg.pi.value_or(SamplingDistribution::uniform(d1, d2));
  if (pi.rows() != d1 || pi.cols() != d2) throw ShapeError("sampling distribution shape differs from Y");

  double n_expected = 0.0;
  if (cfg.rho) {
    const double rho = *cfg.rho;
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in [0, 1)");
    if (pi.kind() != SamplingKind::uniform) {
      throw std::invalid_argument("rho is only defined for a uniform sampling distribution");
    }
    n_expected = (1.0 - rho) * static_cast<double>(cells);
  } else {
    n_expected = static_cast<double>(*cfg.n);
  }

  const CounterRng rng = stream(cfg.seed, "observe");
  TernaryObservation a(d1, d2);
  SamplerTelemetry stats;
  auto value_at = [&](std::size_t cell) { return static_cast<int>(y.data()[cell]); };

  switch (cfg.model) {
    case ObservationModel::multi_bernoulli: {
      const bool uniform_rho = cfg.rho.has_value();
      if (!uniform_rho && n_expected * pi.max_weight() > 1.0 + 1e-12) {
        throw std::invalid_argument("infeasible inclusion probability n * pi_ij > 1");
      }
      for (std::size_t cell = 0; cell < cells; ++cell) {
        const double p = uniform_rho ? 1.0 - *cfg.rho : n_expected * pi.weight(cell / d2, cell % d2);
        ++stats.draws;
        if (rng.uniform(cell) < p) a.add(cell / d2, cell % d2, value_at(cell));
      }
      break;
    }
    case ObservationModel::multinomial: {
      const auto n = cfg.n ? *cfg.n : static_cast<std::size_t>(std::llround(n_expected));
      std::vector<double> cumulative(cells);
      double acc = 0.0;
      for (std::size_t cell = 0; cell < cells; ++cell) {
        acc += pi.weight(cell / d2, cell % d2);
        cumulative[cell] = acc;
      }
      for (std::size_t t = 0; t < n; ++t) {
        const double u = rng.uniform(t) * acc;
        // First cell whose cumulative weight exceeds u; never a zero-weight cell.
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) it = std::lower_bound(cumulative.begin(), cumulative.end(), acc);
        const auto cell = static_cast<std::size_t>(it - cumulative.begin());
        ++stats.draws;
        if (!a.add(cell / d2, cell % d2, value_at(cell))) ++stats.duplicates;
      }
      break;
    }
    case ObservationModel::all_at_once: {
      const auto n = cfg.n ? *cfg.n : static_cast<std::size_t>(std::llround(n_expected));
      if (n > cells) throw std::invalid_argument("cannot sample more distinct cells than d1*d2");
      // Exponential keys log(u)/w: taking the n largest is distributed exactly
      // as n sequential weighted draws without replacement.
      std::vector<std::pair<double, std::size_t>> keys;
      keys.reserve(cells);
      for (std::size_t cell = 0; cell < cells; ++cell) {
        const double w = pi.weight(cell / d2, cell % d2);
        if (w <= 0.0) continue;
        keys.emplace_back(std::log(rng.open_uniform(cell)) / w, cell);
      }
      if (n > keys.size()) throw std::invalid_argument("fewer positive-weight cells than n");
      std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n), keys.end(),
                        [](const auto& l, const auto& r) {
                          return l.first != r.first ? l.first > r.first : l.second < r.second;
                        });
      for (std::size_t t = 0; t < n; ++t) {
        const std::size_t cell = keys[t].second;
        ++stats.draws;
        a.add(cell / d2, cell % d2, value_at(cell));
      }
      break;
    }
  }
  if (telemetry) *telemetry = stats;
  return a;
}

TernaryObservation pu_censor(const TernaryObservation& a) {
  TernaryObservation out(a.rows(), a.cols());
  for (const auto& e : a.entries()) {
    if (e.value == 1) out.add(e.i, e.j, e.value);
  }
  return out;
}

double plugin_rho(const TernaryObservation& a) {
  return 1.0 - static_cast<double>(a.size()) / static_cast<double>(a.rows() * a.cols());
}

}  // namespace bmc
