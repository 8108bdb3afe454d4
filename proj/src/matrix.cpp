#include "bmc/matrix.hpp"

#include <cmath>
#include <string>

namespace bmc {

namespace {

void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace

TernaryObservation::TernaryObservation(std::size_t d1, std::size_t d2)
    : d1_(d1), d2_(d2), seen_(d1 * d2, false) {
  if (d1 == 0 || d2 == 0) throw std::invalid_argument("observation shape must be positive");
}

TernaryObservation::TernaryObservation(std::size_t d1, std::size_t d2,
                                       std::vector<ObservedEntry> entries)
    : TernaryObservation(d1, d2) {
  entries_.reserve(entries.size());
  for (const auto& e : entries) {
    if (!add(e.i, e.j, e.value)) {
      throw std::invalid_argument("duplicate observation at (" + std::to_string(e.i) + "," +
                                  std::to_string(e.j) + ")");
    }
  }
}

bool TernaryObservation::add(std::size_t i, std::size_t j, int value) {
  if (i >= d1_ || j >= d2_) {
    throw std::out_of_range("observation index (" + std::to_string(i) + "," + std::to_string(j) +
                            ") outside " + std::to_string(d1_) + "x" + std::to_string(d2_));
  }
  if (value != 1 && value != -1) throw std::invalid_argument("observed value must be -1 or +1");
  const std::size_t cell = i * d2_ + j;
  if (seen_[cell]) return false;
  seen_[cell] = true;
  entries_.push_back({i, j, value});
  return true;
}

bool TernaryObservation::contains(std::size_t i, std::size_t j) const {
  return i < d1_ && j < d2_ && seen_[i * d2_ + j];
}

SignMatrix TernaryObservation::to_dense() const {
  SignMatrix a = SignMatrix::Zero(static_cast<Eigen::Index>(d1_), static_cast<Eigen::Index>(d2_));
  for (const auto& e : entries_) {
    a(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) =
        static_cast<std::int8_t>(e.value);
  }
  return a;
}

std::size_t TernaryObservation::count(int value) const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += (e.value == value);
  return n;
}

SamplingDistribution SamplingDistribution::uniform(std::size_t d1, std::size_t d2) {
  if (d1 == 0 || d2 == 0) throw std::invalid_argument("distribution shape must be positive");
  SamplingDistribution pi;
  pi.kind_ = SamplingKind::uniform;
  pi.d1_ = d1;
  pi.d2_ = d2;
  return pi;
}

SamplingDistribution SamplingDistribution::from_weights(DenseMatrix weights) {
  check_valid(weights);
  double total = 0.0;
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    for (Eigen::Index j = 0; j < weights.cols(); ++j) {
      const double w = weights(i, j);
      if (w < 0.0 || w > 1.0) throw std::invalid_argument("sampling weight outside [0, 1]");
      total += w;
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("sampling weights must sum to 1 (got " + std::to_string(total) + ")");
  }
  SamplingDistribution pi;
  pi.kind_ = SamplingKind::explicit_weights;
  pi.d1_ = static_cast<std::size_t>(weights.rows());
  pi.d2_ = static_cast<std::size_t>(weights.cols());
  pi.weights_ = std::move(weights);
  return pi;
}

double SamplingDistribution::weight(std::size_t i, std::size_t j) const {
  if (kind_ == SamplingKind::uniform) return 1.0 / static_cast<double>(d1_ * d2_);
  return weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

double SamplingDistribution::max_weight() const {
  if (kind_ == SamplingKind::uniform) return 1.0 / static_cast<double>(d1_ * d2_);
  return weights_.maxCoeff();
}

DenseMatrix make_matrix(std::size_t d1, std::size_t d2, const std::vector<double>& row_major) {
  require_shape(row_major.size() == d1 * d2, "entry count does not match shape");
  DenseMatrix m(static_cast<Eigen::Index>(d1), static_cast<Eigen::Index>(d2));
  for (std::size_t k = 0; k < row_major.size(); ++k) m.data()[k] = row_major[k];
  check_valid(m);
  return m;
}

void check_valid(const DenseMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw std::invalid_argument("matrix shape must be positive");
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    if (!std::isfinite(m.data()[k])) throw std::invalid_argument("matrix has non-finite entry");
  }
}

double frobenius_norm(const DenseMatrix& m) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < m.size(); ++k) sum += m.data()[k] * m.data()[k];
  return std::sqrt(sum);
}

double infinity_norm(const DenseMatrix& m) {
  double best = 0.0;
  for (Eigen::Index k = 0; k < m.size(); ++k) best = std::max(best, std::abs(m.data()[k]));
  return best;
}

double weighted_frobenius_norm(const DenseMatrix& m, const SamplingDistribution& pi) {
  require_shape(static_cast<std::size_t>(m.rows()) == pi.rows() &&
                    static_cast<std::size_t>(m.cols()) == pi.cols(),
                "weighted norm: matrix and distribution shapes differ");
  if (pi.kind() == SamplingKind::uniform) {
    return frobenius_norm(m) / std::sqrt(static_cast<double>(m.size()));
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      sum += pi.weight(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) * m(i, j) * m(i, j);
    }
  }
  return std::sqrt(sum);
}

double relative_frobenius_error(const DenseMatrix& estimate, const DenseMatrix& target) {
  require_shape(estimate.rows() == target.rows() && estimate.cols() == target.cols(),
                "relative error: shapes differ");
  const double denom = frobenius_norm(target);
  if (denom == 0.0) throw std::invalid_argument("relative error: target has zero norm");
  double sum = 0.0;
  for (Eigen::Index k = 0; k < target.size(); ++k) {
    const double diff = estimate.data()[k] - target.data()[k];
    sum += diff * diff;
  }
  return std::sqrt(sum) / denom;
}

double row_two_infinity_norm(const DenseMatrix& m) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double sq = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) sq += m(i, j) * m(i, j);
    best = std::max(best, sq);
  }
  return std::sqrt(best);
}

}  // namespace bmc
