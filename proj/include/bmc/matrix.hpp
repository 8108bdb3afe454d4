#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace bmc {

// Row-major dense storage for targets, estimates, factors and gradients.
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Full quantization matrix Y (+1/-1) or dense observation matrix A (+1/0/-1).
using SignMatrix = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ObservedEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  int value = 0;  // -1 or +1

  friend bool operator==(const ObservedEntry&, const ObservedEntry&) = default;
};

// Sparse record of the observed set Omega with its signs. Unlisted cells are
// unobserved (implicit zeros of A). Each cell appears at most once.
class TernaryObservation {
 public:
  TernaryObservation() = default;
  TernaryObservation(std::size_t d1, std::size_t d2);
  TernaryObservation(std::size_t d1, std::size_t d2, std::vector<ObservedEntry> entries);

  std::size_t rows() const { return d1_; }
  std::size_t cols() const { return d2_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<ObservedEntry>& entries() const { return entries_; }

  // Returns false (and leaves the set unchanged) if (i, j) is already observed.
  bool add(std::size_t i, std::size_t j, int value);
  bool contains(std::size_t i, std::size_t j) const;

  // Dense A with zeros at unobserved cells.
  SignMatrix to_dense() const;

  std::size_t count(int value) const;

  friend bool operator==(const TernaryObservation&, const TernaryObservation&) = default;

 private:
  std::size_t d1_ = 0;
  std::size_t d2_ = 0;
  std::vector<ObservedEntry> entries_;
  std::vector<bool> seen_;  // d1*d2 occupancy bitmap
};

enum class SamplingKind { uniform, explicit_weights };

// Distribution Pi over cells. Explicit weights must lie in [0, 1] and sum to 1.
class SamplingDistribution {
 public:
  static SamplingDistribution uniform(std::size_t d1, std::size_t d2);
  static SamplingDistribution from_weights(DenseMatrix weights);

  SamplingKind kind() const { return kind_; }
  std::size_t rows() const { return d1_; }
  std::size_t cols() const { return d2_; }
  double weight(std::size_t i, std::size_t j) const;
  double max_weight() const;

 private:
  SamplingKind kind_ = SamplingKind::uniform;
  std::size_t d1_ = 0;
  std::size_t d2_ = 0;
  DenseMatrix weights_;
};

DenseMatrix make_matrix(std::size_t d1, std::size_t d2, const std::vector<double>& row_major);

// Throws std::invalid_argument on NaN/Inf or an empty shape.
void check_valid(const DenseMatrix& m);

// All reductions below walk the matrix in row-major order with a single
// sequential accumulator, so results are reproducible bit for bit.
double frobenius_norm(const DenseMatrix& m);
// max |m_ij|
double infinity_norm(const DenseMatrix& m);
double weighted_frobenius_norm(const DenseMatrix& m, const SamplingDistribution& pi);
double relative_frobenius_error(const DenseMatrix& estimate, const DenseMatrix& target);
// Largest row l2 norm (the 2->infinity operator norm).
double row_two_infinity_norm(const DenseMatrix& m);

}  // namespace bmc
