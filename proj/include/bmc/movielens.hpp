#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmc/matrix.hpp"
#include "bmc/qpf.hpp"

namespace bmc {

struct RatingRecord {
  int user = 0;  // 1-based
  int item = 0;  // 1-based
  int rating = 0;
  std::int64_t timestamp = 0;

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Tab-separated `user item rating timestamp`, one record per line (u.data).
std::vector<RatingRecord> parse_movielens(std::istream& in);
std::vector<RatingRecord> load_movielens(const std::string& path);

struct MatrixShape {
  std::size_t users = 0;
  std::size_t items = 0;
};
MatrixShape shape_of(const std::vector<RatingRecord>& records);

// Keeps the last record for each (user, item); order of first appearance.
std::vector<RatingRecord> deduplicate(const std::vector<RatingRecord>& records);

double mean_rating(const std::vector<RatingRecord>& records);

struct BinarizedRatings {
  TernaryObservation observation;
  std::vector<int> ratings;  // original rating of observation.entries()[t]
  double threshold = 0.0;
};

// +1 when rating > threshold, else -1. nullopt threshold means the mean rating.
BinarizedRatings binarize(const std::vector<RatingRecord>& records, std::optional<double> threshold,
                          MatrixShape shape);

struct SplitSpec {
  std::size_t n_validation = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
};

struct RatingSplit {
  std::vector<RatingRecord> train;
  std::vector<RatingRecord> validation;
  std::vector<RatingRecord> test;
};

// Uniform random partition of the deduplicated records; each part keeps file order.
RatingSplit split(const std::vector<RatingRecord>& records, const SplitSpec& spec);

struct SignErrorTable {
  std::array<std::size_t, 5> count{};
  std::array<std::size_t, 5> wrong{};

  std::size_t total() const;
  double rate(int rating) const;  // 0 for an empty bucket
  double overall() const;
  // `rating,count,error` plus an `overall` row.
  std::string to_csv() const;
};

// Predicts +1 iff f(X_ij - offset) >= 1/2 (ties go to +1) and compares with the
// binarized label of each held-out record.
SignErrorTable sign_accuracy(const DenseMatrix& estimate, const std::vector<RatingRecord>& heldout,
                             double threshold, const Qpf& q, double offset = 0.0);

}  // namespace bmc
