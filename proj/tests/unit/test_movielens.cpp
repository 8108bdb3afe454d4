#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "bmc/movielens.hpp"

using namespace bmc;

namespace {

std::vector<RatingRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_movielens(in);
}

std::vector<RatingRecord> synthetic_records(std::size_t n) {
  std::vector<RatingRecord> out;
  for (std::size_t t = 0; t < n; ++t) {
    out.push_back({static_cast<int>(t % 97) + 1, static_cast<int>(t / 97) + 1, static_cast<int>(t % 5) + 1,
                   static_cast<std::int64_t>(t)});
  }
  return out;
}

}  // namespace

TEST_CASE("parse u.data lines") {
  const auto r = parse("196\t242\t3\t881250949\n");
  REQUIRE(r.size() == 1);
  CHECK(r[0] == RatingRecord{196, 242, 3, 881250949});
  CHECK(parse("").empty());
  CHECK(parse("1\t2\t5\t7\r\n\n3\t4\t1\t8\n").size() == 2);
}

TEST_CASE("parse errors name the line") {
  try {
    parse("1\t2\t3\t4\n5\t6\t6\t7\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("1\t2\t3\n"), ParseError);
  CHECK_THROWS_AS(parse("0\t2\t3\t4\n"), ParseError);
  CHECK_THROWS_AS(parse("1\tx\t3\t4\n"), ParseError);
  CHECK_THROWS(load_movielens("/nonexistent/u.data"));
}

TEST_CASE("deduplicate keeps the last rating") {
  const auto d = deduplicate({{1, 1, 2, 0}, {2, 1, 3, 0}, {1, 1, 5, 9}});
  REQUIRE(d.size() == 2);
  CHECK(d[0] == RatingRecord{1, 1, 5, 9});
  CHECK(d[1].user == 2);
}

TEST_CASE("binarize") {
  const std::vector<RatingRecord> rs{{1, 1, 3, 0}, {1, 2, 4, 0}, {2, 1, 1, 0}, {2, 3, 5, 0}};
  const auto b = binarize(rs, 3.5, shape_of(rs));
  const SignMatrix a = b.observation.to_dense();
  CHECK(a.rows() == 2);
  CHECK(a.cols() == 3);
  CHECK(a(0, 0) == -1);
  CHECK(a(0, 1) == 1);
  CHECK(a(1, 0) == -1);
  CHECK(a(1, 2) == 1);
  CHECK(a(1, 1) == 0);
  CHECK(b.ratings == std::vector<int>{3, 4, 1, 5});

  const auto automatic = binarize(rs, std::nullopt, shape_of(rs));
  CHECK(automatic.threshold == doctest::Approx(3.25));
  CHECK(mean_rating(rs) == doctest::Approx(3.25));
}

TEST_CASE("split sizes and determinism") {
  const auto recs = synthetic_records(1000);
  const auto all_train = split(recs, {0, 0, 1});
  CHECK(all_train.train.size() == 1000);
  CHECK(all_train.validation.empty());

  const auto s = split(recs, {100, 50, 3});
  CHECK(s.train.size() == 850);
  CHECK(s.validation.size() == 100);
  CHECK(s.test.size() == 50);
  const auto again = split(recs, {100, 50, 3});
  CHECK(again.train == s.train);
  CHECK(again.validation == s.validation);
  CHECK(again.test == s.test);
  CHECK(split(recs, {100, 50, 4}).validation != s.validation);

  std::set<std::int64_t> seen;
  for (const auto* part : {&s.train, &s.validation, &s.test}) {
    for (const auto& r : *part) seen.insert(r.timestamp);
  }
  CHECK(seen.size() == 1000);
  CHECK_THROWS(split(recs, {600, 500, 1}));
}

TEST_CASE("sign accuracy") {
  const std::vector<RatingRecord> held{{1, 1, 5, 0}, {1, 2, 4, 0}, {2, 1, 1, 0}, {2, 2, 2, 0}};
  const Qpf q = Qpf::logistic();
  const DenseMatrix plus = DenseMatrix::Constant(2, 2, 10.0);
  const auto all_pos = sign_accuracy(plus, {{1, 1, 5, 0}, {1, 2, 4, 0}}, 3.5, q);
  CHECK(all_pos.overall() == 0.0);
  CHECK(all_pos.rate(5) == 0.0);

  // Zero estimate: f = 1/2 ties go to +1.
  const auto zero = sign_accuracy(DenseMatrix::Zero(2, 2), held, 3.5, q);
  CHECK(zero.overall() == 0.5);
  CHECK(zero.rate(1) == 1.0);
  CHECK(zero.rate(5) == 0.0);
  CHECK(zero.rate(3) == 0.0);

  double weighted = 0.0;
  for (int r = 1; r <= 5; ++r) weighted += zero.rate(r) * static_cast<double>(zero.count[static_cast<std::size_t>(r - 1)]);
  CHECK(weighted / static_cast<double>(zero.total()) == doctest::Approx(zero.overall()));

  const auto shifted = sign_accuracy(DenseMatrix::Zero(2, 2), held, 3.5, q, 0.5);
  CHECK(shifted.overall() == 0.5);
  CHECK(shifted.rate(1) == 0.0);

  const std::string csv = zero.to_csv();
  CHECK(csv.rfind("rating,count,error\n", 0) == 0);
  CHECK(csv.find("overall,4,0.5") != std::string::npos);
}

TEST_CASE("MovieLens-100k file" * doctest::skip(std::getenv("BMC_MOVIELENS_PATH") == nullptr)) {
  const auto recs = load_movielens(std::getenv("BMC_MOVIELENS_PATH"));
  CHECK(recs.size() == 100000);
  CHECK(recs.front() == RatingRecord{196, 242, 3, 881250949});
  const double mean = mean_rating(recs);
  CHECK(mean == doctest::Approx(3.52986).epsilon(1e-5));
  const MatrixShape shape = shape_of(recs);
  CHECK(shape.users == 943);
  CHECK(shape.items == 1682);
  const auto automatic = binarize(recs, std::nullopt, shape);
  const auto fixed = binarize(recs, 3.5, shape);
  CHECK(automatic.observation.to_dense() == fixed.observation.to_dense());
  const auto s = split(recs, {5000, 5000, 1});
  CHECK(s.train.size() == 90000);
}
