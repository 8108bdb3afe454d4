#include <doctest.h>

#include <cmath>
#include <limits>

#include "bmc/manifest.hpp"
#include "bmc/matrix.hpp"
#include "bmc/rng.hpp"

using namespace bmc;

TEST_CASE("frobenius norm") {
  CHECK(frobenius_norm(DenseMatrix::Zero(2, 2)) == 0.0);
  CHECK(frobenius_norm(DenseMatrix::Identity(2, 2)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(frobenius_norm(DenseMatrix::Constant(2, 3, 2.0)) == doctest::Approx(std::sqrt(24.0)).epsilon(1e-15));
}

TEST_CASE("infinity norm takes absolute values") {
  CHECK(infinity_norm(DenseMatrix::Zero(3, 2)) == 0.0);
  DenseMatrix m = DenseMatrix::Zero(2, 2);
  m(1, 0) = -5.0;
  CHECK(infinity_norm(m) == 5.0);
  CHECK(infinity_norm(make_matrix(2, 2, {1, -3, 2, 0})) == 3.0);
}

TEST_CASE("weighted frobenius norm") {
  const DenseMatrix id = DenseMatrix::Identity(2, 2);
  CHECK(weighted_frobenius_norm(id, SamplingDistribution::uniform(2, 2)) ==
        doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));

  DenseMatrix point = DenseMatrix::Zero(2, 2);
  point(0, 0) = 1.0;
  DenseMatrix m = DenseMatrix::Zero(2, 2);
  m(0, 0) = 3.0;
  CHECK(weighted_frobenius_norm(m, SamplingDistribution::from_weights(point)) == doctest::Approx(3.0));

  const auto pi = SamplingDistribution::from_weights(make_matrix(2, 2, {0.5, 0.5, 0, 0}));
  CHECK(weighted_frobenius_norm(make_matrix(2, 2, {2, 4, 9, 9}), pi) == doctest::Approx(std::sqrt(10.0)));
}

TEST_CASE("sampling distribution validation") {
  CHECK_THROWS(SamplingDistribution::from_weights(make_matrix(1, 2, {0.6, 0.6})));
  CHECK_THROWS(SamplingDistribution::from_weights(make_matrix(1, 2, {1.5, -0.5})));
  const auto u = SamplingDistribution::uniform(4, 5);
  CHECK(u.weight(3, 4) == doctest::Approx(0.05));
  CHECK(u.max_weight() == doctest::Approx(0.05));
}

TEST_CASE("relative frobenius error") {
  const DenseMatrix t = make_matrix(2, 2, {1, -2, 3, 0.5});
  CHECK(relative_frobenius_error(t, t) == 0.0);
  CHECK(relative_frobenius_error(DenseMatrix::Zero(2, 2), t) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(relative_frobenius_error(2.0 * t, t) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS(relative_frobenius_error(t, DenseMatrix::Zero(2, 2)));
  CHECK_THROWS_AS(relative_frobenius_error(DenseMatrix::Zero(2, 3), t), ShapeError);
}

TEST_CASE("row two-infinity norm") {
  CHECK(row_two_infinity_norm(DenseMatrix::Identity(3, 3)) == 1.0);
  CHECK(row_two_infinity_norm(make_matrix(2, 2, {3, 4, 0, 1})) == doctest::Approx(5.0));
  CHECK(row_two_infinity_norm(DenseMatrix::Zero(2, 4)) == 0.0);
}

TEST_CASE("invalid matrices are rejected") {
  DenseMatrix m = DenseMatrix::Zero(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(check_valid(m));
  m(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS(check_valid(m));
  CHECK_THROWS(check_valid(DenseMatrix(0, 3)));
  CHECK_THROWS(make_matrix(2, 2, {1, 2, 3}));
}

TEST_CASE("ternary observation set") {
  TernaryObservation a(3, 4);
  CHECK(a.add(0, 1, 1));
  CHECK(a.add(2, 3, -1));
  CHECK_FALSE(a.add(0, 1, -1));
  CHECK(a.size() == 2);
  CHECK(a.contains(2, 3));
  CHECK_FALSE(a.contains(1, 1));
  CHECK_THROWS_AS(a.add(3, 0, 1), std::out_of_range);
  CHECK_THROWS(a.add(1, 1, 0));
  const SignMatrix d = a.to_dense();
  CHECK(d(0, 1) == 1);
  CHECK(d(2, 3) == -1);
  CHECK(d.cast<int>().cwiseAbs().sum() == 2);
}

TEST_CASE("counter rng is a pure function of key and counter") {
  const CounterRng r = stream(42, "quantize");
  const CounterRng s = stream(42, "quantize");
  CHECK(r.bits(7) == s.bits(7));
  CHECK(r.bits(7) != r.bits(8));
  CHECK(stream(42, "observe").bits(7) != r.bits(7));
  CHECK(stream(43, "quantize").bits(7) != r.bits(7));
  double mean = 0.0;
  for (std::uint64_t c = 0; c < 100000; ++c) {
    const double u = r.uniform(c);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    mean += u;
  }
  CHECK(mean / 100000.0 == doctest::Approx(0.5).epsilon(0.01));
  CHECK(r.open_uniform(3) > 0.0);
}

TEST_CASE("manifest round trip") {
  Manifest m;
  m.set("name", "synth-punu");
  m.set("alpha", 0.1);
  m.set("seed", std::uint64_t{18446744073709551615ULL});
  m.set("note", "a = b");
  const Manifest back = Manifest::parse(m.serialize());
  CHECK(back.get("name") == "synth-punu");
  CHECK(back.get_double("alpha") == 0.1);
  CHECK(back.get_u64("seed") == 18446744073709551615ULL);
  CHECK(back.get("note") == "a = b");
  CHECK_FALSE(back.find("missing").has_value());
  CHECK_THROWS(back.get("missing"));
  CHECK(back.serialize() == m.serialize());
}

TEST_CASE("format_double is shortest round trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  const double x = 1.0 / 3.0;
  CHECK(std::stod(format_double(x)) == x);
}
