#include <doctest.h>

#include <cmath>
#include <vector>

#include "bmc/risk.hpp"
#include "bmc/rng.hpp"

using namespace bmc;

namespace {

constexpr double kLog1pExpMinus2 = 0.126928011042972496;
constexpr double kNuRho085At1 = 6.97992835418488950;

std::vector<Qpf> qpfs() { return {Qpf::logistic(), Qpf::probit(1.0), Qpf::probit(0.3), Qpf::scaled_logistic(7.0)}; }

std::vector<EntryLossKind> all_kinds() {
  return {EntryLossKind::pn(),         EntryLossKind::pu(),          EntryLossKind::nu(),
          EntryLossKind::punu(0.3),    EntryLossKind::pnu(0.4),      EntryLossKind::pnu(-0.6),
          EntryLossKind::tri({0.2, 0.5, 0.3})};
}

struct Instance {
  DenseMatrix x;
  TernaryObservation a;
};

Instance random_instance(std::size_t d1, std::size_t d2, std::uint64_t seed) {
  const CounterRng rng(seed);
  Instance in{DenseMatrix(static_cast<Eigen::Index>(d1), static_cast<Eigen::Index>(d2)), TernaryObservation(d1, d2)};
  std::uint64_t c = 0;
  for (Eigen::Index i = 0; i < in.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < in.x.cols(); ++j) {
      in.x(i, j) = 2.0 * rng.uniform(c++) - 1.0;
      const double u = rng.uniform(c++);
      if (u < 0.3) in.a.add(static_cast<std::size_t>(i), static_cast<std::size_t>(j), 1);
      else if (u < 0.55) in.a.add(static_cast<std::size_t>(i), static_cast<std::size_t>(j), -1);
    }
  }
  return in;
}

}  // namespace

TEST_CASE("nll entry loss") {
  const Qpf q = Qpf::logistic();
  CHECK(nll_entry_loss(q, 0.0, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(nll_entry_loss(q, 0.0, -1) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(std::abs(nll_entry_loss(q, 2.0, 1) - kLog1pExpMinus2) <= 1e-15);
  CHECK_THROWS(nll_entry_loss(q, 0.0, 0));
}

TEST_CASE("PU entry loss") {
  for (const Qpf& q : qpfs()) {
    for (double x : {-0.9, 0.1, 0.6}) {
      CHECK(pu_entry_loss(q, 0.0, x, 1) == doctest::Approx(nll_entry_loss(q, x, 1)).epsilon(1e-14));
      CHECK(pu_entry_loss(q, 0.4, x, 0) == pu_entry_loss(q, 0.4, x, -1));
      CHECK(pu_entry_loss(q, 0.4, x, -1) == doctest::Approx(nll_entry_loss(q, x, -1)).epsilon(1e-14));
    }
  }
  CHECK(pu_entry_loss(Qpf::logistic(), 0.5, 0.0, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS(pu_entry_loss(Qpf::logistic(), 1.0, 0.0, 1));
  CHECK_THROWS(pu_entry_loss(Qpf::logistic(), 0.5, 0.0, 2));
}

TEST_CASE("NU entry loss") {
  for (const Qpf& q : {Qpf::logistic(), Qpf::probit(0.5)}) {
    for (double x : {-0.9, 0.1, 0.6}) {
      for (int a : {-1, 0, 1}) {
        CHECK(nu_entry_loss(q, 0.3, x, a) == doctest::Approx(pu_entry_loss(q, 0.3, -x, -a)).epsilon(1e-13));
      }
      CHECK(nu_entry_loss(q, 0.0, x, -1) == doctest::Approx(nll_entry_loss(q, x, -1)).epsilon(1e-14));
    }
  }
  CHECK(std::abs(nu_entry_loss(Qpf::logistic(), 0.85, 1.0, -1) - kNuRho085At1) <= 1e-13 * kNuRho085At1);
}

TEST_CASE("PUNU entry loss") {
  const Qpf q = Qpf::probit(0.4);
  for (double x : {-0.5, 0.2}) {
    for (int a : {-1, 0, 1}) {
      CHECK(punu_entry_loss(q, 0.6, 0.0, x, a) == doctest::Approx(pu_entry_loss(q, 0.6, x, a)).epsilon(1e-13));
      CHECK(punu_entry_loss(q, 0.6, 1.0, x, a) == doctest::Approx(nu_entry_loss(q, 0.6, x, a)).epsilon(1e-13));
      const double mix = 0.7 * pu_entry_loss(q, 0.6, x, a) + 0.3 * nu_entry_loss(q, 0.6, x, a);
      CHECK(punu_entry_loss(q, 0.6, 0.3, x, a) == doctest::Approx(mix).epsilon(1e-12));
    }
    const double mid = 0.3 * nll_entry_loss(q, x, 1) + 0.7 * nll_entry_loss(q, x, -1);
    CHECK(punu_entry_loss(q, 0.6, 0.3, x, 0) == doctest::Approx(mid).epsilon(1e-13));
  }
}

TEST_CASE("mixture endpoints are identical to the pure risks") {
  const double rho = 0.85;
  auto same = [&](const EntryLossKind& a, const EntryLossKind& b) {
    const EntryCoefficients ca = entry_coefficients(a, rho), cb = entry_coefficients(b, rho);
    return ca.plus == cb.plus && ca.minus == cb.minus;
  };
  CHECK(same(EntryLossKind::tri({1, 0, 0}), EntryLossKind::pn()));
  CHECK(same(EntryLossKind::tri({0, 1, 0}), EntryLossKind::pu()));
  CHECK(same(EntryLossKind::tri({0, 0, 1}), EntryLossKind::nu()));
  CHECK(same(EntryLossKind::pnu(0.0), EntryLossKind::pn()));
  CHECK(same(EntryLossKind::pnu(1.0), EntryLossKind::pu()));
  CHECK(same(EntryLossKind::pnu(-1.0), EntryLossKind::nu()));
  CHECK(same(EntryLossKind::punu(0.0), EntryLossKind::pu()));
  CHECK(same(EntryLossKind::punu(1.0), EntryLossKind::nu()));
  CHECK(same(EntryLossKind::pnu(0.25), EntryLossKind::tri({0.75, 0.25, 0})));
  CHECK(same(EntryLossKind::pnu(-0.25), EntryLossKind::tri({0.75, 0, 0.25})));
}

TEST_CASE("fully observed PU equals PN") {
  Instance in = random_instance(6, 7, 3);
  TernaryObservation full(6, 7);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 7; ++j) full.add(i, j, (i + j) % 3 == 0 ? -1 : 1);
  }
  const Qpf q = Qpf::logistic();
  CHECK(risk_total(EntryLossKind::pu(), q, 0.0, in.x, full) ==
        doctest::Approx(risk_total(EntryLossKind::pn(), q, 0.0, in.x, full)).epsilon(1e-13));
}

TEST_CASE("risk total is the sum of entry losses") {
  const Instance in = random_instance(5, 4, 9);
  const SignMatrix dense = in.a.to_dense();
  for (const Qpf& q : qpfs()) {
    for (const auto& kind : all_kinds()) {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < 5; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) sum += entry_loss(kind, q, 0.7, in.x(i, j), dense(i, j));
      }
      CHECK(risk_total(kind, q, 0.7, in.x, in.a) == doctest::Approx(sum).epsilon(1e-12));
    }
  }
}

TEST_CASE("analytic gradient matches central differences") {
  const double h = 1e-6;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Instance in = random_instance(6, 7, seed);
    for (const Qpf& q : qpfs()) {
      for (const auto& kind : all_kinds()) {
        const DenseMatrix g = risk_gradient(kind, q, 0.6, in.x, in.a);
        double worst = 0.0;
        for (Eigen::Index i = 0; i < 6; ++i) {
          for (Eigen::Index j = 0; j < 7; ++j) {
            DenseMatrix xp = in.x, xm = in.x;
            xp(i, j) += h;
            xm(i, j) -= h;
            const double fd = (risk_total(kind, q, 0.6, xp, in.a) - risk_total(kind, q, 0.6, xm, in.a)) / (2 * h);
            worst = std::max(worst, std::abs(g(i, j) - fd) / std::max(1.0, std::abs(fd)));
          }
        }
        CHECK_MESSAGE(worst < 1e-5, kind.to_string() << " " << q.to_string());
      }
    }
  }
}

TEST_CASE("PN gradient") {
  const Instance in = random_instance(6, 7, 4);
  const Qpf q = Qpf::logistic();
  const DenseMatrix g = risk_gradient(EntryLossKind::pn(), q, 0.5, in.x, in.a);
  const SignMatrix a = in.a.to_dense();
  for (Eigen::Index i = 0; i < 6; ++i) {
    for (Eigen::Index j = 0; j < 7; ++j) {
      if (a(i, j) == 0) CHECK(g(i, j) == 0.0);
      if (a(i, j) == 1) CHECK(g(i, j) == doctest::Approx(q.value(in.x(i, j)) - 1.0).epsilon(1e-13));
      if (a(i, j) == -1) CHECK(g(i, j) == doctest::Approx(q.value(in.x(i, j))).epsilon(1e-13));
    }
  }
}

TEST_CASE("risk stays finite far into the tails") {
  TernaryObservation a(1, 2);
  a.add(0, 0, 1);
  const DenseMatrix x = make_matrix(1, 2, {-30.0, 30.0});
  for (const Qpf& q : {Qpf::probit(0.1), Qpf::scaled_logistic(7.0)}) {
    for (const auto& kind : all_kinds()) {
      CHECK(std::isfinite(risk_total(kind, q, 0.85, x, a)));
      CHECK(risk_gradient(kind, q, 0.85, x, a).allFinite());
    }
  }
}

TEST_CASE("risk argument validation") {
  CHECK_THROWS(EntryLossKind::punu(1.5));
  CHECK_THROWS(EntryLossKind::pnu(-1.1));
  CHECK_THROWS(EntryLossKind::tri({0.5, 0.6, 0.0}));
  CHECK_THROWS(EntryLossKind::tri({-0.1, 0.6, 0.5}));
  const Instance in = random_instance(3, 3, 1);
  CHECK_THROWS_AS(risk_total(EntryLossKind::pn(), Qpf::logistic(), 0.5, DenseMatrix::Zero(3, 4), in.a), ShapeError);
  CHECK_THROWS(risk_total(EntryLossKind::pu(), Qpf::logistic(), 1.0, in.x, in.a));
}
