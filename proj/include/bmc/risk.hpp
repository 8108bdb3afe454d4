#pragma once

#include <array>
#include <string>

#include "bmc/matrix.hpp"
#include "bmc/qpf.hpp"

namespace bmc {

// Mixture weights of the PN, PU and NU risks; must lie on the simplex.
struct RiskWeights {
  double gamma_pn = 1.0;
  double gamma_pu = 0.0;
  double gamma_nu = 0.0;

  void validate() const;
  friend bool operator==(const RiskWeights&, const RiskWeights&) = default;
};

enum class RiskTag { pn, pu, nu, punu, pnu, tri };

class EntryLossKind {
 public:
  static EntryLossKind pn() { return EntryLossKind(RiskTag::pn, 0.0, {}); }
  static EntryLossKind pu() { return EntryLossKind(RiskTag::pu, 0.0, {}); }
  static EntryLossKind nu() { return EntryLossKind(RiskTag::nu, 0.0, {}); }
  static EntryLossKind punu(double gamma);
  static EntryLossKind pnu(double eta);
  static EntryLossKind tri(RiskWeights weights);

  RiskTag tag() const { return tag_; }
  // gamma for punu, eta for pnu.
  double parameter() const { return param_; }
  const RiskWeights& weights() const { return weights_; }
  std::string to_string() const;

  friend bool operator==(const EntryLossKind&, const EntryLossKind&) = default;

 private:
  EntryLossKind(RiskTag tag, double param, RiskWeights weights)
      : tag_(tag), param_(param), weights_(weights) {}

  RiskTag tag_;
  double param_;
  RiskWeights weights_;
};

// Every entry loss in this family is c_plus(a) * l(x,+1) + c_minus(a) * l(x,-1)
// with l the negative log-likelihood; the table holds those coefficients for
// a = -1, 0, +1 (index a + 1).
struct EntryCoefficients {
  std::array<double, 3> plus{};
  std::array<double, 3> minus{};

  static std::size_t slot(int a) { return static_cast<std::size_t>(a + 1); }
};

EntryCoefficients entry_coefficients(const EntryLossKind& kind, double rho);

// l(x, a): -log f(x) for a = +1, -log(1 - f(x)) for a = -1.
double nll_entry_loss(const Qpf& q, double x, int a);
// a = +1: (l(x,+1) - rho l(x,-1)) / (1 - rho); a in {0, -1}: l(x,-1).
double pu_entry_loss(const Qpf& q, double rho, double x, int a);
// a = -1: (l(x,-1) - rho l(x,+1)) / (1 - rho); a in {0, +1}: l(x,+1).
double nu_entry_loss(const Qpf& q, double rho, double x, int a);
// (1 - gamma) PU + gamma NU, evaluated through the expanded per-class form.
double punu_entry_loss(const Qpf& q, double rho, double gamma, double x, int a);
// Any kind, through its coefficient table.
double entry_loss(const EntryLossKind& kind, const Qpf& q, double rho, double x, int a);

struct RiskEvaluation {
  double total = 0.0;
  DenseMatrix gradient;  // empty unless requested
};

// Sum of entry losses over all cells (unobserved cells use a = 0). Cells whose
// two coefficients are both zero are skipped, so PN only touches Omega.
RiskEvaluation evaluate_risk(const EntryCoefficients& coeffs, const Qpf& q, const DenseMatrix& x,
                             const SignMatrix& a, bool with_gradient);

double risk_total(const EntryLossKind& kind, const Qpf& q, double rho, const DenseMatrix& x,
                  const TernaryObservation& a);
DenseMatrix risk_gradient(const EntryLossKind& kind, const Qpf& q, double rho, const DenseMatrix& x,
                          const TernaryObservation& a);

}  // namespace bmc
