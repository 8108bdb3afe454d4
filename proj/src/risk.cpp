#include "bmc/risk.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bmc {

namespace {

void check_rho(double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in [0, 1)");
}

void check_label(int a) {
  if (a < -1 || a > 1) throw std::invalid_argument("observation value must be -1, 0 or +1");
}

// l(x,+1), l(x,-1) and their x-derivatives in one pass.
struct NllTerms {
  double plus;
  double minus;
  double d_plus;
  double d_minus;
};

NllTerms nll_terms(const Qpf& q, double x) {
  if (q.kind() == QpfKind::probit) {
    const double z = x / q.parameter();
    const double lp = -log_normal_cdf(z);
    const double lm = -log_normal_cdf(-z);
    return {lp, lm, -normal_hazard(z) / q.parameter(), normal_hazard(-z) / q.parameter()};
  }
  const double s = q.parameter();
  const double t = s * x;
  const double e = std::exp(-std::abs(t));
  const double tail = std::log1p(e);
  const double sp_pos = std::max(t, 0.0) + tail;   // softplus(t)  = l(x,-1)
  const double sp_neg = std::max(-t, 0.0) + tail;  // softplus(-t) = l(x,+1)
  const double sig = t >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
  const double sig_neg = t >= 0.0 ? e / (1.0 + e) : 1.0 / (1.0 + e);
  return {sp_neg, sp_pos, -s * sig_neg, s * sig};
}

EntryCoefficients pn_table() {
  EntryCoefficients c;
  c.plus = {0.0, 0.0, 1.0};
  c.minus = {1.0, 0.0, 0.0};
  return c;
}

EntryCoefficients pu_table(double rho) {
  const double inv = 1.0 / (1.0 - rho);
  const double ratio = rho / (1.0 - rho);
  EntryCoefficients c;
  c.plus = {0.0, 0.0, inv};
  c.minus = {1.0, 1.0, -ratio};
  return c;
}

EntryCoefficients nu_table(double rho) {
  const double inv = 1.0 / (1.0 - rho);
  const double ratio = rho / (1.0 - rho);
  EntryCoefficients c;
  c.plus = {-ratio, 1.0, 1.0};
  c.minus = {inv, 0.0, 0.0};
  return c;
}

EntryCoefficients punu_table(double rho, double gamma) {
  const double ratio = rho / (1.0 - rho);
  EntryCoefficients c;
  // a = -1
  c.plus[0] = -gamma * ratio;
  c.minus[0] = (1.0 - (1.0 - gamma) * rho) / (1.0 - rho);
  // a = 0
  c.plus[1] = gamma;
  c.minus[1] = 1.0 - gamma;
  // a = +1
  c.plus[2] = (1.0 - gamma * rho) / (1.0 - rho);
  c.minus[2] = -(1.0 - gamma) * ratio;
  return c;
}

EntryCoefficients tri_table(double rho, const RiskWeights& w) {
  const EntryCoefficients pn = pn_table();
  const EntryCoefficients pu = pu_table(rho);
  const EntryCoefficients nu = nu_table(rho);
  EntryCoefficients c;
  for (std::size_t s = 0; s < 3; ++s) {
    c.plus[s] = w.gamma_pn * pn.plus[s] + w.gamma_pu * pu.plus[s] + w.gamma_nu * nu.plus[s];
    c.minus[s] = w.gamma_pn * pn.minus[s] + w.gamma_pu * pu.minus[s] + w.gamma_nu * nu.minus[s];
  }
  return c;
}

RiskWeights pnu_weights(double eta) {
  if (eta >= 0.0) return {1.0 - eta, eta, 0.0};
  return {1.0 + eta, 0.0, -eta};
}

void check_shapes(const DenseMatrix& x, const TernaryObservation& a) {
  if (static_cast<std::size_t>(x.rows()) != a.rows() || static_cast<std::size_t>(x.cols()) != a.cols()) {
    throw ShapeError("risk: estimate and observation shapes differ");
  }
}

}  // namespace

void RiskWeights::validate() const {
  for (double g : {gamma_pn, gamma_pu, gamma_nu}) {
    if (!(g >= 0.0 && g <= 1.0)) throw std::invalid_argument("risk weight outside [0, 1]");
  }
  if (std::abs(gamma_pn + gamma_pu + gamma_nu - 1.0) > 1e-12) {
    throw std::invalid_argument("risk weights must sum to 1");
  }
}

EntryLossKind EntryLossKind::punu(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("punu gamma must lie in [0, 1]");
  return EntryLossKind(RiskTag::punu, gamma, {});
}

EntryLossKind EntryLossKind::pnu(double eta) {
  if (!(eta >= -1.0 && eta <= 1.0)) throw std::invalid_argument("pnu eta must lie in [-1, 1]");
  return EntryLossKind(RiskTag::pnu, eta, pnu_weights(eta));
}

EntryLossKind EntryLossKind::tri(RiskWeights weights) {
  weights.validate();
  return EntryLossKind(RiskTag::tri, 0.0, weights);
}

std::string EntryLossKind::to_string() const {
  std::ostringstream out;
  switch (tag_) {
    case RiskTag::pn: out << "pn"; break;
    case RiskTag::pu: out << "pu"; break;
    case RiskTag::nu: out << "nu"; break;
    case RiskTag::punu: out << "punu(" << param_ << ")"; break;
    case RiskTag::pnu: out << "pnu(" << param_ << ")"; break;
    case RiskTag::tri:
      out << "tri(" << weights_.gamma_pn << "," << weights_.gamma_pu << "," << weights_.gamma_nu << ")";
      break;
  }
  return out.str();
}

EntryCoefficients entry_coefficients(const EntryLossKind& kind, double rho) {
  check_rho(rho);
  switch (kind.tag()) {
    case RiskTag::pn: return pn_table();
    case RiskTag::pu: return pu_table(rho);
    case RiskTag::nu: return nu_table(rho);
    case RiskTag::punu: return punu_table(rho, kind.parameter());
    // PNU is the TRI mixture on one edge of the simplex.
    case RiskTag::pnu:
    case RiskTag::tri: return tri_table(rho, kind.weights());
  }
  throw std::logic_error("unhandled risk kind");
}

double nll_entry_loss(const Qpf& q, double x, int a) {
  if (a != 1 && a != -1) throw std::invalid_argument("nll loss needs a = -1 or +1");
  const NllTerms t = nll_terms(q, x);
  return a == 1 ? t.plus : t.minus;
}

double pu_entry_loss(const Qpf& q, double rho, double x, int a) {
  check_rho(rho);
  check_label(a);
  if (a == 1) return (nll_entry_loss(q, x, 1) - rho * nll_entry_loss(q, x, -1)) / (1.0 - rho);
  return nll_entry_loss(q, x, -1);
}

double nu_entry_loss(const Qpf& q, double rho, double x, int a) {
  check_rho(rho);
  check_label(a);
  if (a == -1) return (nll_entry_loss(q, x, -1) - rho * nll_entry_loss(q, x, 1)) / (1.0 - rho);
  return nll_entry_loss(q, x, 1);
}

double punu_entry_loss(const Qpf& q, double rho, double gamma, double x, int a) {
  return entry_loss(EntryLossKind::punu(gamma), q, rho, x, a);
}

double entry_loss(const EntryLossKind& kind, const Qpf& q, double rho, double x, int a) {
  check_label(a);
  const EntryCoefficients c = entry_coefficients(kind, rho);
  const std::size_t s = EntryCoefficients::slot(a);
  const NllTerms t = nll_terms(q, x);
  return c.plus[s] * t.plus + c.minus[s] * t.minus;
}

RiskEvaluation evaluate_risk(const EntryCoefficients& coeffs, const Qpf& q, const DenseMatrix& x,
                             const SignMatrix& a, bool with_gradient) {
  if (x.rows() != a.rows() || x.cols() != a.cols()) throw ShapeError("risk: estimate and observation shapes differ");
  RiskEvaluation out;
  if (with_gradient) out.gradient.setZero(x.rows(), x.cols());
  std::array<bool, 3> active{};
  for (std::size_t s = 0; s < 3; ++s) active[s] = coeffs.plus[s] != 0.0 || coeffs.minus[s] != 0.0;

  double total = 0.0;
  const double* xs = x.data();
  const std::int8_t* as = a.data();
  double* gs = with_gradient ? out.gradient.data() : nullptr;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const std::size_t s = EntryCoefficients::slot(as[k]);
    if (!active[s]) continue;
    const NllTerms t = nll_terms(q, xs[k]);
    total += coeffs.plus[s] * t.plus + coeffs.minus[s] * t.minus;
    if (gs) gs[k] = coeffs.plus[s] * t.d_plus + coeffs.minus[s] * t.d_minus;
  }
  out.total = total;
  return out;
}

double risk_total(const EntryLossKind& kind, const Qpf& q, double rho, const DenseMatrix& x,
                  const TernaryObservation& a) {
  check_shapes(x, a);
  return evaluate_risk(entry_coefficients(kind, rho), q, x, a.to_dense(), false).total;
}

DenseMatrix risk_gradient(const EntryLossKind& kind, const Qpf& q, double rho, const DenseMatrix& x,
                          const TernaryObservation& a) {
  check_shapes(x, a);
  return evaluate_risk(entry_coefficients(kind, rho), q, x, a.to_dense(), true).gradient;
}

}  // namespace bmc
