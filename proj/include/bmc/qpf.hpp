#pragma once

#include <string>

namespace bmc {

enum class QpfKind { probit, logistic, scaled_logistic };

// Quantization probability function f: P(Y_ij = +1) = f(M_ij).
//
// Besides f and f', the log-domain quantities the losses need are exposed
// directly so they stay finite far into the tails:
//   log f(x), log(1 - f(x)), and the derivatives of -log f and -log(1 - f).
class Qpf {
 public:
  static Qpf probit(double sigma);
  static Qpf logistic();
  static Qpf scaled_logistic(double slope);

  // "probit:SIGMA", "logistic", or "logistic:S".
  static Qpf parse(const std::string& text);
  std::string to_string() const;

  QpfKind kind() const { return kind_; }
  // sigma for probit, slope for the logistic kinds (1 for plain logistic).
  double parameter() const { return param_; }

  double value(double x) const;
  double derivative(double x) const;

  double log_value(double x) const;       // log f(x)
  double log_complement(double x) const;  // log(1 - f(x))
  double log_derivative(double x) const;  // log f'(x)

  // d/dx [-log f(x)] = -f'/f  and  d/dx [-log(1 - f(x))] = f'/(1 - f).
  double d_neg_log_value(double x) const;
  double d_neg_log_complement(double x) const;

  friend bool operator==(const Qpf&, const Qpf&) = default;

 private:
  Qpf(QpfKind kind, double param) : kind_(kind), param_(param) {}

  QpfKind kind_;
  double param_;
};

// Standard normal helpers, exposed for tests and for the threshold-model
// equivalence check.
double normal_cdf(double z);
double log_normal_cdf(double z);
// phi(z) / Phi(z), the inverse Mills ratio.
double normal_hazard(double z);

// sup over |x| <= alpha of |f'| / (f (1 - f)).
double l_alpha(const Qpf& q, double alpha);
// sup over |x| <= alpha of f (1 - f) / f'^2.
double beta_alpha(const Qpf& q, double alpha);
// sup over |x| <= alpha of log(1 / (f (1 - f))).
double u_alpha(const Qpf& q, double alpha);

}  // namespace bmc
