#include "bmc/qpf.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bmc {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)
// Below this z the erfc route loses relative accuracy; switch to the
// asymptotic Mills-ratio series (truncation error < 2e-13 here).
constexpr double kProbitTail = -30.0;

double softplus(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

// 1 / (1 + exp(-t)) without overflow.
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// 1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8 - 945/z^10
double mills_series(double z) {
  const double w = 1.0 / (z * z);
  return 1.0 + w * (-1.0 + w * (3.0 + w * (-15.0 + w * (105.0 - w * 945.0))));
}

double clamp_open_unit(double p) {
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(p, lo, hi);
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double log_normal_cdf(double z) {
  if (z > 5.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  if (z > kProbitTail) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  return -0.5 * z * z - kLogSqrt2Pi - std::log(-z) + std::log(mills_series(z));
}

double normal_hazard(double z) {
  if (z > kProbitTail) return std::exp(-0.5 * z * z - kLogSqrt2Pi - log_normal_cdf(z));
  return -z / mills_series(z);
}

Qpf Qpf::probit(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("probit sigma must be > 0");
  return Qpf(QpfKind::probit, sigma);
}

Qpf Qpf::logistic() { return Qpf(QpfKind::logistic, 1.0); }

Qpf Qpf::scaled_logistic(double slope) {
  if (!(slope > 0.0) || !std::isfinite(slope)) throw std::invalid_argument("logistic slope must be > 0");
  return Qpf(QpfKind::scaled_logistic, slope);
}

Qpf Qpf::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  auto number = [&]() -> double {
    if (colon == std::string::npos) throw std::invalid_argument("qpf '" + text + "' needs a parameter");
    std::size_t used = 0;
    const std::string arg = text.substr(colon + 1);
    double v = 0.0;
    try {
      v = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != arg.size()) throw std::invalid_argument("bad qpf parameter in '" + text + "'");
    return v;
  };
  if (name == "probit") return probit(number());
  if (name == "logistic") {
    if (colon == std::string::npos) return logistic();
    return scaled_logistic(number());
  }
  throw std::invalid_argument("unknown qpf '" + text + "' (expected probit:SIGMA, logistic, logistic:S)");
}

std::string Qpf::to_string() const {
  auto num = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  switch (kind_) {
    case QpfKind::probit: return "probit:" + num(param_);
    case QpfKind::logistic: return "logistic";
    case QpfKind::scaled_logistic: return "logistic:" + num(param_);
  }
  return "?";
}

double Qpf::value(double x) const {
  if (kind_ == QpfKind::probit) return clamp_open_unit(normal_cdf(x / param_));
  return clamp_open_unit(sigmoid(param_ * x));
}

double Qpf::derivative(double x) const {
  if (kind_ == QpfKind::probit) {
    const double z = x / param_;
    return std::exp(-0.5 * z * z - kLogSqrt2Pi) / param_;
  }
  const double t = param_ * x;
  return param_ * sigmoid(t) * sigmoid(-t);
}

double Qpf::log_value(double x) const {
  if (kind_ == QpfKind::probit) return log_normal_cdf(x / param_);
  return -softplus(-param_ * x);
}

double Qpf::log_complement(double x) const {
  if (kind_ == QpfKind::probit) return log_normal_cdf(-x / param_);
  return -softplus(param_ * x);
}

double Qpf::log_derivative(double x) const {
  if (kind_ == QpfKind::probit) {
    const double z = x / param_;
    return -0.5 * z * z - kLogSqrt2Pi - std::log(param_);
  }
  const double t = param_ * x;
  return std::log(param_) - softplus(t) - softplus(-t);
}

double Qpf::d_neg_log_value(double x) const {
  if (kind_ == QpfKind::probit) return -normal_hazard(x / param_) / param_;
  return -param_ * sigmoid(-param_ * x);
}

double Qpf::d_neg_log_complement(double x) const {
  if (kind_ == QpfKind::probit) return normal_hazard(-x / param_) / param_;
  return param_ * sigmoid(param_ * x);
}

namespace {

// Maximizes g over [-alpha, alpha]: 2001-point grid, then golden-section
// refinement on the bracket around the best grid point.
double grid_sup(double alpha, const std::function<double(double)>& g) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be >= 0");
  if (alpha == 0.0) return g(0.0);
  constexpr int kPoints = 2001;
  const double step = 2.0 * alpha / (kPoints - 1);
  int best_k = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kPoints; ++k) {
    const double x = (k == kPoints - 1) ? alpha : -alpha + step * k;
    const double v = g(x);
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  double lo = std::max(-alpha, -alpha + step * (best_k - 1));
  double hi = std::min(alpha, -alpha + step * (best_k + 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double ga = g(a);
  double gb = g(b);
  for (int it = 0; it < 100 && hi - lo > 1e-15 * (1.0 + alpha); ++it) {
    if (ga < gb) {
      lo = a;
      a = b;
      ga = gb;
      b = lo + inv_phi * (hi - lo);
      gb = g(b);
    } else {
      hi = b;
      b = a;
      gb = ga;
      a = hi - inv_phi * (hi - lo);
      ga = g(a);
    }
  }
  return std::max({best, ga, gb});
}

}  // namespace

double l_alpha(const Qpf& q, double alpha) {
  if (q.kind() != QpfKind::probit) {
    // f' = s f (1 - f) for the logistic family, so the ratio is the slope.
    return grid_sup(alpha, [&](double) { return q.parameter(); });
  }
  return grid_sup(alpha, [&](double x) {
    return std::exp(q.log_derivative(x) - q.log_value(x) - q.log_complement(x));
  });
}

double beta_alpha(const Qpf& q, double alpha) {
  return grid_sup(alpha, [&](double x) {
    return std::exp(q.log_value(x) + q.log_complement(x) - 2.0 * q.log_derivative(x));
  });
}

double u_alpha(const Qpf& q, double alpha) {
  return grid_sup(alpha, [&](double x) { return -q.log_value(x) - q.log_complement(x); });
}

}  // namespace bmc
