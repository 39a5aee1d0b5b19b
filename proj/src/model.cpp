#include "curemc/model.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace curemc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// 1 + gamma v may land a few ulps below zero where it is exactly zero
// analytically (gamma*theta = -e, the zero-cure point).
constexpr double kBaseSnap = 1e-12;

// log(gamma v) beyond which log1p(gamma v) is evaluated from logs.
constexpr double kLogOverflowGuard = 30.0;

void require_weibull_domain(double y, double alpha1, double alpha2) {
  if (!(y > 0.0) || !(alpha1 > 0.0) || !(alpha2 > 0.0)) {
    throw std::domain_error("weibull: y, alpha1 and alpha2 must be positive");
  }
}

}  // namespace

std::vector<double> ModelParams::to_vector() const {
  std::vector<double> v{gamma, lambda, alpha1, alpha2};
  v.insert(v.end(), beta.begin(), beta.end());
  return v;
}

ModelParams ModelParams::from_vector(std::span<const double> v) {
  if (v.size() < 5) throw std::invalid_argument("parameter vector needs at least 5 entries");
  ModelParams p;
  p.gamma = v[0];
  p.lambda = v[1];
  p.alpha1 = v[2];
  p.alpha2 = v[3];
  p.beta.assign(v.begin() + 4, v.end());
  return p;
}

bool ModelParams::in_support() const {
  if (!std::isfinite(gamma) || gamma == 0.0) return false;
  if (!(lambda > 0.0) || !(alpha1 > 0.0) || !(alpha2 > 0.0)) return false;
  if (!std::isfinite(lambda) || !std::isfinite(alpha1) || !std::isfinite(alpha2)) return false;
  for (double b : beta) {
    if (!std::isfinite(b)) return false;
  }
  return true;
}

std::vector<std::string> param_names(std::size_t n_beta) {
  std::vector<std::string> names{"gamma", "lambda", "alpha1", "alpha2"};
  for (std::size_t j = 0; j < n_beta; ++j) names.push_back("beta" + std::to_string(j));
  return names;
}

void Dataset::validate() const {
  const std::size_t n = y.size();
  if (delta.size() != n) throw ValidationError("dataset: delta length differs from y");
  if (x.size() != n * k) throw ValidationError("dataset: covariate matrix is not n x k");
  if (!covariate_names.empty() && covariate_names.size() != k) {
    throw ValidationError("dataset: covariate name count differs from k");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
      throw ValidationError("dataset: y must be positive and finite (row " + std::to_string(i + 1) + ")");
    }
    if (delta[i] > 1) {
      throw ValidationError("dataset: delta must be 0 or 1 (row " + std::to_string(i + 1) + ")");
    }
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw ValidationError("dataset: non-finite covariate (row " + std::to_string(i / k + 1) + ")");
    }
  }
}

std::vector<std::size_t> Dataset::censored_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (delta[i] == 0) idx.push_back(i);
  }
  return idx;
}

bool LatentState::consistent_with(const Dataset& data) const {
  if (ind.size() != data.size()) return false;
  for (std::size_t i = 0; i < ind.size(); ++i) {
    if (ind[i] > 1) return false;
    if (data.delta[i] == 1 && ind[i] != 1) return false;
  }
  return true;
}

double weibull_cdf(double y, double alpha1, double alpha2) {
  require_weibull_domain(y, alpha1, alpha2);
  return -std::expm1(-std::pow(alpha1 * y, alpha2));
}

double weibull_pdf(double y, double alpha1, double alpha2) {
  return std::exp(weibull_log_pdf(y, alpha1, alpha2));
}

double weibull_log_cdf(double y, double alpha1, double alpha2) {
  require_weibull_domain(y, alpha1, alpha2);
  return std::log(-std::expm1(-std::pow(alpha1 * y, alpha2)));
}

double weibull_log_pdf(double y, double alpha1, double alpha2) {
  require_weibull_domain(y, alpha1, alpha2);
  const double ly = std::log(alpha1 * y);
  return std::log(alpha2) + std::log(alpha1) + (alpha2 - 1.0) * ly - std::exp(alpha2 * ly);
}

double linear_predictor(std::span<const double> beta, std::span<const double> x_row) {
  if (beta.size() != x_row.size() + 1) {
    throw std::invalid_argument("linear_predictor: beta must have one more entry than x");
  }
  double eta = beta[0];
  for (std::size_t j = 0; j < x_row.size(); ++j) eta += beta[j + 1] * x_row[j];
  return eta;
}

double link_theta(std::span<const double> beta, std::span<const double> x_row) {
  return std::exp(linear_predictor(beta, x_row));
}

Log1pRatio log1p_ratio(double gamma, double log_v) {
  const double v = std::exp(log_v);
  const double gv = gamma * v;

  if (std::abs(gv) < kSeriesThreshold) {
    // G = v sum_k (-x)^k/(k+1), dG/dgamma = v^2 sum_{k>=1} (-1)^k k x^{k-1}/(k+1), x = gamma v
    double s = 0.0;
    double ds = 0.0;
    double xk = 1.0;   // x^k
    double xkm1 = 0.0; // x^{k-1}
    double sign = 1.0;
    for (int k = 0; k < 9; ++k) {
      s += sign * xk / (k + 1);
      if (k >= 1) ds += sign * k * xkm1 / (k + 1);
      xkm1 = xk;
      xk *= gv;
      sign = -sign;
    }
    const double l1p = std::log1p(gv);
    return {v * s, v * v * ds, v / (1.0 + gv), l1p};
  }

  double l1p;
  double d_logv;
  if (gamma > 0.0) {
    const double lgv = std::log(gamma) + log_v;
    if (lgv > kLogOverflowGuard) {
      l1p = lgv + std::log1p(std::exp(-lgv));
      d_logv = 1.0 / (gamma * (1.0 + std::exp(-lgv)));
    } else {
      l1p = std::log1p(gv);
      d_logv = v / (1.0 + gv);
    }
  } else {
    double b = gv;
    if (b < -1.0) {
      if (b < -1.0 - kBaseSnap) return {kNaN, kNaN, kNaN, kNaN};
      b = -1.0;
    }
    l1p = std::log1p(b);
    d_logv = (b == -1.0) ? kInf : v / (1.0 + b);
  }
  const double value = l1p / gamma;
  const double d_gamma = (gamma * d_logv - l1p) / (gamma * gamma);
  return {value, d_gamma, d_logv, l1p};
}

SubjectTerms subject_terms(double gamma, double lambda, double eta, double log_f_cdf,
                           double log_f_pdf) {
  SubjectTerms t;
  if (!std::isfinite(eta)) return t;
  const double theta = std::exp(eta);
  if (!std::isfinite(theta)) return t;
  const double log_a = eta + gamma * theta * kLogC;
  const Log1pRatio g0 = log1p_ratio(gamma, log_a);
  const Log1pRatio gs = log1p_ratio(gamma, log_a + lambda * log_f_cdf);
  if (std::isnan(g0.value) || std::isnan(gs.value)) return t;
  t.log_p0 = -g0.value;
  t.log_sp = -gs.value;
  const double head = log_a + std::log(lambda) + (lambda - 1.0) * log_f_cdf + log_f_pdf;
  if (gs.log1p_gv == -kInf) {
    // 1 + gamma v = 0 exactly. The factor (1 + gamma v)^{-1/gamma - 1} is 1
    // at gamma = -1, 0 for gamma in (-1, 0) and unbounded below -1.
    t.log_fp = gamma == -1.0 ? head : (gamma > -1.0 ? -kInf : kNaN);
  } else {
    t.log_fp = head - gs.value - gs.log1p_gv;
  }
  t.feasible = !std::isnan(t.log_fp);
  return t;
}

namespace {

SubjectTerms terms_for(double y, std::span<const double> x_row, const ModelParams& p) {
  const double eta = linear_predictor(p.beta, x_row);
  return subject_terms(p.gamma, p.lambda, eta, weibull_log_cdf(y, p.alpha1, p.alpha2),
                       weibull_log_pdf(y, p.alpha1, p.alpha2));
}

}  // namespace

std::optional<double> pop_survival(double y, std::span<const double> x_row, const ModelParams& p) {
  const SubjectTerms t = terms_for(y, x_row, p);
  if (!t.feasible) return std::nullopt;
  return std::exp(t.log_sp);
}

std::optional<double> cure_prob(std::span<const double> x_row, const ModelParams& p) {
  const SubjectTerms t = subject_terms(p.gamma, p.lambda, linear_predictor(p.beta, x_row), 0.0, 0.0);
  if (!t.feasible) return std::nullopt;
  return std::exp(t.log_p0);
}

std::optional<double> pop_density(double y, std::span<const double> x_row, const ModelParams& p) {
  const SubjectTerms t = terms_for(y, x_row, p);
  if (!t.feasible) return std::nullopt;
  return std::exp(t.log_fp);
}

std::optional<double> pop_survival_at(double gamma, double lambda, double theta, double f_cdf) {
  if (f_cdf <= 0.0) return 1.0;
  const SubjectTerms t = subject_terms(gamma, lambda, std::log(theta), std::log(f_cdf), 0.0);
  if (!t.feasible) return std::nullopt;
  return std::exp(t.log_sp);
}

std::optional<double> cure_prob_at(double gamma, double theta) {
  const SubjectTerms t = subject_terms(gamma, 1.0, std::log(theta), 0.0, 0.0);
  if (!t.feasible) return std::nullopt;
  return std::exp(t.log_p0);
}

std::optional<SusceptibleParts> susceptible_parts(double y, std::span<const double> x_row,
                                                  const ModelParams& p) {
  const SubjectTerms t = terms_for(y, x_row, p);
  if (!t.feasible || !(t.log_p0 < 0.0)) return std::nullopt;
  const double log_mass = log1mexp(t.log_p0);  // log(1 - p0)
  const double log_su = t.log_sp + log1mexp(t.log_p0 - t.log_sp) - log_mass;
  return SusceptibleParts{std::exp(log_su), std::exp(t.log_fp - log_mass)};
}

double log1mexp(double x) {
  if (x > -0.6931471805599453) return std::log(-std::expm1(x));
  return std::log1p(-std::exp(x));
}

}  // namespace curemc
