#include "curemc/prior.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>

namespace curemc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double inv_gamma_kernel(double v, double a, double b) { return -(a + 1.0) * std::log(v) - b / v; }

double inv_gamma_log_norm(double a, double b) { return a * std::log(b) - std::lgamma(a); }

bool positive_support(const ModelParams& p) {
  return p.lambda > 0.0 && p.alpha1 > 0.0 && p.alpha2 > 0.0 && std::isfinite(p.lambda) &&
         std::isfinite(p.alpha1) && std::isfinite(p.alpha2) && std::isfinite(p.gamma) &&
         std::abs(p.gamma) >= kGammaSupportFloor;
}

}  // namespace

PriorHyperparams preset_hyperparams(PriorPreset preset, std::size_t n_beta) {
  PriorHyperparams hp;
  double sigma_diag = 0.0;
  switch (preset) {
    case PriorPreset::vague:
      hp.a_gamma = 0.2;
      hp.b_gamma = 0.1;
      hp.a_lambda = hp.a1 = hp.a2 = 2.001;
      hp.b_lambda = hp.b1 = hp.b2 = 1.0;
      sigma_diag = 100.0;
      break;
    case PriorPreset::regularized:
      hp.a_gamma = 1.0;
      hp.b_gamma = 1.0;
      hp.a_lambda = hp.a1 = hp.a2 = 2.1;
      hp.b_lambda = hp.b1 = hp.b2 = 1.1;
      sigma_diag = 10.0;
      break;
  }
  hp.mu.assign(n_beta, 0.0);
  hp.sigma.assign(n_beta * n_beta, 0.0);
  for (std::size_t j = 0; j < n_beta; ++j) hp.sigma[j * n_beta + j] = sigma_diag;
  return hp;
}

std::optional<PriorPreset> parse_preset(std::string_view name) {
  if (name == "vague") return PriorPreset::vague;
  if (name == "regularized") return PriorPreset::regularized;
  return std::nullopt;
}

std::string_view preset_name(PriorPreset preset) {
  return preset == PriorPreset::vague ? "vague" : "regularized";
}

Prior::Prior(PriorHyperparams hp) : hp_(std::move(hp)) {
  for (double v : {hp_.a_gamma, hp_.b_gamma, hp_.a_lambda, hp_.b_lambda, hp_.a1, hp_.b1, hp_.a2, hp_.b2}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("prior: scalar hyperparameters must be positive");
  }
  const std::size_t p = hp_.mu.size();
  if (p == 0) throw ValidationError("prior: mu must have at least the intercept entry");
  if (hp_.sigma.size() != p * p) throw ValidationError("prior: sigma must be (k+1) x (k+1)");

  Eigen::MatrixXd sigma(p, p);
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = 0; c < p; ++c) sigma(r, c) = hp_.sigma[r * p + c];
  }
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) throw ValidationError("prior: sigma must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw ValidationError("prior: sigma must be positive definite");

  const Eigen::MatrixXd prec = llt.solve(Eigen::MatrixXd::Identity(p, p));
  precision_.resize(p * p);
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = 0; c < p; ++c) precision_[r * p + c] = prec(r, c);
  }
  const Eigen::MatrixXd l = llt.matrixL();
  log_det_sigma_ = 2.0 * l.diagonal().array().log().sum();
}

double Prior::beta_quadratic(std::span<const double> beta) const {
  const std::size_t p = n_beta();
  double q = 0.0;
  for (std::size_t r = 0; r < p; ++r) {
    const double dr = beta[r] - hp_.mu[r];
    for (std::size_t c = 0; c < p; ++c) q += dr * precision_[r * p + c] * (beta[c] - hp_.mu[c]);
  }
  return q;
}

void Prior::add_heated_gradient(const ModelParams& p, double h, std::span<double> grad) const {
  const double sign = p.gamma > 0.0 ? 1.0 : -1.0;
  grad[0] += h * ((hp_.a_gamma - 1.0) / p.gamma - hp_.b_gamma * sign);
  auto ig = [h](double v, double a, double b) { return h * (-(a + 1.0) / v + b / (v * v)); };
  grad[1] += ig(p.lambda, hp_.a_lambda, hp_.b_lambda);
  grad[2] += ig(p.alpha1, hp_.a1, hp_.b1);
  grad[3] += ig(p.alpha2, hp_.a2, hp_.b2);
  const std::size_t n = n_beta();
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += precision_[r * n + c] * (p.beta[c] - hp_.mu[c]);
    grad[4 + r] -= h * s;
  }
}

double log_prior(const ModelParams& p, const Prior& prior) {
  if (!positive_support(p) || p.beta.size() != prior.n_beta()) return kNegInf;
  const auto& hp = prior.hyperparams();
  const double ag = std::abs(p.gamma);
  double lp = hp.a_gamma * std::log(hp.b_gamma) - std::log(2.0) - std::lgamma(hp.a_gamma) +
              (hp.a_gamma - 1.0) * std::log(ag) - hp.b_gamma * ag;
  lp += inv_gamma_log_norm(hp.a_lambda, hp.b_lambda) + inv_gamma_kernel(p.lambda, hp.a_lambda, hp.b_lambda);
  lp += inv_gamma_log_norm(hp.a1, hp.b1) + inv_gamma_kernel(p.alpha1, hp.a1, hp.b1);
  lp += inv_gamma_log_norm(hp.a2, hp.b2) + inv_gamma_kernel(p.alpha2, hp.a2, hp.b2);
  const double dim = static_cast<double>(prior.n_beta());
  lp += -0.5 * prior.beta_quadratic(p.beta) - 0.5 * prior.log_det_sigma() -
        0.5 * dim * std::log(2.0 * std::numbers::pi);
  return lp;
}

double log_prior_heated(const ModelParams& p, const Prior& prior, double h) {
  if (!positive_support(p) || p.beta.size() != prior.n_beta()) return kNegInf;
  const auto& hp = prior.hyperparams();
  const double ag = std::abs(p.gamma);
  double lp = (hp.a_gamma - 1.0) * std::log(ag) - hp.b_gamma * ag;
  lp += inv_gamma_kernel(p.lambda, hp.a_lambda, hp.b_lambda);
  lp += inv_gamma_kernel(p.alpha1, hp.a1, hp.b1);
  lp += inv_gamma_kernel(p.alpha2, hp.a2, hp.b2);
  lp += -0.5 * prior.beta_quadratic(p.beta);
  return h * lp;
}

ModelParams sample_initial(Rng& rng, std::size_t k) {
  ModelParams p;
  do {
    p.gamma = 2.0 * std_normal(rng);
  } while (std::abs(p.gamma) < 1e-6);
  p.lambda = exponential(rng, 1.0);
  p.alpha1 = exponential(rng, 1.0);
  p.alpha2 = exponential(rng, 1.0);
  p.beta.resize(k + 1);
  for (double& b : p.beta) b = 2.0 * std_normal(rng);
  return p;
}

}  // namespace curemc
