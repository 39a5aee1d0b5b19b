#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "curemc/model.hpp"
#include "curemc/rng.hpp"

namespace curemc {

/// Signed-gamma prior on gamma, inverse-gamma on lambda/alpha1/alpha2,
/// multivariate normal on beta. sigma is row-major (k+1) x (k+1).
struct PriorHyperparams {
  double a_gamma = 1.0, b_gamma = 1.0;
  double a_lambda = 2.1, b_lambda = 1.1;
  double a1 = 2.1, b1 = 1.1;
  double a2 = 2.1, b2 = 1.1;
  std::vector<double> mu;
  std::vector<double> sigma;
};

enum class PriorPreset { vague, regularized };

PriorHyperparams preset_hyperparams(PriorPreset preset, std::size_t n_beta);
std::optional<PriorPreset> parse_preset(std::string_view name);
std::string_view preset_name(PriorPreset preset);

/// Validated hyperparameters with the beta precision matrix precomputed.
class Prior {
 public:
  /// Throws ValidationError if a scalar is non-positive or sigma is not SPD.
  explicit Prior(PriorHyperparams hp);

  const PriorHyperparams& hyperparams() const { return hp_; }
  std::size_t n_beta() const { return hp_.mu.size(); }

  /// (beta - mu)' Sigma^{-1} (beta - mu)
  double beta_quadratic(std::span<const double> beta) const;

  /// Adds the gradient of log_prior_heated(p, h) into grad (vector order).
  void add_heated_gradient(const ModelParams& p, double h, std::span<double> grad) const;

  double log_det_sigma() const { return log_det_sigma_; }

 private:
  PriorHyperparams hp_;
  std::vector<double> precision_;
  double log_det_sigma_ = 0.0;
};

/// |gamma| below this is outside the prior's support.
inline constexpr double kGammaSupportFloor = 1e-12;

/// Normalised log prior density; -inf outside the support.
double log_prior(const ModelParams& p, const Prior& prior);

/// Unnormalised log of pi(theta)^h: every factor's kernel carries the power h,
/// including the gamma factor |gamma|^{h(a-1)} e^{-h b |gamma|}.
double log_prior_heated(const ModelParams& p, const Prior& prior, double h);

/// Random starting point: gamma, beta_j ~ N(0, 4); lambda, alpha1, alpha2 ~ Exp(1).
ModelParams sample_initial(Rng& rng, std::size_t k);

}  // namespace curemc
