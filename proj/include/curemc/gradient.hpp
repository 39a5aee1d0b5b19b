// Analytic gradient of the heated log complete posterior in theta, given I.
#pragma once

#include <array>
#include <optional>
#include <vector>

#include "curemc/likelihood.hpp"
#include "curemc/model.hpp"
#include "curemc/prior.hpp"

namespace curemc {

/// Ordered (gamma, lambda, alpha1, alpha2, beta_0..beta_k).
using GradientVector = std::vector<double>;

/// Which term of the complete likelihood a subject contributes.
enum class SubjectRole { event, censored_susceptible, censored_cured };

/// Log-likelihood contribution of one subject and its derivatives with
/// respect to (gamma, lambda, alpha1, alpha2, eta). nullopt if infeasible.
struct SubjectGradient {
  double loglik;
  std::array<double, 5> d;
};
std::optional<SubjectGradient> subject_gradient(double y, double eta, double gamma, double lambda,
                                                double alpha1, double alpha2, SubjectRole role);

/// h * grad log L_c.
std::optional<GradientVector> grad_complete_loglik(const ModelParams& p, const Dataset& data,
                                                   const LatentState& latent, double h);

/// Unheated log L_c and its gradient in one pass over the data. The log
/// likelihood matches complete_loglik() bit for bit.
struct LoglikGradient {
  double loglik;
  GradientVector grad;
};
std::optional<LoglikGradient> complete_loglik_with_gradient(const ModelParams& p, const Dataset& data,
                                                            const LatentState& latent);

/// grad_complete_loglik + grad log_prior_heated.
std::optional<GradientVector> grad_log_posterior(const ModelParams& p, const Dataset& data,
                                                 const LatentState& latent, const Prior& prior,
                                                 double h);

namespace reference {

std::optional<GradientVector> grad_complete_loglik(const ModelParams& p, const Dataset& data,
                                                   const LatentState& latent, double h);

}  // namespace reference

}  // namespace curemc
