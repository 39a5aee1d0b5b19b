// Data-level likelihood kernels. The default versions are OpenMP-parallel over
// subjects; curemc::reference holds plain serial loops over the scalar model
// functions, kept as the baseline for tests and benchmarks.
#pragma once

#include <span>
#include <vector>

#include "curemc/model.hpp"

namespace curemc {

/// Per-subject pieces that depend on a single parameter block, so a
/// single-site update only recomputes what it touched.
struct SubjectCache {
  std::vector<double> eta;       // beta'x, depends on beta
  std::vector<double> log_fcdf;  // log F(y), depends on alpha1, alpha2
  std::vector<double> log_fpdf;  // log f(y)

  void refresh_linear(const Dataset& data, std::span<const double> beta);
  void refresh_weibull(const Dataset& data, double alpha1, double alpha2);
  void refresh(const Dataset& data, const ModelParams& p) {
    refresh_linear(data, p.beta);
    refresh_weibull(data, p.alpha1, p.alpha2);
  }
};

/// log L_c = sum_{D1} log f_P + sum_{D0} [(1-I) log p0 + I log(S_P - p0)].
/// -inf when the point is infeasible for any subject.
double complete_loglik(std::span<const double> eta, std::span<const double> log_fcdf,
                       std::span<const double> log_fpdf, const Dataset& data,
                       const LatentState& latent, double gamma, double lambda);
double complete_loglik(const SubjectCache& cache, const Dataset& data, const LatentState& latent,
                       double gamma, double lambda);
double complete_loglik(const ModelParams& p, const Dataset& data, const LatentState& latent);

/// log L = sum_{D1} log f_P + sum_{D0} log S_P.
double observed_loglik(const SubjectCache& cache, const Dataset& data, double gamma, double lambda);
double observed_loglik(const ModelParams& p, const Dataset& data);

/// Per-subject complete-likelihood terms under each latent value.
/// Censored i: log_sus[i] = log(S_P - p0), log_cured[i] = log p0.
/// Event i: log_sus[i] = log f_P, log_cured[i] = -inf.
/// Returns false if the point is infeasible for some subject.
bool latent_log_masses(const SubjectCache& cache, const Dataset& data, double gamma,
                       double lambda, std::span<double> log_sus, std::span<double> log_cured);

namespace reference {

double complete_loglik(const ModelParams& p, const Dataset& data, const LatentState& latent);
double observed_loglik(const ModelParams& p, const Dataset& data);

}  // namespace reference

}  // namespace curemc
