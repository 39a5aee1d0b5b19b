#include "curemc/likelihood.hpp"

#include <cmath>
#include <limits>

#include "curemc/parallel.hpp"

namespace curemc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(S_P - p0) from the log terms.
double log_susceptible_mass(const SubjectTerms& t) {
  if (t.log_p0 == kNegInf) return t.log_sp;
  return t.log_sp + log1mexp(t.log_p0 - t.log_sp);
}

double nan_to_neg_inf(double v) { return std::isnan(v) ? kNegInf : v; }

}  // namespace

void SubjectCache::refresh_linear(const Dataset& data, std::span<const double> beta) {
  const std::size_t n = data.size();
  eta.resize(n);
  parallel::for_each_index(n, [&](std::size_t i) { eta[i] = linear_predictor(beta, data.row(i)); });
}

void SubjectCache::refresh_weibull(const Dataset& data, double alpha1, double alpha2) {
  const std::size_t n = data.size();
  log_fcdf.resize(n);
  log_fpdf.resize(n);
  // Same operation order as subject_gradient, so both paths agree bit for bit.
  parallel::for_each_index(n, [&](std::size_t i) {
    const double la = std::log(alpha1 * data.y[i]);
    const double z = std::exp(alpha2 * la);
    log_fcdf[i] = std::log(-std::expm1(-z));
    log_fpdf[i] = std::log(alpha2) + std::log(alpha1) + (alpha2 - 1.0) * la - z;
  });
}

double complete_loglik(std::span<const double> eta, std::span<const double> log_fcdf,
                       std::span<const double> log_fpdf, const Dataset& data,
                       const LatentState& latent, double gamma, double lambda) {
  const double total = parallel::block_sum(data.size(), [&](std::size_t i) {
    const SubjectTerms t = subject_terms(gamma, lambda, eta[i], log_fcdf[i], log_fpdf[i]);
    if (!t.feasible) return kNegInf;
    if (data.delta[i] == 1) return t.log_fp;
    return latent.ind[i] ? log_susceptible_mass(t) : t.log_p0;
  });
  return nan_to_neg_inf(total);
}

double complete_loglik(const SubjectCache& cache, const Dataset& data, const LatentState& latent,
                       double gamma, double lambda) {
  return complete_loglik(cache.eta, cache.log_fcdf, cache.log_fpdf, data, latent, gamma, lambda);
}

double complete_loglik(const ModelParams& p, const Dataset& data, const LatentState& latent) {
  SubjectCache cache;
  cache.refresh(data, p);
  return complete_loglik(cache, data, latent, p.gamma, p.lambda);
}

double observed_loglik(const SubjectCache& cache, const Dataset& data, double gamma, double lambda) {
  const double total = parallel::block_sum(data.size(), [&](std::size_t i) {
    const SubjectTerms t = subject_terms(gamma, lambda, cache.eta[i], cache.log_fcdf[i], cache.log_fpdf[i]);
    if (!t.feasible) return kNegInf;
    return data.delta[i] == 1 ? t.log_fp : t.log_sp;
  });
  return nan_to_neg_inf(total);
}

double observed_loglik(const ModelParams& p, const Dataset& data) {
  SubjectCache cache;
  cache.refresh(data, p);
  return observed_loglik(cache, data, p.gamma, p.lambda);
}

bool latent_log_masses(const SubjectCache& cache, const Dataset& data, double gamma,
                       double lambda, std::span<double> log_sus, std::span<double> log_cured) {
  const double total = parallel::block_sum(data.size(), [&](std::size_t i) {
    const SubjectTerms t = subject_terms(gamma, lambda, cache.eta[i], cache.log_fcdf[i], cache.log_fpdf[i]);
    if (!t.feasible) {
      log_sus[i] = kNegInf;
      log_cured[i] = kNegInf;
      return kNegInf;
    }
    if (data.delta[i] == 1) {
      log_sus[i] = t.log_fp;
      log_cured[i] = kNegInf;
      return 0.0;
    }
    log_sus[i] = log_susceptible_mass(t);
    log_cured[i] = t.log_p0;
    return 0.0;
  });
  return !std::isnan(total) && total != kNegInf;
}

namespace reference {

double complete_loglik(const ModelParams& p, const Dataset& data, const LatentState& latent) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    if (data.delta[i] == 1) {
      const auto f = pop_density(data.y[i], x, p);
      if (!f) return kNegInf;
      total += std::log(*f);
      continue;
    }
    const auto p0 = cure_prob(x, p);
    const auto sp = pop_survival(data.y[i], x, p);
    if (!p0 || !sp) return kNegInf;
    total += latent.ind[i] ? std::log(*sp - *p0) : std::log(*p0);
  }
  return total;
}

double observed_loglik(const ModelParams& p, const Dataset& data) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    const auto v = data.delta[i] == 1 ? pop_density(data.y[i], x, p) : pop_survival(data.y[i], x, p);
    if (!v) return kNegInf;
    total += std::log(*v);
  }
  return total;
}

}  // namespace reference

}  // namespace curemc
