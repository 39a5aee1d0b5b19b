#include "curemc/gradient.hpp"

#include <cmath>
#include <limits>

#include "curemc/parallel.hpp"

namespace curemc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum Coord { kGamma = 0, kLambda = 1, kAlpha1 = 2, kAlpha2 = 3, kEta = 4 };

using D5 = std::array<double, 5>;

SubjectRole role_of(const Dataset& data, const LatentState& latent, std::size_t i) {
  if (data.delta[i] == 1) return SubjectRole::event;
  return latent.ind[i] ? SubjectRole::censored_susceptible : SubjectRole::censored_cured;
}

// d G(gamma, v) where v depends on theta through dlogv.
D5 d_log1p_ratio(const Log1pRatio& g, const D5& dlogv) {
  D5 out{};
  for (int c = 0; c < 5; ++c) out[c] = g.d_logv * dlogv[c];
  out[kGamma] += g.d_gamma;
  return out;
}

bool all_finite(const D5& d) {
  for (double v : d) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

std::optional<SubjectGradient> subject_gradient(double y, double eta, double gamma, double lambda,
                                                double alpha1, double alpha2, SubjectRole role) {
  const double theta = std::exp(eta);
  if (!std::isfinite(theta)) return std::nullopt;
  const double log_a = eta + gamma * theta * kLogC;
  D5 dlog_a{};
  dlog_a[kGamma] = theta * kLogC;
  dlog_a[kEta] = 1.0 + gamma * theta * kLogC;

  const Log1pRatio g0 = log1p_ratio(gamma, log_a);
  if (std::isnan(g0.value)) return std::nullopt;
  const double log_p0 = -g0.value;

  SubjectGradient out{};
  if (role == SubjectRole::censored_cured) {
    const D5 dg0 = d_log1p_ratio(g0, dlog_a);
    out.loglik = log_p0;
    for (int c = 0; c < 5; ++c) out.d[c] = -dg0[c];
    if (!std::isfinite(out.loglik) || !all_finite(out.d)) return std::nullopt;
    return out;
  }

  // Weibull pieces: z = (alpha1 y)^alpha2, F = 1 - e^{-z}.
  const double la = std::log(alpha1 * y);
  const double z = std::exp(alpha2 * la);
  const double log_f_cdf = std::log(-std::expm1(-z));
  const double dlogf_dz = 1.0 / std::expm1(z);
  D5 dlog_f_cdf{};
  dlog_f_cdf[kAlpha1] = dlogf_dz * alpha2 * z / alpha1;
  dlog_f_cdf[kAlpha2] = dlogf_dz * z * la;

  const double log_v = log_a + lambda * log_f_cdf;
  D5 dlog_v{};
  for (int c = 0; c < 5; ++c) dlog_v[c] = dlog_a[c] + lambda * dlog_f_cdf[c];
  dlog_v[kLambda] += log_f_cdf;

  const Log1pRatio gs = log1p_ratio(gamma, log_v);
  if (std::isnan(gs.value)) return std::nullopt;
  const double log_sp = -gs.value;
  const D5 dgs = d_log1p_ratio(gs, dlog_v);

  if (role == SubjectRole::censored_susceptible) {
    // log(S_P - p0) = log S_P + log(1 - r), r = p0 / S_P
    const double log_r = log_p0 - log_sp;
    out.loglik = log_sp + log1mexp(log_r);
    const double r = std::exp(log_r);
    if (r == 0.0) {
      for (int c = 0; c < 5; ++c) out.d[c] = -dgs[c];
    } else {
      const D5 dg0 = d_log1p_ratio(g0, dlog_a);
      const double one_minus_r = -std::expm1(log_r);
      for (int c = 0; c < 5; ++c) out.d[c] = (-dgs[c] + r * dg0[c]) / one_minus_r;
    }
    if (!std::isfinite(out.loglik) || !all_finite(out.d)) return std::nullopt;
    return out;
  }

  // log f_P = log A + log lambda + (lambda-1) log F + log f - G(gamma, v) - log1p(gamma v)
  const double log_f_pdf = std::log(alpha2) + std::log(alpha1) + (alpha2 - 1.0) * la - z;
  out.loglik = log_a + std::log(lambda) + (lambda - 1.0) * log_f_cdf + log_f_pdf - gs.value - gs.log1p_gv;

  D5 dlog_pdf{};
  dlog_pdf[kAlpha1] = alpha2 * (1.0 - z) / alpha1;
  dlog_pdf[kAlpha2] = 1.0 / alpha2 + la * (1.0 - z);

  // d log1p(gamma v) = d_logv * (dgamma + gamma dlog v)
  D5 dl1p{};
  for (int c = 0; c < 5; ++c) dl1p[c] = gs.d_logv * gamma * dlog_v[c];
  dl1p[kGamma] += gs.d_logv;

  for (int c = 0; c < 5; ++c) {
    out.d[c] = dlog_a[c] + (lambda - 1.0) * dlog_f_cdf[c] + dlog_pdf[c] - dgs[c] - dl1p[c];
  }
  out.d[kLambda] += 1.0 / lambda + log_f_cdf;
  if (!std::isfinite(out.loglik) || !all_finite(out.d)) return std::nullopt;
  return out;
}

namespace {

// Scatters one subject's (gamma, lambda, alpha1, alpha2, eta) derivatives
// into the full parameter vector; the eta entry fans out over x_i.
void accumulate(const SubjectGradient& g, std::span<const double> x_row, std::span<double> acc) {
  for (int c = 0; c < 4; ++c) acc[c] += g.d[c];
  acc[4] += g.d[kEta];
  for (std::size_t j = 0; j < x_row.size(); ++j) acc[5 + j] += g.d[kEta] * x_row[j];
}

}  // namespace

std::optional<LoglikGradient> complete_loglik_with_gradient(const ModelParams& p, const Dataset& data,
                                                            const LatentState& latent) {
  const std::size_t dim = p.dim();
  // Slot dim carries the log likelihood.
  std::vector<double> sums = parallel::block_sum_vec(data.size(), dim + 1, [&](std::size_t i, std::span<double> acc) {
    const auto x = data.row(i);
    const auto g = subject_gradient(data.y[i], linear_predictor(p.beta, x), p.gamma, p.lambda,
                                    p.alpha1, p.alpha2, role_of(data, latent, i));
    if (!g) {
      acc[dim] = kNaN;
      return;
    }
    accumulate(*g, x, acc.first(dim));
    acc[dim] += g->loglik;
  });
  for (double v : sums) {
    if (!std::isfinite(v)) return std::nullopt;
  }
  const double loglik = sums[dim];
  sums.pop_back();
  return LoglikGradient{loglik, std::move(sums)};
}

std::optional<GradientVector> grad_complete_loglik(const ModelParams& p, const Dataset& data,
                                                   const LatentState& latent, double h) {
  auto lg = complete_loglik_with_gradient(p, data, latent);
  if (!lg) return std::nullopt;
  for (double& v : lg->grad) v *= h;
  return std::move(lg->grad);
}

std::optional<GradientVector> grad_log_posterior(const ModelParams& p, const Dataset& data,
                                                 const LatentState& latent, const Prior& prior,
                                                 double h) {
  if (!p.in_support() || std::abs(p.gamma) < kGammaSupportFloor) return std::nullopt;
  auto grad = grad_complete_loglik(p, data, latent, h);
  if (!grad) return std::nullopt;
  prior.add_heated_gradient(p, h, *grad);
  for (double v : *grad) {
    if (!std::isfinite(v)) return std::nullopt;
  }
  return grad;
}

namespace reference {

std::optional<GradientVector> grad_complete_loglik(const ModelParams& p, const Dataset& data,
                                                   const LatentState& latent, double h) {
  GradientVector grad(p.dim(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    const auto g = subject_gradient(data.y[i], linear_predictor(p.beta, x), p.gamma, p.lambda,
                                    p.alpha1, p.alpha2, role_of(data, latent, i));
    if (!g) return std::nullopt;
    accumulate(*g, x, grad);
  }
  for (double& v : grad) v *= h;
  return grad;
}

}  // namespace reference

}  // namespace curemc
