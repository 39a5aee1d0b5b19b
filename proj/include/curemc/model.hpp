// Cure rate model: S_P(y|x) = (1 + g*th(x)*c^{g*th(x)} * F(y)^lam)^{-1/g},
// c = e^{1/e}, Weibull promotion times F, exponential link th(x) = exp(beta'x).
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace curemc {

/// log c, with c = e^{1/e}.
inline constexpr double kLogC = 0.36787944117144233;

/// Below this |gamma * v| the log1p(gamma v)/gamma terms switch to their
/// power series, which also covers the promotion-time limit gamma -> 0.
inline constexpr double kSeriesThreshold = 1e-2;

/// Thrown for malformed user input (CLI exit code 2).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a computation cannot produce a finite answer (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// theta = (gamma, lambda, alpha1, alpha2, beta_0..beta_k).
struct ModelParams {
  double gamma = 1.0;
  double lambda = 1.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  std::vector<double> beta;  // beta[0] is the intercept

  std::size_t dim() const { return 4 + beta.size(); }
  std::vector<double> to_vector() const;
  static ModelParams from_vector(std::span<const double> v);

  /// Positivity of lambda/alpha, gamma != 0, everything finite.
  bool in_support() const;

  bool operator==(const ModelParams&) const = default;
};

/// Parameter names in vector order: gamma, lambda, alpha1, alpha2, beta0..
std::vector<std::string> param_names(std::size_t n_beta);

/// Right-censored observations with an implicit intercept column.
struct Dataset {
  std::vector<double> y;
  std::vector<std::uint8_t> delta;  // 1 = event observed
  std::size_t k = 0;                // covariates per subject
  std::vector<double> x;            // row-major n x k
  std::vector<std::string> covariate_names;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * k, k}; }

  /// Throws ValidationError on any broken invariant.
  void validate() const;
  std::vector<std::size_t> censored_indices() const;
};

/// I_i = 1 susceptible, 0 cured.
struct LatentState {
  std::vector<std::uint8_t> ind;

  static LatentState all_susceptible(std::size_t n) { return {std::vector<std::uint8_t>(n, 1)}; }
  bool consistent_with(const Dataset& data) const;
};

double weibull_cdf(double y, double alpha1, double alpha2);
double weibull_pdf(double y, double alpha1, double alpha2);
double weibull_log_cdf(double y, double alpha1, double alpha2);
double weibull_log_pdf(double y, double alpha1, double alpha2);

/// beta_0 + sum_j beta_j x_j. Throws std::invalid_argument on a size mismatch.
double linear_predictor(std::span<const double> beta, std::span<const double> x_row);

/// exp(linear_predictor); may be +inf, which callers treat as infeasible.
double link_theta(std::span<const double> beta, std::span<const double> x_row);

/// log(1 + gamma*v)/gamma given log v, and its partial derivatives.
/// value is NaN when 1 + gamma*v < 0 (infeasible); +inf when it is exactly 0.
struct Log1pRatio {
  double value;      // G(gamma, v)
  double d_gamma;    // dG/dgamma at fixed v
  double d_logv;     // dG/dlog v = v / (1 + gamma v)
  double log1p_gv;   // log(1 + gamma v)
};
Log1pRatio log1p_ratio(double gamma, double log_v);

/// Log-scale survival pieces of one subject. feasible = false when the
/// parameter point is outside the model's domain for that subject.
struct SubjectTerms {
  bool feasible = false;
  double log_sp = 0.0;  // log S_P(y)
  double log_p0 = 0.0;  // log p0
  double log_fp = 0.0;  // log f_P(y)
};

/// Core evaluation from cached pieces: eta = linear predictor,
/// log_f_cdf/log_f_pdf = Weibull log F(y), log f(y).
SubjectTerms subject_terms(double gamma, double lambda, double eta, double log_f_cdf,
                           double log_f_pdf);

std::optional<double> pop_survival(double y, std::span<const double> x_row, const ModelParams& p);
std::optional<double> cure_prob(std::span<const double> x_row, const ModelParams& p);
std::optional<double> pop_density(double y, std::span<const double> x_row, const ModelParams& p);

/// Same functions parameterised directly by theta(x) and F(y); used by the
/// closed-form checks that fix F rather than y.
std::optional<double> pop_survival_at(double gamma, double lambda, double theta, double f_cdf);
std::optional<double> cure_prob_at(double gamma, double theta);

struct SusceptibleParts {
  double s_u;
  double f_u;
};
/// nullopt if infeasible or p0 is numerically 1.
std::optional<SusceptibleParts> susceptible_parts(double y, std::span<const double> x_row,
                                                  const ModelParams& p);

/// log(1 - exp(x)) for x <= 0.
double log1mexp(double x);

}  // namespace curemc
