#include "curemc/simgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "curemc/rng.hpp"

namespace curemc {

namespace {

Scenario make(std::string name, double g, double l, double a1, double a2, double b0, double b1, double b2,
              double cure, double cens) {
  Scenario s;
  s.name = std::move(name);
  s.params.gamma = g;
  s.params.lambda = l;
  s.params.alpha1 = a1;
  s.params.alpha2 = a2;
  s.params.beta = {b0, b1, b2};
  s.x1_levels = s.name[0] == 'A' || s.name[0] == 'B' ? 1 : 5;
  s.nominal_cure_rate = cure;
  s.target_censoring = cens;
  return s;
}

std::vector<Scenario> build_table() {
  return {
      make("A1", 1, 1.5, 0.8, 0.8, 1.5, 1.5, -0.8, 0.05, 0.10),
      make("A2", 1, 1.5, 0.8, 0.8, 1.5, 1.5, -0.8, 0.05, 0.20),
      make("B1", 1, 1, 0.5, 0.5, -0.8, 1.5, 1.5, 0.25, 0.10),
      make("B2", 1, 1, 0.5, 0.5, -0.8, 1.5, 1.5, 0.25, 0.20),
      make("C1", 1, 1, 1, 1, -4, 1, 1, 0.60, 0.10),
      make("C2", 1, 1, 1, 1, -4, 1, 1, 0.60, 0.20),
      make("D1", -0.05, 1, 0.8, 1, 2, -1, 1, 0.40, 0.10),
      make("D2", -0.05, 1, 0.8, 1, 2, -1, 1, 0.40, 0.20),
      make("E1", -0.5, 1, 0.8, 1, 2, -0.7, 1, 0.25, 0.10),
      make("E2", -0.5, 1, 0.8, 1, 2, -0.7, 1, 0.25, 0.20),
      make("F1", -1, 0.5, 0.5, 0.5, 1, 0, 0, 0.0, 0.10),
      make("F2", -1, 0.5, 0.5, 0.5, 1, 0, 0, 0.0, 0.20),
      make("F3", -1, 1, 0.5, 0.5, 1, 0, 0, 0.0, 0.30),
      make("F4", -1, 1, 0.5, 0.5, 1, 0, 0, 0.0, 0.40),
  };
}

// Both covariates of one subject.
std::array<double, 2> draw_covariates(const Scenario& sc, Rng& rng) {
  std::uniform_int_distribution<int> x1(0, sc.x1_levels);
  const double a = x1(rng);
  return {a, uniform01(rng)};
}

// u in (0, 1), never exactly 0.
double open_uniform(Rng& rng) {
  double u;
  do {
    u = uniform01(rng);
  } while (u <= 0.0);
  return u;
}

}  // namespace

const std::vector<Scenario>& scenarios() {
  static const std::vector<Scenario> table = build_table();
  return table;
}

const Scenario& find_scenario(std::string_view name) {
  for (const auto& s : scenarios()) {
    if (s.name == name) return s;
  }
  throw ValidationError("unknown scenario '" + std::string(name) + "' (expected A1..F4)");
}

double invert_susceptible_time(double u, std::span<const double> x_row, const ModelParams& p) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("invert: u must lie in (0, 1)");
  const double eta = linear_predictor(p.beta, x_row);
  const double theta = std::exp(eta);
  const double log_a = eta + p.gamma * theta * kLogC;
  const Log1pRatio g0 = log1p_ratio(p.gamma, log_a);
  if (std::isnan(g0.value)) throw std::domain_error("invert: parameters infeasible at x");
  const double p0 = std::exp(-g0.value);
  if (!(p0 < 1.0)) throw std::domain_error("invert: cure probability is 1");

  // S_P(t) = s, then G(gamma, v) = -log s gives v = A F^lambda.
  // s = p0 + (1 - p0) u, written so that s near 1 keeps its precision.
  const double l = -std::log1p(-(1.0 - p0) * (1.0 - u));
  const double x = p.gamma * l;
  const double v = x == 0.0 ? l : std::expm1(x) / p.gamma;
  const double log_f = (std::log(v) - log_a) / p.lambda;
  if (!(log_f < 0.0)) throw std::domain_error("invert: implied F(t) outside (0, 1)");
  // (alpha1 t)^alpha2 = -log(1 - F), evaluated in logs so tiny F does not
  // underflow; times below the smallest normal double are floored there.
  const double f = std::exp(log_f);
  const double log_z = f > 0.0 ? std::log(-std::log1p(-f)) : log_f;
  const double t = std::exp(log_z / p.alpha2 - std::log(p.alpha1));
  if (!std::isfinite(t)) throw std::domain_error("invert: event time overflows");
  return std::max(t, std::numeric_limits<double>::min());
}

Calibration calibrate_censoring(const Scenario& sc, double target, std::size_t mc_n, std::uint64_t seed) {
  if (!(target > 0.0 && target < 1.0)) throw ValidationError("calibrate: target must lie in (0, 1)");
  if (mc_n < 1) throw ValidationError("calibrate: mc_n must be >= 1");
  Rng rng = make_stream(seed, 2);
  std::vector<double> t;  // susceptible event times
  std::vector<double> e;  // unit-rate exponentials, C = e / r
  t.reserve(mc_n);
  e.reserve(mc_n);
  while (t.size() < mc_n) {
    const auto x = draw_covariates(sc, rng);
    const double p0 = cure_prob(x, sc.params).value_or(1.0);
    const bool cured = uniform01(rng) < p0;
    const double u = open_uniform(rng);
    const double c = exponential(rng, 1.0);
    if (cured) continue;
    t.push_back(invert_susceptible_time(u, x, sc.params));
    e.push_back(c);
  }
  auto proportion = [&](double log_r) {
    const double r = std::exp(log_r);
    std::size_t k = 0;
    for (std::size_t i = 0; i < mc_n; ++i) k += e[i] < r * t[i] ? 1 : 0;
    return static_cast<double>(k) / static_cast<double>(mc_n);
  };
  std::vector<double> sorted = t;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mc_n / 2), sorted.end());
  const double centre = -std::log(sorted[mc_n / 2]);
  double lo = centre - 25.0;
  double hi = centre + 25.0;
  for (int step = 0; step < 60; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (proportion(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Of the two bracket ends, keep the one closer to the target.
  const double p_lo = proportion(lo);
  const double p_hi = proportion(hi);
  Calibration out;
  if (std::abs(p_lo - target) <= std::abs(p_hi - target)) {
    out = {std::exp(lo), p_lo};
  } else {
    out = {std::exp(hi), p_hi};
  }
  if (std::abs(out.achieved - target) > 0.005) {
    std::ostringstream msg;
    msg << "calibrate: censoring proportion " << out.achieved << " at rate " << out.rate
        << " misses target " << target << " (mc_n=" << mc_n << ")";
    throw NumericalError(msg.str());
  }
  return out;
}

SimulatedData generate(const Scenario& sc, std::size_t n, std::uint64_t seed,
                       std::optional<double> censoring_rate, std::size_t calibration_mc_n) {
  if (n < 1) throw ValidationError("generate: n must be >= 1");
  SimulatedData out;
  out.censoring_rate = censoring_rate ? *censoring_rate
                                      : calibrate_censoring(sc, sc.target_censoring, calibration_mc_n, seed).rate;
  if (!(out.censoring_rate > 0.0)) throw ValidationError("generate: censoring rate must be positive");

  Dataset& d = out.data;
  d.k = 2;
  d.covariate_names = {"x1", "x2"};
  d.y.resize(n);
  d.delta.resize(n);
  d.x.resize(2 * n);
  out.truth.ind.resize(n);

  Rng rng = make_stream(seed, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = draw_covariates(sc, rng);
    d.x[2 * i] = x[0];
    d.x[2 * i + 1] = x[1];
    const double p0 = cure_prob(x, sc.params).value_or(1.0);
    const bool cured = uniform01(rng) < p0;
    const double u = open_uniform(rng);
    const double c = exponential(rng, out.censoring_rate);
    if (cured) {
      d.y[i] = c;
      d.delta[i] = 0;
      out.truth.ind[i] = 0;
      continue;
    }
    const double t = invert_susceptible_time(u, x, sc.params);
    d.y[i] = std::min(t, c);
    d.delta[i] = t < c ? 1 : 0;
    out.truth.ind[i] = 1;
  }
  return out;
}

}  // namespace curemc
