// Synthetic data: two covariates (X1 discrete uniform on {0..K}, X2 uniform
// on [0,1]), Bernoulli cure status, susceptible times by inversion of S_U,
// exponential censoring with a calibrated rate.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "curemc/model.hpp"

namespace curemc {

struct Scenario {
  std::string name;
  ModelParams params;
  int x1_levels = 1;               // K
  double target_censoring = 0.1;   // among susceptibles
  double nominal_cure_rate = 0.0;  // reported rate, for validation only
};

/// The fourteen named presets A1..F4.
const std::vector<Scenario>& scenarios();

/// Throws ValidationError for an unknown name.
const Scenario& find_scenario(std::string_view name);

/// Solves S_U(t | x) = u for t in closed form. Throws std::domain_error if
/// u is outside (0, 1), p0 is 1, or the implied F(t) leaves (0, 1).
double invert_susceptible_time(double u, std::span<const double> x_row, const ModelParams& p);

struct Calibration {
  double rate = 0.0;
  double achieved = 0.0;  // Monte Carlo censoring proportion at `rate`
};

/// Exponential censoring rate r with P(C < T | susceptible) = target, by
/// bisection on log r over mc_n simulated susceptibles with common random
/// numbers. Throws NumericalError if the result misses target by > 0.005.
Calibration calibrate_censoring(const Scenario& sc, double target, std::size_t mc_n, std::uint64_t seed);

struct SimulatedData {
  Dataset data;
  LatentState truth;  // evaluation only
  double censoring_rate = 0.0;
};

/// n subjects from the scenario. The censoring rate is calibrated from the
/// same seed unless given. Cured subjects share the censoring distribution.
SimulatedData generate(const Scenario& sc, std::size_t n, std::uint64_t seed,
                       std::optional<double> censoring_rate = std::nullopt,
                       std::size_t calibration_mc_n = 100000);

}  // namespace curemc
