// Shared fixtures for the unit and acceptance tests.
#pragma once

#include <cmath>
#include <vector>

#include "curemc/likelihood.hpp"
#include "curemc/model.hpp"
#include "curemc/rng.hpp"
#include "curemc/simgen.hpp"

namespace curemc::testing {

inline bool rel_close(double a, double b, double rel, double abs_floor = 1e-12) {
  return std::abs(a - b) <= rel * std::max(std::abs(b), abs_floor) || std::abs(a - b) <= abs_floor;
}

/// Scenario parameters jittered so the point stays feasible on `data`.
inline ModelParams jitter(const ModelParams& base, Rng& rng, const Dataset& data, const LatentState& latent) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    ModelParams p = base;
    p.gamma += 0.1 * std_normal(rng);
    if (std::abs(p.gamma) < 1e-3) continue;
    p.lambda *= std::exp(0.2 * std_normal(rng));
    p.alpha1 *= std::exp(0.2 * std_normal(rng));
    p.alpha2 *= std::exp(0.2 * std_normal(rng));
    for (double& b : p.beta) b += 0.2 * std_normal(rng);
    if (std::isfinite(complete_loglik(p, data, latent)) && std::isfinite(observed_loglik(p, data))) return p;
  }
  return base;
}

/// Small simulated dataset with its true latent vector.
inline SimulatedData small_dataset(const std::string& scenario, std::size_t n, std::uint64_t seed) {
  const Scenario& sc = find_scenario(scenario);
  return generate(sc, n, seed, 0.5);
}

}  // namespace curemc::testing
