#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "curemc/model.hpp"

namespace curemc {

/// One stored state of the cold chain.
struct Draw {
  std::uint64_t cycle = 0;
  ModelParams params;
  LatentState latent;
  double log_posterior = 0.0;   // observed log-likelihood + log prior
  double log_likelihood = 0.0;  // observed log-likelihood
};

/// Stored draws plus run bookkeeping. Draws are ordered by cycle; the first
/// burn_in cycles are kept on disk but excluded from retained().
struct TraceStore {
  std::vector<Draw> draws;
  std::uint64_t burn_in = 0;  // L_B, in cycles
  std::uint64_t total = 0;    // L_T, in cycles
  std::uint64_t stride = 1;   // cycles between stored draws

  std::span<const Draw> retained() const {
    const auto it = std::find_if(draws.begin(), draws.end(),
                                 [this](const Draw& d) { return d.cycle > burn_in; });
    return {draws.data() + (it - draws.begin()), static_cast<std::size_t>(draws.end() - it)};
  }
};

}  // namespace curemc
