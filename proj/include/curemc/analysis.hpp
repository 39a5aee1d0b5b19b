// Post-processing of cold-chain draws.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "curemc/model.hpp"
#include "curemc/trace.hpp"

namespace curemc {

/// Index of the largest stored log-posterior (first one on ties).
/// Throws std::invalid_argument when empty.
std::size_t map_index(std::span<const Draw> draws);
ModelParams map_estimate(std::span<const Draw> draws);

struct Interval {
  double lo;
  double hi;
};

struct HdiResult {
  std::vector<Interval> intervals;  // disjoint, increasing
  double coverage = 0.0;            // fraction of samples inside
  bool degenerate = false;          // all samples equal
};

/// Highest-density set from a Gaussian kernel density estimate on a 512-point
/// grid (Silverman bandwidth). The density threshold is the largest value
/// whose super-level set holds at least `level` of the samples, so the
/// returned set may consist of several intervals.
/// Throws std::invalid_argument for empty input or level outside (0, 1).
HdiResult hdi(std::span<const double> samples, double level);

/// Linear-interpolation quantiles (type 7) of an unsorted sample.
std::vector<double> quantiles(std::span<const double> samples, std::span<const double> probs);

/// Gelman-Rubin R-hat over equal-length chains. With split, each chain is
/// cut into two halves first. Throws std::invalid_argument on fewer than 2
/// chains, unequal lengths or length < 10, std::domain_error when the
/// within-chain variance is zero.
double psrf(const std::vector<std::vector<double>>& chains, bool split = false);

/// Mean of I_i over draws for every subject.
std::vector<double> susceptible_prob_all(std::span<const Draw> draws, std::size_t n);
/// Same, restricted to censored subjects in increasing index order.
std::vector<double> susceptible_prob(std::span<const Draw> draws, const Dataset& data);

struct FdrDecision {
  double alpha = 0.0;
  std::size_t k_alpha = 0;
  std::vector<std::uint8_t> decisions;  // same order as the input probabilities
  std::size_t R = 0;
  double expected_fdr = 0.0;            // G_{k_alpha}, 0 when nothing is selected
};

/// Declares cured the k_alpha subjects with the largest cure probabilities,
/// k_alpha = max{j : sum_{i<=j} (1 - q_(i)) / j <= alpha}.
FdrDecision fdr_control(std::span<const double> cure_probs, double alpha);

struct CureCurve {
  std::vector<double> t;
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
  std::size_t skipped = 0;  // infeasible draws
};

/// P(cured | T >= t, x) = p0 / S_P(t) averaged over draws, with an HDI
/// envelope at `level` per grid point.
CureCurve cure_curve(std::span<const ModelParams> draws, std::span<const double> x_row,
                     std::span<const double> t_grid, double level = 0.95);

struct ParamSummary {
  std::string name;
  double map = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> q;  // 2.5, 25, 50, 75, 97.5 %
  HdiResult hdi;
  double psrf = 0.0;      // NaN with fewer than 2 runs
};

inline constexpr double kSummaryProbs[] = {0.025, 0.25, 0.5, 0.75, 0.975};

/// Pools the retained draws of every run. MAP is the overall best draw;
/// PSRF treats each run as one chain, truncated to the shortest run.
std::vector<ParamSummary> summarize_runs(const std::vector<TraceStore>& runs, double level = 0.95);

}  // namespace curemc
