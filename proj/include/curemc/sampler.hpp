// MALA-within-Gibbs chain targeting pi(theta, I | data)^h and the
// Metropolis-coupled ensemble built on top of it.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "curemc/likelihood.hpp"
#include "curemc/model.hpp"
#include "curemc/prior.hpp"
#include "curemc/rng.hpp"
#include "curemc/trace.hpp"

namespace curemc {

/// Proposal variances for the single-site moves and the MALA step size.
struct ProposalScales {
  double s2_gamma = 0.1;
  double s2_lambda = 0.05;
  double s2_alpha1 = 0.05;
  double s2_alpha2 = 0.05;
  std::vector<double> nu;  // diagonal variances for the beta block
  double tau = 1e-3;

  static ProposalScales defaults(std::size_t n_beta);
  bool valid() const;
};

enum class Move : std::size_t { gamma = 0, lambda, alpha1, alpha2, beta, mala };
inline constexpr std::size_t kMoveCount = 6;
const char* move_name(Move m);

struct MoveStats {
  std::array<std::uint64_t, kMoveCount> proposed{};
  std::array<std::uint64_t, kMoveCount> accepted{};

  void record(Move m, bool ok) {
    ++proposed[static_cast<std::size_t>(m)];
    if (ok) ++accepted[static_cast<std::size_t>(m)];
  }
  /// NaN when the move was never proposed.
  double rate(Move m) const;
  void reset() { *this = MoveStats{}; }
};

/// xi_c = (theta, I) plus everything private to one chain. loglik is the
/// unheated complete log-likelihood of (params, latent), kept in sync with
/// cache by every kernel.
struct ChainState {
  ModelParams params;
  LatentState latent;
  double heat = 1.0;
  ProposalScales scales;
  Rng rng;
  MoveStats stats;

  SubjectCache cache;
  double loglik = 0.0;

  // Work buffers, contents meaningless between calls.
  SubjectCache scratch;
  std::vector<double> log_sus, log_cured;
};

/// Builds a chain and fills cache/loglik. Throws ValidationError if the
/// latent vector is inconsistent with the data.
ChainState make_chain(ModelParams params, LatentState latent, double heat, ProposalScales scales,
                      Rng rng, const Dataset& data);

/// Recomputes cache and loglik after params or latent were assigned directly.
void resync(ChainState& s, const Dataset& data);

/// Unheated log pi(theta, I | data), normalised prior included.
double log_joint_posterior(const ChainState& s, const Prior& prior);

/// h * log L_c + log_prior_heated; -inf if infeasible.
double log_heated_target(const ModelParams& p, double loglik, double h, const Prior& prior);

/// log acceptance ratio (before capping at 0) of replacing s.params by
/// `proposal` through single-site move m. Includes the log-normal Hastings
/// term for lambda/alpha1/alpha2.
double mh_log_accept(const ChainState& s, const ModelParams& proposal, Move m, const Dataset& data,
                     const Prior& prior);

/// Steps 1.1 to 1.5: gamma, lambda, alpha1, alpha2, then beta jointly.
void mh_single_site_sweep(ChainState& s, const Dataset& data, const Prior& prior);

/// log density (up to a constant shared by both directions) of proposing b
/// from a with drift gradient g_a: -|b - a - tau g_a|^2 / (4 tau).
double mala_log_q(std::span<const double> a, std::span<const double> b, std::span<const double> g_a,
                  double tau);

/// Langevin proposal for the whole theta. Returns false when the gradient is
/// not finite at the current point; the caller then runs an MH sweep.
bool mala_step(ChainState& s, const Dataset& data, const Prior& prior);

/// w = m_sus^h / (m_sus^h + m_cured^h) from log masses; 1 when both are zero.
double gibbs_weight(double h, double log_sus, double log_cured);

/// Redraws I_i for every censored subject. Throws NumericalError if the
/// current params are infeasible.
void gibbs_latent(ChainState& s, const Dataset& data);

/// One iteration of the chain: MH sweep with probability p1, MALA otherwise,
/// then the latent update.
void chain_iteration(ChainState& s, const Dataset& data, const Prior& prior, double p1);

/// Draw of the current state with observed-data log-likelihood and posterior.
Draw snapshot(const ChainState& s, const Dataset& data, const Prior& prior, std::uint64_t cycle);

/// Runs m iterations, storing a draw after every `record_every` iterations
/// (0 records nothing). Draw.cycle counts iterations.
std::vector<Draw> run_chain(ChainState& s, const Dataset& data, const Prior& prior, std::size_t m,
                            double p1, std::size_t record_every = 1);

/// h_c = (1 + epsilon)^{-(c^d - 1)}, c = 1..C.
std::vector<double> temperature_ladder(std::size_t chains, double epsilon, double d);

/// log of the swap acceptance probability for exchanging the states of
/// chains i and j, capped at 0.
double swap_log_prob(const ChainState& si, const ChainState& sj, const Prior& prior);

struct AdaptSettings {
  double mh_lo = 0.15, mh_hi = 0.30;
  double mala_lo = 0.40, mala_hi = 0.60;
  std::size_t batch = 200;
  std::size_t max_rounds = 50;
  double factor = 1.6;
};

struct AdaptReport {
  std::size_t rounds = 0;
  bool converged = false;
  std::array<double, kMoveCount> last_rates{};
};

/// Warm-up tuning: batches of chain iterations, scaling each out-of-band
/// proposal scale by factor until every rate is in its band or the round
/// cap is hit. The chain's state keeps evolving during warm-up.
AdaptReport adapt_scales(ChainState& s, const Dataset& data, const Prior& prior, double p1,
                         const AdaptSettings& settings);

struct Mc3Config {
  std::size_t chains = 16;
  std::size_t cycles = 20000;
  std::size_t iters_per_cycle = 10;
  double p1 = 0.5;
  double epsilon = 0.001;
  double d = 2.5;
  double burnin_fraction = 0.3;
  std::size_t thin = 10;
  bool warmup = true;
  AdaptSettings adapt;
  std::uint64_t seed = 1;
  std::size_t max_init_attempts = 100;

  /// Throws ValidationError on non-positive counts or out-of-range fractions.
  void validate() const;
};

/// C chains at fixed heats; chain c draws from RNG stream c + 1, swaps from
/// stream 0. Heats, scales and generators stay with their slot when states
/// are exchanged.
class TemperedEnsemble {
 public:
  /// Random starts, then the optional warm-up. Throws NumericalError if no
  /// finite start is found.
  TemperedEnsemble(const Dataset& data, const Prior& prior, const Mc3Config& cfg);

  /// Advance every chain iters_per_cycle iterations, then one adjacent swap
  /// attempt. Returns true if a swap was accepted.
  bool cycle();

  /// Swap attempt between slots c and c+1 using the swap generator for the
  /// uniform. Returns true on acceptance.
  bool attempt_swap(std::size_t c);

  std::vector<ChainState>& chains() { return chains_; }
  const std::vector<ChainState>& chains() const { return chains_; }
  const std::vector<AdaptReport>& adaptation() const { return adaptation_; }
  const std::vector<std::uint64_t>& swap_attempts() const { return swap_attempts_; }
  const std::vector<std::uint64_t>& swap_accepts() const { return swap_accepts_; }

 private:
  // Rounds of cfg.adapt.batch iterations per chain, run as full cycles with
  // swaps; every slot's scales are adjusted after each round until all slots
  // are in band or the round cap is hit. States keep evolving.
  void warm_up();
  ChainState random_start(Rng rng, double heat, ProposalScales scales) const;

  const Dataset& data_;
  const Prior& prior_;
  Mc3Config cfg_;
  std::vector<ChainState> chains_;
  std::vector<AdaptReport> adaptation_;
  Rng swap_rng_;
  std::vector<std::uint64_t> swap_attempts_, swap_accepts_;
};

struct Mc3Result {
  TraceStore trace;
  std::vector<double> heats;
  std::vector<ProposalScales> scales;
  std::vector<AdaptReport> adaptation;
  std::vector<MoveStats> move_stats;  // post-warm-up counts per slot
  std::vector<std::uint64_t> swap_attempts, swap_accepts;
};

/// Algorithm driver: cycles the ensemble and stores the cold chain every
/// `thin` cycles.
Mc3Result run_mc3(const Dataset& data, const Prior& prior, const Mc3Config& cfg);

}  // namespace curemc
