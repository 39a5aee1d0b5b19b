#include "curemc/sampler.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <utility>

#include "curemc/gradient.hpp"
#include "curemc/parallel.hpp"

namespace curemc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool accept(double log_ratio, Rng& rng) {
  const double u = uniform01(rng);
  if (std::isnan(log_ratio)) return false;
  return std::log(u) < log_ratio;
}

// Complete log-likelihood of `proposal`, which differs from s.params only in
// the block touched by m. Recomputed cache pieces land in `scratch`.
double proposal_loglik(const ChainState& s, const ModelParams& proposal, Move m, const Dataset& data,
                       SubjectCache& scratch) {
  switch (m) {
    case Move::gamma:
    case Move::lambda:
      return complete_loglik(s.cache, data, s.latent, proposal.gamma, proposal.lambda);
    case Move::alpha1:
    case Move::alpha2:
      scratch.refresh_weibull(data, proposal.alpha1, proposal.alpha2);
      return complete_loglik(s.cache.eta, scratch.log_fcdf, scratch.log_fpdf, data, s.latent,
                             proposal.gamma, proposal.lambda);
    case Move::beta:
      scratch.refresh_linear(data, proposal.beta);
      return complete_loglik(scratch.eta, s.cache.log_fcdf, s.cache.log_fpdf, data, s.latent,
                             proposal.gamma, proposal.lambda);
    case Move::mala:
      break;
  }
  scratch.refresh(data, proposal);
  return complete_loglik(scratch, data, s.latent, proposal.gamma, proposal.lambda);
}

double hastings_term(const ModelParams& from, const ModelParams& to, Move m) {
  switch (m) {
    case Move::lambda:
      return std::log(to.lambda) - std::log(from.lambda);
    case Move::alpha1:
      return std::log(to.alpha1) - std::log(from.alpha1);
    case Move::alpha2:
      return std::log(to.alpha2) - std::log(from.alpha2);
    default:
      return 0.0;
  }
}

double mh_log_ratio(const ChainState& s, const ModelParams& proposal, Move m, double ll_new,
                    const Prior& prior) {
  const double num = log_heated_target(proposal, ll_new, s.heat, prior);
  if (num == kNegInf) return kNegInf;
  const double den = log_heated_target(s.params, s.loglik, s.heat, prior);
  return num - den + hastings_term(s.params, proposal, m);
}

// Commits an accepted single-site proposal, moving recomputed cache pieces in.
void commit(ChainState& s, ModelParams&& proposal, Move m, double ll_new) {
  if (m == Move::alpha1 || m == Move::alpha2) {
    std::swap(s.cache.log_fcdf, s.scratch.log_fcdf);
    std::swap(s.cache.log_fpdf, s.scratch.log_fpdf);
  } else if (m == Move::beta) {
    std::swap(s.cache.eta, s.scratch.eta);
  }
  s.params = std::move(proposal);
  s.loglik = ll_new;
}

void single_site(ChainState& s, ModelParams proposal, Move m, const Dataset& data, const Prior& prior) {
  double lr = kNegInf;
  double ll_new = kNegInf;
  if (proposal.in_support()) {
    ll_new = proposal_loglik(s, proposal, m, data, s.scratch);
    if (ll_new != kNegInf) lr = mh_log_ratio(s, proposal, m, ll_new, prior);
  }
  const bool ok = accept(lr, s.rng);
  s.stats.record(m, ok);
  if (ok) commit(s, std::move(proposal), m, ll_new);
}

double log_normal_step(double v, double s2, Rng& rng) {
  return v * std::exp(std::sqrt(s2) * std_normal(rng));
}

// Runs body(c) for every chain, possibly in parallel, and rethrows the first
// exception (by chain index) on the calling thread.
template <class Body>
void for_each_chain(std::size_t n, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1) if (n > 1)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n); ++c) {
    try {
      body(static_cast<std::size_t>(c));
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

ProposalScales ProposalScales::defaults(std::size_t n_beta) {
  ProposalScales s;
  s.nu.assign(n_beta, 0.05);
  return s;
}

bool ProposalScales::valid() const {
  for (double v : {s2_gamma, s2_lambda, s2_alpha1, s2_alpha2, tau}) {
    if (!(v > 0.0) || !std::isfinite(v)) return false;
  }
  for (double v : nu) {
    if (!(v > 0.0) || !std::isfinite(v)) return false;
  }
  return true;
}

const char* move_name(Move m) {
  switch (m) {
    case Move::gamma: return "gamma";
    case Move::lambda: return "lambda";
    case Move::alpha1: return "alpha1";
    case Move::alpha2: return "alpha2";
    case Move::beta: return "beta";
    case Move::mala: return "mala";
  }
  return "?";
}

double MoveStats::rate(Move m) const {
  const auto i = static_cast<std::size_t>(m);
  if (proposed[i] == 0) return kNaN;
  return static_cast<double>(accepted[i]) / static_cast<double>(proposed[i]);
}

ChainState make_chain(ModelParams params, LatentState latent, double heat, ProposalScales scales,
                      Rng rng, const Dataset& data) {
  if (!latent.consistent_with(data)) throw ValidationError("chain: latent state inconsistent with data");
  if (params.beta.size() != data.k + 1) throw ValidationError("chain: beta length must be k + 1");
  if (!(heat >= 0.0 && heat <= 1.0)) throw ValidationError("chain: heat must lie in [0, 1]");
  if (!scales.valid() || scales.nu.size() != params.beta.size()) {
    throw ValidationError("chain: proposal scales must be positive with one nu per beta");
  }
  ChainState s;
  s.params = std::move(params);
  s.latent = std::move(latent);
  s.heat = heat;
  s.scales = std::move(scales);
  s.rng = std::move(rng);
  resync(s, data);
  return s;
}

void resync(ChainState& s, const Dataset& data) {
  s.cache.refresh(data, s.params);
  s.loglik = complete_loglik(s.cache, data, s.latent, s.params.gamma, s.params.lambda);
}

double log_joint_posterior(const ChainState& s, const Prior& prior) {
  if (s.loglik == kNegInf) return kNegInf;
  return s.loglik + log_prior(s.params, prior);
}

double log_heated_target(const ModelParams& p, double loglik, double h, const Prior& prior) {
  if (std::isnan(loglik) || loglik == kNegInf) return kNegInf;
  const double lp = log_prior_heated(p, prior, h);
  if (lp == kNegInf) return kNegInf;
  return h * loglik + lp;
}

double mh_log_accept(const ChainState& s, const ModelParams& proposal, Move m, const Dataset& data,
                     const Prior& prior) {
  if (!proposal.in_support()) return kNegInf;
  SubjectCache scratch;
  const double ll_new = proposal_loglik(s, proposal, m, data, scratch);
  if (ll_new == kNegInf) return kNegInf;
  return mh_log_ratio(s, proposal, m, ll_new, prior);
}

void mh_single_site_sweep(ChainState& s, const Dataset& data, const Prior& prior) {
  {
    ModelParams prop = s.params;
    prop.gamma = s.params.gamma + std::sqrt(s.scales.s2_gamma) * std_normal(s.rng);
    single_site(s, std::move(prop), Move::gamma, data, prior);
  }
  {
    ModelParams prop = s.params;
    prop.lambda = log_normal_step(s.params.lambda, s.scales.s2_lambda, s.rng);
    single_site(s, std::move(prop), Move::lambda, data, prior);
  }
  {
    ModelParams prop = s.params;
    prop.alpha1 = log_normal_step(s.params.alpha1, s.scales.s2_alpha1, s.rng);
    single_site(s, std::move(prop), Move::alpha1, data, prior);
  }
  {
    ModelParams prop = s.params;
    prop.alpha2 = log_normal_step(s.params.alpha2, s.scales.s2_alpha2, s.rng);
    single_site(s, std::move(prop), Move::alpha2, data, prior);
  }
  {
    ModelParams prop = s.params;
    for (std::size_t j = 0; j < prop.beta.size(); ++j) {
      prop.beta[j] += std::sqrt(s.scales.nu[j]) * std_normal(s.rng);
    }
    single_site(s, std::move(prop), Move::beta, data, prior);
  }
}

double mala_log_q(std::span<const double> a, std::span<const double> b, std::span<const double> g_a,
                  double tau) {
  double q = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double r = b[j] - a[j] - tau * g_a[j];
    q += r * r;
  }
  return -q / (4.0 * tau);
}

bool mala_step(ChainState& s, const Dataset& data, const Prior& prior) {
  const auto grad = grad_log_posterior(s.params, data, s.latent, prior, s.heat);
  if (!grad) return false;

  const double tau = s.scales.tau;
  const double noise = std::sqrt(2.0 * tau);
  const std::vector<double> cur = s.params.to_vector();
  std::vector<double> prop(cur.size());
  for (std::size_t j = 0; j < cur.size(); ++j) {
    prop[j] = cur[j] + tau * (*grad)[j] + noise * std_normal(s.rng);
  }
  ModelParams candidate = ModelParams::from_vector(prop);

  double lr = kNegInf;
  double ll_new = kNegInf;
  if (candidate.in_support() && log_prior_heated(candidate, prior, s.heat) != kNegInf) {
    s.scratch.refresh(data, candidate);
    ll_new = complete_loglik(s.scratch, data, s.latent, candidate.gamma, candidate.lambda);
    if (ll_new != kNegInf) {
      const auto grad_new = grad_log_posterior(candidate, data, s.latent, prior, s.heat);
      if (grad_new) {
        lr = log_heated_target(candidate, ll_new, s.heat, prior) -
             log_heated_target(s.params, s.loglik, s.heat, prior) +
             mala_log_q(prop, cur, *grad_new, tau) - mala_log_q(cur, prop, *grad, tau);
      }
    }
  }
  const bool ok = accept(lr, s.rng);
  s.stats.record(Move::mala, ok);
  if (ok) {
    s.params = std::move(candidate);
    std::swap(s.cache, s.scratch);
    s.loglik = ll_new;
  }
  return true;
}

double gibbs_weight(double h, double log_sus, double log_cured) {
  if (log_cured == kNegInf) return 1.0;  // also covers both masses zero
  if (log_sus == kNegInf) return 0.0;
  // 1 / (1 + (m_cured / m_sus)^h)
  const double t = h * (log_cured - log_sus);
  if (t > 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

void gibbs_latent(ChainState& s, const Dataset& data) {
  const std::size_t n = data.size();
  s.log_sus.resize(n);
  s.log_cured.resize(n);
  if (!latent_log_masses(s.cache, data, s.params.gamma, s.params.lambda, s.log_sus, s.log_cured)) {
    throw NumericalError("gibbs: current parameters are infeasible");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (data.delta[i] == 1) continue;
    const double w = gibbs_weight(s.heat, s.log_sus[i], s.log_cured[i]);
    s.latent.ind[i] = uniform01(s.rng) < w ? 1 : 0;
  }
  const double total = parallel::block_sum(n, [&](std::size_t i) {
    return s.latent.ind[i] ? s.log_sus[i] : s.log_cured[i];
  });
  s.loglik = std::isnan(total) ? kNegInf : total;
}

void chain_iteration(ChainState& s, const Dataset& data, const Prior& prior, double p1) {
  if (uniform01(s.rng) < p1) {
    mh_single_site_sweep(s, data, prior);
  } else if (!mala_step(s, data, prior)) {
    mh_single_site_sweep(s, data, prior);
  }
  gibbs_latent(s, data);
}

Draw snapshot(const ChainState& s, const Dataset& data, const Prior& prior, std::uint64_t cycle) {
  Draw d;
  d.cycle = cycle;
  d.params = s.params;
  d.latent = s.latent;
  d.log_likelihood = observed_loglik(s.cache, data, s.params.gamma, s.params.lambda);
  d.log_posterior = d.log_likelihood == kNegInf ? kNegInf : d.log_likelihood + log_prior(s.params, prior);
  return d;
}

std::vector<Draw> run_chain(ChainState& s, const Dataset& data, const Prior& prior, std::size_t m,
                            double p1, std::size_t record_every) {
  std::vector<Draw> out;
  if (record_every > 0) out.reserve(m / record_every);
  for (std::size_t t = 1; t <= m; ++t) {
    chain_iteration(s, data, prior, p1);
    if (record_every > 0 && t % record_every == 0) out.push_back(snapshot(s, data, prior, t));
  }
  return out;
}

std::vector<double> temperature_ladder(std::size_t chains, double epsilon, double d) {
  if (!(epsilon > 0.0) || !(d > 0.0)) throw ValidationError("ladder: epsilon and d must be positive");
  std::vector<double> h(chains);
  const double l1e = std::log1p(epsilon);
  for (std::size_t c = 1; c <= chains; ++c) {
    h[c - 1] = std::exp(-(std::pow(static_cast<double>(c), d) - 1.0) * l1e);
  }
  return h;
}

double swap_log_prob(const ChainState& si, const ChainState& sj, const Prior& prior) {
  if (si.heat == sj.heat) return 0.0;
  const double lpi = log_joint_posterior(si, prior);
  const double lpj = log_joint_posterior(sj, prior);
  const double la = (si.heat - sj.heat) * (lpj - lpi);
  if (std::isnan(la)) return kNegInf;
  return std::min(0.0, la);
}

namespace {

// Scale adjustment state of one chain across warm-up rounds. The per-move
// multiplier is square-rooted every time the direction flips, so a scale that
// straddles its band settles instead of oscillating.
struct ScaleTuner {
  std::array<double, kMoveCount> factor;
  std::array<int, kMoveCount> last_dir{};

  explicit ScaleTuner(const AdaptSettings& settings) { factor.fill(settings.factor); }

  // Reads the batch acceptance rates from s.stats, rescales every out-of-band
  // move and resets the stats. Returns true if every rate was in its band.
  bool adjust(ChainState& s, const AdaptSettings& settings, AdaptReport& report) {
    bool all_in = true;
    for (std::size_t i = 0; i < kMoveCount; ++i) {
      const Move m = static_cast<Move>(i);
      const double r = s.stats.rate(m);
      report.last_rates[i] = r;
      if (std::isnan(r)) continue;
      const bool is_mala = m == Move::mala;
      const double lo = is_mala ? settings.mala_lo : settings.mh_lo;
      const double hi = is_mala ? settings.mala_hi : settings.mh_hi;
      int dir = 0;
      if (r < lo) dir = -1;
      if (r > hi) dir = 1;
      if (dir == 0) continue;
      all_in = false;
      if (last_dir[i] != 0 && last_dir[i] != dir) factor[i] = std::max(1.05, std::sqrt(factor[i]));
      last_dir[i] = dir;
      // No acceptances at all: the step is far too large, shrink harder.
      const double mult = r == 0.0 ? 1.0 / (factor[i] * factor[i]) : (dir > 0 ? factor[i] : 1.0 / factor[i]);
      rescale(s.scales, m, mult);
    }
    s.stats.reset();
    return all_in;
  }

  static void rescale(ProposalScales& sc, Move m, double mult) {
    switch (m) {
      case Move::gamma: sc.s2_gamma *= mult; break;
      case Move::lambda: sc.s2_lambda *= mult; break;
      case Move::alpha1: sc.s2_alpha1 *= mult; break;
      case Move::alpha2: sc.s2_alpha2 *= mult; break;
      case Move::beta:
        for (double& v : sc.nu) v *= mult;
        break;
      case Move::mala: sc.tau *= mult; break;
    }
  }
};

}  // namespace

AdaptReport adapt_scales(ChainState& s, const Dataset& data, const Prior& prior, double p1,
                         const AdaptSettings& settings) {
  AdaptReport report;
  ScaleTuner tuner(settings);
  s.stats.reset();
  for (std::size_t round = 1; round <= settings.max_rounds; ++round) {
    for (std::size_t b = 0; b < settings.batch; ++b) chain_iteration(s, data, prior, p1);
    report.rounds = round;
    if (tuner.adjust(s, settings, report)) {
      report.converged = true;
      break;
    }
  }
  s.stats.reset();
  return report;
}

void Mc3Config::validate() const {
  if (chains < 1) throw ValidationError("config: chains must be >= 1");
  if (cycles < 1) throw ValidationError("config: cycles must be >= 1");
  if (iters_per_cycle < 1) throw ValidationError("config: iters_per_cycle must be >= 1");
  if (thin < 1) throw ValidationError("config: thin must be >= 1");
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw ValidationError("config: p1 must lie in [0, 1]");
  if (!(epsilon > 0.0) || !(d > 0.0)) throw ValidationError("config: epsilon and d must be positive");
  if (!(burnin_fraction >= 0.0 && burnin_fraction < 1.0)) {
    throw ValidationError("config: burnin_fraction must lie in [0, 1)");
  }
  if (adapt.batch < 1 || adapt.max_rounds < 1 || !(adapt.factor > 1.0)) {
    throw ValidationError("config: warm-up batch and rounds must be >= 1 and factor > 1");
  }
  if (max_init_attempts < 1) throw ValidationError("config: max_init_attempts must be >= 1");
}

TemperedEnsemble::TemperedEnsemble(const Dataset& data, const Prior& prior, const Mc3Config& cfg)
    : data_(data), prior_(prior), cfg_(cfg), swap_rng_(make_stream(cfg.seed, 0)) {
  cfg_.validate();
  if (prior.n_beta() != data.k + 1) throw ValidationError("prior: mu length must be k + 1");
  const auto heats = temperature_ladder(cfg_.chains, cfg_.epsilon, cfg_.d);
  chains_.reserve(cfg_.chains);
  for (std::size_t c = 0; c < cfg_.chains; ++c) {
    chains_.push_back(random_start(make_stream(cfg_.seed, c + 1), heats[c], ProposalScales::defaults(data.k + 1)));
  }
  swap_attempts_.assign(cfg_.chains > 1 ? cfg_.chains - 1 : 0, 0);
  swap_accepts_.assign(swap_attempts_.size(), 0);
  adaptation_.resize(cfg_.chains);
  if (cfg_.warmup) warm_up();
}

void TemperedEnsemble::warm_up() {
  // The whole ensemble cycles, swaps included, so each slot is tuned on the
  // states it actually holds. Tuning a chain alone from its random start can
  // shrink its scales to nothing in a far-off region.
  const AdaptSettings& settings = cfg_.adapt;
  std::vector<ScaleTuner> tuners(chains_.size(), ScaleTuner(settings));
  const std::size_t cycles_per_round = std::max<std::size_t>(1, settings.batch / cfg_.iters_per_cycle);
  for (auto& ch : chains_) ch.stats.reset();
  for (std::size_t round = 1; round <= settings.max_rounds; ++round) {
    for (std::size_t t = 0; t < cycles_per_round; ++t) cycle();
    bool all_in = true;
    for (std::size_t c = 0; c < chains_.size(); ++c) {
      adaptation_[c].rounds = round;
      adaptation_[c].converged = tuners[c].adjust(chains_[c], settings, adaptation_[c]);
      all_in = all_in && adaptation_[c].converged;
    }
    if (all_in) break;
  }
  // Swap counts and move statistics restart with the main run.
  for (auto& ch : chains_) ch.stats.reset();
  std::fill(swap_attempts_.begin(), swap_attempts_.end(), 0);
  std::fill(swap_accepts_.begin(), swap_accepts_.end(), 0);
}

ChainState TemperedEnsemble::random_start(Rng rng, double heat, ProposalScales scales) const {
  for (std::size_t attempt = 0; attempt < cfg_.max_init_attempts; ++attempt) {
    ModelParams p = sample_initial(rng, data_.k);
    if (log_prior(p, prior_) == kNegInf) continue;
    if (observed_loglik(p, data_) == kNegInf) continue;
    ChainState s = make_chain(std::move(p), LatentState::all_susceptible(data_.size()), heat, scales,
                              std::move(rng), data_);
    gibbs_latent(s, data_);
    if (log_joint_posterior(s, prior_) != kNegInf) return s;
    rng = std::move(s.rng);
  }
  throw NumericalError("initialisation: no finite log-posterior after " +
                       std::to_string(cfg_.max_init_attempts) + " random starts");
}

bool TemperedEnsemble::cycle() {
  for_each_chain(chains_.size(), [&](std::size_t c) {
    for (std::size_t it = 0; it < cfg_.iters_per_cycle; ++it) chain_iteration(chains_[c], data_, prior_, cfg_.p1);
  });
  if (chains_.size() < 2) return false;
  std::uniform_int_distribution<std::size_t> pick(0, chains_.size() - 2);
  return attempt_swap(pick(swap_rng_));
}

bool TemperedEnsemble::attempt_swap(std::size_t c) {
  ChainState& a = chains_.at(c);
  ChainState& b = chains_.at(c + 1);
  const double la = swap_log_prob(a, b, prior_);
  const double u = uniform01(swap_rng_);
  ++swap_attempts_[c];
  if (!(std::log(u) < la)) return false;
  ++swap_accepts_[c];
  std::swap(a.params, b.params);
  std::swap(a.latent, b.latent);
  std::swap(a.cache, b.cache);
  std::swap(a.loglik, b.loglik);
  return true;
}

Mc3Result run_mc3(const Dataset& data, const Prior& prior, const Mc3Config& cfg) {
  TemperedEnsemble ens(data, prior, cfg);
  Mc3Result res;
  res.trace.total = cfg.cycles;
  res.trace.burn_in = static_cast<std::uint64_t>(std::floor(cfg.burnin_fraction * static_cast<double>(cfg.cycles)));
  res.trace.stride = cfg.thin;
  res.trace.draws.reserve(cfg.cycles / cfg.thin);
  for (std::size_t t = 1; t <= cfg.cycles; ++t) {
    ens.cycle();
    if (t % cfg.thin == 0) res.trace.draws.push_back(snapshot(ens.chains()[0], data, prior, t));
  }
  for (const auto& ch : ens.chains()) {
    res.heats.push_back(ch.heat);
    res.scales.push_back(ch.scales);
    res.move_stats.push_back(ch.stats);
  }
  res.adaptation = ens.adaptation();
  res.swap_attempts = ens.swap_attempts();
  res.swap_accepts = ens.swap_accepts();
  return res;
}

}  // namespace curemc
