#include "curemc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace curemc {

namespace {

constexpr std::size_t kGridSize = 512;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_var(std::span<const double> v, double m) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Piecewise-linear KDE on a uniform grid.
struct GridDensity {
  double x0 = 0.0;
  double dx = 0.0;
  std::vector<double> f;

  double at(double x) const {
    const double pos = (x - x0) / dx;
    if (pos <= 0.0) return f.front();
    if (pos >= static_cast<double>(f.size() - 1)) return f.back();
    const auto g = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(g);
    return f[g] + w * (f[g + 1] - f[g]);
  }
};

GridDensity kde(const std::vector<double>& sorted) {
  const std::size_t n = sorted.size();
  const double m = mean_of(sorted);
  const double sd = std::sqrt(sample_var(sorted, m));
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd > 0.0 ? sd : (sorted.back() - sorted.front());
  const double bw = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);

  GridDensity g;
  g.x0 = sorted.front() - 3.0 * bw;
  const double x1 = sorted.back() + 3.0 * bw;
  g.dx = (x1 - g.x0) / static_cast<double>(kGridSize - 1);

  // Linear binning, then a direct convolution with the Gaussian kernel.
  std::vector<double> counts(kGridSize, 0.0);
  for (double x : sorted) {
    const double pos = (x - g.x0) / g.dx;
    const auto j = std::min(static_cast<std::size_t>(pos), kGridSize - 2);
    const double w = pos - static_cast<double>(j);
    counts[j] += 1.0 - w;
    counts[j + 1] += w;
  }
  const double norm = 1.0 / (static_cast<double>(n) * bw * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> kernel(kGridSize);
  for (std::size_t d = 0; d < kGridSize; ++d) {
    const double u = static_cast<double>(d) * g.dx / bw;
    kernel[d] = std::exp(-0.5 * u * u);
  }
  g.f.assign(kGridSize, 0.0);
  for (std::size_t a = 0; a < kGridSize; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < kGridSize; ++b) {
      if (counts[b] == 0.0) continue;
      s += counts[b] * kernel[a > b ? a - b : b - a];
    }
    g.f[a] = s * norm;
  }
  return g;
}

// Super-level set {x : f(x) >= thr} of the interpolated density.
std::vector<Interval> level_set(const GridDensity& g, double thr) {
  std::vector<Interval> out;
  const std::size_t m = g.f.size();
  auto x_at = [&g](std::size_t i) { return g.x0 + static_cast<double>(i) * g.dx; };
  auto cross = [&](std::size_t i) {
    return x_at(i) + (thr - g.f[i]) / (g.f[i + 1] - g.f[i]) * g.dx;
  };
  bool inside = g.f[0] >= thr;
  double start = x_at(0);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const bool next = g.f[i + 1] >= thr;
    if (!inside && next) {
      start = cross(i);
    } else if (inside && !next) {
      out.push_back({start, cross(i)});
    }
    inside = next;
  }
  if (inside) out.push_back({start, x_at(m - 1)});
  return out;
}

std::size_t count_inside(const std::vector<double>& sorted, const std::vector<Interval>& set) {
  std::size_t c = 0;
  for (const auto& iv : set) {
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), iv.lo);
    const auto hi = std::upper_bound(sorted.begin(), sorted.end(), iv.hi);
    if (hi > lo) c += static_cast<std::size_t>(hi - lo);
  }
  return c;
}

// The smoothed density spills past the data; intervals are cut back to the
// sample range.
std::vector<Interval> clip(std::vector<Interval> in, double lo, double hi) {
  std::vector<Interval> out;
  for (auto iv : in) {
    iv.lo = std::max(iv.lo, lo);
    iv.hi = std::min(iv.hi, hi);
    if (iv.lo <= iv.hi) out.push_back(iv);
  }
  return out;
}

}  // namespace

std::size_t map_index(std::span<const Draw> draws) {
  if (draws.empty()) throw std::invalid_argument("map_estimate: empty trace");
  std::size_t best = 0;
  for (std::size_t t = 1; t < draws.size(); ++t) {
    if (draws[t].log_posterior > draws[best].log_posterior) best = t;
  }
  return best;
}

ModelParams map_estimate(std::span<const Draw> draws) { return draws[map_index(draws)].params; }

HdiResult hdi(std::span<const double> samples, double level) {
  if (samples.empty()) throw std::invalid_argument("hdi: no samples");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("hdi: level must lie in (0, 1)");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  HdiResult res;
  if (sorted.front() == sorted.back()) {
    res.intervals = {{sorted.front(), sorted.front()}};
    res.coverage = 1.0;
    res.degenerate = true;
    return res;
  }
  const std::size_t n = sorted.size();
  const GridDensity g = kde(sorted);

  // Candidate thresholds are the densities at the samples, highest first.
  std::vector<double> dens(n);
  for (std::size_t i = 0; i < n; ++i) dens[i] = g.at(sorted[i]);
  std::sort(dens.begin(), dens.end(), std::greater<>());
  const auto need = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n) - 1e-9));
  std::size_t idx = std::max<std::size_t>(need, 1) - 1;
  for (; idx < n; ++idx) {
    res.intervals = clip(level_set(g, dens[idx]), sorted.front(), sorted.back());
    const std::size_t inside = count_inside(sorted, res.intervals);
    if (inside >= need) {
      res.coverage = static_cast<double>(inside) / static_cast<double>(n);
      return res;
    }
  }
  res.intervals = {{sorted.front(), sorted.back()}};
  res.coverage = 1.0;
  return res;
}

std::vector<double> quantiles(std::span<const double> samples, std::span<const double> probs) {
  if (samples.empty()) throw std::invalid_argument("quantiles: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(probs.size());
  for (double p : probs) out.push_back(quantile_sorted(sorted, p));
  return out;
}

double psrf(const std::vector<std::vector<double>>& chains_in, bool split) {
  if (chains_in.size() < 2 && !split) throw std::invalid_argument("psrf: need at least 2 chains");
  std::vector<std::vector<double>> chains;
  if (split) {
    for (const auto& c : chains_in) {
      const std::size_t half = c.size() / 2;
      chains.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
      chains.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
    }
  } else {
    chains = chains_in;
  }
  if (chains.size() < 2) throw std::invalid_argument("psrf: need at least 2 chains");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != n) throw std::invalid_argument("psrf: chains must have equal length");
  }
  if (n < 10) throw std::invalid_argument("psrf: chains must have at least 10 draws");

  const auto m = static_cast<double>(chains.size());
  const auto nn = static_cast<double>(n);
  std::vector<double> means;
  double w = 0.0;
  for (const auto& c : chains) {
    const double mu = mean_of(c);
    means.push_back(mu);
    w += sample_var(c, mu);
  }
  w /= m;
  if (!(w > 0.0)) throw std::domain_error("psrf: zero within-chain variance");
  const double b = nn * sample_var(means, mean_of(means));
  return std::sqrt(((nn - 1.0) / nn * w + b / nn) / w);
}

std::vector<double> susceptible_prob_all(std::span<const Draw> draws, std::size_t n) {
  std::vector<double> p(n, 0.0);
  if (draws.empty()) return p;
  for (const auto& d : draws) {
    for (std::size_t i = 0; i < n; ++i) p[i] += d.latent.ind[i];
  }
  for (double& v : p) v /= static_cast<double>(draws.size());
  return p;
}

std::vector<double> susceptible_prob(std::span<const Draw> draws, const Dataset& data) {
  const auto all = susceptible_prob_all(draws, data.size());
  std::vector<double> out;
  for (std::size_t i : data.censored_indices()) out.push_back(all[i]);
  return out;
}

FdrDecision fdr_control(std::span<const double> cure_probs, double alpha) {
  const std::size_t m = cure_probs.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cure_probs[a] > cure_probs[b]; });
  FdrDecision out;
  out.alpha = alpha;
  out.decisions.assign(m, 0);
  double cum = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    cum += 1.0 - cure_probs[order[j - 1]];
    const double g = cum / static_cast<double>(j);
    if (g <= alpha) {
      out.k_alpha = j;
      out.expected_fdr = g;
    }
  }
  for (std::size_t j = 0; j < out.k_alpha; ++j) out.decisions[order[j]] = 1;
  out.R = out.k_alpha;
  return out;
}

CureCurve cure_curve(std::span<const ModelParams> draws, std::span<const double> x_row,
                     std::span<const double> t_grid, double level) {
  CureCurve curve;
  curve.t.assign(t_grid.begin(), t_grid.end());
  const std::size_t g = t_grid.size();
  std::vector<std::vector<double>> values(g);
  for (const auto& p : draws) {
    const double eta = linear_predictor(p.beta, x_row);
    std::vector<double> row(g);
    bool ok = true;
    for (std::size_t j = 0; j < g && ok; ++j) {
      const double t = t_grid[j];
      SubjectTerms terms;
      if (t <= 0.0) {
        terms = subject_terms(p.gamma, p.lambda, eta, 0.0, 0.0);
        if (terms.feasible) terms.log_sp = 0.0;
      } else {
        terms = subject_terms(p.gamma, p.lambda, eta, weibull_log_cdf(t, p.alpha1, p.alpha2),
                              weibull_log_pdf(t, p.alpha1, p.alpha2));
      }
      ok = terms.feasible && std::isfinite(terms.log_sp);
      if (ok) row[j] = std::exp(terms.log_p0 - terms.log_sp);
    }
    if (!ok) {
      ++curve.skipped;
      continue;
    }
    for (std::size_t j = 0; j < g; ++j) values[j].push_back(row[j]);
  }
  for (std::size_t j = 0; j < g; ++j) {
    if (values[j].empty()) {
      curve.mean.push_back(kNaN);
      curve.lo.push_back(kNaN);
      curve.hi.push_back(kNaN);
      continue;
    }
    curve.mean.push_back(mean_of(values[j]));
    const HdiResult h = hdi(values[j], level);
    curve.lo.push_back(h.intervals.front().lo);
    curve.hi.push_back(h.intervals.back().hi);
  }
  return curve;
}

std::vector<ParamSummary> summarize_runs(const std::vector<TraceStore>& runs, double level) {
  if (runs.empty()) throw std::invalid_argument("summarize: no runs");
  std::vector<std::span<const Draw>> kept;
  std::size_t shortest = std::numeric_limits<std::size_t>::max();
  const Draw* best = nullptr;
  for (const auto& r : runs) {
    kept.push_back(r.retained());
    shortest = std::min(shortest, kept.back().size());
    if (kept.back().empty()) throw std::invalid_argument("summarize: a run has no retained draws");
    const Draw& b = kept.back()[map_index(kept.back())];
    if (best == nullptr || b.log_posterior > best->log_posterior) best = &b;
  }
  const std::size_t dim = best->params.dim();
  const auto names = param_names(best->params.beta.size());
  const auto map_vec = best->params.to_vector();

  std::vector<ParamSummary> out;
  for (std::size_t j = 0; j < dim; ++j) {
    ParamSummary s;
    s.name = names[j];
    s.map = map_vec[j];
    std::vector<double> pooled;
    std::vector<std::vector<double>> per_run;
    for (const auto& k : kept) {
      std::vector<double> col;
      col.reserve(k.size());
      for (const auto& d : k) col.push_back(d.params.to_vector()[j]);
      pooled.insert(pooled.end(), col.begin(), col.end());
      col.resize(shortest);
      per_run.push_back(std::move(col));
    }
    s.mean = mean_of(pooled);
    s.sd = std::sqrt(sample_var(pooled, s.mean));
    s.q = quantiles(pooled, kSummaryProbs);
    s.hdi = hdi(pooled, level);
    s.psrf = kNaN;
    if (per_run.size() >= 2 && shortest >= 10) {
      try {
        s.psrf = psrf(per_run);
      } catch (const std::domain_error&) {
        s.psrf = kNaN;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace curemc
