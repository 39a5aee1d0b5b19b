#include "curemc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "curemc/analysis.hpp"
#include "curemc/io.hpp"
#include "curemc/parallel.hpp"
#include "curemc/simgen.hpp"

namespace curemc::cli {

using nlohmann::json;

namespace {

constexpr const char* kManifestFormat = "curemc-run-1";

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot read " + path.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ValidationError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

double get_number(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ValidationError("config: '" + key + "' must be a number");
  return v.get<double>();
}

std::size_t get_count(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ValidationError("config: '" + key + "' must be a positive integer");
  }
  return v.get<std::size_t>();
}

bool get_bool(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) throw ValidationError("config: '" + key + "' must be true or false");
  return v.get<bool>();
}

json scales_json(const ProposalScales& s) {
  return {{"s2_gamma", s.s2_gamma}, {"s2_lambda", s.s2_lambda}, {"s2_alpha1", s.s2_alpha1},
          {"s2_alpha2", s.s2_alpha2}, {"nu", s.nu},           {"tau", s.tau}};
}

json rates_json(const MoveStats& st) {
  json j = json::object();
  for (std::size_t m = 0; m < kMoveCount; ++m) {
    const double r = st.rate(static_cast<Move>(m));
    j[move_name(static_cast<Move>(m))] = std::isnan(r) ? json(nullptr) : json(r);
  }
  return j;
}

json params_json(const ModelParams& p) {
  json j = json::object();
  const auto names = param_names(p.beta.size());
  const auto v = p.to_vector();
  for (std::size_t i = 0; i < v.size(); ++i) j[names[i]] = v[i];
  return j;
}

json transform_json(const io::Standardization& t) {
  return {{"names", t.names}, {"applied", t.applied}, {"mean", t.mean}, {"sd", t.sd}};
}

io::Standardization transform_from_json(const json& j) {
  io::Standardization t;
  t.names = j.at("names").get<std::vector<std::string>>();
  t.applied = j.at("applied").get<std::vector<bool>>();
  t.mean = j.at("mean").get<std::vector<double>>();
  t.sd = j.at("sd").get<std::vector<double>>();
  return t;
}

// One stored run as found on disk.
struct StoredRun {
  fs::path dir;
  json manifest;
  TraceStore trace;
};

std::vector<StoredRun> load_runs(const fs::path& run_dir, bool with_latent) {
  if (!fs::is_directory(run_dir)) throw ValidationError("not a directory: " + run_dir.string());
  std::map<int, fs::path> found;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_directory() || name.rfind("run_", 0) != 0) continue;
    try {
      found[std::stoi(name.substr(4))] = entry.path();
    } catch (const std::exception&) {
      continue;
    }
  }
  if (found.empty()) throw ValidationError("no run_<r> directories in " + run_dir.string());
  std::vector<StoredRun> runs;
  for (const auto& [r, dir] : found) {
    StoredRun run;
    run.dir = dir;
    run.manifest = read_json(dir / "manifest.json");
    const auto& meta = run.manifest.at("trace");
    run.trace.burn_in = meta.at("burn_in").get<std::uint64_t>();
    run.trace.total = meta.at("total").get<std::uint64_t>();
    run.trace.stride = meta.at("stride").get<std::uint64_t>();
    run.trace.draws = io::read_trace_csv(dir / "trace.csv");
    if (with_latent) {
      const fs::path lat = dir / "latent.bin";
      if (!fs::exists(lat)) throw ValidationError("missing latent trace " + lat.string());
      auto states = io::read_latent_bin(lat);
      if (states.size() != run.trace.draws.size()) {
        throw ValidationError("latent trace and trace.csv disagree in " + dir.string());
      }
      for (std::size_t t = 0; t < states.size(); ++t) run.trace.draws[t].latent = std::move(states[t]);
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

fs::path data_path_of(const StoredRun& run) { return run.manifest.at("data").get<std::string>(); }

io::Standardization transform_of(const StoredRun& run) {
  return transform_from_json(run.manifest.at("standardization"));
}

json summary_rows_json(const std::vector<ParamSummary>& rows) {
  json arr = json::array();
  for (const auto& s : rows) {
    json iv = json::array();
    for (const auto& i : s.hdi.intervals) iv.push_back({i.lo, i.hi});
    arr.push_back({{"name", s.name},
                   {"map", s.map},
                   {"mean", s.mean},
                   {"sd", s.sd},
                   {"quantiles", {{"2.5", s.q[0]}, {"25", s.q[1]}, {"50", s.q[2]}, {"75", s.q[3]}, {"97.5", s.q[4]}}},
                   {"hdi", iv},
                   {"hdi_coverage", s.hdi.coverage},
                   {"psrf", std::isnan(s.psrf) ? json(nullptr) : json(s.psrf)}});
  }
  return arr;
}

void write_summary_rows(std::ostream& out, const std::vector<ParamSummary>& rows, const std::string& scale) {
  for (const auto& s : rows) {
    out << s.name << ',' << scale << ',' << io::format_double(s.map) << ',' << io::format_double(s.mean) << ','
        << io::format_double(s.sd);
    for (double q : s.q) out << ',' << io::format_double(q);
    out << ',' << io::format_double(s.hdi.intervals.front().lo) << ','
        << io::format_double(s.hdi.intervals.back().hi) << ',';
    for (std::size_t i = 0; i < s.hdi.intervals.size(); ++i) {
      if (i) out << ';';
      out << io::format_double(s.hdi.intervals[i].lo) << ':' << io::format_double(s.hdi.intervals[i].hi);
    }
    out << ',' << io::format_double(s.psrf) << '\n';
  }
}

std::vector<Draw> pooled_retained(const std::vector<StoredRun>& runs) {
  std::vector<Draw> out;
  for (const auto& r : runs) {
    const auto kept = r.trace.retained();
    out.insert(out.end(), kept.begin(), kept.end());
  }
  return out;
}

std::vector<std::uint8_t> read_truth(const fs::path& path, std::size_t n) {
  const json j = read_json(path);
  if (!j.contains("true_latent")) throw ValidationError("no true_latent in " + path.string());
  auto t = j.at("true_latent").get<std::vector<int>>();
  if (t.size() != n) throw ValidationError("true_latent length differs from the data in " + path.string());
  return {t.begin(), t.end()};
}

}  // namespace

FitConfig parse_fit_config(const json& j_in) {
  const json& j = (j_in.is_object() && j_in.contains("format") && j_in.contains("config")) ? j_in.at("config") : j_in;
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  static const std::set<std::string> known = {
      "prior", "chains", "cycles", "iters_per_cycle", "warmup", "warmup_rounds", "warmup_batch", "p1",
      "epsilon", "d", "burnin_fraction", "thin", "seed", "workers", "standardize", "full_resolution"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError("config: unknown key '" + key + "'");
  }
  FitConfig cfg;
  Mc3Config& m = cfg.mc3;
  if (j.contains("prior")) cfg.prior = j.at("prior");
  if (j.contains("chains")) m.chains = get_count(j, "chains");
  if (j.contains("cycles")) m.cycles = get_count(j, "cycles");
  if (j.contains("iters_per_cycle")) m.iters_per_cycle = get_count(j, "iters_per_cycle");
  if (j.contains("warmup")) m.warmup = get_bool(j, "warmup");
  if (j.contains("warmup_rounds")) m.adapt.max_rounds = get_count(j, "warmup_rounds");
  if (j.contains("warmup_batch")) m.adapt.batch = get_count(j, "warmup_batch");
  if (j.contains("p1")) m.p1 = get_number(j, "p1");
  if (j.contains("epsilon")) m.epsilon = get_number(j, "epsilon");
  if (j.contains("d")) m.d = get_number(j, "d");
  if (j.contains("burnin_fraction")) m.burnin_fraction = get_number(j, "burnin_fraction");
  if (j.contains("thin")) m.thin = get_count(j, "thin");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0)) {
      throw ValidationError("config: 'seed' must be a non-negative integer");
    }
    m.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("workers")) {
    if (!j.at("workers").is_number_integer() || j.at("workers").get<long long>() < 0) {
      throw ValidationError("config: 'workers' must be a non-negative integer");
    }
    cfg.workers = j.at("workers").get<int>();
  }
  if (j.contains("standardize")) cfg.standardize = get_bool(j, "standardize");
  if (j.contains("full_resolution")) cfg.full_resolution = get_bool(j, "full_resolution");
  if (!(m.burnin_fraction > 0.0 && m.burnin_fraction < 1.0)) {
    throw ValidationError("config: burnin_fraction must lie in (0, 1)");
  }
  m.validate();
  if (!cfg.prior.is_string() && !cfg.prior.is_object()) {
    throw ValidationError("config: 'prior' must be a preset name or an object");
  }
  return cfg;
}

json to_json(const FitConfig& cfg) {
  const Mc3Config& m = cfg.mc3;
  return {{"prior", cfg.prior},
          {"chains", m.chains},
          {"cycles", m.cycles},
          {"iters_per_cycle", m.iters_per_cycle},
          {"warmup", m.warmup},
          {"warmup_rounds", m.adapt.max_rounds},
          {"warmup_batch", m.adapt.batch},
          {"p1", m.p1},
          {"epsilon", m.epsilon},
          {"d", m.d},
          {"burnin_fraction", m.burnin_fraction},
          {"thin", m.thin},
          {"seed", m.seed},
          {"workers", cfg.workers},
          {"standardize", cfg.standardize},
          {"full_resolution", cfg.full_resolution}};
}

Prior make_prior(const json& spec, std::size_t n_beta) {
  if (spec.is_string()) {
    const auto preset = parse_preset(spec.get<std::string>());
    if (!preset) throw ValidationError("prior: unknown preset '" + spec.get<std::string>() + "'");
    return Prior(preset_hyperparams(*preset, n_beta));
  }
  if (!spec.is_object()) throw ValidationError("prior: expected a preset name or an object");
  static const std::set<std::string> known = {"preset", "a_gamma", "b_gamma", "a_lambda", "b_lambda", "a1",
                                              "b1",     "a2",      "b2",      "mu",       "sigma"};
  for (const auto& [key, value] : spec.items()) {
    if (!known.count(key)) throw ValidationError("prior: unknown key '" + key + "'");
  }
  PriorPreset base = PriorPreset::regularized;
  if (spec.contains("preset")) {
    const auto p = parse_preset(spec.at("preset").get<std::string>());
    if (!p) throw ValidationError("prior: unknown preset in 'preset'");
    base = *p;
  }
  PriorHyperparams hp = preset_hyperparams(base, n_beta);
  const std::pair<const char*, double*> scalars[] = {
      {"a_gamma", &hp.a_gamma}, {"b_gamma", &hp.b_gamma}, {"a_lambda", &hp.a_lambda}, {"b_lambda", &hp.b_lambda},
      {"a1", &hp.a1},           {"b1", &hp.b1},           {"a2", &hp.a2},           {"b2", &hp.b2}};
  for (const auto& [key, dst] : scalars) {
    if (spec.contains(key)) *dst = get_number(spec, key);
  }
  if (spec.contains("mu")) {
    const auto& mu = spec.at("mu");
    if (!mu.is_array() || mu.size() != n_beta) {
      throw ValidationError("prior: mu must be an array of length " + std::to_string(n_beta));
    }
    hp.mu = mu.get<std::vector<double>>();
  }
  if (spec.contains("sigma")) {
    const auto& s = spec.at("sigma");
    if (s.is_number()) {
      hp.sigma.assign(n_beta * n_beta, 0.0);
      for (std::size_t r = 0; r < n_beta; ++r) hp.sigma[r * n_beta + r] = s.get<double>();
    } else {
      if (!s.is_array() || s.size() != n_beta) throw ValidationError("prior: sigma must be a k+1 square matrix");
      hp.sigma.clear();
      for (const auto& row : s) {
        if (!row.is_array() || row.size() != n_beta) throw ValidationError("prior: sigma must be a k+1 square matrix");
        for (const auto& v : row) hp.sigma.push_back(v.get<double>());
      }
    }
  }
  return Prior(std::move(hp));
}

void run_fit(const FitOptions& opt) {
  json raw = json::object();
  if (opt.config) raw = read_json(*opt.config);
  FitConfig cfg = parse_fit_config(raw);
  if (opt.seed) cfg.mc3.seed = *opt.seed;
  if (opt.workers) cfg.workers = *opt.workers;
  if (opt.runs < 1) throw ValidationError("fit: --runs must be >= 1");

  fs::path data_path;
  if (opt.data) {
    data_path = *opt.data;
  } else if (raw.is_object() && raw.contains("data")) {
    data_path = raw.at("data").get<std::string>();
  } else {
    throw ValidationError("fit: --data is required");
  }
  Dataset data = io::read_csv(data_path);
  const io::Standardization transform = cfg.standardize ? io::standardize(data) : io::identity_transform(data);
  const Prior prior = make_prior(cfg.prior, data.k + 1);
  if (cfg.workers > 0) parallel::set_threads(cfg.workers);

  fs::create_directories(opt.out);
  for (std::size_t r = 1; r <= opt.runs; ++r) {
    Mc3Config mc = cfg.mc3;
    mc.seed = cfg.mc3.seed + (r - 1);
    if (cfg.full_resolution) mc.thin = 1;
    const auto t0 = std::chrono::steady_clock::now();
    const Mc3Result res = run_mc3(data, prior, mc);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const fs::path dir = opt.out / ("run_" + std::to_string(r));
    fs::create_directories(dir);
    io::write_trace_csv(dir / "trace.csv", res.trace);
    io::write_latent_bin(dir / "latent.bin", res.trace, data.size());

    json chains = json::array();
    for (std::size_t c = 0; c < res.heats.size(); ++c) {
      const auto& ad = res.adaptation[c];
      chains.push_back({{"heat", res.heats[c]},
                        {"tuned_scales", scales_json(res.scales[c])},
                        {"acceptance", rates_json(res.move_stats[c])},
                        {"warmup_rounds", ad.rounds},
                        {"warmup_converged", ad.converged}});
    }
    json swaps = json::array();
    for (std::size_t c = 0; c < res.swap_attempts.size(); ++c) {
      swaps.push_back({{"pair", {c + 1, c + 2}}, {"attempts", res.swap_attempts[c]}, {"accepted", res.swap_accepts[c]}});
    }
    const json manifest = {{"format", kManifestFormat},
                           {"data", fs::absolute(data_path).string()},
                           {"config", to_json(cfg)},
                           {"run", r},
                           {"seed", mc.seed},
                           {"n", data.size()},
                           {"k", data.k},
                           {"covariates", data.covariate_names},
                           {"standardization", transform_json(transform)},
                           {"chains", chains},
                           {"swaps", swaps},
                           {"trace",
                            {{"burn_in", res.trace.burn_in},
                             {"total", res.trace.total},
                             {"stride", res.trace.stride},
                             {"draws", res.trace.draws.size()}}},
                           {"wall_seconds", wall}};
    write_json(dir / "manifest.json", manifest);
    std::cerr << "run " << r << ": " << res.trace.draws.size() << " draws stored, " << wall << " s\n";
  }
  run_summarize(opt.out);
}

void run_summarize(const fs::path& run_dir, double level) {
  const auto runs = load_runs(run_dir, false);
  std::vector<TraceStore> traces;
  for (const auto& r : runs) traces.push_back(r.trace);
  const auto rows = summarize_runs(traces, level);

  const io::Standardization transform = transform_of(runs.front());
  std::vector<ParamSummary> original;
  if (transform.any()) {
    std::vector<TraceStore> back = traces;
    for (auto& t : back) {
      for (auto& d : t.draws) d.params = transform.to_original_scale(d.params);
    }
    original = summarize_runs(back, level);
  }

  std::ofstream csv(run_dir / "summary.csv");
  if (!csv) throw ValidationError("cannot write summary in " + run_dir.string());
  csv << "parameter,scale,map,mean,sd,q2.5,q25,q50,q75,q97.5,hdi_lo,hdi_hi,hdi_intervals,psrf\n";
  write_summary_rows(csv, rows, transform.any() ? "standardized" : "original");
  if (!original.empty()) write_summary_rows(csv, original, "original");

  json retained = json::array();
  for (const auto& t : traces) retained.push_back(t.retained().size());
  json j = {{"runs", runs.size()}, {"level", level}, {"retained_draws", retained}, {"parameters", summary_rows_json(rows)}};
  if (!original.empty()) j["original_scale"] = summary_rows_json(original);
  write_json(run_dir / "summary.json", j);
}

std::vector<double> default_alpha_grid() {
  return {0.01, 0.025, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10, 0.15};
}

void run_fdr(const fs::path& run_dir, const std::vector<double>& alphas, const std::optional<fs::path>& truth_path) {
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw ValidationError("fdr: alpha values must lie in (0, 1)");
  }
  const auto runs = load_runs(run_dir, true);
  const fs::path data_path = data_path_of(runs.front());
  const Dataset data = io::read_csv(data_path);
  const auto draws = pooled_retained(runs);
  if (draws.empty()) throw ValidationError("fdr: no retained draws");
  for (const auto& d : draws) {
    if (d.latent.ind.size() != data.size()) throw ValidationError("fdr: latent draws do not match the data size");
  }
  const auto censored = data.censored_indices();
  const auto p_sus = susceptible_prob(draws, data);
  std::vector<double> q(p_sus.size());
  for (std::size_t j = 0; j < q.size(); ++j) q[j] = 1.0 - p_sus[j];

  std::optional<std::vector<std::uint8_t>> truth;
  fs::path sidecar = data_path;
  sidecar.replace_extension(".json");
  if (truth_path) {
    truth = read_truth(*truth_path, data.size());
  } else if (fs::exists(sidecar)) {
    const json side = read_json(sidecar);
    if (side.contains("true_latent")) truth = read_truth(sidecar, data.size());
  }
  std::size_t truly_cured = 0;
  if (truth) {
    for (std::size_t i : censored) truly_cured += (*truth)[i] == 0 ? 1 : 0;
  }

  std::ofstream csv(run_dir / "fdr.csv");
  if (!csv) throw ValidationError("cannot write fdr report in " + run_dir.string());
  csv << "alpha,k_alpha,R,expected_fdr,achieved_fdr,tpr\n";
  json results = json::array();
  for (double a : alphas) {
    const FdrDecision dec = fdr_control(q, a);
    json rows = json::array();
    std::size_t false_disc = 0;
    std::size_t true_disc = 0;
    for (std::size_t j = 0; j < dec.decisions.size(); ++j) {
      if (!dec.decisions[j]) continue;
      rows.push_back(censored[j] + 1);
      if (truth) ((*truth)[censored[j]] == 0 ? true_disc : false_disc) += 1;
    }
    double achieved = std::numeric_limits<double>::quiet_NaN();
    double tpr = std::numeric_limits<double>::quiet_NaN();
    if (truth) {
      achieved = dec.R > 0 ? static_cast<double>(false_disc) / static_cast<double>(dec.R) : 0.0;
      if (truly_cured > 0) tpr = static_cast<double>(true_disc) / static_cast<double>(truly_cured);
    }
    csv << io::format_double(a) << ',' << dec.k_alpha << ',' << dec.R << ',' << io::format_double(dec.expected_fdr)
        << ',' << (truth ? io::format_double(achieved) : "") << ',' << (truth && truly_cured ? io::format_double(tpr) : "")
        << '\n';
    results.push_back({{"alpha", a},
                       {"k_alpha", dec.k_alpha},
                       {"R", dec.R},
                       {"expected_fdr", dec.expected_fdr},
                       {"achieved_fdr", std::isnan(achieved) ? json(nullptr) : json(achieved)},
                       {"tpr", std::isnan(tpr) ? json(nullptr) : json(tpr)},
                       {"cured_rows", rows}});
  }
  json rows_all = json::array();
  for (std::size_t i : censored) rows_all.push_back(i + 1);
  write_json(run_dir / "fdr.json", {{"censored_rows", rows_all},
                                    {"cure_prob", q},
                                    {"retained_draws", draws.size()},
                                    {"ground_truth", truth.has_value()},
                                    {"results", results}});
}

void run_curves(const fs::path& run_dir, const std::string& x_spec, std::optional<double> t_max,
                std::size_t points, double level) {
  if (points < 2) throw ValidationError("curves: --points must be >= 2");
  const auto runs = load_runs(run_dir, false);
  const io::Standardization transform = transform_of(runs.front());

  std::map<std::string, double> given;
  std::stringstream ss(x_spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("curves: expected name=value, got '" + item + "'");
    const std::string name = item.substr(0, eq);
    try {
      std::size_t used = 0;
      const std::string value = item.substr(eq + 1);
      given[name] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ValidationError("curves: non-numeric value for '" + name + "'");
    }
  }
  std::vector<double> x;
  for (const auto& name : transform.names) {
    const auto it = given.find(name);
    if (it == given.end()) throw ValidationError("curves: missing covariate '" + name + "' in --x");
    x.push_back(it->second);
    given.erase(it);
  }
  if (!given.empty()) throw ValidationError("curves: unknown covariate '" + given.begin()->first + "'");
  const auto x_fit = transform.transform_row(x);

  double tm = 0.0;
  if (t_max) {
    tm = *t_max;
  } else {
    const Dataset data = io::read_csv(data_path_of(runs.front()));
    tm = *std::max_element(data.y.begin(), data.y.end());
  }
  if (!(tm > 0.0)) throw ValidationError("curves: --t-max must be positive");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) grid[i] = tm * static_cast<double>(i) / static_cast<double>(points - 1);

  std::vector<ModelParams> params;
  for (const auto& d : pooled_retained(runs)) params.push_back(d.params);
  if (params.empty()) throw ValidationError("curves: no retained draws");
  const CureCurve curve = cure_curve(params, x_fit, grid, level);

  std::ofstream csv(run_dir / "curves.csv");
  if (!csv) throw ValidationError("cannot write curves in " + run_dir.string());
  csv << "t,mean,lo,hi\n";
  for (std::size_t i = 0; i < points; ++i) {
    csv << io::format_double(curve.t[i]) << ',' << io::format_double(curve.mean[i]) << ','
        << io::format_double(curve.lo[i]) << ',' << io::format_double(curve.hi[i]) << '\n';
  }
  json xj = json::object();
  for (std::size_t j = 0; j < x.size(); ++j) xj[transform.names[j]] = x[j];
  write_json(run_dir / "curves.json", {{"x", xj},
                                       {"level", level},
                                       {"skipped_draws", curve.skipped},
                                       {"t", curve.t},
                                       {"mean", curve.mean},
                                       {"lo", curve.lo},
                                       {"hi", curve.hi}});
}

void run_simulate(const std::string& scenario, std::size_t n, std::uint64_t seed, const fs::path& out,
                  std::optional<double> rate, std::size_t mc_n) {
  const Scenario& sc = find_scenario(scenario);
  if (n < 1) throw ValidationError("simulate: --n must be >= 1");
  const SimulatedData sim = generate(sc, n, seed, rate, mc_n);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  io::write_csv(out, sim.data);
  fs::path side = out;
  side.replace_extension(".json");
  std::vector<int> truth(sim.truth.ind.begin(), sim.truth.ind.end());
  write_json(side, {{"scenario", sc.name},
                    {"n", n},
                    {"seed", seed},
                    {"params", params_json(sc.params)},
                    {"x1_levels", sc.x1_levels},
                    {"nominal_cure_rate", sc.nominal_cure_rate},
                    {"target_censoring", sc.target_censoring},
                    {"censoring_rate", sim.censoring_rate},
                    {"true_latent_note", "ground truth for evaluation only; 1 = susceptible, 0 = cured"},
                    {"true_latent", truth}});
}

int main(int argc, char** argv) {
  CLI::App app{"Bayesian cure-rate model: simulation, MC3 fitting and posterior reports"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset from a named scenario");
  std::string scenario;
  std::size_t n = 500;
  std::uint64_t seed = 1;
  std::string out;
  std::optional<double> rate;
  std::size_t mc_n = 100000;
  sim->add_option("--scenario", scenario, "scenario name, A1..F4")->required();
  sim->add_option("--n", n, "number of subjects");
  sim->add_option("--seed", seed, "random seed");
  sim->add_option("--out", out, "output CSV path (a .json sidecar is written next to it)")->required();
  sim->add_option("--rate", rate, "censoring rate; calibrated when omitted");
  sim->add_option("--mc-n", mc_n, "Monte Carlo size for the censoring calibration");

  auto* fit = app.add_subcommand("fit", "run MC3 on a dataset");
  FitOptions fo;
  std::string fit_data, fit_config, fit_out;
  std::optional<std::uint64_t> fit_seed;
  std::optional<int> fit_workers;
  fit->add_option("--data", fit_data, "dataset CSV (columns y, delta, covariates)");
  fit->add_option("--config", fit_config, "JSON config or a run manifest");
  fit->add_option("--runs", fo.runs, "independent runs (run r uses seed + r - 1)");
  fit->add_option("--out", fit_out, "output directory")->required();
  fit->add_option("--seed", fit_seed, "override the config seed");
  fit->add_option("--workers", fit_workers, "worker threads");

  auto* summ = app.add_subcommand("summarize", "rebuild the multi-run summary of a fit directory");
  std::string run_dir;
  double level = 0.95;
  summ->add_option("--run", run_dir, "fit output directory")->required();
  summ->add_option("--level", level, "HDI level");

  auto* fdr = app.add_subcommand("fdr", "FDR-controlled classification of censored subjects");
  std::string fdr_dir, alpha_grid, truth;
  fdr->add_option("--run", fdr_dir, "fit output directory")->required();
  fdr->add_option("--alpha-grid", alpha_grid, "comma-separated alpha values");
  fdr->add_option("--truth", truth, "JSON file with true_latent (simulated data)");

  auto* cur = app.add_subcommand("curves", "posterior cure probability given survival to t");
  std::string cur_dir, x_spec;
  std::optional<double> t_max;
  std::size_t points = 101;
  double cur_level = 0.95;
  cur->add_option("--run", cur_dir, "fit output directory")->required();
  cur->add_option("--x", x_spec, "covariate values, e.g. \"age=30,sex=1\"")->required();
  cur->add_option("--t-max", t_max, "end of the time grid (default: largest observed y)");
  cur->add_option("--points", points, "grid points");
  cur->add_option("--level", cur_level, "HDI level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      run_simulate(scenario, n, seed, out, rate, mc_n);
    } else if (*fit) {
      if (!fit_data.empty()) fo.data = fit_data;
      if (!fit_config.empty()) fo.config = fit_config;
      fo.out = fit_out;
      fo.seed = fit_seed;
      fo.workers = fit_workers;
      run_fit(fo);
    } else if (*summ) {
      if (!(level > 0.0 && level < 1.0)) throw ValidationError("summarize: --level must lie in (0, 1)");
      run_summarize(run_dir, level);
    } else if (*fdr) {
      std::vector<double> alphas = default_alpha_grid();
      if (!alpha_grid.empty()) {
        alphas.clear();
        std::stringstream ss(alpha_grid);
        std::string item;
        while (std::getline(ss, item, ',')) {
          try {
            alphas.push_back(std::stod(item));
          } catch (const std::exception&) {
            throw ValidationError("fdr: bad alpha '" + item + "'");
          }
        }
      }
      run_fdr(fdr_dir, alphas, truth.empty() ? std::nullopt : std::optional<fs::path>(truth));
    } else if (*cur) {
      if (!(cur_level > 0.0 && cur_level < 1.0)) throw ValidationError("curves: --level must lie in (0, 1)");
      run_curves(cur_dir, x_spec, t_max, points, cur_level);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON content: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace curemc::cli
