// Command implementations behind the curemc executable. Each run_* function
// throws ValidationError or NumericalError; main() maps those to exit codes
// 2 and 3.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "curemc/prior.hpp"
#include "curemc/sampler.hpp"

namespace curemc::cli {

namespace fs = std::filesystem;

struct FitConfig {
  nlohmann::json prior = "regularized";  // preset name or hyperparameter object
  Mc3Config mc3;
  int workers = 0;  // 0 keeps the OpenMP default
  bool standardize = false;
  bool full_resolution = false;
};

/// Reads the JSON config, filling defaults. A run manifest is also accepted
/// (its "config" member is used). Unknown keys are rejected.
FitConfig parse_fit_config(const nlohmann::json& j);
nlohmann::json to_json(const FitConfig& cfg);

/// Resolves the prior member against the number of beta coefficients.
Prior make_prior(const nlohmann::json& spec, std::size_t n_beta);

struct FitOptions {
  std::optional<fs::path> data;  // taken from the manifest when absent
  std::optional<fs::path> config;
  std::size_t runs = 4;
  fs::path out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

/// Writes out/run_<r>/{trace.csv,latent.bin,manifest.json} for r = 1..runs
/// (run r uses seed + r - 1), then the multi-run summary.
void run_fit(const FitOptions& opt);

/// summary.csv and summary.json in run_dir from the stored runs.
void run_summarize(const fs::path& run_dir, double level = 0.95);

/// Default alpha grid of the FDR report.
std::vector<double> default_alpha_grid();

/// fdr.csv and fdr.json in run_dir. Ground truth is read from `truth` or,
/// when absent, from the data file's JSON sidecar if one exists.
void run_fdr(const fs::path& run_dir, const std::vector<double>& alphas,
             const std::optional<fs::path>& truth);

/// curves.csv and curves.json: P(cured | T >= t, x) on an even grid over
/// [0, t_max]. x_spec is "name=value,..." on the original covariate scale.
void run_curves(const fs::path& run_dir, const std::string& x_spec, std::optional<double> t_max,
                std::size_t points, double level = 0.95);

/// Dataset CSV plus JSON sidecar with scenario, seed, rate and true latent.
void run_simulate(const std::string& scenario, std::size_t n, std::uint64_t seed, const fs::path& out,
                  std::optional<double> rate, std::size_t mc_n);

int main(int argc, char** argv);

}  // namespace curemc::cli
