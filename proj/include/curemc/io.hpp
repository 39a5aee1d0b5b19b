// Dataset CSV, trace CSV and packed latent files.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "curemc/model.hpp"
#include "curemc/trace.hpp"

namespace curemc::io {

/// Shortest decimal string that parses back to exactly v.
std::string format_double(double v);

/// Reads a CSV with a header containing y and delta; every other column is
/// a numeric covariate, in file order. Throws ValidationError naming the row.
Dataset parse_csv(std::istream& in);
Dataset read_csv(const std::filesystem::path& path);

void write_csv(std::ostream& out, const Dataset& data);
void write_csv(const std::filesystem::path& path, const Dataset& data);

/// Per-covariate centring and scaling. Columns taking only the values 0 and 1
/// and constant columns are left alone (applied = false).
struct Standardization {
  std::vector<std::string> names;
  std::vector<bool> applied;
  std::vector<double> mean;
  std::vector<double> sd;  // sample sd, n - 1 denominator

  bool any() const;
  /// Maps a covariate row on the original scale to the fitted scale.
  std::vector<double> transform_row(std::span<const double> x) const;
  /// beta on the fitted scale -> beta on the original covariate scale.
  ModelParams to_original_scale(const ModelParams& p) const;
};

/// Standardises data.x in place and returns the transform.
Standardization standardize(Dataset& data);
/// Transform with nothing applied.
Standardization identity_transform(const Dataset& data);

/// Header: cycle,log_posterior,log_likelihood,gamma,lambda,alpha1,alpha2,beta0..beta_k
void write_trace_csv(const std::filesystem::path& path, const TraceStore& trace);
/// Reads draws back (latent left empty).
std::vector<Draw> read_trace_csv(const std::filesystem::path& path);

/// "CURELAT1", uint64 n, uint64 count, then count records of ceil(n/8)
/// bytes; subject i is bit i%8 of byte i/8. Integers little-endian.
void write_latent_bin(const std::filesystem::path& path, const TraceStore& trace, std::size_t n);
std::vector<LatentState> read_latent_bin(const std::filesystem::path& path);

}  // namespace curemc::io
