#include "curemc/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace curemc::io {

namespace {

constexpr char kLatentMagic[8] = {'C', 'U', 'R', 'E', 'L', 'A', 'T', '1'};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return cells;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw ValidationError("cannot write " + path.string());
  return f;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) throw ValidationError("cannot read " + path.string());
  return f;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), 8);
  if (!in) throw ValidationError("latent file truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf;
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

Dataset parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv: empty file");
  const auto header = split_line(line);
  int y_col = -1;
  int d_col = -1;
  std::vector<std::size_t> x_cols;
  Dataset data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "y") {
      y_col = static_cast<int>(c);
    } else if (header[c] == "delta") {
      d_col = static_cast<int>(c);
    } else {
      if (header[c].empty()) throw ValidationError("csv: empty column name in header");
      x_cols.push_back(c);
      data.covariate_names.push_back(header[c]);
    }
  }
  if (y_col < 0) throw ValidationError("csv: missing required column 'y'");
  if (d_col < 0) throw ValidationError("csv: missing required column 'delta'");
  data.k = x_cols.size();

  std::size_t row = 1;  // header is row 1
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    const std::string where = " (row " + std::to_string(row) + ")";
    if (cells.size() != header.size()) {
      throw ValidationError("csv: expected " + std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()) + where);
    }
    double y;
    if (!parse_number(cells[y_col], y)) throw ValidationError("csv: non-numeric y '" + cells[y_col] + "'" + where);
    if (!(y > 0.0) || !std::isfinite(y)) throw ValidationError("csv: y must be positive" + where);
    double d;
    if (!parse_number(cells[d_col], d) || (d != 0.0 && d != 1.0)) {
      throw ValidationError("csv: delta must be 0 or 1, found '" + cells[d_col] + "'" + where);
    }
    data.y.push_back(y);
    data.delta.push_back(static_cast<std::uint8_t>(d));
    for (std::size_t j = 0; j < x_cols.size(); ++j) {
      double v;
      if (!parse_number(cells[x_cols[j]], v) || !std::isfinite(v)) {
        throw ValidationError("csv: non-numeric value '" + cells[x_cols[j]] + "' in column " +
                              data.covariate_names[j] + where);
      }
      data.x.push_back(v);
    }
  }
  data.validate();
  return data;
}

Dataset read_csv(const std::filesystem::path& path) {
  auto f = open_in(path);
  return parse_csv(f);
}

void write_csv(std::ostream& out, const Dataset& data) {
  out << "y,delta";
  for (std::size_t j = 0; j < data.k; ++j) {
    out << ',' << (j < data.covariate_names.size() ? data.covariate_names[j] : "x" + std::to_string(j + 1));
  }
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << format_double(data.y[i]) << ',' << static_cast<int>(data.delta[i]);
    for (double v : data.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  auto f = open_out(path);
  write_csv(f, data);
}

bool Standardization::any() const {
  return std::any_of(applied.begin(), applied.end(), [](bool b) { return b; });
}

std::vector<double> Standardization::transform_row(std::span<const double> x) const {
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t j = 0; j < out.size() && j < applied.size(); ++j) {
    if (applied[j]) out[j] = (out[j] - mean[j]) / sd[j];
  }
  return out;
}

ModelParams Standardization::to_original_scale(const ModelParams& p) const {
  ModelParams q = p;
  for (std::size_t j = 0; j < applied.size(); ++j) {
    if (!applied[j]) continue;
    q.beta[j + 1] = p.beta[j + 1] / sd[j];
    q.beta[0] -= p.beta[j + 1] * mean[j] / sd[j];
  }
  return q;
}

Standardization identity_transform(const Dataset& data) {
  Standardization t;
  t.names = data.covariate_names;
  t.applied.assign(data.k, false);
  t.mean.assign(data.k, 0.0);
  t.sd.assign(data.k, 1.0);
  return t;
}

Standardization standardize(Dataset& data) {
  Standardization t = identity_transform(data);
  const std::size_t n = data.size();
  if (n < 2) return t;
  for (std::size_t j = 0; j < data.k; ++j) {
    bool binary = true;
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = data.x[i * data.k + j];
      if (v != 0.0 && v != 1.0) binary = false;
      m += v;
    }
    if (binary) continue;
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dv = data.x[i * data.k + j] - m;
      ss += dv * dv;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) continue;
    t.applied[j] = true;
    t.mean[j] = m;
    t.sd[j] = sd;
    for (std::size_t i = 0; i < n; ++i) data.x[i * data.k + j] = (data.x[i * data.k + j] - m) / sd;
  }
  return t;
}

void write_trace_csv(const std::filesystem::path& path, const TraceStore& trace) {
  auto f = open_out(path);
  const std::size_t n_beta = trace.draws.empty() ? 0 : trace.draws.front().params.beta.size();
  f << "cycle,log_posterior,log_likelihood";
  for (const auto& name : param_names(n_beta)) f << ',' << name;
  f << '\n';
  for (const auto& d : trace.draws) {
    f << d.cycle << ',' << format_double(d.log_posterior) << ',' << format_double(d.log_likelihood);
    for (double v : d.params.to_vector()) f << ',' << format_double(v);
    f << '\n';
  }
}

std::vector<Draw> read_trace_csv(const std::filesystem::path& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw ValidationError("trace: empty file " + path.string());
  const auto header = split_line(line);
  if (header.size() < 8 || header[0] != "cycle") throw ValidationError("trace: unexpected header in " + path.string());
  std::vector<Draw> draws;
  std::size_t row = 1;
  while (std::getline(f, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ValidationError("trace: wrong cell count (row " + std::to_string(row) + ")");
    }
    std::vector<double> v(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& s = cells[c];
      if (s == "-inf") {
        v[c] = -INFINITY;
      } else if (!parse_number(s, v[c])) {
        throw ValidationError("trace: bad number '" + s + "' (row " + std::to_string(row) + ")");
      }
    }
    Draw d;
    d.cycle = static_cast<std::uint64_t>(v[0]);
    d.log_posterior = v[1];
    d.log_likelihood = v[2];
    d.params = ModelParams::from_vector(std::span<const double>(v).subspan(3));
    draws.push_back(std::move(d));
  }
  return draws;
}

void write_latent_bin(const std::filesystem::path& path, const TraceStore& trace, std::size_t n) {
  auto f = open_out(path, true);
  f.write(kLatentMagic, 8);
  put_u64(f, n);
  put_u64(f, trace.draws.size());
  const std::size_t bytes = (n + 7) / 8;
  std::vector<char> rec(bytes);
  for (const auto& d : trace.draws) {
    std::fill(rec.begin(), rec.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (d.latent.ind[i]) rec[i / 8] = static_cast<char>(rec[i / 8] | (1 << (i % 8)));
    }
    f.write(rec.data(), static_cast<std::streamsize>(bytes));
  }
}

std::vector<LatentState> read_latent_bin(const std::filesystem::path& path) {
  auto f = open_in(path, true);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kLatentMagic, 8) != 0) throw ValidationError("latent: bad magic in " + path.string());
  const std::uint64_t n = get_u64(f);
  const std::uint64_t count = get_u64(f);
  const std::size_t bytes = (n + 7) / 8;
  std::vector<LatentState> out(count);
  std::vector<unsigned char> rec(bytes);
  for (auto& s : out) {
    f.read(reinterpret_cast<char*>(rec.data()), static_cast<std::streamsize>(bytes));
    if (!f) throw ValidationError("latent: truncated file " + path.string());
    s.ind.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.ind[i] = (rec[i / 8] >> (i % 8)) & 1;
  }
  return out;
}

}  // namespace curemc::io
