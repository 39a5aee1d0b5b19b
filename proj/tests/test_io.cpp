#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "curemc/io.hpp"
#include "curemc/rng.hpp"
#include "test_util.hpp"

using namespace curemc;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("curemc_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string error_of(const std::string& csv) {
  std::istringstream in(csv);
  try {
    io::parse_csv(in);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("golden csv") {
  std::istringstream in("age,y,delta,sex\n30,1.5,1,0\n41.25,0.25,0,1\n\n19,3,0,1\n");
  const Dataset d = io::parse_csv(in);
  CHECK(d.size() == 3);
  CHECK(d.k == 2);
  CHECK(d.covariate_names == std::vector<std::string>{"age", "sex"});
  CHECK(d.y == std::vector<double>{1.5, 0.25, 3.0});
  CHECK(d.delta == std::vector<std::uint8_t>{1, 0, 0});
  CHECK(d.x == std::vector<double>{30, 0, 41.25, 1, 19, 1});
}

TEST_CASE("csv errors name the row") {
  CHECK(error_of("y,x\n1,2\n").find("delta") != std::string::npos);
  CHECK(error_of("delta,x\n1,2\n").find("'y'") != std::string::npos);
  CHECK(error_of("y,delta,x\n1,1,2\n2,0,abc\n").find("row 3") != std::string::npos);
  CHECK(error_of("y,delta\n1,1\n-2,0\n").find("row 3") != std::string::npos);
  CHECK(error_of("y,delta\n0,1\n").find("row 2") != std::string::npos);
  CHECK(error_of("y,delta\n1,2\n").find("row 2") != std::string::npos);
  CHECK(error_of("y,delta\n1,1,3\n").find("row 2") != std::string::npos);
  CHECK(error_of("").find("empty") != std::string::npos);
  CHECK_THROWS_AS(io::read_csv("/nonexistent/file.csv"), ValidationError);
}

TEST_CASE("csv round trip is exact") {
  const auto sim = generate(find_scenario("E1"), 300, 1, 0.4);
  std::stringstream buf;
  io::write_csv(buf, sim.data);
  const Dataset back = io::parse_csv(buf);
  CHECK(back.y == sim.data.y);
  CHECK(back.delta == sim.data.delta);
  CHECK(back.x == sim.data.x);
  CHECK(back.covariate_names == sim.data.covariate_names);
}

TEST_CASE("shortest round-trip formatting") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456.0}) CHECK(std::stod(io::format_double(v)) == v);
  CHECK(io::format_double(-INFINITY) == "-inf");
  CHECK(io::format_double(NAN) == "nan");
}

TEST_CASE("standardisation") {
  Rng rng = make_stream(2, 0);
  Dataset d;
  d.k = 3;
  d.covariate_names = {"age", "sex", "const"};
  for (int i = 0; i < 500; ++i) {
    d.y.push_back(1.0 + uniform01(rng));
    d.delta.push_back(i % 2);
    d.x.insert(d.x.end(), {20 + 40 * uniform01(rng), static_cast<double>(i % 3 == 0), 7.0});
  }
  const Dataset orig = d;
  const auto t = io::standardize(d);
  CHECK(t.applied == std::vector<bool>{true, false, false});
  double m = 0, v = 0;
  for (std::size_t i = 0; i < d.size(); ++i) m += d.x[i * 3];
  m /= 500;
  for (std::size_t i = 0; i < d.size(); ++i) v += (d.x[i * 3] - m) * (d.x[i * 3] - m);
  v /= 499;
  CHECK(std::abs(m) < 1e-12);
  CHECK(std::abs(v - 1.0) < 1e-12);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(d.x[i * 3 + 1] == orig.x[i * 3 + 1]);
    CHECK(d.x[i * 3 + 2] == 7.0);
  }

  // Linear predictor is the same on both scales.
  ModelParams p;
  p.beta = {0.3, -0.8, 0.5, 0.1};
  const ModelParams back = t.to_original_scale(p);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(linear_predictor(p.beta, d.row(i)) == doctest::Approx(linear_predictor(back.beta, orig.row(i))).epsilon(1e-12));
  }
  const auto row = t.transform_row(orig.row(4));
  for (std::size_t j = 0; j < 3; ++j) CHECK(row[j] == doctest::Approx(d.row(4)[j]).epsilon(1e-14));
}

TEST_CASE("recidivism-shaped file") {
  // 5000 subjects, sex and age, 504 censored women and 2601 censored men.
  const fs::path dir = scratch_dir("recid");
  Rng rng = make_stream(3, 0);
  {
    std::ofstream f(dir / "recid.csv");
    f << "y,delta,sex,age\n";
    for (int i = 0; i < 5000; ++i) {
      const int sex = i < 800 ? 0 : 1;
      const int cens = (sex == 0 && i < 504) || (sex == 1 && i >= 800 && i < 800 + 2601);
      f << io::format_double(0.01 + 5 * uniform01(rng)) << ',' << (cens ? 0 : 1) << ',' << sex << ','
        << io::format_double(18 + 50 * uniform01(rng)) << '\n';
    }
  }
  Dataset d = io::read_csv(dir / "recid.csv");
  CHECK(d.size() == 5000);
  CHECK(d.censored_indices().size() == 3105);
  const auto t = io::standardize(d);
  CHECK(t.applied == std::vector<bool>{false, true});
}

TEST_CASE("trace and latent files round trip") {
  const fs::path dir = scratch_dir("trace");
  TraceStore tr;
  Rng rng = make_stream(4, 0);
  for (std::uint64_t c = 1; c <= 30; ++c) {
    Draw d;
    d.cycle = c * 10;
    d.params.gamma = std_normal(rng);
    d.params.lambda = uniform01(rng);
    d.params.beta = {std_normal(rng), std_normal(rng), std_normal(rng)};
    d.log_likelihood = -100 * uniform01(rng);
    d.log_posterior = c == 3 ? -INFINITY : d.log_likelihood - 5;
    d.latent.ind.resize(21);
    for (auto& b : d.latent.ind) b = uniform01(rng) < 0.5;
    tr.draws.push_back(d);
  }
  io::write_trace_csv(dir / "trace.csv", tr);
  io::write_latent_bin(dir / "latent.bin", tr, 21);
  const auto back = io::read_trace_csv(dir / "trace.csv");
  const auto lat = io::read_latent_bin(dir / "latent.bin");
  REQUIRE(back.size() == 30);
  REQUIRE(lat.size() == 30);
  for (std::size_t t = 0; t < 30; ++t) {
    CHECK(back[t].cycle == tr.draws[t].cycle);
    CHECK(back[t].params == tr.draws[t].params);
    CHECK(back[t].log_posterior == tr.draws[t].log_posterior);
    CHECK(lat[t].ind == tr.draws[t].latent.ind);
  }
  std::ifstream f(dir / "trace.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header == "cycle,log_posterior,log_likelihood,gamma,lambda,alpha1,alpha2,beta0,beta1,beta2");
  CHECK(fs::file_size(dir / "latent.bin") == 8 + 16 + 30 * 3);

  {
    std::ofstream bad(dir / "bad.bin", std::ios::binary);
    bad << "NOTMAGIC";
  }
  CHECK_THROWS_AS(io::read_latent_bin(dir / "bad.bin"), ValidationError);
}
