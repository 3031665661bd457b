#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "trifactor/estimator.hpp"
#include "trifactor/io.hpp"

using namespace trifactor;
namespace fs = std::filesystem;

namespace {

std::string small_csv(bool drop_one = false) {
  std::string s = "exporter,importer,period,value\n";
  int v = 0;
  for (const char* p : {"2000", "2001", "2002"})
    for (const char* e : {"US", "CN"})
      for (const char* m : {"DE", "JP"}) {
        ++v;
        if (drop_one && v == 7) continue;
        s += std::string(e) + "," + m + "," + p + "," + std::to_string(v) + ".5\n";
      }
  return s;
}

std::string error_of(const std::string& csv, io::LoadOptions opt = {}) {
  std::istringstream in(csv);
  try {
    io::parse_long_csv(in, opt, "t.csv");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
    return e.what();
  }
  return {};
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("trifactor_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("a 2 x 2 x 3 long file loads into a balanced tensor") {
  std::istringstream in(small_csv());
  const PanelTensor p = io::parse_long_csv(in);
  CHECK(p.M() == 2);
  CHECK(p.N() == 2);
  CHECK(p.T() == 3);
  CHECK(p.exporter_labels() == std::vector<std::string>{"CN", "US"});
  CHECK(p.importer_labels() == std::vector<std::string>{"DE", "JP"});
  CHECK(p.period_labels() == std::vector<std::string>{"2000", "2001", "2002"});
  // US,DE,2000 is the first row (1.5); CN,JP,2002 is row 12 (12.5).
  CHECK(p(1, 0, 0) == 1.5);
  CHECK(p(0, 1, 2) == 12.5);
}

TEST_CASE("periods keep their order of first appearance") {
  const std::string csv = "exporter,importer,period,value\nA,B,z,1\nA,B,a,2\nA,B,m,3\n";
  std::istringstream in(csv);
  CHECK(io::parse_long_csv(in).period_labels() == std::vector<std::string>{"z", "a", "m"});
}

TEST_CASE("a missing row is named") {
  const std::string msg = error_of(small_csv(true));
  CHECK(msg.find("1 missing cell:") != std::string::npos);
  CHECK(msg.find("(CN, DE, 2001)") != std::string::npos);
}

TEST_CASE("at most ten missing cells are listed") {
  std::string csv = "exporter,importer,period,value\n";
  for (int t = 0; t < 12; ++t) csv += "A,B," + std::to_string(t) + ",1\n";
  csv += "C,D,0,1\n";
  const std::string msg = error_of(csv);
  CHECK(msg.find("35 missing cells:") != std::string::npos);
  CHECK(msg.find(", ...") != std::string::npos);
  std::size_t count = 0;
  for (std::size_t pos = 0; (pos = msg.find('(', pos)) != std::string::npos; ++pos) ++count;
  CHECK(count == 10);
}

TEST_CASE("duplicate rows report the first duplicate") {
  std::string csv = small_csv() + "US,JP,2000,9\nCN,DE,2000,9\n";
  const std::string msg = error_of(csv);
  CHECK(msg.find("line 14") != std::string::npos);
  CHECK(msg.find("(US, JP, 2000)") != std::string::npos);
  CHECK(msg.find("first given at line 3") != std::string::npos);
}

TEST_CASE("non-numeric values report the row") {
  std::string csv = small_csv();
  csv.replace(csv.find("3.5"), 3, "abc");
  const std::string msg = error_of(csv);
  CHECK(msg.find("line 4") != std::string::npos);
  CHECK(msg.find("'abc'") != std::string::npos);
  CHECK(error_of("exporter,importer,period,value\nA,B,1,nan\n").find("line 2") != std::string::npos);
  CHECK(error_of("exporter,importer,period,value\nA,B,1,1.0x\n").find("line 2") != std::string::npos);
}

TEST_CASE("header and field-count problems") {
  CHECK(!error_of("a,b,c,d\n").empty());
  CHECK(!error_of("").empty());
  CHECK(!error_of("exporter,importer,period,value\n").empty());
  CHECK(error_of("exporter,importer,period,value\nA,B,1\n").find("expected 4 fields") != std::string::npos);
}

TEST_CASE("quoted fields, CRLF line ends and a BOM are accepted") {
  const std::string csv =
      "\xEF\xBB\xBF" "exporter,importer,period,value\r\n\"Korea, Rep.\",\"X \"\"Y\"\"\",2000, 1e-3 \r\n";
  std::istringstream in(csv);
  const PanelTensor p = io::parse_long_csv(in);
  CHECK(p.exporter_labels()[0] == "Korea, Rep.");
  CHECK(p.importer_labels()[0] == "X \"Y\"");
  CHECK(p(0, 0, 0) == 1e-3);
}

TEST_CASE("self-pairs") {
  const std::string csv = "exporter,importer,period,value\nA,A,1,5\nA,B,1,1\nB,A,1,2\nB,B,1,3\n";
  CHECK(error_of(csv).find("self-pair") != std::string::npos);
  std::istringstream in(csv);
  const PanelTensor p = io::parse_long_csv(in, {.allow_self_pairs = true});
  CHECK(p(0, 0, 0) == 5.0);

  // Without self-pair rows the diagonal is a structural zero.
  std::istringstream in2("exporter,importer,period,value\nA,B,1,1\nB,A,1,2\n");
  const PanelTensor q = io::parse_long_csv(in2);
  CHECK(q.M() == 2);
  CHECK(q(0, 0, 0) == 0.0);
  CHECK(q(1, 0, 0) == 2.0);
  // With self-pairs allowed, the diagonal must be present.
  CHECK(error_of("exporter,importer,period,value\nA,B,1,1\nB,A,1,2\n", {.allow_self_pairs = true})
            .find("(A, A, 1)") != std::string::npos);
}

TEST_CASE("write_panel then load_long_csv reproduces the tensor bitwise") {
  std::mt19937_64 gen(12);
  std::normal_distribution<double> nd(0.0, 1e3);
  std::vector<double> v(4 * 3 * 5);
  for (double& x : v) x = nd(gen) * std::pow(10.0, static_cast<int>(gen() % 40) - 20);
  v[3] = -0.0;
  v[4] = 5e-324;
  v[5] = 1.7976931348623157e308;
  const PanelTensor p(4, 3, 5, v, {"a", "b", "c,d", "e"}, {"X", "Y", "Z"},
                      {"2001-01", "2000-12", "1999", "q3", "2002"});
  const fs::path dir = temp_dir("roundtrip");
  io::write_panel(dir / "p.csv", p);
  const PanelTensor q = io::load_long_csv(dir / "p.csv");
  CHECK(q == p);
  CHECK(std::signbit(q(3, 0, 0)));

  // Default labels also survive the lexicographic sort.
  std::vector<double> w(12 * 2 * 3);
  for (double& x : w) x = nd(gen);
  const PanelTensor d(12, 2, 3, w);
  io::write_panel(dir / "d.csv", d);
  CHECK(io::load_long_csv(dir / "d.csv") == d);
}

TEST_CASE("format_real round-trips") {
  std::mt19937_64 gen(1);
  for (int k = 0; k < 1000; ++k) {
    double x;
    const std::uint64_t bits = gen();
    std::memcpy(&x, &bits, sizeof x);
    if (!std::isfinite(x)) continue;
    CHECK(std::strtod(io::format_real(x).c_str(), nullptr) == x);
  }
  CHECK(io::format_real(0.1) == "0.10000000000000001");
}

TEST_CASE("global loadings are min-max rescaled") {
  Vector v(3);
  v << 1, 2, 3;
  io::Rescaled r = io::rescale_global_loadings(v);
  CHECK(r.values(0) == 0.0);
  CHECK(r.values(1) == 0.5);
  CHECK(r.values(2) == 1.0);
  CHECK(!r.warning);

  Vector u(2);
  u << 0, 1;
  CHECK(io::rescale_global_loadings(u).values == u);

  std::mt19937_64 gen(2);
  const Vector w = oracle::random_normal(gen, 50, 1).col(0);
  r = io::rescale_global_loadings(w);
  CHECK(r.values.minCoeff() == 0.0);
  CHECK(r.values.maxCoeff() == 1.0);

  r = io::rescale_global_loadings(Vector::Constant(4, 2.0));
  CHECK(r.values == Vector::Constant(4, 0.5));
  CHECK(r.warning.has_value());
}

TEST_CASE("country loadings are scaled by the largest magnitude") {
  Vector v(2);
  v << -2, 1;
  io::Rescaled r = io::rescale_country_loadings(v);
  CHECK(r.values(0) == -1.0);
  CHECK(r.values(1) == 0.5);

  Vector one(1);
  one << 3;
  CHECK(io::rescale_country_loadings(one).values(0) == 1.0);

  std::mt19937_64 gen(3);
  const Vector w = oracle::random_normal(gen, 40, 1).col(0);
  r = io::rescale_country_loadings(w);
  CHECK(r.values.cwiseAbs().maxCoeff() == 1.0);
  for (Eigen::Index k = 0; k < w.size(); ++k) CHECK(std::signbit(r.values(k)) == std::signbit(w(k)));

  r = io::rescale_country_loadings(Vector::Zero(3));
  CHECK(r.values == Vector::Zero(3));
  CHECK(r.warning.has_value());
}

TEST_CASE("atomic writes replace files and leave no temporaries") {
  const fs::path dir = temp_dir("atomic");
  io::write_atomic(dir / "sub" / "a.txt", "first");
  io::write_atomic(dir / "sub" / "a.txt", "second");
  CHECK(slurp(dir / "sub" / "a.txt") == "second");
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir / "sub")) {
    (void)e;
    ++n;
  }
  CHECK(n == 1);
  fs::create_directories(dir / "blocked");
  CHECK_THROWS_AS(io::write_atomic(dir / "blocked", "x"), Error);
}

TEST_CASE("Monte Carlo report serializations") {
  McReport r;
  r.seed = 7;
  r.k_max = 8;
  McCell c;
  c.M = 20;
  c.N = 30;
  c.T = 40;
  c.rates.global = {0.5, 0.25, 0.25};
  c.rmse = {0.1, 0.2, 0.3};
  c.replications = 4;
  r.cells.push_back(c);
  const std::string csv = io::mc_report_csv(r);
  CHECK(csv.rfind("M,N,T,P_gc,P_gu,P_go,P_Ec,P_Eu,P_Eo,P_Ic,P_Iu,P_Io,RMSE_G,RMSE_E,RMSE_I,replications\n", 0) == 0);
  CHECK(csv.find("20,30,40,0.5,0.25,0.25,0,0,0,0,0,0,0.10000000000000001,") != std::string::npos);
  const io::Json j = io::to_json(r);
  CHECK(j["seed"] == 7);
  CHECK(j["cells"][0]["selection"]["global"]["under"] == 0.25);
  CHECK(j["cells"][0]["rmse"]["I"] == 0.3);
}

TEST_CASE("selection diagnostics serialize with nulls for undefined ratios") {
  const io::Json j = io::to_json(select_rank({1.0, 0.0, 0.0}, 0.5));
  CHECK(j["chosen_k"] == 1);
  CHECK(j["ratios"][1] == 0.0);
  CHECK(j["ratios"][2].is_null());
  CHECK(j["criterion_values"].size() == 4);
}

TEST_CASE("file stems are safe and unique") {
  const auto s = io::file_stems({"US", "a/b", "a_b", "..", ""});
  CHECK(s[0] == "US");
  CHECK(s[1] == "a_b");
  CHECK(s[2] == "a_b_2");
  CHECK(s[3] == "_..");
  CHECK(s[4] == "_");
}

TEST_CASE("decomposition artifacts") {
  const auto fx = oracle::exact_fixture(5, 20, 20, 1);
  const Decomposition d = decompose(fx.panel);
  const fs::path dir = temp_dir("artifacts");
  const auto warnings = io::write_decomposition(dir, fx.panel, d);
  for (const char* f : {"global_factors.csv", "global_loadings.csv", "ranks.json", "residual_stats.json"})
    CHECK(fs::exists(dir / f));
  for (const char* sub : {"exporter_factors", "importer_factors", "exporter_loadings", "importer_loadings"})
    CHECK(fs::exists(dir / sub / "07.csv"));

  const std::string gf = slurp(dir / "global_factors.csv");
  CHECK(gf.rfind("period,factor_1,lower_1,upper_1\n", 0) == 0);
  const std::string gl = slurp(dir / "global_loadings.csv");
  CHECK(gl.rfind("exporter,importer,loading_1,rescaled_1\n01,01,", 0) == 0);
  CHECK(slurp(dir / "importer_loadings" / "03.csv").rfind("exporter", 0) == 0);

  const io::Json ranks = io::Json::parse(slurp(dir / "ranks.json"));
  CHECK(ranks["global"]["rank"] == 1);
  CHECK(ranks["exporters"].size() == 20);
  CHECK(ranks["importers"][4]["rank"] == fx.r_I[4]);
  CHECK(ranks["global"]["diagnostics"]["eigenvalues"].size() == 8);

  const io::Json stats = io::Json::parse(slurp(dir / "residual_stats.json"));
  CHECK(stats["r_squared"].get<double>() > 1.0 - 1e-10);

  // Zero-rank country blocks produce factor files with only the period column.
  const auto stems = io::file_stems(fx.panel.exporter_labels());
  for (std::size_t i = 0; i < 20; ++i)
    if (fx.r_E[i] == 0) {
      CHECK(slurp(dir / "exporter_factors" / (stems[i] + ".csv")).rfind("period\n", 0) == 0);
      break;
    }
  CHECK(warnings.empty());
}
