#include <random>

#include "doctest.h"
#include "trifactor/core.hpp"

using namespace trifactor;

namespace {

// y(1,1)=a, y(2,1)=b, y(1,2)=c, y(2,2)=d in 1-based notation.
PanelTensor abcd() { return PanelTensor(2, 2, 1, {1.0, 2.0, 3.0, 4.0}); }

PanelTensor random_panel(std::size_t M, std::size_t N, std::size_t T, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(M * N * T);
  for (double& x : v) x = nd(gen);
  return PanelTensor(M, N, T, std::move(v));
}

}  // namespace

TEST_CASE("stack orders the exporter index fastest") {
  const StackedPanel s = stack(abcd());
  REQUIRE(s.matrix.rows() == 4);
  REQUIRE(s.matrix.cols() == 1);
  CHECK(s.matrix(0, 0) == 1.0);
  CHECK(s.matrix(1, 0) == 2.0);
  CHECK(s.matrix(2, 0) == 3.0);
  CHECK(s.matrix(3, 0) == 4.0);
  CHECK(s.row(1, 0) == 1);
  CHECK(s.row(0, 1) == 2);
}

TEST_CASE("stack matches direct index arithmetic and unstack inverts it") {
  const PanelTensor p = random_panel(3, 2, 4, 11);
  const StackedPanel s = stack(p);
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t i = 0; i < 3; ++i)
        CHECK(s.matrix(static_cast<Eigen::Index>(j * 3 + i), static_cast<Eigen::Index>(t)) == p(i, j, t));
  CHECK(unstack(s, &p) == p);
  CHECK(unstack(s).values() == p.values());
}

TEST_CASE("importer and exporter slices") {
  const PanelTensor p = abcd();
  Matrix s = slice_importer(p, 0);
  CHECK(s.rows() == 2);
  CHECK(s(0, 0) == 1.0);
  CHECK(s(1, 0) == 2.0);
  s = slice_importer(p, 1);
  CHECK(s(0, 0) == 3.0);
  CHECK(s(1, 0) == 4.0);
  s = slice_exporter(p, 0);
  CHECK(s(0, 0) == 1.0);
  CHECK(s(1, 0) == 3.0);
  s = slice_exporter(p, 1);
  CHECK(s(0, 0) == 2.0);
  CHECK(s(1, 0) == 4.0);
}

TEST_CASE("slices agree with a naive triple loop") {
  const PanelTensor p = random_panel(3, 2, 4, 5);
  for (std::size_t j = 0; j < 2; ++j) {
    const Matrix s = slice_importer(p, j);
    REQUIRE(s.rows() == 3);
    REQUIRE(s.cols() == 4);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t t = 0; t < 4; ++t)
        CHECK(s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) == p.values()[i + 3 * (j + 2 * t)]);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const Matrix s = slice_exporter(p, i);
    REQUIRE(s.rows() == 2);
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t t = 0; t < 4; ++t)
        CHECK(s(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t)) == p.values()[i + 3 * (j + 2 * t)]);
  }
}

TEST_CASE("out-of-range slices throw index errors") {
  const PanelTensor p = abcd();
  for (auto f : {+[](const PanelTensor& q) { slice_importer(q, 2); },
                 +[](const PanelTensor& q) { slice_exporter(q, 2); },
                 +[](const PanelTensor& q) { (void)q.at(0, 0, 1); }}) {
    try {
      f(p);
      FAIL("expected an exception");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Index);
    }
  }
}

TEST_CASE("panel construction validates its inputs") {
  CHECK_THROWS_AS(PanelTensor(0, 2, 2, {}), Error);
  CHECK_THROWS_AS(PanelTensor(2, 2, 2, std::vector<double>(7)), Error);
  CHECK_THROWS_AS(PanelTensor(1, 1, 1, {1.0}, {"a", "b"}), Error);
  try {
    PanelTensor(2, 1, 1, {1.0, std::nan("")});
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numeric);
    CHECK(std::string(e.what()).find("(2,1,1)") != std::string::npos);
  }
}

TEST_CASE("default labels are zero padded and sort numerically") {
  const PanelTensor p = PanelTensor::zeros(12, 3, 2);
  CHECK(p.exporter_labels().front() == "01");
  CHECK(p.exporter_labels().back() == "12");
  CHECK(std::is_sorted(p.exporter_labels().begin(), p.exporter_labels().end()));
  CHECK(p.importer_labels() == std::vector<std::string>{"1", "2", "3"});
}

TEST_CASE("component accessors read the right loading rows") {
  Decomposition d;
  d.M = 2;
  d.N = 3;
  d.T = 2;
  d.global.factors = Matrix::Ones(2, 1);
  d.global.loadings = Matrix(6, 1);
  d.global.loadings << 1, 2, 3, 4, 5, 6;
  d.global.rank = 1;
  d.exporters.resize(2);
  d.importers.resize(3);
  d.exporters[1].factors = Matrix::Constant(2, 1, 2.0);
  d.exporters[1].loadings = Matrix(3, 1);
  d.exporters[1].loadings << 10, 20, 30;
  d.exporters[1].rank = 1;
  d.importers[2].factors = Matrix::Constant(2, 1, 3.0);
  d.importers[2].loadings = Matrix(2, 1);
  d.importers[2].loadings << 7, 8;
  d.importers[2].rank = 1;
  CHECK(d.global_part(1, 2, 0) == 6.0);
  CHECK(d.exporter_part(1, 2, 1) == 60.0);
  CHECK(d.exporter_part(0, 2, 1) == 0.0);
  CHECK(d.importer_part(1, 2, 0) == 24.0);
  CHECK(d.importer_part(1, 0, 0) == 0.0);
}
