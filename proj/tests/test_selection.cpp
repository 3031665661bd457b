#include <cmath>
#include <random>

#include "doctest.h"
#include "trifactor/selection.hpp"

using namespace trifactor;

TEST_CASE("omega is 1 / ln of the largest dimension") {
  CHECK(omega(20, 20, 20) == doctest::Approx(0.33381).epsilon(1e-4));
  CHECK(omega(20, 80, 40) == doctest::Approx(0.22822).epsilon(1e-4));
  CHECK(omega(3, 3, 3) == doctest::Approx(0.91024).epsilon(1e-4));
  CHECK(omega(5, 90, 7) == 1.0 / std::log(90.0));
  try {
    omega(1, 1, 1);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
  }
}

TEST_CASE("all eigenvalues below omega select zero factors") {
  const SelectionDiagnostics d = select_rank({0.2, 0.1, 0.05, 0.01}, 0.3);
  CHECK(d.chosen_k == 0);
  CHECK(d.criterion_values[0] == doctest::Approx(0.2));
  for (std::size_t k = 1; k < d.criterion_values.size(); ++k) CHECK(d.criterion_values[k] == 1.0);
}

TEST_CASE("worked ladder with a cliff after the third eigenvalue") {
  const std::vector<double> ev{5.0, 4.0, 3.0, 0.01, 0.005, 0.004, 0.003, 0.002};
  const SelectionDiagnostics d = select_rank(ev, 0.3);
  REQUIRE(d.criterion_values.size() == 9);
  CHECK(d.criterion_values[0] == doctest::Approx(5.0));
  CHECK(d.criterion_values[1] == doctest::Approx(0.8));
  CHECK(d.criterion_values[2] == doctest::Approx(0.75));
  CHECK(d.criterion_values[3] == doctest::Approx(0.01 / 3.0));
  for (std::size_t k = 4; k <= 8; ++k) CHECK(d.criterion_values[k] == 1.0);
  CHECK(d.chosen_k == 3);
  CHECK(d.mock == 1.0);
  CHECK(d.omega == 0.3);
}

TEST_CASE("planted cliffs are found on randomized slowly decaying ladders") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> decay(0.85, 0.97), drop(0.01, 0.1);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t kmax = 8;
    const std::size_t r = 1 + static_cast<std::size_t>(rep) % (kmax - 1);
    std::vector<double> ev;
    double v = 0.9;
    for (std::size_t k = 0; k < kmax; ++k) {
      ev.push_back(v);
      v *= (k + 1 == r) ? drop(gen) : decay(gen);
    }
    const double w = 0.5 * ev[r - 1];
    CHECK(select_rank(ev, w).chosen_k == r);
  }
}

TEST_CASE("ties go to the smallest k") {
  // c_0 = c_1 = c_2 = 0.5 exactly.
  const SelectionDiagnostics d = select_rank({0.5, 0.25, 0.125}, 0.1);
  CHECK(d.criterion_values[0] == 0.5);
  CHECK(d.criterion_values[1] == 0.5);
  CHECK(d.criterion_values[2] == 0.5);
  CHECK(d.chosen_k == 0);
}

TEST_CASE("the last position never wins on a ratio") {
  // Every eigenvalue clears omega; the k = kmax term is neutral.
  const SelectionDiagnostics d = select_rank({0.9, 0.8, 0.7}, 0.1);
  CHECK(d.criterion_values[3] == 1.0);
  CHECK(d.chosen_k == 2);
}

TEST_CASE("zero eigenvalues take the threshold branch") {
  const SelectionDiagnostics d = select_rank({0.0, 0.0, 0.0}, 0.2);
  CHECK(d.chosen_k == 0);
  CHECK(d.criterion_values[0] == 0.0);
  CHECK(std::isnan(d.ratios[1]));
  CHECK(d.criterion_values[1] == 1.0);
}

TEST_CASE("tiny negative eigenvalues are clamped, larger ones rejected") {
  const SelectionDiagnostics d = select_rank({1.0, 0.5, -1e-14}, 0.2);
  CHECK(d.eigenvalues[2] == 0.0);
  CHECK_THROWS_AS(select_rank({1.0, 0.5, -0.1}, 0.2), Error);
}

TEST_CASE("an increasing ladder is a contract violation") {
  try {
    select_rank({1.0, 2.0, 0.5}, 0.2);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Contract);
  }
}
