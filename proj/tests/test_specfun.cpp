#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "kdb/error.hpp"
#include "kdb/specfun.hpp"
#include "oracles.hpp"

using namespace kdb;

TEST_CASE("laguerre reference values") {
  CHECK(laguerre(0, 2, 3.7) == 1.0);
  CHECK(laguerre(2, 2, 2.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(laguerre(5, 3, 0.0) == doctest::Approx(56.0).epsilon(1e-14));
  CHECK(laguerre(1, 4, 1.5) == doctest::Approx(3.5).epsilon(1e-15));
}

TEST_CASE("laguerre agrees with the explicit series") {
  for (int trial = 0; trial < 200; ++trial) {
    const int n = oracle::uniform_int(0, 20);
    const int alpha = oracle::uniform_int(0, 5);
    const double y = oracle::uniform(0.0, 10.0);
    const double ref = oracle::laguerre_series(n, alpha, y);
    CHECK(laguerre(n, alpha, y) == doctest::Approx(ref).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("laguerre three-term recurrence holds") {
  for (int trial = 0; trial < 500; ++trial) {
    const int n = oracle::uniform_int(1, 100);
    const int alpha = oracle::uniform_int(0, 5);
    const double y = oracle::uniform(0.0, 50.0);
    const double lm = laguerre(n - 1, alpha, y);
    const double l0 = laguerre(n, alpha, y);
    const double lp = laguerre(n + 1, alpha, y);
    const double a = (n + 1.0) * lp;
    const double b = (2.0 * n + 1.0 + alpha - y) * l0;
    const double c = (n + alpha) * lm;
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    CHECK(std::abs(a - (b - c)) <= 1e-10 * scale);
  }
}

TEST_CASE("laguerre rejects bad arguments") {
  CHECK_THROWS_AS(laguerre(-1, 0, 1.0), DomainError);
  CHECK_THROWS_AS(laguerre(100001, 0, 1.0), DomainError);
  CHECK_THROWS_AS(laguerre(3, 0, NAN), DomainError);
  CHECK_THROWS_AS(laguerre(3, 0, -1.0), DomainError);
}

TEST_CASE("log factorial ratio") {
  CHECK(log_factorial_ratio(0, 0) == 0.0);
  CHECK(log_factorial_ratio(4, 2) == doctest::Approx(std::log(12.0)).epsilon(1e-14));
  CHECK(log_factorial_ratio(700, 698) == doctest::Approx(std::log(700.0 * 699.0)).epsilon(1e-13));
  CHECK(log_factorial_ratio(2, 4) == doctest::Approx(-std::log(12.0)).epsilon(1e-14));
  long double direct = 0.0L;
  for (int k = 801; k <= 1000; ++k) direct += std::log(static_cast<long double>(k));
  CHECK(log_factorial_ratio(1000, 800) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-12));
}

TEST_CASE("grid construction") {
  const RealGrid g = RealGrid::symmetric(2.0, 0.5);
  CHECK(g.size() == 9);
  CHECK(g.front() == -2.0);
  CHECK(g.is_symmetric());
  CHECK_THROWS_AS(RealGrid::from_points({0.0, 1.0, 2.5}), GridError);
  CHECK_THROWS_AS(RealGrid::from_points({0.0, -1.0}), GridError);
  CHECK_NOTHROW(RealGrid::from_points({0.0, 0.1, 0.2, 0.30000000000000004}));
}

TEST_CASE("hermite eigenfunctions: ground state and parity") {
  const RealGrid g = RealGrid::symmetric(12.0, 1.0 / 32.0);
  const auto phi0 = eigenfunction_hermite(0, g);
  const std::size_t mid = g.size() / 2;
  CHECK(phi0.values[mid] == doctest::Approx(std::pow(2.0 * std::numbers::pi, -0.25)).epsilon(1e-10));
  const auto phi1 = eigenfunction_hermite(1, g);
  CHECK(phi1.values[mid] == 0.0);
  for (int n : {2, 7, 30, 170}) {
    const RealGrid wide = RealGrid::symmetric(2.0 * std::sqrt(n) + 10.0, 1.0 / 16.0);
    const auto t = eigenfunction_hermite(n, wide);
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < wide.size(); ++i) {
      REQUIRE(t.values[wide.size() - 1 - i] == sign * t.values[i]);
    }
  }
}

TEST_CASE("hermite eigenfunctions match the explicit polynomial form") {
  const RealGrid g = RealGrid::symmetric(2.0 * std::sqrt(40.0) + 10.0, 1.0 / 16.0);
  const auto basis = eigenfunction_hermite_basis(40, g);
  for (int n = 0; n <= 40; ++n) {
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      worst = std::max(worst, std::abs(basis[n].values[i] - oracle::eigenfunction_x0(n, g[i])));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("hermite eigenfunctions are orthonormal by quadrature") {
  {
    const RealGrid g = RealGrid::symmetric(2.0 * std::sqrt(30.0) + 10.0, 1.0 / 32.0);
    const auto basis = eigenfunction_hermite_basis(30, g);
    double worst = 0.0;
    for (int n = 0; n <= 30; ++n) {
      for (int m = 0; m <= n; ++m) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) s += basis[n].values[i] * basis[m].values[i];
        s *= g.spacing();
        worst = std::max(worst, std::abs(s - (n == m ? 1.0 : 0.0)));
      }
    }
    CHECK(worst < 1e-8);
  }
  {
    const RealGrid g = RealGrid::symmetric(2.0 * std::sqrt(50.0) + 8.0, 1.0 / 20.0);
    const auto basis = eigenfunction_hermite_basis(50, g);
    double worst = 0.0;
    for (int n = 0; n <= 50; ++n) {
      for (int m = 0; m <= n; ++m) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) s += basis[n].values[i] * basis[m].values[i];
        s *= g.spacing();
        worst = std::max(worst, std::abs(s - (n == m ? 1.0 : 0.0)));
      }
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("hermite path refuses large n") {
  const RealGrid g = RealGrid::symmetric(40.0, 0.1);
  CHECK_THROWS_AS(eigenfunction_hermite(171, g), DomainError);
  CHECK_NOTHROW(eigenfunction_hermite(170, g));
}

TEST_CASE("numerov eigenfunction agrees with hermite in the overlap regime") {
  for (int n : {1, 2, 10, 31, 150}) {
    const RealGrid g = RealGrid::symmetric(2.0 * std::sqrt(n) + 10.0, 1.0 / 16.0);
    const auto a = eigenfunction_numerov(n, g);
    const auto b = eigenfunction_hermite(n, g);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    CAPTURE(n);
    CHECK(worst < 1e-5);
    CHECK(a.energy == doctest::Approx(n + 0.5).epsilon(1e-7));
    CHECK(a.method == EigenMethod::numerov_patched);
  }
}

TEST_CASE("numerov eigenfunction n=200: norm, parity and node count") {
  const int n = 200;
  const RealGrid g = RealGrid::symmetric(2.0 * std::sqrt(n) + 10.0, 1.0 / 16.0);
  const auto t = eigenfunction_numerov(n, g);
  double norm = 0.0;
  for (double v : t.values) norm += v * v;
  CHECK(norm * g.spacing() == doctest::Approx(1.0).epsilon(1e-6));
  for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(t.values[g.size() - 1 - i] == t.values[i]);
  const double xt = turning_point(n);
  int nodes = 0;
  double last = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(g[i]) >= xt || t.values[i] == 0.0) continue;
    if (last != 0.0 && (t.values[i] > 0.0) != (last > 0.0)) ++nodes;
    last = t.values[i];
  }
  CHECK(nodes == n);
}

TEST_CASE("literal turning-point ansatz is continuous but only approximate") {
  const int n = 10;
  const RealGrid g = RealGrid::symmetric(2.0 * std::sqrt(n) + 10.0, 1.0 / 64.0);
  NumerovOptions literal;
  literal.tail = TailPatch::turning_point;
  const auto a = eigenfunction_numerov(n, g, literal);
  const auto b = eigenfunction_hermite(n, g);
  double worst = 0.0;
  double jump = 0.0;
  const double xt = turning_point(n);
  for (std::size_t i = 1; i < g.size(); ++i) {
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    if (g[i - 1] < xt && g[i] >= xt) jump = std::abs(a.values[i] - a.values[i - 1]);
  }
  CHECK(worst < 5e-3);
  CHECK(worst > 1e-4);
  CHECK(jump < 0.02);
}

TEST_CASE("eigenfunction dispatches by n and exports csv") {
  const RealGrid g = RealGrid::symmetric(40.0, 1.0 / 8.0);
  CHECK(eigenfunction(170, g).method == EigenMethod::hermite_recurrence);
  CHECK(eigenfunction(171, g).method == EigenMethod::numerov_patched);
  std::ostringstream out;
  write_csv(out, eigenfunction(0, RealGrid::symmetric(1.0, 0.5)));
  const std::string text = out.str();
  CHECK(text.substr(0, 9) == "x/x0,phi\n");
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);
}
