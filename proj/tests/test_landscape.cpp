#include <cmath>
#include <random>

#include <doctest.h>

#include "mpemba/landscape.hpp"

using namespace mpemba;

namespace {

LandscapeSpec ou_spec() {
  LandscapeSpec s;
  s.c = PolynomialProfile{{0.0, 0.0, 0.5}};
  s.a = ConstantCurvature{1.0};
  s.y_min = -6.0;
  s.y_max = 6.0;
  return s;
}

}  // namespace

TEST_CASE("evaluate_landscape: quadratic minimum") {
  const LandscapeEval e = evaluate_landscape(ou_spec(), 0.0);
  CHECK(e.c == doctest::Approx(0.0));
  CHECK(e.a == doctest::Approx(1.0));
  CHECK(e.dc_dy == doctest::Approx(0.0));
  CHECK(e.da_dy == doctest::Approx(0.0));
}

TEST_CASE("evaluate_landscape: exponential curvature derivative") {
  LandscapeSpec s = ou_spec();
  s.a = ExponentialCurvature{1.0, 2.0};
  const LandscapeEval e = evaluate_landscape(s, 0.5);
  CHECK(e.a == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  CHECK(e.da_dy == doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("evaluate_landscape: quartic well minimum") {
  LandscapeSpec s = make_double_well(1.0, 0.0);
  const LandscapeEval e = evaluate_landscape(s, 1.0);
  CHECK(e.c == doctest::Approx(0.0));
  CHECK(e.dc_dy == doctest::Approx(0.0));
}

TEST_CASE("evaluate_landscape: domain and positivity errors") {
  LandscapeSpec s = ou_spec();
  CHECK_THROWS_AS(evaluate_landscape(s, 7.0), DomainError);
  CHECK_THROWS_AS(evaluate_landscape(s, -6.5), DomainError);
  s.a = ConstantCurvature{-1.0};
  CHECK_THROWS_AS(s.validate(), InvalidLandscapeError);
  // polynomial curvature is floored at a positive value instead of rejected
  s.a = PolynomialCurvature{{-1.0}};
  CHECK(evaluate_landscape(s, 0.0).a > 0.0);
}

TEST_CASE("tabulated curvature rejects non-positive samples") {
  LandscapeSpec s = ou_spec();
  s.a = TabulatedCurvature{{-6.0, 0.0, 6.0}, {1.0, 0.0, 1.0}};
  CHECK_THROWS_AS(s.validate(), InvalidLandscapeError);
}

TEST_CASE("effective_free_energy: identity and analytic tilt") {
  const Grid grid = Grid::make(-6.0, 6.0, 241);
  const FreeEnergyField f1 = effective_free_energy(ou_spec(), grid, 0.3);
  for (int i = 0; i < grid.n_points; ++i) {
    CHECK(f1.values[i] == doctest::Approx(0.5 * grid.nodes[i] * grid.nodes[i]).epsilon(1e-12));
  }

  LandscapeSpec tilt = ou_spec();
  tilt.c = PolynomialProfile{{0.0}};
  tilt.a = ExponentialCurvature{1.0, 2.0};
  const FreeEnergyField f2 = effective_free_energy(tilt, grid, 0.5);
  for (int i = 0; i < grid.n_points; ++i) {
    CHECK(f2.values[i] == doctest::Approx(0.5 * grid.nodes[i]).epsilon(1e-12));
  }
}

TEST_CASE("effective_free_energy: pointwise formula on double-well") {
  const LandscapeSpec s = make_double_well(0.7, 1.3, 2.0);
  const Grid grid = Grid::make(-2.0, 2.0, 321);
  const FreeEnergyField f = effective_free_energy(s, grid, 0.2);
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> pick(0, grid.n_points - 1);
  for (int trial = 0; trial < 5; ++trial) {
    const int i = pick(rng);
    const double y = grid.nodes[i];
    const double c = 0.7 * (y * y - 1.0) * (y * y - 1.0);
    const double expect = c + 0.1 * std::log(2.0 * std::exp(1.3 * y));
    CHECK(f.values[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("effective_free_energy: constant curvature shifts by (eta/2) ln a0") {
  LandscapeSpec s = make_double_well(1.0, 0.0, 4.0);
  const Grid grid = Grid::make(-2.0, 2.0, 101);
  const FreeEnergyField f = effective_free_energy(s, grid, 0.6);
  const double shift = 0.3 * std::log(4.0);
  for (int i = 0; i < grid.n_points; ++i) {
    const double y = grid.nodes[i];
    const double c = (y * y - 1.0) * (y * y - 1.0);
    CHECK(f.values[i] - c == doctest::Approx(shift).epsilon(1e-12));
  }
}

TEST_CASE("free energy derivative is O(h^2) consistent with values") {
  const LandscapeSpec s = make_double_well(0.5, 2.0);
  const Grid grid = Grid::make(-2.0, 2.0, 801);
  const FreeEnergyField f = effective_free_energy(s, grid, 0.2);
  for (int i = 1; i + 1 < grid.n_points; ++i) {
    const double fd = (f.values[i + 1] - f.values[i - 1]) / (2.0 * grid.h);
    CHECK(f.derivative[i] == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("curvature_log_slope analytic cases") {
  LandscapeSpec s = ou_spec();
  s.a = ExponentialCurvature{1.0, 2.0};
  CHECK(curvature_log_slope(s, 0.3) == doctest::Approx(1.0).epsilon(1e-12));
  s.a = ConstantCurvature{5.0};
  CHECK(curvature_log_slope(s, 0.3) == doctest::Approx(0.0));
  s.a = PolynomialCurvature{{1.0, 0.0, 1.0}};
  CHECK(curvature_log_slope(s, 1.0) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("curvature_log_slope matches finite difference of (1/2) ln a") {
  const LandscapeSpec s = make_double_well(1.0, 1.7, 2.5);
  const double h = 1e-5;
  for (double y : {-1.5, -0.3, 0.0, 0.8, 1.9}) {
    const double fd = (std::log(evaluate_landscape(s, y + h).a) -
                       std::log(evaluate_landscape(s, y - h).a)) /
                      (4.0 * h);
    CHECK(curvature_log_slope(s, y) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("relaxation_times conventions") {
  LandscapeSpec s = ou_spec();
  s.a = ConstantCurvature{2.0};
  RelaxationTimes rt = relaxation_times(s, 0.0, 0.1, TimeConvention::kRescaled);
  CHECK(rt.tau_x == doctest::Approx(0.5));
  CHECK(std::isinf(rt.tau_y));
  rt = relaxation_times(s, 0.0, 0.1, TimeConvention::kUnscaled);
  CHECK(rt.tau_x == doctest::Approx(5.0));

  s.a = ExponentialCurvature{1.0, 2.0};  // k = 1
  rt = relaxation_times(s, 0.0, 0.2, TimeConvention::kRescaled);
  CHECK(rt.tau_y == doctest::Approx(5.0));
}

TEST_CASE("tau identities hold exactly") {
  const LandscapeSpec s = make_double_well(0.8, 1.1, 3.0);
  for (double y : {-1.2, 0.0, 0.9}) {
    const double a = evaluate_landscape(s, y).a;
    const double eta = 0.37;
    CHECK(relaxation_times(s, y, eta, TimeConvention::kRescaled).tau_x * a ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(relaxation_times(s, y, eta, TimeConvention::kUnscaled).tau_x * a * eta ==
          doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("random probe: finite outputs, positive curvature") {
  std::mt19937 rng(11);
  const std::vector<LandscapeSpec> specs{make_preset("ou"), make_preset("tilted-river"),
                                         make_preset("double-well")};
  for (const LandscapeSpec& s : specs) {
    std::uniform_real_distribution<double> u(s.y_min, s.y_max);
    for (int i = 0; i < 1000; ++i) {
      const LandscapeEval e = evaluate_landscape(s, u(rng));
      CHECK(e.a > 0.0);
      CHECK(std::isfinite(e.c));
      CHECK(std::isfinite(e.a));
      CHECK(std::isfinite(e.dc_dy));
      CHECK(std::isfinite(e.da_dy));
    }
  }
}

TEST_CASE("tabulated profiles interpolate their own samples") {
  std::vector<double> ys, cs, as;
  for (int i = 0; i <= 20; ++i) {
    const double y = -2.0 + 0.2 * i;
    ys.push_back(y);
    cs.push_back(std::sin(y));
    as.push_back(2.0 + std::cos(y));
  }
  LandscapeSpec s;
  s.c = TabulatedProfile{ys, cs};
  s.a = TabulatedCurvature{ys, as};
  s.y_min = -2.0;
  s.y_max = 2.0;
  s.validate();
  for (size_t i = 0; i < ys.size(); ++i) {
    const LandscapeEval e = evaluate_landscape(s, ys[i]);
    CHECK(e.c == doctest::Approx(cs[i]).epsilon(1e-12));
    CHECK(e.a == doctest::Approx(as[i]).epsilon(1e-12));
  }
  // interior spline accuracy against the smooth generator
  const LandscapeEval mid = evaluate_landscape(s, 0.11);
  CHECK(mid.c == doctest::Approx(std::sin(0.11)).epsilon(1e-3));
}

TEST_CASE("grid construction invariants") {
  const Grid g = Grid::make(-1.0, 3.0, 17);
  CHECK(g.n_points == 17);
  CHECK(g.h == doctest::Approx(0.25));
  for (int i = 1; i < g.n_points; ++i) CHECK(g.nodes[i] > g.nodes[i - 1]);
  CHECK_THROWS_AS(Grid::make(1.0, -1.0, 17), InvalidLandscapeError);
  CHECK_THROWS_AS(Grid::make(-1.0, 1.0, 8), ContractViolation);
}

TEST_CASE("presets are registered and valid") {
  const std::vector<std::string> names = preset_names();
  REQUIRE(names.size() == 3);
  for (const std::string& n : names) make_preset(n).validate();
  CHECK_THROWS_AS(make_preset("bogus"), ConfigError);
}
