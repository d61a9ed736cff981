#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "mpemba/spectral.hpp"

using namespace mpemba;

namespace {

LandscapeSpec quadratic_spec(double y_half = 6.0) {
  LandscapeSpec s;
  s.c = PolynomialProfile{{0.0, 0.0, 0.5}};
  s.a = ConstantCurvature{1.0};
  s.y_min = -y_half;
  s.y_max = y_half;
  return s;
}

double dot_h(const std::vector<double>& u, const std::vector<double>& v, double h) {
  double s = 0.0;
  for (size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s * h;
}

}  // namespace

TEST_CASE("stationary distribution: Gaussian variance equals eta") {
  const LandscapeSpec s = quadratic_spec();
  const Grid grid = Grid::make(-6.0, 6.0, 1201);
  const FreeEnergyField f = effective_free_energy(s, grid, 0.5);
  const StationaryDistribution pi = stationary_distribution(f, grid);
  CHECK(trapezoid(pi.weights, grid.h) == doctest::Approx(1.0).epsilon(1e-10));
  std::vector<double> m2(pi.weights.size());
  for (size_t i = 0; i < m2.size(); ++i) m2[i] = grid.nodes[i] * grid.nodes[i] * pi.weights[i];
  CHECK(trapezoid(m2, grid.h) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("stationary distribution: flat landscape is uniform") {
  LandscapeSpec s = quadratic_spec(2.0);
  s.c = PolynomialProfile{{1.7}};
  const Grid grid = Grid::make(-2.0, 2.0, 101);
  const StationaryDistribution pi =
      stationary_distribution(effective_free_energy(s, grid, 0.3), grid);
  for (double w : pi.weights) CHECK(w == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("stationary distribution: symmetric double well is even") {
  const LandscapeSpec s = make_double_well(1.0, 0.0);
  const Grid grid = Grid::make(-2.0, 2.0, 401);
  const StationaryDistribution pi =
      stationary_distribution(effective_free_energy(s, grid, 0.3), grid);
  const int n = grid.n_points;
  for (int i = 0; i < n; ++i) {
    CHECK(pi.weights[i] == doctest::Approx(pi.weights[n - 1 - i]).epsilon(1e-10));
  }
}

TEST_CASE("stationary distribution: degenerate weights reported as numerical error") {
  const Grid grid = Grid::make(-2.0, 2.0, 64);
  FreeEnergyField f;
  f.eta = 1e-6;
  f.grid = grid;
  f.values.assign(grid.n_points, 0.0);
  // a non-finite free energy poisons the max-subtracted weights (NaN Z)
  f.values[10] = -std::numeric_limits<double>::infinity();
  f.derivative.assign(grid.n_points, 0.0);
  CHECK_THROWS_AS(stationary_distribution(f, grid), NumericalError);
}

TEST_CASE("generator: stationarity residual on all presets") {
  for (const std::string& name : preset_names()) {
    const LandscapeSpec s = make_preset(name);
    const Grid grid = Grid::make(s.y_min, s.y_max, 601);
    for (double eta : {0.1, 0.3, 1.0}) {
      const FreeEnergyField f = effective_free_energy(s, grid, eta);
      const TridiagonalGenerator gen = build_generator(f, grid);
      const StationaryDistribution pi = stationary_distribution(f, grid);
      const std::vector<double> r = gen.apply(pi.weights);
      double rmax = 0.0;
      for (double v : r) rmax = std::max(rmax, std::abs(v));
      CHECK(rmax < 1e-8);
    }
  }
}

TEST_CASE("generator: column sums vanish (conservation)") {
  const LandscapeSpec s = make_preset("double-well");
  const Grid grid = Grid::make(s.y_min, s.y_max, 301);
  const TridiagonalGenerator gen =
      build_generator(effective_free_energy(s, grid, 0.2), grid);
  for (double cs : gen.column_sums()) CHECK(std::abs(cs) < 1e-12);
}

TEST_CASE("generator: flat free energy annihilates the uniform density") {
  LandscapeSpec s = quadratic_spec(2.0);
  s.c = PolynomialProfile{{0.0}};
  const Grid grid = Grid::make(-2.0, 2.0, 101);
  const TridiagonalGenerator gen =
      build_generator(effective_free_energy(s, grid, 0.4), grid);
  const std::vector<double> r = gen.apply(std::vector<double>(grid.n_points, 0.25));
  for (double v : r) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("eigendecompose: OU spectrum oracle") {
  const LandscapeSpec s = quadratic_spec(8.0);
  const Grid grid = Grid::make(-8.0, 8.0, 2001);
  const SpectralDecomposition d =
      eigendecompose(effective_free_energy(s, grid, 0.5), grid, 4);
  CHECK(d.eigenvalues[1] - d.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(d.eigenvalues[2] - d.eigenvalues[0] == doctest::Approx(2.0).epsilon(2.5e-3));
}

TEST_CASE("eigendecompose: structural invariants on the double-well preset") {
  const LandscapeSpec s = make_preset("double-well");
  const Grid grid = Grid::make(s.y_min, s.y_max, 801);
  const SpectralDecomposition d =
      eigendecompose(effective_free_energy(s, grid, 0.2), grid, 6);

  CHECK(std::abs(d.eigenvalues[0]) < 1e-8);
  for (int n = 0; n < d.n_modes(); ++n) {
    CHECK(d.eigenvalues[n] >= -1e-8);
    if (n > 0) CHECK(d.eigenvalues[n] >= d.eigenvalues[n - 1]);
    for (int m = 0; m <= n; ++m) {
      const double g = dot_h(d.phi_modes[m], d.phi_modes[n], grid.h);
      CHECK(std::abs(g - (m == n ? 1.0 : 0.0)) < 1e-8);
    }
  }
  for (double u : d.left_modes[0]) CHECK(u == doctest::Approx(1.0).epsilon(1e-6));
  // zero mode is the stationary state
  for (int i = 0; i < grid.n_points; ++i) {
    CHECK(d.right_modes[0][i] == doctest::Approx(d.stationary.weights[i]).epsilon(1e-8));
  }
  CHECK_FALSE(d.gapless);
}

TEST_CASE("eigendecompose: resolution guard") {
  const LandscapeSpec s = quadratic_spec(2.0);
  const Grid grid = Grid::make(-2.0, 2.0, 64);
  const FreeEnergyField f = effective_free_energy(s, grid, 0.3);
  CHECK_THROWS_AS(eigendecompose(f, grid, 2), ContractViolation);
  CHECK_THROWS_AS(eigendecompose(f, grid, 17), ContractViolation);
}

TEST_CASE("completeness: full decomposition reconstructs the generator action") {
  const LandscapeSpec s = make_preset("double-well");
  const Grid grid = Grid::make(s.y_min, s.y_max, 64);
  const FreeEnergyField f = effective_free_energy(s, grid, 0.3);
  const TridiagonalGenerator gen = build_generator(f, grid);
  const SpectralDecomposition d = eigendecompose_full(f, grid);
  REQUIRE(d.n_modes() == grid.n_points);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> p(grid.n_points);
    double mass = 0.0;
    for (double& v : p) mass += (v = u(rng));
    for (double& v : p) v /= mass * grid.h;
    const std::vector<double> lp = gen.apply(p);
    std::vector<double> rec(grid.n_points, 0.0);
    for (int n = 0; n < d.n_modes(); ++n) {
      const double c = dot_h(d.left_modes[n], p, grid.h);
      for (int i = 0; i < grid.n_points; ++i) rec[i] -= d.eigenvalues[n] * c * d.right_modes[n][i];
    }
    double scale = 0.0, err = 0.0;
    for (int i = 0; i < grid.n_points; ++i) {
      scale = std::max(scale, std::abs(lp[i]));
      err = std::max(err, std::abs(rec[i] - lp[i]));
    }
    CHECK(err < 1e-8 * std::max(1.0, scale));
  }
}

TEST_CASE("grid convergence: lambda2 error shrinks at second order") {
  const LandscapeSpec s = make_preset("double-well");
  auto l2 = [&](int n) {
    const Grid grid = Grid::make(s.y_min, s.y_max, n);
    return eigendecompose(effective_free_energy(s, grid, 0.2), grid, 3).eigenvalues[1];
  };
  const double c1 = l2(201), c2 = l2(401), c4 = l2(801);
  const double ref = (4.0 * c4 - c2) / 3.0;  // eliminates the O(h^2) term
  const double ratio = std::abs(c1 - ref) / std::abs(c2 - ref);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("spectral_evolve: identity at t=0 and full relaxation") {
  const LandscapeSpec s = make_preset("double-well");
  const Grid grid = Grid::make(s.y_min, s.y_max, 401);
  const FreeEnergyField fb = effective_free_energy(s, grid, 0.2);
  const SpectralDecomposition d = eigendecompose(fb, grid, 8);
  const StationaryDistribution hot =
      stationary_distribution(effective_free_energy(s, grid, 0.8), grid);

  double trunc = 0.0;
  const std::vector<double> p0 = spectral_evolve(d, hot.weights, 0.0, &trunc);
  double l1 = 0.0;
  for (int i = 0; i < grid.n_points; ++i) l1 += std::abs(p0[i] - hot.weights[i]);
  // the reported truncation is the L1 residual of the mode expansion at t=0
  CHECK(l1 * grid.h == doctest::Approx(trunc).epsilon(1e-4));

  // with the complete basis the expansion reproduces the input
  const SpectralDecomposition d_full = eigendecompose_full(fb, grid);
  double trunc_full = 1.0;
  (void)spectral_evolve(d_full, hot.weights, 0.0, &trunc_full);
  CHECK(trunc_full < 1e-5);

  const double t_late = 45.0 / d.eigenvalues[1];
  const std::vector<double> pl = spectral_evolve(d, hot.weights, t_late);
  double l1_late = 0.0;
  for (int i = 0; i < grid.n_points; ++i) l1_late += std::abs(pl[i] - d.stationary.weights[i]);
  CHECK(l1_late * grid.h < 1e-12);
}

TEST_CASE("spectral_evolve: late-time L1 slope matches lambda2") {
  const LandscapeSpec s = make_preset("double-well");
  const Grid grid = Grid::make(s.y_min, s.y_max, 401);
  const SpectralDecomposition d =
      eigendecompose(effective_free_energy(s, grid, 0.2), grid, 8);
  const StationaryDistribution hot =
      stationary_distribution(effective_free_energy(s, grid, 0.45), grid);
  const double l2 = d.eigenvalues[1];
  auto log_dist = [&](double t) {
    const std::vector<double> p = spectral_evolve(d, hot.weights, t);
    double l1 = 0.0;
    for (int i = 0; i < grid.n_points; ++i) l1 += std::abs(p[i] - d.stationary.weights[i]);
    return std::log(l1 * grid.h);
  };
  const double slope = (log_dist(8.0 / l2) - log_dist(3.0 / l2)) / (5.0 / l2);
  CHECK(-slope == doctest::Approx(l2).epsilon(1e-3));
}

TEST_CASE("spectral_evolve: rejects unnormalized input") {
  const LandscapeSpec s = quadratic_spec(2.0);
  const Grid grid = Grid::make(-2.0, 2.0, 101);
  const SpectralDecomposition d =
      eigendecompose(effective_free_energy(s, grid, 0.3), grid, 4);
  CHECK_THROWS_AS(spectral_evolve(d, std::vector<double>(grid.n_points, 1.0), 1.0),
                  ContractViolation);
}
