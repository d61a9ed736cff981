#pragma once

#include <string>
#include <vector>

#include "mpemba/landscape.hpp"

namespace mpemba {

/// Boltzmann weights pi_eta(y_i) normalized to unit trapezoid integral.
struct StationaryDistribution {
  double eta = 0.0;
  std::vector<double> weights;
  double partition_log = 0.0;  // ln Z_eta
};

/// Discrete Fokker-Planck generator in conservative flux form (tridiagonal).
/// Interior rows encode (J_{i+1/2} - J_{i-1/2})/h with exponential-fitted
/// fluxes; boundary rows impose J = 0 (reflecting walls).
struct TridiagonalGenerator {
  double eta = 0.0;
  double h = 0.0;
  std::vector<double> lower;  // L_{i+1,i}, size n-1
  std::vector<double> diag;   // L_{i,i},   size n
  std::vector<double> upper;  // L_{i,i+1}, size n-1

  int size() const { return static_cast<int>(diag.size()); }
  std::vector<double> apply(const std::vector<double>& p) const;
  /// Plain column sums (all zero up to roundoff: probability conservation).
  std::vector<double> column_sums() const;
};

/// Leading eigenpairs of the symmetrized generator at the bath learning rate.
///
/// phi_modes are orthonormal in the discrete L2 inner product with weight h.
/// left_modes  u_n = phi_n / sqrt(pi) give expansion coefficients (u_1 == 1),
/// right_modes v_n = phi_n * sqrt(pi) give the density expansion.
struct SpectralDecomposition {
  double eta_b = 0.0;
  Grid grid;
  std::vector<double> eigenvalues;               // ascending, lambda_1 ~ 0
  std::vector<std::vector<double>> phi_modes;
  std::vector<std::vector<double>> left_modes;
  std::vector<std::vector<double>> right_modes;
  StationaryDistribution stationary;
  bool gapless = false;  // (lambda_3 - lambda_2)/lambda_2 < 1e-3

  int n_modes() const { return static_cast<int>(eigenvalues.size()); }
};

StationaryDistribution stationary_distribution(const FreeEnergyField& field, const Grid& grid);

TridiagonalGenerator build_generator(const FreeEnergyField& field, const Grid& grid);

/// Symmetric form H = D^{-1/2} (-L) D^{1/2}, D = diag(pi): diagonal and
/// subdiagonal of the tridiagonal symmetric operator.
void symmetrized_operator(const TridiagonalGenerator& gen, std::vector<double>& diag,
                          std::vector<double>& subdiag);

SpectralDecomposition eigendecompose(const FreeEnergyField& field, const Grid& grid, int n_modes);

/// Full decomposition without the n_modes <= n/4 resolution guard. Intended
/// for small grids (completeness checks).
SpectralDecomposition eigendecompose_full(const FreeEnergyField& field, const Grid& grid);

/// Truncated spectral propagation p(t) = pi + sum_{n>=2} <u_n, p0> v_n e^{-lambda_n t}.
/// Emits a warning flag through `truncation_l1` (reconstruction error at t=0).
std::vector<double> spectral_evolve(const SpectralDecomposition& decomp,
                                    const std::vector<double>& initial, double t,
                                    double* truncation_l1 = nullptr);

double trapezoid(const std::vector<double>& f, double h);

/// CSV dump of eigenpairs: index, eigenvalue, node_0..node_{n-1} (17 digits).
void dump_eigenpairs_csv(const SpectralDecomposition& decomp, const std::string& path);

}  // namespace mpemba
