#include "mpemba/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mpemba {

namespace {

// Bernoulli function B(x) = x / (e^x - 1), series near 0.
double bernoulli_fn(double x) {
  if (std::abs(x) < 1e-8) {
    return 1.0 - 0.5 * x + x * x / 12.0;
  }
  return x / std::expm1(x);
}

// B(s) e^{s/2} = s / (2 sinh(s/2)): the symmetric off-diagonal kernel.
double symmetric_kernel(double s) {
  if (std::abs(s) < 1e-8) {
    return 1.0 - s * s / 24.0;
  }
  return s / (2.0 * std::sinh(0.5 * s));
}

constexpr double kLeftModeFloor = 1e-250;

}  // namespace

double trapezoid(const std::vector<double>& f, double h) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * h;
}

StationaryDistribution stationary_distribution(const FreeEnergyField& field, const Grid& grid) {
  if (field.values.size() != static_cast<size_t>(grid.n_points)) {
    throw ContractViolation("stationary_distribution: field/grid size mismatch");
  }
  const double eta = field.eta;
  StationaryDistribution out;
  out.eta = eta;
  const double f_min = *std::min_element(field.values.begin(), field.values.end());
  out.weights.resize(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) {
    out.weights[i] = std::exp(-(field.values[i] - f_min) / eta);
  }
  const double z_shifted = trapezoid(out.weights, grid.h);
  if (!(z_shifted > 0.0) || !std::isfinite(z_shifted)) {
    throw NumericalError(
        "stationary_distribution: weights underflowed to zero; "
        "try a larger eta or a smaller domain");
  }
  for (double& w : out.weights) w /= z_shifted;
  out.partition_log = std::log(z_shifted) - f_min / eta;
  return out;
}

TridiagonalGenerator build_generator(const FreeEnergyField& field, const Grid& grid) {
  const int n = grid.n_points;
  if (n < 16) {
    throw ContractViolation("build_generator: grid must have >= 16 nodes");
  }
  const double eta = field.eta;
  const double r = eta / (grid.h * grid.h);
  TridiagonalGenerator gen;
  gen.eta = eta;
  gen.h = grid.h;
  gen.lower.resize(n - 1);
  gen.upper.resize(n - 1);
  gen.diag.assign(n, 0.0);
  for (int i = 0; i < n - 1; ++i) {
    const double s = (field.values[i + 1] - field.values[i]) / eta;
    const double rate_right = r * bernoulli_fn(s);    // i -> i+1
    const double rate_left = r * bernoulli_fn(-s);    // i+1 -> i
    gen.lower[i] = rate_right;  // L_{i+1,i}
    gen.upper[i] = rate_left;   // L_{i,i+1}
    gen.diag[i] -= rate_right;
    gen.diag[i + 1] -= rate_left;
  }
  return gen;
}

std::vector<double> TridiagonalGenerator::apply(const std::vector<double>& p) const {
  const int n = size();
  if (p.size() != static_cast<size_t>(n)) {
    throw ContractViolation("generator apply: size mismatch");
  }
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    double v = diag[i] * p[i];
    if (i > 0) v += lower[i - 1] * p[i - 1];
    if (i < n - 1) v += upper[i] * p[i + 1];
    out[i] = v;
  }
  return out;
}

std::vector<double> TridiagonalGenerator::column_sums() const {
  const int n = size();
  std::vector<double> s(n);
  for (int j = 0; j < n; ++j) {
    double v = diag[j];
    if (j > 0) v += upper[j - 1];       // row j-1, column j
    if (j < n - 1) v += lower[j];       // row j+1, column j
    s[j] = v;
  }
  return s;
}

void symmetrized_operator(const TridiagonalGenerator& gen, std::vector<double>& diag,
                          std::vector<double>& subdiag) {
  const int n = gen.size();
  diag.resize(n);
  subdiag.resize(n - 1);
  for (int i = 0; i < n; ++i) diag[i] = -gen.diag[i];
  // H_{i,i+1} = -(eta/h^2) s_i / (2 sinh(s_i/2)); recover s from the rates:
  // lower[i]/upper[i] = B(s)/B(-s) = e^{-s}.
  const double r = gen.eta / (gen.h * gen.h);
  for (int i = 0; i < n - 1; ++i) {
    const double s = std::log(gen.upper[i] / gen.lower[i]);
    subdiag[i] = -r * symmetric_kernel(s);
  }
}

namespace {

SpectralDecomposition decompose_impl(const FreeEnergyField& field, const Grid& grid,
                                     int n_modes) {
  const int n = grid.n_points;
  SpectralDecomposition dec;
  dec.eta_b = field.eta;
  dec.grid = grid;
  dec.stationary = stationary_distribution(field, grid);

  TridiagonalGenerator gen = build_generator(field, grid);
  std::vector<double> d, e;
  symmetrized_operator(gen, d, e);

  // Internal consistency: the similarity-transformed off-diagonals must agree
  // with the direct symmetric kernel wherever pi ratios are representable.
  {
    const std::vector<double>& pi = dec.stationary.weights;
    for (int i = 0; i < n - 1; ++i) {
      if (pi[i] > 1e-200 && pi[i + 1] > 1e-200) {
        const double via_similarity = -gen.upper[i] * std::sqrt(pi[i + 1] / pi[i]);
        const double scale = std::max(1.0, std::abs(e[i]));
        if (std::abs(via_similarity - e[i]) > 1e-10 * scale) {
          throw NumericalError("eigendecompose: symmetrized operator inconsistency");
        }
      }
    }
  }

  std::vector<double> vals(n);
  std::vector<double> vecs(static_cast<size_t>(n) * n_modes);
  std::vector<lapack_int> isuppz(2 * std::max(1, n_modes));
  lapack_int m_found = 0;
  const lapack_int info = LAPACKE_dstevr(
      LAPACK_ROW_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, 1, n_modes,
      /*abstol=*/0.0, &m_found, vals.data(), vecs.data(), n_modes, isuppz.data());
  if (info != 0 || m_found != n_modes) {
    std::ostringstream os;
    os << "eigendecompose: LAPACK dstevr failed (info=" << info << ", found=" << m_found
       << " of " << n_modes << " modes, n=" << n << ")";
    throw NumericalError(os.str());
  }

  dec.eigenvalues.assign(vals.begin(), vals.begin() + n_modes);
  for (double lam : dec.eigenvalues) {
    if (lam < -1e-8) {
      throw NumericalError("eigendecompose: negative eigenvalue beyond tolerance");
    }
  }

  const double inv_sqrt_h = 1.0 / std::sqrt(grid.h);
  dec.phi_modes.assign(n_modes, std::vector<double>(n));
  dec.left_modes.assign(n_modes, std::vector<double>(n));
  dec.right_modes.assign(n_modes, std::vector<double>(n));
  const std::vector<double>& pi = dec.stationary.weights;
  for (int k = 0; k < n_modes; ++k) {
    std::vector<double>& phi = dec.phi_modes[k];
    for (int i = 0; i < n; ++i) phi[i] = vecs[static_cast<size_t>(i) * n_modes + k] * inv_sqrt_h;
    // Deterministic sign: first component above threshold (from y_min) positive.
    double sign = 1.0;
    for (int i = 0; i < n; ++i) {
      if (std::abs(phi[i]) > 1e-10) {
        sign = (phi[i] > 0.0) ? 1.0 : -1.0;
        break;
      }
    }
    for (int i = 0; i < n; ++i) {
      phi[i] *= sign;
      const double sp = std::sqrt(pi[i]);
      dec.right_modes[k][i] = phi[i] * sp;
      dec.left_modes[k][i] = (pi[i] > kLeftModeFloor) ? phi[i] / sp : 0.0;
    }
  }

  if (n_modes >= 3) {
    const double lam2 = dec.eigenvalues[1];
    const double lam3 = dec.eigenvalues[2];
    dec.gapless = lam2 <= 0.0 || (lam3 - lam2) / lam2 < 1e-3;
  }
  return dec;
}

}  // namespace

SpectralDecomposition eigendecompose(const FreeEnergyField& field, const Grid& grid,
                                     int n_modes) {
  if (n_modes < 3) {
    throw ContractViolation("eigendecompose: n_modes must be >= 3");
  }
  if (n_modes > grid.n_points / 4) {
    throw ContractViolation("eigendecompose: n_modes exceeds n_points/4 resolution guard");
  }
  return decompose_impl(field, grid, n_modes);
}

SpectralDecomposition eigendecompose_full(const FreeEnergyField& field, const Grid& grid) {
  return decompose_impl(field, grid, grid.n_points);
}

std::vector<double> spectral_evolve(const SpectralDecomposition& decomp,
                                    const std::vector<double>& initial, double t,
                                    double* truncation_l1) {
  const int n = decomp.grid.n_points;
  if (initial.size() != static_cast<size_t>(n)) {
    throw ContractViolation("spectral_evolve: initial density size mismatch");
  }
  if (t < 0.0) {
    throw ContractViolation("spectral_evolve: t must be >= 0");
  }
  const double mass = trapezoid(initial, decomp.grid.h);
  if (std::abs(mass - 1.0) > 1e-6) {
    throw ContractViolation("spectral_evolve: initial density is not normalized");
  }

  std::vector<double> out = decomp.stationary.weights;
  std::vector<double> recon = decomp.stationary.weights;
  for (int k = 1; k < decomp.n_modes(); ++k) {
    std::vector<double> integrand(n);
    for (int i = 0; i < n; ++i) integrand[i] = decomp.left_modes[k][i] * initial[i];
    const double coeff = trapezoid(integrand, decomp.grid.h);
    const double decay = std::exp(-decomp.eigenvalues[k] * t);
    for (int i = 0; i < n; ++i) {
      out[i] += coeff * decomp.right_modes[k][i] * decay;
      recon[i] += coeff * decomp.right_modes[k][i];
    }
  }
  if (truncation_l1 != nullptr) {
    std::vector<double> diff(n);
    for (int i = 0; i < n; ++i) diff[i] = std::abs(recon[i] - initial[i]);
    *truncation_l1 = trapezoid(diff, decomp.grid.h);
  }
  return out;
}

void dump_eigenpairs_csv(const SpectralDecomposition& decomp, const std::string& path) {
  std::ofstream os(path);
  if (!os) {
    throw NumericalError("dump_eigenpairs_csv: cannot open " + path);
  }
  char buf[32];
  for (int k = 0; k < decomp.n_modes(); ++k) {
    os << (k + 1);
    std::snprintf(buf, sizeof(buf), "%.17g", decomp.eigenvalues[k]);
    os << ',' << buf;
    for (double v : decomp.phi_modes[k]) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace mpemba
