#include "mpemba/amplitude.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mpemba {

namespace {

// Quadrature under which the discrete eigenmodes are exactly orthogonal:
// the plain h-weighted sum used to normalize the modes. Using it here makes
// a2(eta_b) vanish to machine precision even when the stationary density
// carries mass at a reflecting boundary.
double mode_quadrature(const std::vector<double>& f, double h) {
  double s = 0.0;
  for (double v : f) s += v;
  return s * h;
}

double weighted_mean(const std::vector<double>& f, const std::vector<double>& w, double h) {
  std::vector<double> prod(f.size());
  for (size_t i = 0; i < f.size(); ++i) prod[i] = f[i] * w[i];
  return mode_quadrature(prod, h);
}

// Cov_{pi}(f, g) in the same quadrature.
double covariance(const std::vector<double>& f, const std::vector<double>& g,
                  const std::vector<double>& pi, double h) {
  const double mf = weighted_mean(f, pi, h);
  const double mg = weighted_mean(g, pi, h);
  std::vector<double> prod(f.size());
  for (size_t i = 0; i < f.size(); ++i) prod[i] = (f[i] - mf) * (g[i] - mg) * pi[i];
  return mode_quadrature(prod, h);
}

void require_not_gapless(const SpectralDecomposition& decomp) {
  if (decomp.gapless) {
    throw ContractViolation(
        "mpemba analysis refuses a gapless decomposition "
        "((lambda_3 - lambda_2)/lambda_2 < 1e-3): no dominant slow mode");
  }
}

}  // namespace

double amplitude(const SpectralDecomposition& decomp, const StationaryDistribution& pi_init) {
  require_not_gapless(decomp);
  if (pi_init.weights.size() != static_cast<size_t>(decomp.grid.n_points)) {
    throw ContractViolation("amplitude: grid mismatch between decomposition and pi_init");
  }
  if (decomp.n_modes() < 2) {
    throw ContractViolation("amplitude: decomposition must carry the slow mode");
  }
  std::vector<double> integrand(pi_init.weights.size());
  const std::vector<double>& u2 = decomp.left_modes[1];
  for (size_t i = 0; i < integrand.size(); ++i) integrand[i] = u2[i] * pi_init.weights[i];
  return mode_quadrature(integrand, decomp.grid.h);
}

AmplitudeDerivative amplitude_derivative(const SpectralDecomposition& decomp,
                                         const LandscapeSpec& spec, const Grid& grid,
                                         double eta) {
  if (!(eta > 0.0)) {
    throw ContractViolation("amplitude_derivative: eta must be > 0");
  }
  require_not_gapless(decomp);
  const FreeEnergyField field = effective_free_energy(spec, grid, eta);
  const StationaryDistribution pi = stationary_distribution(field, grid);

  const int n = grid.n_points;
  std::vector<double> c_vals(n), lna_vals(n);
  for (int i = 0; i < n; ++i) {
    const LandscapeEval e = evaluate_landscape(spec, grid.nodes[i]);
    c_vals[i] = e.c;
    lna_vals[i] = std::log(e.a);
  }
  const std::vector<double>& u2 = decomp.left_modes[1];
  const double inv_eta2 = 1.0 / (eta * eta);

  AmplitudeDerivative d;
  d.exact = inv_eta2 * covariance(c_vals, u2, pi.weights, grid.h);
  d.cov_ln_a = inv_eta2 * covariance(lna_vals, u2, pi.weights, grid.h);
  d.paper_boxed = inv_eta2 * covariance(field.values, u2, pi.weights, grid.h);
  return d;
}

AmplitudeCurve scan_amplitude(const SpectralDecomposition& decomp, const LandscapeSpec& spec,
                              const Grid& grid, double eta_min, double eta_max, int n_samples) {
  const double eta_b = decomp.eta_b;
  if (!(eta_min > eta_b) || !(eta_b > 0.0)) {
    throw ContractViolation("scan_amplitude: requires eta_min > eta_b > 0");
  }
  if (!(eta_max > eta_min)) {
    throw ContractViolation("scan_amplitude: requires eta_max > eta_min");
  }
  if (n_samples < 8) {
    throw ContractViolation("scan_amplitude: n_samples must be >= 8");
  }
  require_not_gapless(decomp);

  AmplitudeCurve curve;
  curve.eta_b = eta_b;
  curve.a2_at_bath = amplitude(decomp, decomp.stationary);

  const double log_lo = std::log(eta_min);
  const double log_hi = std::log(eta_max);
  curve.eta_samples.resize(n_samples);
  curve.a2_values.resize(n_samples);
  curve.derivative_values.resize(n_samples);
  curve.derivative_boxed_f.resize(n_samples);
  curve.derivative_cov_lna.resize(n_samples);
  for (int k = 0; k < n_samples; ++k) {
    const double eta = std::exp(log_lo + (log_hi - log_lo) * k / (n_samples - 1));
    curve.eta_samples[k] = eta;
    const FreeEnergyField field = effective_free_energy(spec, grid, eta);
    curve.a2_values[k] = amplitude(decomp, stationary_distribution(field, grid));
    const AmplitudeDerivative d = amplitude_derivative(decomp, spec, grid, eta);
    curve.derivative_values[k] = d.exact;
    curve.derivative_boxed_f[k] = d.paper_boxed;
    curve.derivative_cov_lna[k] = d.cov_ln_a;
  }
  // Values at roundoff scale are treated as zero so parity-symmetric
  // landscapes report no brackets.
  const double noise = 1e-12;
  for (int k = 0; k + 1 < n_samples; ++k) {
    if (std::abs(curve.a2_values[k]) > noise && std::abs(curve.a2_values[k + 1]) > noise &&
        std::signbit(curve.a2_values[k]) != std::signbit(curve.a2_values[k + 1])) {
      curve.sign_flip_brackets.emplace_back(k, k + 1);
    }
  }
  return curve;
}

AmplitudeCurve scan_amplitude(const LandscapeSpec& spec, const Grid& grid, double eta_b,
                              double eta_min, double eta_max, int n_samples) {
  const FreeEnergyField field = effective_free_energy(spec, grid, eta_b);
  const SpectralDecomposition decomp = eigendecompose(field, grid, 6);
  return scan_amplitude(decomp, spec, grid, eta_min, eta_max, n_samples);
}

MpembaReport find_strong_points(const AmplitudeCurve& curve, const SpectralDecomposition& decomp,
                                const LandscapeSpec& spec, const Grid& grid, double tol) {
  if (curve.eta_samples.empty()) {
    throw ContractViolation("find_strong_points: empty amplitude curve");
  }
  auto a2_at = [&](double eta) {
    const FreeEnergyField field = effective_free_energy(spec, grid, eta);
    return amplitude(decomp, stationary_distribution(field, grid));
  };

  MpembaReport report;
  for (const auto& [lo_idx, hi_idx] : curve.sign_flip_brackets) {
    double lo = curve.eta_samples[lo_idx];
    double hi = curve.eta_samples[hi_idx];
    double f_lo = curve.a2_values[lo_idx];
    double mid = lo, f_mid = f_lo;
    for (int it = 0; it < 80; ++it) {
      mid = 0.5 * (lo + hi);
      f_mid = a2_at(mid);
      if (std::abs(f_mid) < tol) break;
      if (std::signbit(f_mid) == std::signbit(f_lo)) {
        lo = mid;
        f_lo = f_mid;
      } else {
        hi = mid;
      }
    }
    StrongPoint sp;
    sp.eta = mid;
    sp.bracket_lo = curve.eta_samples[lo_idx];
    sp.bracket_hi = curve.eta_samples[hi_idx];
    sp.residual = std::abs(f_mid);
    report.strong_points.push_back(sp);
  }

  // argmin |a2| over scan samples and refined roots (eta != eta_b by
  // construction: all samples are above the bath rate).
  double best_eta = curve.eta_samples.front();
  double best_abs = std::abs(curve.a2_values.front());
  for (size_t k = 1; k < curve.eta_samples.size(); ++k) {
    if (std::abs(curve.a2_values[k]) < best_abs) {
      best_abs = std::abs(curve.a2_values[k]);
      best_eta = curve.eta_samples[k];
    }
  }
  for (const StrongPoint& sp : report.strong_points) {
    if (sp.residual < best_abs) {
      best_abs = sp.residual;
      best_eta = sp.eta;
    }
  }

  if (!report.strong_points.empty()) {
    report.verdict = MpembaVerdict::kStrong;
    // Multiple roots: default to the highest plateau.
    best_eta = report.strong_points.back().eta;
    for (const StrongPoint& sp : report.strong_points) {
      best_eta = std::max(best_eta, sp.eta);
    }
  } else {
    // Non-monotone |a2| without a root is the weak form; monotone means the
    // constrained optimum sits at the boundary.
    bool deriv_sign_change = false;
    for (size_t k = 0; k + 1 < curve.derivative_values.size(); ++k) {
      if (curve.derivative_values[k] * curve.derivative_values[k + 1] < 0.0) {
        deriv_sign_change = true;
        break;
      }
    }
    bool increasing = true, decreasing = true;
    for (size_t k = 0; k + 1 < curve.a2_values.size(); ++k) {
      const double d = std::abs(curve.a2_values[k + 1]) - std::abs(curve.a2_values[k]);
      if (d > 0.0) decreasing = false;
      if (d < 0.0) increasing = false;
    }
    const bool abs_monotone = increasing || decreasing;
    report.verdict = (!abs_monotone || deriv_sign_change) ? MpembaVerdict::kWeak
                                                          : MpembaVerdict::kNone;
  }
  report.optimal_plateau = best_eta;
  return report;
}

double interpolate_a2(const AmplitudeCurve& curve, double eta) {
  const auto& xs = curve.eta_samples;
  if (eta < xs.front() || eta > xs.back()) {
    throw ContractViolation("interpolate_a2: eta outside scanned range");
  }
  auto it = std::upper_bound(xs.begin(), xs.end(), eta);
  size_t i = static_cast<size_t>(it - xs.begin());
  if (i == 0) i = 1;
  if (i >= xs.size()) i = xs.size() - 1;
  const double t = (std::log(eta) - std::log(xs[i - 1])) / (std::log(xs[i]) - std::log(xs[i - 1]));
  return curve.a2_values[i - 1] + t * (curve.a2_values[i] - curve.a2_values[i - 1]);
}

bool advantage_check(const AmplitudeCurve& curve, double eta_h, double eta_l) {
  if (!(curve.eta_b < eta_l && eta_l < eta_h)) {
    throw ContractViolation("advantage_check: requires eta_b < eta_l < eta_h");
  }
  return std::abs(interpolate_a2(curve, eta_l)) > std::abs(interpolate_a2(curve, eta_h));
}

}  // namespace mpemba
