#pragma once

#include <vector>

#include "mpemba/spectral.hpp"

namespace mpemba {

/// Sampled slow-mode amplitude a2(eta) over a plateau learning-rate range.
struct AmplitudeCurve {
  double eta_b = 0.0;
  double a2_at_bath = 0.0;  // diagnostic point: must vanish by orthogonality
  std::vector<double> eta_samples;          // strictly increasing, all > eta_b
  std::vector<double> a2_values;
  std::vector<double> derivative_values;    // the covariance form Cov(c, u2)/eta^2
  std::vector<double> derivative_boxed_f;   // Cov(F_eta, u2)/eta^2 diagnostic
  std::vector<double> derivative_cov_lna;   // Cov(ln a, u2)/eta^2 diagnostic
  std::vector<std::pair<int, int>> sign_flip_brackets;  // adjacent sample index pairs
};

struct StrongPoint {
  double eta = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double residual = 0.0;  // |a2(eta)|
};

enum class MpembaVerdict { kStrong, kWeak, kNone };

struct MpembaReport {
  std::vector<StrongPoint> strong_points;
  double optimal_plateau = 0.0;
  MpembaVerdict verdict = MpembaVerdict::kNone;
};

struct AmplitudeDerivative {
  double exact;          // Cov_{pi_eta}(c, u2)/eta^2 (matches finite differences)
  double paper_boxed;    // Cov_{pi_eta}(F_eta, u2)/eta^2
  double cov_ln_a;       // Cov_{pi_eta}(ln a, u2)/eta^2
};

/// a2(eta): inner product of the bath left mode u2 with pi_eta, taken in the
/// plain h-weighted sum that normalizes the modes (so a2(eta_b) = 0 exactly).
double amplitude(const SpectralDecomposition& decomp, const StationaryDistribution& pi_init);

AmplitudeDerivative amplitude_derivative(const SpectralDecomposition& decomp,
                                         const LandscapeSpec& spec, const Grid& grid,
                                         double eta);

AmplitudeCurve scan_amplitude(const LandscapeSpec& spec, const Grid& grid, double eta_b,
                              double eta_min, double eta_max, int n_samples);

/// Same scan reusing a precomputed decomposition at eta_b.
AmplitudeCurve scan_amplitude(const SpectralDecomposition& decomp, const LandscapeSpec& spec,
                              const Grid& grid, double eta_min, double eta_max, int n_samples);

MpembaReport find_strong_points(const AmplitudeCurve& curve, const SpectralDecomposition& decomp,
                                const LandscapeSpec& spec, const Grid& grid,
                                double tol = 1e-10);

/// True iff |a2(eta_l)| > |a2(eta_h)| (linear interpolation in (log eta, a2)).
bool advantage_check(const AmplitudeCurve& curve, double eta_h, double eta_l);

double interpolate_a2(const AmplitudeCurve& curve, double eta);

}  // namespace mpemba
