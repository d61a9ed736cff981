#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "mpemba/errors.hpp"

namespace mpemba {

/// Uniform discretization of [y_min, y_max].
struct Grid {
  int n_points = 0;
  double h = 0.0;
  std::vector<double> nodes;

  static Grid make(double y_min, double y_max, int n_points);

  double y_min() const { return nodes.front(); }
  double y_max() const { return nodes.back(); }
};

/// Natural cubic spline through strictly increasing sample points.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> xs, std::vector<double> ys);

  double value(double x) const;
  double derivative(double x) const;

 private:
  std::vector<double> x_, y_, m_;  // m_: second derivatives at knots
  int segment(double x) const;
};

// ---- river profile c(y) ----

struct PolynomialProfile {
  std::vector<double> coeffs;  // c0 + c1 y + c2 y^2 + ...
};

struct QuarticDoubleWell {
  double barrier_height = 1.0;   // h in c(y) = h ((y/w)^2 - 1)^2
  double well_separation = 1.0;  // w: wells at y = +-w
};

struct TabulatedProfile {
  std::vector<double> ys;
  std::vector<double> values;
};

using RiverProfile = std::variant<PolynomialProfile, QuarticDoubleWell, TabulatedProfile>;

// ---- valley curvature a(y) ----

struct ConstantCurvature {
  double a0 = 1.0;
};

struct ExponentialCurvature {
  double a0 = 1.0;
  double beta = 0.0;  // a(y) = a0 exp(beta y)
};

struct PolynomialCurvature {
  std::vector<double> coeffs;  // clamped positive at evaluation
};

struct TabulatedCurvature {
  std::vector<double> ys;
  std::vector<double> values;  // every raw sample must be > 0
};

using CurvatureProfile =
    std::variant<ConstantCurvature, ExponentialCurvature, PolynomialCurvature, TabulatedCurvature>;

/// Parametric valley-river landscape on a bounded y-domain.
struct LandscapeSpec {
  RiverProfile c;
  CurvatureProfile a;
  double y_min = -1.0;
  double y_max = 1.0;

  /// Throws InvalidLandscapeError if the bounds are bad or a(y) fails
  /// positivity on a dense probe of the domain.
  void validate() const;
};

struct LandscapeEval {
  double c;
  double a;
  double dc_dy;
  double da_dy;
};

/// F_eta(y) = c(y) + (eta/2) ln a(y) sampled on a grid. No additive shift is
/// applied; the constant is absorbed into the stationary normalization.
struct FreeEnergyField {
  double eta = 0.0;
  Grid grid;
  std::vector<double> values;
  std::vector<double> derivative;
};

enum class TimeConvention { kRescaled, kUnscaled };

struct RelaxationTimes {
  double tau_x;
  double tau_y;  // +infinity when the curvature log-slope vanishes
};

LandscapeEval evaluate_landscape(const LandscapeSpec& spec, double y);

FreeEnergyField effective_free_energy(const LandscapeSpec& spec, const Grid& grid, double eta);

/// k = (1/2) d/dy ln a(y).
double curvature_log_slope(const LandscapeSpec& spec, double y);

RelaxationTimes relaxation_times(const LandscapeSpec& spec, double y, double eta,
                                 TimeConvention convention);

/// Named presets: "ou", "tilted-river", "double-well".
LandscapeSpec make_preset(const std::string& name);
std::vector<std::string> preset_names();

/// Double-well landscape c = h ((y)^2-1)^2, a = a0 exp(beta y) on [y_lo, y_hi].
LandscapeSpec make_double_well(double barrier_height, double beta, double a0 = 3.0,
                               double y_lo = -2.0, double y_hi = 2.0);

}  // namespace mpemba
