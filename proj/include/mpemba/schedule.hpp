#pragma once

#include <vector>

#include "mpemba/landscape.hpp"

namespace mpemba {

/// Decay law eta' = -m eta^p started at eta_star.
struct DecayFamily {
  double exponent_p = 1.0;
  double coefficient_m = 1.0;
  double eta_star = 0.1;
  TimeConvention time_convention = TimeConvention::kRescaled;
};

/// Full warm-up / stable / decay learning-rate plan.
struct SchedulePlan {
  double warmup_duration = 0.0;  // linear ramp 0 -> eta_star
  double eta_star = 0.1;
  double t_stable = 0.0;
  DecayFamily decay;
  double curvature_a = 1.0;  // a(y0) at the river position of interest
  double slope_k = 0.0;      // curvature log-slope at y0
  std::vector<std::pair<double, double>> samples;  // (t, eta) over all phases

  double decay_start() const { return warmup_duration + t_stable; }
  /// eta at absolute plan time t (all phases).
  double value(double t) const;
};

/// Closed-form solution of eta' = -m eta^p at time t since decay start.
/// p = 1 is the exponential limit; 0 < p < 1 hits zero at finite t_stop.
double decay_value(const DecayFamily& family, double t);

/// Analytic eta'(t) for the family (0 past extinction).
double decay_rate(const DecayFamily& family, double t);

/// Finite-extinction time for p < 1; +infinity otherwise.
double decay_extinction_time(const DecayFamily& family);

/// Admissible envelope: lower = eta* e^{-a t}, upper = eta*/(1 + k eta* t).
std::pair<double, double> decay_bounds(double eta_star, double a, double k, double t);

/// The recommended plan: t_stable = 5/a, exponential decay with m = a/5.
SchedulePlan recommended_schedule(double eta_star, double a, double warmup_duration,
                                  double k = 0.0, double decay_duration = -1.0,
                                  int n_samples = 256);

struct ScheduleCheckPoint {
  double t;               // time since decay start
  double eta;
  double eta_dot;
  bool quench_ok;         // |eta'| > r_low * k * eta^2
  bool equilibrium_ok;    // |eta'| < r_high * a * eta
  bool envelope_ok;       // lower <= eta <= upper
};

struct ScheduleValidation {
  std::vector<ScheduleCheckPoint> points;
  bool all_pass = false;
  double worst_quench_margin = 0.0;      // min |eta'| / (r_low k eta^2)
  double worst_equilibrium_margin = 0.0; // min (r_high a eta) / |eta'|
};

/// Margin ratios: the paper's strict ">>" defaults to a factor of 3, the
/// soft bound to a factor of 1.
ScheduleValidation validate_schedule(const SchedulePlan& plan, double horizon, int n_check,
                                     double r_low = 3.0, double r_high = 1.0);

/// Unscaled-time inverse-time decay eta*/(1 + t/t_half), t_half = 1/(a eta*).
double unscaled_inverse_time(double eta_star, double a, double t);

}  // namespace mpemba
