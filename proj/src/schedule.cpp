#include "mpemba/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mpemba {

namespace {

void check_family(const DecayFamily& f) {
  if (!(f.exponent_p > 0.0) || !(f.coefficient_m > 0.0) || !(f.eta_star > 0.0)) {
    throw ContractViolation("decay family: p, m, eta_star must all be > 0");
  }
}

constexpr double kExponentialBand = 1e-9;  // |p-1| below this is treated as p = 1

}  // namespace

double decay_extinction_time(const DecayFamily& family) {
  check_family(family);
  const double p = family.exponent_p;
  if (p >= 1.0 - kExponentialBand) {
    return std::numeric_limits<double>::infinity();
  }
  return std::pow(family.eta_star, 1.0 - p) / (family.coefficient_m * (1.0 - p));
}

double decay_value(const DecayFamily& family, double t) {
  check_family(family);
  if (t < 0.0) {
    throw ContractViolation("decay_value: t must be >= 0");
  }
  const double p = family.exponent_p;
  const double m = family.coefficient_m;
  const double e0 = family.eta_star;
  if (std::abs(p - 1.0) < kExponentialBand) {
    return e0 * std::exp(-m * t);
  }
  if (p > 1.0) {
    return e0 / std::pow(1.0 + (p - 1.0) * m * std::pow(e0, p - 1.0) * t, 1.0 / (p - 1.0));
  }
  // 0 < p < 1: finite-time extinction, pinned to 0 at and past t_stop.
  if (t >= std::pow(e0, 1.0 - p) / (m * (1.0 - p))) return 0.0;
  const double base = std::pow(e0, 1.0 - p) - m * (1.0 - p) * t;
  if (base <= 0.0) return 0.0;
  return std::pow(base, 1.0 / (1.0 - p));
}

double decay_rate(const DecayFamily& family, double t) {
  const double eta = decay_value(family, t);
  if (eta <= 0.0) return 0.0;
  return -family.coefficient_m * std::pow(eta, family.exponent_p);
}

std::pair<double, double> decay_bounds(double eta_star, double a, double k, double t) {
  if (!(a > 0.0) || k < 0.0 || !(eta_star > 0.0)) {
    throw ContractViolation("decay_bounds: requires a > 0, k >= 0, eta_star > 0");
  }
  const double lower = eta_star * std::exp(-a * t);
  const double upper = eta_star / (1.0 + k * eta_star * t);
  return {lower, upper};
}

double SchedulePlan::value(double t) const {
  if (t < 0.0) return 0.0;
  if (t < warmup_duration) {
    return eta_star * t / warmup_duration;
  }
  if (t < decay_start()) {
    return eta_star;
  }
  return decay_value(decay, t - decay_start());
}

SchedulePlan recommended_schedule(double eta_star, double a, double warmup_duration, double k,
                                  double decay_duration, int n_samples) {
  if (!(a > 0.0) || !(eta_star > 0.0)) {
    throw ContractViolation("recommended_schedule: requires a > 0 and eta_star > 0");
  }
  if (warmup_duration < 0.0 || n_samples < 2) {
    throw ContractViolation("recommended_schedule: bad warmup duration or sample count");
  }
  SchedulePlan plan;
  plan.eta_star = eta_star;
  plan.warmup_duration = warmup_duration;
  plan.t_stable = 5.0 / a;
  plan.decay = DecayFamily{1.0, a / 5.0, eta_star, TimeConvention::kRescaled};
  plan.curvature_a = a;
  plan.slope_k = k;
  if (decay_duration <= 0.0) {
    decay_duration = 25.0 / a;  // five decay e-folds of m = a/5
  }
  const double t_total = plan.decay_start() + decay_duration;
  plan.samples.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const double t = t_total * i / (n_samples - 1);
    plan.samples.emplace_back(t, plan.value(t));
  }
  return plan;
}

ScheduleValidation validate_schedule(const SchedulePlan& plan, double horizon, int n_check,
                                     double r_low, double r_high) {
  if (!(horizon > 0.0) || n_check < 1) {
    throw ContractViolation("validate_schedule: requires horizon > 0 and n_check >= 1");
  }
  ScheduleValidation out;
  out.all_pass = true;
  out.worst_quench_margin = std::numeric_limits<double>::infinity();
  out.worst_equilibrium_margin = std::numeric_limits<double>::infinity();
  const double a = plan.curvature_a;
  const double k = plan.slope_k;
  for (int i = 0; i < n_check; ++i) {
    // Sample the open decay interval (0, horizon]; the instant t=0 is the
    // phase boundary where the bounds degenerate.
    const double t = horizon * (i + 1) / n_check;
    ScheduleCheckPoint pt;
    pt.t = t;
    pt.eta = decay_value(plan.decay, t);
    pt.eta_dot = decay_rate(plan.decay, t);
    const double speed = std::abs(pt.eta_dot);
    const double quench_floor = r_low * k * pt.eta * pt.eta;
    const double equil_cap = r_high * a * pt.eta;
    pt.quench_ok = speed > quench_floor;
    pt.equilibrium_ok = speed <= equil_cap || (speed == 0.0 && pt.eta == 0.0);
    const auto [lower, upper] = decay_bounds(plan.eta_star, a, k, t);
    pt.envelope_ok = pt.eta >= lower * (1.0 - 1e-12) && pt.eta <= upper * (1.0 + 1e-12);
    if (quench_floor > 0.0) {
      out.worst_quench_margin = std::min(out.worst_quench_margin, speed / quench_floor);
    }
    if (speed > 0.0) {
      out.worst_equilibrium_margin = std::min(out.worst_equilibrium_margin, equil_cap / speed);
    }
    out.all_pass = out.all_pass && pt.quench_ok && pt.equilibrium_ok && pt.envelope_ok;
    out.points.push_back(pt);
  }
  return out;
}

double unscaled_inverse_time(double eta_star, double a, double t) {
  if (!(a > 0.0) || !(eta_star > 0.0)) {
    throw ContractViolation("unscaled_inverse_time: requires a > 0 and eta_star > 0");
  }
  const double t_half = 1.0 / (a * eta_star);
  return eta_star / (1.0 + t / t_half);
}

}  // namespace mpemba
