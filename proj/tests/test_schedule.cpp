#include <cmath>

#include <boost/numeric/odeint.hpp>
#include <doctest.h>

#include "mpemba/schedule.hpp"

using namespace mpemba;

namespace {

// Adaptive dense integration of eta' = -m eta^p, used as the oracle for the
// closed-form decay solutions.
double integrate_decay(double p, double m, double eta_star, double t) {
  namespace odeint = boost::numeric::odeint;
  using state = std::array<double, 1>;
  state eta{eta_star};
  auto rhs = [p, m](const state& y, state& dydt, double) {
    dydt[0] = -m * std::pow(std::max(y[0], 0.0), p);
  };
  // pure relative control so accuracy holds across many decay decades
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<state>>(0.0, 1e-13);
  odeint::integrate_adaptive(stepper, rhs, eta, 0.0, t, t / 4096.0);
  return eta[0];
}

DecayFamily family(double p, double m, double eta_star) {
  DecayFamily f;
  f.exponent_p = p;
  f.coefficient_m = m;
  f.eta_star = eta_star;
  return f;
}

}  // namespace

TEST_CASE("decay_value: closed forms for the classic exponents") {
  const double eta_star = 0.1;
  SUBCASE("p=1 exponential") {
    const DecayFamily f = family(1.0, 0.4, eta_star);
    for (double t : {0.0, 0.7, 3.0, 12.0}) {
      CHECK(decay_value(f, t) == doctest::Approx(eta_star * std::exp(-0.4 * t)).epsilon(1e-14));
    }
  }
  SUBCASE("p=2 inverse-time") {
    const double k = 0.8;
    const DecayFamily f = family(2.0, k, eta_star);
    for (double t : {0.0, 1.0, 10.0, 250.0}) {
      CHECK(decay_value(f, t) ==
            doctest::Approx(eta_star / (1.0 + k * eta_star * t)).epsilon(1e-14));
    }
  }
  SUBCASE("p=3 inverse-square-root") {
    const double m = 0.6;
    const DecayFamily f = family(3.0, m, eta_star);
    for (double t : {0.0, 2.0, 40.0}) {
      CHECK(decay_value(f, t) ==
            doctest::Approx(eta_star / std::sqrt(1.0 + 2.0 * m * eta_star * eta_star * t))
                .epsilon(1e-14));
    }
  }
}

TEST_CASE("decay_value matches adaptive ODE integration") {
  const double eta_star = 0.25, m = 0.7;
  for (double p : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    const DecayFamily f = family(p, m, eta_star);
    const double t_char = 1.0 / (m * std::pow(eta_star, p - 1.0));
    double t_max = 20.0 * t_char;
    if (p < 1.0) t_max = std::min(t_max, 0.95 * decay_extinction_time(f));
    for (int j = 1; j <= 8; ++j) {
      const double t = t_max * j / 8.0;
      const double oracle = integrate_decay(p, m, eta_star, t);
      // explicit relative error: the values span many decades
      CHECK(std::abs(decay_value(f, t) - oracle) / oracle < 1e-8);
    }
  }
}

TEST_CASE("decay_value: continuity across the p=1 seam") {
  const double eta_star = 0.5, m = 1.0;
  const DecayFamily exact = family(1.0, m, eta_star);

  // spec point: a 1e-10 exponent perturbation is invisible at mt = 10
  for (double p : {1.0 + 1e-10, 1.0 - 1e-10}) {
    const double t = 10.0 / m;
    CHECK(decay_value(family(p, m, eta_star), t) ==
          doctest::Approx(decay_value(exact, t)).epsilon(1e-6));
  }

  // a 1e-6 perturbation drifts linearly in the exponent offset; the relative
  // gap grows like |p-1| * mt * (mt/2 - ln eta_star), so the 1e-4 band only
  // holds on a bounded horizon (mt <= 12 here, not the full mt <= 20)
  for (double p : {1.0 + 1e-6, 1.0 - 1e-6}) {
    const DecayFamily f = family(p, m, eta_star);
    for (double mt : {1.0, 4.0, 8.0, 12.0}) {
      const double t = mt / m;
      const double ref = decay_value(exact, t);
      CHECK(std::abs(decay_value(f, t) - ref) / ref < 1e-4);
    }
  }

  // inside the 1e-9 treatment band the limit form is used verbatim
  CHECK(decay_value(family(1.0 + 1e-10, m, eta_star), 20.0 / m) ==
        decay_value(exact, 20.0 / m));
}

TEST_CASE("finite-time extinction for p < 1") {
  const double eta_star = 0.36, m = 0.9;
  const DecayFamily f = family(0.5, m, eta_star);
  const double t_stop = 2.0 * std::sqrt(eta_star) / m;
  CHECK(decay_extinction_time(f) == doctest::Approx(t_stop).epsilon(1e-14));
  CHECK(decay_value(f, t_stop) == 0.0);
  CHECK(decay_value(f, t_stop * 1.5) == 0.0);
  CHECK(decay_rate(f, t_stop * 1.5) == 0.0);
  CHECK(decay_value(f, t_stop * 0.999) > 0.0);
  CHECK(std::isinf(decay_extinction_time(family(1.0, m, eta_star))));
  CHECK(std::isinf(decay_extinction_time(family(2.0, m, eta_star))));
}

TEST_CASE("decay_rate is the analytic derivative") {
  const double eta_star = 0.2;
  for (double p : {0.5, 1.0, 1.7, 2.0}) {
    const DecayFamily f = family(p, 0.5, eta_star);
    for (double t : {0.1, 1.0, 3.0}) {
      const double eta = decay_value(f, t);
      if (eta == 0.0) continue;
      CHECK(decay_rate(f, t) == doctest::Approx(-0.5 * std::pow(eta, p)).epsilon(1e-10));
      const double h = 1e-6;
      const double fd = (decay_value(f, t + h) - decay_value(f, t - h)) / (2.0 * h);
      CHECK(decay_rate(f, t) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("decay is nonincreasing for all families") {
  for (double p : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    const DecayFamily f = family(p, 0.8, 0.3);
    double prev = decay_value(f, 0.0);
    for (int j = 1; j <= 200; ++j) {
      const double v = decay_value(f, 0.05 * j);
      CHECK(v <= prev + 1e-15);
      prev = v;
    }
  }
}

TEST_CASE("decay_bounds analytic values") {
  auto [lo0, hi0] = decay_bounds(0.1, 2.0, 1.0, 0.0);
  CHECK(lo0 == doctest::Approx(0.1));
  CHECK(hi0 == doctest::Approx(0.1));
  CHECK(decay_bounds(0.1, 2.0, 1.0, 1.0).first == doctest::Approx(0.1 * std::exp(-2.0)));
  CHECK(decay_bounds(0.1, 2.0, 1.0, 10.0).second == doctest::Approx(0.05));
  CHECK(decay_bounds(0.1, 2.0, 0.0, 7.0).second == doctest::Approx(0.1));  // k=0 degenerate
}

TEST_CASE("recommended_schedule structure") {
  const double a = 1.0, eta_star = 0.1;
  const SchedulePlan plan = recommended_schedule(eta_star, a, 2.0, 0.02);
  CHECK(plan.t_stable == doctest::Approx(5.0));
  CHECK(plan.decay.exponent_p == doctest::Approx(1.0));
  CHECK(plan.decay.coefficient_m == doctest::Approx(a / 5.0));
  CHECK(plan.warmup_duration == doctest::Approx(2.0));
  CHECK(recommended_schedule(eta_star, 10.0, 0.0).t_stable == doctest::Approx(0.5));

  // continuity across phase boundaries
  const double eps = 1e-9;
  CHECK(plan.value(plan.warmup_duration - eps) ==
        doctest::Approx(plan.value(plan.warmup_duration + eps)).epsilon(1e-6));
  CHECK(plan.value(plan.decay_start() - eps) ==
        doctest::Approx(plan.value(plan.decay_start() + eps)).epsilon(1e-6));
  CHECK(plan.value(plan.decay_start()) == doctest::Approx(eta_star));
  // linear warm-up from zero
  CHECK(plan.value(0.0) == doctest::Approx(0.0));
  CHECK(plan.value(1.0) == doctest::Approx(eta_star / 2.0));
  // samples cover all phases and are finite
  REQUIRE(!plan.samples.empty());
  CHECK(plan.samples.front().first == doctest::Approx(0.0));
  CHECK(plan.samples.back().first > plan.decay_start());
  for (const auto& [t, eta] : plan.samples) {
    CHECK(eta == doctest::Approx(plan.value(t)).epsilon(1e-12));
  }
}

TEST_CASE("validate_schedule: recommended plan passes with separated scales") {
  const double a = 1.0, eta_star = 0.1;
  SchedulePlan plan = recommended_schedule(eta_star, a, 0.5, a / 100.0);
  const ScheduleValidation v = validate_schedule(plan, 10.0 / a, 64);
  CHECK(v.all_pass);
  CHECK(v.worst_quench_margin > 1.0);
  CHECK(v.worst_equilibrium_margin > 1.0);
  for (const ScheduleCheckPoint& cp : v.points) {
    CHECK(cp.quench_ok);
    CHECK(cp.equilibrium_ok);
    CHECK(cp.envelope_ok);
  }
}

TEST_CASE("validate_schedule: saturation failures") {
  const double a = 1.0, eta_star = 0.1, k = 0.05;

  // m = 2a decays faster than the equilibrium bound eta/tau_x allows
  SchedulePlan fast = recommended_schedule(eta_star, a, 0.0, k);
  fast.decay.coefficient_m = 2.0 * a;
  const ScheduleValidation vf = validate_schedule(fast, 10.0 / a, 64);
  CHECK_FALSE(vf.all_pass);
  bool eq_fail = false;
  for (const ScheduleCheckPoint& cp : vf.points) eq_fail |= !cp.equilibrium_ok;
  CHECK(eq_fail);

  // p=2 with m=k saturates the quench bound instead of exceeding it
  SchedulePlan riccati = recommended_schedule(eta_star, a, 0.0, k);
  riccati.decay.exponent_p = 2.0;
  riccati.decay.coefficient_m = k;
  const ScheduleValidation vr = validate_schedule(riccati, 10.0 / a, 64);
  CHECK_FALSE(vr.all_pass);
  bool quench_fail = false;
  for (const ScheduleCheckPoint& cp : vr.points) quench_fail |= !cp.quench_ok;
  CHECK(quench_fail);
}

TEST_CASE("recommended schedule stays inside the envelope when k <= a/25") {
  const double a = 2.0, eta_star = 0.15, k = a / 25.0;
  const SchedulePlan plan = recommended_schedule(eta_star, a, 0.0, k);
  for (const auto& [t, eta] : plan.samples) {
    if (t < plan.decay_start()) continue;
    const double td = t - plan.decay_start();
    const auto [lo, hi] = decay_bounds(eta_star, a, k, td);
    CHECK(eta >= lo - 1e-12);
    CHECK(eta <= hi + 1e-12);
  }
}

TEST_CASE("unscaled_inverse_time") {
  const double a = 2.0, eta_star = 0.25;
  const double t_half = 1.0 / (a * eta_star);  // = 2.0
  CHECK(unscaled_inverse_time(eta_star, a, 0.0) == doctest::Approx(eta_star));
  CHECK(unscaled_inverse_time(eta_star, a, t_half) == doctest::Approx(eta_star / 2.0));
  CHECK(unscaled_inverse_time(eta_star, a, 3.0 * t_half) == doctest::Approx(eta_star / 4.0));
}
