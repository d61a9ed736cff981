#include "mpemba/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace mpemba {

namespace {

constexpr double kCurvatureFloor = 1e-12;

struct ValueDeriv {
  double v;
  double d;
};

ValueDeriv eval_poly(const std::vector<double>& coeffs, double y) {
  // Horner for value and derivative.
  double v = 0.0, d = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    d = d * y + v;
    v = v * y + *it;
  }
  return {v, d};
}

}  // namespace

Grid Grid::make(double y_min, double y_max, int n_points) {
  if (!(y_min < y_max)) {
    throw InvalidLandscapeError("grid: y_min must be < y_max");
  }
  if (n_points < 16) {
    throw ContractViolation("grid: n_points must be >= 16");
  }
  Grid g;
  g.n_points = n_points;
  g.h = (y_max - y_min) / (n_points - 1);
  g.nodes.resize(n_points);
  for (int i = 0; i < n_points; ++i) {
    g.nodes[i] = y_min + g.h * i;
  }
  g.nodes.back() = y_max;
  return g;
}

CubicSpline::CubicSpline(std::vector<double> xs, std::vector<double> ys)
    : x_(std::move(xs)), y_(std::move(ys)) {
  const int n = static_cast<int>(x_.size());
  if (n < 3 || y_.size() != x_.size()) {
    throw InvalidLandscapeError("spline: need >= 3 samples with matching lengths");
  }
  for (int i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw InvalidLandscapeError("spline: sample abscissae must be strictly increasing");
    }
  }
  // Natural spline: tridiagonal solve for second derivatives.
  m_.assign(n, 0.0);
  std::vector<double> diag(n, 1.0), rhs(n, 0.0), sub(n, 0.0);
  for (int i = 1; i < n - 1; ++i) {
    const double hl = x_[i] - x_[i - 1];
    const double hr = x_[i + 1] - x_[i];
    sub[i] = hl / 6.0;
    diag[i] = (hl + hr) / 3.0;
    rhs[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
  }
  // Thomas algorithm on rows 1..n-2 (natural BCs pin m_0 = m_{n-1} = 0).
  std::vector<double> cp(n, 0.0);
  for (int i = 1; i < n - 1; ++i) {
    const double hr = x_[i + 1] - x_[i];
    const double denom = diag[i] - sub[i] * cp[i - 1];
    cp[i] = (hr / 6.0) / denom;
    rhs[i] = (rhs[i] - sub[i] * ((i > 1) ? rhs[i - 1] : 0.0)) / denom;
  }
  for (int i = n - 2; i >= 1; --i) {
    m_[i] = rhs[i] - cp[i] * m_[i + 1];
  }
}

int CubicSpline::segment(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  int i = static_cast<int>(it - x_.begin()) - 1;
  i = std::clamp(i, 0, static_cast<int>(x_.size()) - 2);
  return i;
}

double CubicSpline::value(double x) const {
  const int i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double A = (x_[i + 1] - x) / h;
  const double B = (x - x_[i]) / h;
  return A * y_[i] + B * y_[i + 1] +
         ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double x) const {
  const int i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double A = (x_[i + 1] - x) / h;
  const double B = (x - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h +
         ((3.0 * B * B - 1.0) * m_[i + 1] - (3.0 * A * A - 1.0) * m_[i]) * h / 6.0;
}

namespace {

struct RiverEvaluator {
  double y;
  ValueDeriv operator()(const PolynomialProfile& p) const { return eval_poly(p.coeffs, y); }
  ValueDeriv operator()(const QuarticDoubleWell& q) const {
    const double s = y / q.well_separation;
    const double t = s * s - 1.0;
    return {q.barrier_height * t * t,
            4.0 * q.barrier_height * t * s / q.well_separation};
  }
  ValueDeriv operator()(const TabulatedProfile&) const;
};

struct CurvatureEvaluator {
  double y;
  ValueDeriv operator()(const ConstantCurvature& c) const { return {c.a0, 0.0}; }
  ValueDeriv operator()(const ExponentialCurvature& e) const {
    const double v = e.a0 * std::exp(e.beta * y);
    return {v, e.beta * v};
  }
  ValueDeriv operator()(const PolynomialCurvature& p) const {
    ValueDeriv vd = eval_poly(p.coeffs, y);
    if (vd.v < kCurvatureFloor) {
      vd.v = kCurvatureFloor;
      vd.d = 0.0;
    }
    return vd;
  }
  ValueDeriv operator()(const TabulatedCurvature&) const;
};

// Spline caches keyed by the variant's address. Profiles are immutable after
// construction so this is safe; the cache is per-call-site cheap enough to
// rebuild when a spec is copied.
thread_local const void* river_key = nullptr;
thread_local CubicSpline river_spline;
thread_local const void* curv_key = nullptr;
thread_local CubicSpline curv_spline;

ValueDeriv RiverEvaluator::operator()(const TabulatedProfile& t) const {
  if (river_key != &t) {
    river_spline = CubicSpline(t.ys, t.values);
    river_key = &t;
  }
  return {river_spline.value(y), river_spline.derivative(y)};
}

ValueDeriv CurvatureEvaluator::operator()(const TabulatedCurvature& t) const {
  for (double v : t.values) {
    if (!(v > 0.0)) {
      throw InvalidLandscapeError("tabulated curvature: raw sample <= 0");
    }
  }
  if (curv_key != &t) {
    curv_spline = CubicSpline(t.ys, t.values);
    curv_key = &t;
  }
  double v = curv_spline.value(y);
  double d = curv_spline.derivative(y);
  if (v < kCurvatureFloor) {
    // Interpolation undershoot of positive samples: clamp to the floor.
    v = kCurvatureFloor;
    d = 0.0;
  }
  return {v, d};
}

}  // namespace

LandscapeEval evaluate_landscape(const LandscapeSpec& spec, double y) {
  if (!(y >= spec.y_min && y <= spec.y_max)) {
    std::ostringstream os;
    os << "evaluate_landscape: y=" << y << " outside [" << spec.y_min << ", " << spec.y_max << "]";
    throw DomainError(os.str());
  }
  const ValueDeriv cv = std::visit(RiverEvaluator{y}, spec.c);
  const ValueDeriv av = std::visit(CurvatureEvaluator{y}, spec.a);
  if (!(av.v > 0.0)) {
    throw InvalidLandscapeError("evaluate_landscape: a(y) <= 0");
  }
  if (!std::isfinite(cv.v) || !std::isfinite(cv.d) || !std::isfinite(av.v) ||
      !std::isfinite(av.d)) {
    throw InvalidLandscapeError("evaluate_landscape: non-finite landscape value");
  }
  return {cv.v, av.v, cv.d, av.d};
}

void LandscapeSpec::validate() const {
  if (!(y_min < y_max)) {
    throw InvalidLandscapeError("landscape: y_min must be < y_max");
  }
  const int probes = 257;
  for (int i = 0; i < probes; ++i) {
    const double y = y_min + (y_max - y_min) * i / (probes - 1);
    (void)evaluate_landscape(*this, y);
  }
}

FreeEnergyField effective_free_energy(const LandscapeSpec& spec, const Grid& grid, double eta) {
  if (!(eta > 0.0)) {
    throw ContractViolation("effective_free_energy: eta must be > 0");
  }
  FreeEnergyField f;
  f.eta = eta;
  f.grid = grid;
  f.values.resize(grid.n_points);
  f.derivative.resize(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) {
    const LandscapeEval e = evaluate_landscape(spec, grid.nodes[i]);
    f.values[i] = e.c + 0.5 * eta * std::log(e.a);
    f.derivative[i] = e.dc_dy + 0.5 * eta * e.da_dy / e.a;
  }
  return f;
}

double curvature_log_slope(const LandscapeSpec& spec, double y) {
  const LandscapeEval e = evaluate_landscape(spec, y);
  return 0.5 * e.da_dy / e.a;
}

RelaxationTimes relaxation_times(const LandscapeSpec& spec, double y, double eta,
                                 TimeConvention convention) {
  if (!(eta > 0.0)) {
    throw ContractViolation("relaxation_times: eta must be > 0");
  }
  const LandscapeEval e = evaluate_landscape(spec, y);
  const double k = 0.5 * e.da_dy / e.a;
  RelaxationTimes t;
  t.tau_x = (convention == TimeConvention::kRescaled) ? 1.0 / e.a : 1.0 / (e.a * eta);
  t.tau_y = (k == 0.0) ? std::numeric_limits<double>::infinity() : 1.0 / (k * eta);
  return t;
}

LandscapeSpec make_double_well(double barrier_height, double beta, double a0, double y_lo,
                               double y_hi) {
  LandscapeSpec s;
  s.c = QuarticDoubleWell{barrier_height, 1.0};
  s.a = ExponentialCurvature{a0, beta};
  s.y_min = y_lo;
  s.y_max = y_hi;
  return s;
}

LandscapeSpec make_preset(const std::string& name) {
  if (name == "ou") {
    LandscapeSpec s;
    s.c = PolynomialProfile{{0.0, 0.0, 0.5}};
    s.a = ConstantCurvature{1.0};
    s.y_min = -8.0;
    s.y_max = 8.0;
    return s;
  }
  if (name == "tilted-river") {
    LandscapeSpec s;
    s.c = PolynomialProfile{{0.0, 0.05}};
    s.a = ExponentialCurvature{1.0, 2.0};
    s.y_min = 0.0;
    s.y_max = 25.0;
    return s;
  }
  if (name == "double-well") {
    return make_double_well(0.75, 1.5);
  }
  throw ConfigError("unknown landscape preset: " + name);
}

std::vector<std::string> preset_names() { return {"ou", "tilted-river", "double-well"}; }

}  // namespace mpemba
