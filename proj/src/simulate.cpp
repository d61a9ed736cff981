#include "mpemba/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "mpemba/rng.hpp"
#include "mpemba/schedule.hpp"

namespace mpemba {

namespace {

/// Per-node tables of a, a', c', k on the simulation grid; particle positions
/// are off-grid, so evaluation is linear interpolation between nodes.
struct FieldTable {
  double lo = 0.0, hi = 0.0, inv_h = 0.0;
  int n = 0;
  std::vector<double> a, da, dc, k;
  double a_min = 0.0, a_max = 0.0;
  double c2_max = 0.0, k1_max = 0.0;  // 1-D drift stiffness: max |c''|, max |k'|

  static FieldTable build(const LandscapeSpec& spec, const Grid& grid) {
    FieldTable t;
    t.lo = grid.y_min();
    t.hi = grid.y_max();
    t.inv_h = 1.0 / grid.h;
    t.n = grid.n_points;
    t.a.resize(t.n);
    t.da.resize(t.n);
    t.dc.resize(t.n);
    t.k.resize(t.n);
    t.a_min = std::numeric_limits<double>::infinity();
    t.a_max = 0.0;
    for (int i = 0; i < t.n; ++i) {
      const LandscapeEval e = evaluate_landscape(spec, grid.nodes[i]);
      t.a[i] = e.a;
      t.da[i] = e.da_dy;
      t.dc[i] = e.dc_dy;
      t.k[i] = e.da_dy / (2.0 * e.a);
      t.a_min = std::min(t.a_min, e.a);
      t.a_max = std::max(t.a_max, e.a);
    }
    for (int i = 0; i + 1 < t.n; ++i) {
      t.c2_max = std::max(t.c2_max, std::abs(t.dc[i + 1] - t.dc[i]) * t.inv_h);
      t.k1_max = std::max(t.k1_max, std::abs(t.k[i + 1] - t.k[i]) * t.inv_h);
    }
    return t;
  }

  void locate(double y, int& i, double& frac) const {
    double pos = (y - lo) * inv_h;
    i = static_cast<int>(pos);
    if (i < 0) i = 0;
    if (i > n - 2) i = n - 2;
    frac = pos - i;
  }

  static double lerp(const std::vector<double>& v, int i, double f) {
    return v[i] + f * (v[i + 1] - v[i]);
  }
};

/// Mirror-fold v into [lo, hi] (exact triangle-wave reflection).
double fold(double v, double lo, double hi) {
  if (v >= lo && v <= hi) return v;
  const double w = hi - lo;
  double t = std::fmod(v - lo, 2.0 * w);
  if (t < 0.0) t += 2.0 * w;
  return lo + (t <= w ? t : 2.0 * w - t);
}

struct RunParams {
  bool two_d = false;
  int n_particles = 0;
  double dt = 0.0;
  int64_t n_steps = 0;
  uint64_t seed = 0;
  TimeConvention conv = TimeConvention::kRescaled;
  int bins = 0;
  InitKind init = InitKind::kPoint;
  double init_x = 0.0, init_y = 0.0, init_eta = 0.0;
  double x_max = 0.0;
  int n_workers = 1;
  int block_size = 8192;
  bool freeze_y = false;
  std::vector<int64_t> record_steps;  // sorted, duplicates allowed
  std::vector<double> eta_steps;      // eta at step*dt, size n_steps
  std::vector<double> init_cdf;       // stationary init: CDF at grid nodes
  std::vector<double> grid_nodes;
  std::vector<double> target_bins;    // empty: no distance series
  bool want_batches = false;
  std::vector<std::vector<double>> observables;  // node tables, interp per particle
  std::string echo;
};

double sample_cdf(const std::vector<double>& cdf, const std::vector<double>& nodes, double u) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  size_t i = static_cast<size_t>(it - cdf.begin());
  if (i == 0) i = 1;
  if (i >= cdf.size()) i = cdf.size() - 1;
  const double span = cdf[i] - cdf[i - 1];
  const double f = span > 0.0 ? (u - cdf[i - 1]) / span : 0.5;
  return nodes[i - 1] + f * (nodes[i] - nodes[i - 1]);
}

EnsembleResult run_core(const FieldTable& table, const RunParams& rp) {
  const int n = rp.n_particles;
  const int n_rec = static_cast<int>(rp.record_steps.size());
  const int bins = rp.bins;
  const int bs = rp.block_size;
  const int n_blocks = (n + bs - 1) / bs;
  const double bin_scale = bins / (table.hi - table.lo);

  // Per-step drift scale: the unscaled convention multiplies drift by eta.
  std::vector<double> dscale(rp.n_steps), sig(rp.n_steps);
  for (int64_t s = 0; s < rp.n_steps; ++s) {
    const double eta = rp.eta_steps[s];
    dscale[s] = rp.conv == TimeConvention::kUnscaled ? eta * rp.dt : rp.dt;
    sig[s] = std::sqrt(2.0 * eta * rp.dt);
  }

  std::vector<std::vector<int>> block_counts(n_blocks);
  std::vector<std::vector<double>> block_sum(n_blocks), block_sumsq(n_blocks);
  const int n_obs = static_cast<int>(rp.observables.size());
  std::vector<std::vector<double>> block_obs(n_blocks);

  int workers = rp.n_workers;
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min(workers, n_blocks);

  std::atomic<int> next_block{0};
  std::atomic<bool> failed{false};
  std::vector<std::exception_ptr> errors(workers);

  auto body = [&](int wid) {
    try {
      while (!failed.load(std::memory_order_relaxed)) {
        const int b = next_block.fetch_add(1);
        if (b >= n_blocks) break;
        const int p_lo = b * bs;
        const int p_hi = std::min(n, p_lo + bs);
        std::vector<int> counts(static_cast<size_t>(n_rec) * bins, 0);
        std::vector<double> sum(n_rec, 0.0), sumsq(n_rec, 0.0);
        std::vector<double> obs(static_cast<size_t>(n_rec) * n_obs, 0.0);
        for (int p = p_lo; p < p_hi; ++p) {
          ParticleRng rng(rp.seed, static_cast<uint64_t>(p));
          double y, x = 0.0;
          if (rp.init == InitKind::kStationary) {
            y = sample_cdf(rp.init_cdf, rp.grid_nodes, rng.uniform());
            if (rp.two_d) {
              int i;
              double f;
              table.locate(y, i, f);
              const double a_here = FieldTable::lerp(table.a, i, f);
              const double var = (rp.conv == TimeConvention::kRescaled ? rp.init_eta : 1.0) / a_here;
              x = rng.normal() * std::sqrt(var);
              x = fold(x, -rp.x_max, rp.x_max);
            }
          } else {
            y = rp.init_y;
            x = rp.init_x;
          }
          size_t rec = 0;
          for (int64_t step = 0; step <= rp.n_steps; ++step) {
            while (rec < rp.record_steps.size() && rp.record_steps[rec] == step) {
              int ib = static_cast<int>((y - table.lo) * bin_scale);
              if (ib < 0) ib = 0;
              if (ib >= bins) ib = bins - 1;
              ++counts[rec * bins + ib];
              const double val = rp.two_d ? x : y;
              sum[rec] += val;
              sumsq[rec] += val * val;
              if (n_obs > 0) {
                int oi;
                double of;
                table.locate(y, oi, of);
                for (int o = 0; o < n_obs; ++o) {
                  obs[rec * n_obs + o] += FieldTable::lerp(rp.observables[o], oi, of);
                }
              }
              ++rec;
            }
            if (step == rp.n_steps) break;
            const double eta = rp.eta_steps[step];
            const double ds = dscale[step];
            const double sg = sig[step];
            int i;
            double f;
            table.locate(y, i, f);
            if (rp.two_d) {
              const double a_here = FieldTable::lerp(table.a, i, f);
              const double da_here = FieldTable::lerp(table.da, i, f);
              const double dc_here = FieldTable::lerp(table.dc, i, f);
              const double x_new = x - a_here * x * ds + sg * rng.normal();
              if (!rp.freeze_y) {
                const double gy = rng.normal();
                y = y - (dc_here + 0.5 * da_here * x * x) * ds + sg * gy;
                y = fold(y, table.lo, table.hi);
              }
              x = fold(x_new, -rp.x_max, rp.x_max);
              if (!(std::isfinite(x) && std::isfinite(y))) {
                throw NumericalError("simulate: particle diverged at step " +
                                     std::to_string(step) + " (t = " +
                                     std::to_string(step * rp.dt) + "); reduce dt");
              }
            } else {
              const double dc_here = FieldTable::lerp(table.dc, i, f);
              const double k_here = FieldTable::lerp(table.k, i, f);
              y = y - (dc_here + eta * k_here) * ds + sg * rng.normal();
              y = fold(y, table.lo, table.hi);
              if (!std::isfinite(y)) {
                throw NumericalError("simulate_effective_1d: particle diverged at step " +
                                     std::to_string(step) + " (t = " +
                                     std::to_string(step * rp.dt) + "); reduce dt");
              }
            }
          }
        }
        block_counts[b] = std::move(counts);
        block_sum[b] = std::move(sum);
        block_sumsq[b] = std::move(sumsq);
        block_obs[b] = std::move(obs);
      }
    } catch (...) {
      errors[wid] = std::current_exception();
      failed = true;
    }
  };

  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(body, w);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Reduction in fixed block order: results are independent of worker count.
  EnsembleResult out;
  out.times.resize(n_rec);
  out.y_histograms.assign(n_rec, std::vector<double>(bins, 0.0));
  out.x_variance_series.resize(n_rec);
  const bool with_target = !rp.target_bins.empty();
  if (with_target) {
    out.distance_series.resize(n_rec);
    out.kl_series.resize(n_rec);
    if (rp.want_batches) out.batch_distances.assign(n_rec, std::vector<double>(n_blocks, 0.0));
  }
  if (n_obs > 0) out.observable_series.assign(n_obs, std::vector<double>(n_rec, 0.0));
  const double inv_n = 1.0 / n;
  std::vector<double> batch_hist(bins);
  for (int r = 0; r < n_rec; ++r) {
    out.times[r] = rp.record_steps[r] * rp.dt;
    int total = 0;
    double s1 = 0.0, s2 = 0.0;
    for (int b = 0; b < n_blocks; ++b) {
      const int* c = block_counts[b].data() + static_cast<size_t>(r) * bins;
      int block_n = 0;
      for (int ib = 0; ib < bins; ++ib) {
        out.y_histograms[r][ib] += c[ib] * inv_n;
        block_n += c[ib];
      }
      total += block_n;
      s1 += block_sum[b][r];
      s2 += block_sumsq[b][r];
      for (int o = 0; o < n_obs; ++o) {
        out.observable_series[o][r] += block_obs[b][static_cast<size_t>(r) * n_obs + o] * inv_n;
      }
      if (with_target && rp.want_batches && block_n > 0) {
        for (int ib = 0; ib < bins; ++ib) batch_hist[ib] = static_cast<double>(c[ib]) / block_n;
        out.batch_distances[r][b] =
            distance_between(batch_hist, rp.target_bins, DistanceMetric::kL1);
      }
    }
    if (total != n) {
      throw ContractViolation("simulate: particle count leak at a sample instant");
    }
    const double mean = s1 * inv_n;
    out.x_variance_series[r] = s2 * inv_n - mean * mean;
    if (with_target) {
      out.distance_series[r] =
          distance_between(out.y_histograms[r], rp.target_bins, DistanceMetric::kL1);
      out.kl_series[r] =
          distance_between(out.y_histograms[r], rp.target_bins, DistanceMetric::kKL);
    }
  }

  uint64_t id_state = 0x9e3779b97f4a7c15ULL;
  for (unsigned char ch : rp.echo) id_state = splitmix64(id_state) ^ ch;
  char idbuf[32];
  std::snprintf(idbuf, sizeof(idbuf), "%016llx",
                static_cast<unsigned long long>(splitmix64(id_state)));
  out.metadata = rp.echo + ";run_id=" + idbuf;
  return out;
}

std::vector<double> node_cdf(const StationaryDistribution& pi, const Grid& grid) {
  std::vector<double> cdf(pi.weights.size(), 0.0);
  for (size_t i = 1; i < cdf.size(); ++i) {
    cdf[i] = cdf[i - 1] + 0.5 * grid.h * (pi.weights[i - 1] + pi.weights[i]);
  }
  const double total = cdf.back();
  for (double& v : cdf) v /= total;
  return cdf;
}

RunParams prepare(const LandscapeSpec& spec, const Grid& grid, const FieldTable& table,
                  const SimProtocol& protocol, const SimConfig& cfg, bool two_d,
                  const std::vector<int64_t>* custom_steps) {
  if (cfg.n_particles < 100) {
    throw ContractViolation("simulate: n_particles must be >= 100");
  }
  if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0)) {
    throw ContractViolation("simulate: dt and t_end must be > 0");
  }
  if (cfg.histogram_bins < 2) {
    throw ContractViolation("simulate: histogram_bins must be >= 2");
  }

  RunParams rp;
  rp.two_d = two_d;
  rp.n_particles = cfg.n_particles;
  rp.dt = cfg.dt;
  rp.n_steps = std::max<int64_t>(1, std::llround(cfg.t_end / cfg.dt));
  rp.seed = cfg.seed;
  rp.conv = cfg.time_convention;
  rp.bins = cfg.histogram_bins;
  rp.init = cfg.init;
  rp.init_x = cfg.init_x;
  rp.init_y = cfg.init_y;
  rp.init_eta = cfg.init_eta;
  rp.n_workers = cfg.n_workers;
  rp.freeze_y = cfg.freeze_y;
  rp.want_batches = cfg.n_batches > 0;
  rp.block_size = cfg.n_batches > 0 ? (cfg.n_particles + cfg.n_batches - 1) / cfg.n_batches : 8192;

  rp.eta_steps.resize(rp.n_steps);
  double eta_max = 0.0;
  for (int64_t s = 0; s < rp.n_steps; ++s) {
    const double eta = protocol_eta(protocol, s * cfg.dt);
    if (eta < 0.0) throw ContractViolation("simulate: protocol produced eta < 0");
    rp.eta_steps[s] = eta;
    eta_max = std::max(eta_max, eta);
  }

  // Stiffest restoring force seen by the integrator: the transverse curvature
  // a(y) in 2-D, the coarse-grained drift slope |c'' + eta k'| in 1-D.
  double stiffness = two_d ? table.a_max : table.c2_max + eta_max * table.k1_max;
  if (rp.conv == TimeConvention::kUnscaled) stiffness *= eta_max;
  if (cfg.dt * stiffness >= 0.5) {
    throw ContractViolation("simulate: stability guard dt * max-curvature < 0.5 violated");
  }

  rp.x_max = cfg.x_max;
  if (rp.x_max <= 0.0) {
    const double var_scale =
        rp.conv == TimeConvention::kRescaled ? std::max(eta_max, cfg.init_eta) : 1.0;
    rp.x_max = 10.0 * std::sqrt(var_scale / table.a_min);
    if (!(rp.x_max > 0.0)) rp.x_max = 10.0;
  }

  if (cfg.init == InitKind::kStationary) {
    if (!(cfg.init_eta > 0.0)) {
      throw ContractViolation("simulate: stationary init requires init_eta > 0");
    }
    const FreeEnergyField f0 = effective_free_energy(spec, grid, cfg.init_eta);
    rp.init_cdf = node_cdf(stationary_distribution(f0, grid), grid);
    rp.grid_nodes = grid.nodes;
  } else if (cfg.init_y < grid.y_min() || cfg.init_y > grid.y_max()) {
    throw ContractViolation("simulate: point init y outside the domain");
  }

  if (custom_steps != nullptr) {
    rp.record_steps = *custom_steps;
  } else {
    const int m = std::max(1, cfg.n_instants);
    rp.record_steps.resize(m + 1);
    for (int j = 0; j <= m; ++j) {
      rp.record_steps[j] = std::llround(static_cast<double>(j) * rp.n_steps / m);
    }
  }

  for (const auto& obs : cfg.observables) {
    if (obs.size() != static_cast<size_t>(grid.n_points)) {
      throw ContractViolation("simulate: observable table size must match the grid");
    }
  }
  rp.observables = cfg.observables;

  if (cfg.target_eta > 0.0) {
    const FreeEnergyField ft = effective_free_energy(spec, grid, cfg.target_eta);
    rp.target_bins =
        bin_stationary(stationary_distribution(ft, grid), grid, cfg.histogram_bins);
  }

  std::ostringstream echo;
  echo << "engine=" << (two_d ? "2d" : "1d") << ";n_particles=" << cfg.n_particles
       << ";dt=" << cfg.dt << ";t_end=" << cfg.t_end << ";seed=" << cfg.seed << ";convention="
       << (rp.conv == TimeConvention::kRescaled ? "rescaled" : "unscaled")
       << ";bins=" << cfg.histogram_bins << ";init="
       << (cfg.init == InitKind::kStationary ? "stationary" : "point")
       << ";init_eta=" << cfg.init_eta << ";x_max=" << rp.x_max
       << ";target_eta=" << cfg.target_eta;
  rp.echo = echo.str();
  return rp;
}

EnsembleResult run_sim(const LandscapeSpec& spec, const Grid& grid, const SimProtocol& protocol,
                       const SimConfig& cfg, bool two_d,
                       const std::vector<int64_t>* custom_steps = nullptr) {
  spec.validate();
  const FieldTable table = FieldTable::build(spec, grid);
  const RunParams rp = prepare(spec, grid, table, protocol, cfg, two_d, custom_steps);
  return run_core(table, rp);
}

}  // namespace

double protocol_eta(const SimProtocol& protocol, double t) {
  if (const auto* c = std::get_if<ConstantProtocol>(&protocol)) return c->eta;
  if (const auto* q = std::get_if<QuenchProtocol>(&protocol)) {
    return t < q->t_q ? q->eta_start : q->eta_bath;
  }
  const SchedulePlan* plan = std::get<const SchedulePlan*>(protocol);
  if (plan == nullptr) throw ContractViolation("protocol_eta: null schedule plan");
  return plan->value(t);
}

EnsembleResult simulate(const LandscapeSpec& spec, const Grid& grid, const SimProtocol& protocol,
                        const SimConfig& cfg) {
  return run_sim(spec, grid, protocol, cfg, true);
}

EnsembleResult simulate_effective_1d(const LandscapeSpec& spec, const Grid& grid,
                                     const SimProtocol& protocol, const SimConfig& cfg) {
  return run_sim(spec, grid, protocol, cfg, false);
}

double distance_between(const std::vector<double>& p, const std::vector<double>& q,
                        DistanceMetric metric) {
  if (p.size() != q.size()) {
    throw ContractViolation("distance_between: mismatched bin supports");
  }
  double acc = 0.0;
  if (metric == DistanceMetric::kL1) {
    for (size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  } else {
    for (size_t i = 0; i < p.size(); ++i) {
      if (p[i] > 0.0) acc += p[i] * std::log(p[i] / std::max(q[i], 1e-300));
    }
  }
  return acc;
}

std::vector<double> bin_stationary(const StationaryDistribution& target, const Grid& grid,
                                   int n_bins) {
  if (target.weights.size() != static_cast<size_t>(grid.n_points)) {
    throw ContractViolation("bin_stationary: distribution/grid size mismatch");
  }
  if (n_bins < 2) throw ContractViolation("bin_stationary: need at least 2 bins");
  // Cumulative trapezoid integral at the nodes, linearly interpolated at the
  // bin edges; adjacent differences give the bin masses.
  std::vector<double> cdf = node_cdf(target, grid);
  const double lo = grid.y_min();
  const double width = (grid.y_max() - lo) / n_bins;
  auto cdf_at = [&](double y) {
    double pos = (y - lo) / grid.h;
    int i = static_cast<int>(pos);
    if (i < 0) i = 0;
    if (i > grid.n_points - 2) i = grid.n_points - 2;
    return cdf[i] + (pos - i) * (cdf[i + 1] - cdf[i]);
  };
  std::vector<double> bins(n_bins);
  double prev = 0.0;
  for (int b = 1; b <= n_bins; ++b) {
    const double cur = b == n_bins ? 1.0 : cdf_at(lo + b * width);
    bins[b - 1] = std::max(0.0, cur - prev);
    prev = cur;
  }
  return bins;
}

double distance_to_target(const std::vector<double>& hist, const StationaryDistribution& target,
                          const Grid& grid, DistanceMetric metric) {
  return distance_between(hist, bin_stationary(target, grid, static_cast<int>(hist.size())),
                          metric);
}

RateFit fit_exponential_rate(const std::vector<double>& times, const std::vector<double>& values,
                             double t_lo, double t_hi, double rate_lo, double rate_hi,
                             bool fit_offset) {
  if (times.size() != values.size() || !(rate_lo > 0.0) || !(rate_hi > rate_lo)) {
    throw ContractViolation("fit_exponential_rate: bad arguments");
  }
  std::vector<double> ts, vs;
  for (size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= t_lo && times[i] <= t_hi) {
      ts.push_back(times[i] - t_lo);
      vs.push_back(values[i]);
    }
  }
  RateFit fit;
  if (ts.size() < 8) return fit;
  const size_t m = ts.size();

  // Linear least squares in (A, C) at fixed rate; scan + golden refinement
  // over the rate.
  auto sse_at = [&](double r, double& A, double& C) {
    double see = 0.0, se = 0.0, sev = 0.0, sv = 0.0;
    for (size_t i = 0; i < m; ++i) {
      const double e = std::exp(-r * ts[i]);
      see += e * e;
      se += e;
      sev += e * vs[i];
      sv += vs[i];
    }
    if (!fit_offset) {
      A = see > 0.0 ? sev / see : 0.0;
      C = 0.0;
    } else {
      const double det = see * m - se * se;
      if (std::abs(det) < 1e-300) {
        A = 0.0;
        C = sv / m;
      } else {
        A = (sev * m - se * sv) / det;
        C = (see * sv - se * sev) / det;
      }
    }
    double sse = 0.0;
    for (size_t i = 0; i < m; ++i) {
      const double d = A * std::exp(-r * ts[i]) + C - vs[i];
      sse += d * d;
    }
    return sse;
  };

  const int n_scan = 160;
  double best_r = rate_lo, best_sse = std::numeric_limits<double>::infinity();
  const double lr_lo = std::log(rate_lo), lr_hi = std::log(rate_hi);
  for (int i = 0; i < n_scan; ++i) {
    const double r = std::exp(lr_lo + (lr_hi - lr_lo) * i / (n_scan - 1));
    double A, C;
    const double sse = sse_at(r, A, C);
    if (sse < best_sse) {
      best_sse = sse;
      best_r = r;
    }
  }
  const double step = (lr_hi - lr_lo) / (n_scan - 1);
  double a = std::log(best_r) - step, b = std::log(best_r) + step;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double A_tmp, C_tmp;
  double f1 = sse_at(std::exp(x1), A_tmp, C_tmp);
  double f2 = sse_at(std::exp(x2), A_tmp, C_tmp);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = sse_at(std::exp(x1), A_tmp, C_tmp);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = sse_at(std::exp(x2), A_tmp, C_tmp);
    }
  }
  const double r_final = std::exp(0.5 * (a + b));
  double A, C;
  const double sse = sse_at(r_final, A, C);
  fit.rate = r_final;
  fit.amplitude = A;
  fit.offset = C;
  fit.rms = std::sqrt(sse / m);
  fit.ok = std::isfinite(fit.rate) && std::isfinite(fit.rms) &&
           (fit_offset ? A > 0.0 : A != 0.0);
  return fit;
}

MpembaComparison mpemba_experiment(const LandscapeSpec& spec, const Grid& grid, double eta_h,
                                   double eta_l, double eta_b, const SimConfig& cfg,
                                   const MpembaExperimentOptions& opts) {
  if (!(eta_b > 0.0) || !(eta_b < eta_l) || !(eta_l <= eta_h)) {
    throw ContractViolation("mpemba_experiment: requires 0 < eta_b < eta_l <= eta_h");
  }
  spec.validate();
  const bool two_d = opts.engine == MpembaExperimentOptions::Engine::kFull2d;

  const FreeEnergyField field_b = effective_free_energy(spec, grid, eta_b);
  const SpectralDecomposition decomp = eigendecompose(field_b, grid, opts.n_modes);
  MpembaComparison cmp;
  cmp.lambda2 = decomp.eigenvalues[1];
  cmp.lambda3 = decomp.eigenvalues[2];
  const double l2 = cmp.lambda2, l3 = cmp.lambda3;
  if (!(l2 > 0.0) || !(l3 > 0.0)) {
    throw NumericalError("mpemba_experiment: nonpositive relaxation rates at eta_b");
  }

  const double horizon = opts.horizon > 0.0 ? opts.horizon : 2.4 / l2;
  const double dense = std::min(opts.dense_window > 0.0 ? opts.dense_window : 6.0 / l3, horizon);
  double a_ref = 0.0;
  {
    // Curvature at the river position: argmin of c on the grid.
    double c_best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.n_points; ++i) {
      const LandscapeEval e = evaluate_landscape(spec, grid.nodes[i]);
      if (e.c < c_best) {
        c_best = e.c;
        a_ref = e.a;
      }
    }
  }
  const double t_q = opts.equilibration > 0.0
                         ? opts.equilibration
                         : (two_d ? 10.0 / a_ref : 0.5 / l3);

  auto run_side = [&](double eta_p, double dt_side, double side_horizon, int n_side) {
    SimConfig side = cfg;
    if (n_side > 0) side.n_particles = n_side;
    side.dt = dt_side;
    side.t_end = t_q + side_horizon;
    side.init = InitKind::kStationary;
    side.init_eta = eta_p;
    side.target_eta = eta_b;
    // Track the slow and next-slow bath-mode amplitudes <u_n>(t) directly:
    // they decay as clean exponentials with mean-zero sampling noise, unlike
    // the distance series with their Monte-Carlo floors.
    side.observables = {decomp.left_modes[1], decomp.left_modes[2]};
    const int64_t n_steps = std::max<int64_t>(1, std::llround(side.t_end / side.dt));
    std::vector<int64_t> steps;
    const int n_eq = 20;
    for (int j = 0; j <= n_eq; ++j) {
      steps.push_back(std::llround(t_q * j / n_eq / side.dt));
    }
    for (int j = 1; j <= opts.dense_instants; ++j) {
      steps.push_back(std::llround((t_q + dense * j / opts.dense_instants) / side.dt));
    }
    if (side_horizon > dense) {
      for (int j = 1; j <= opts.sparse_instants; ++j) {
        steps.push_back(std::llround(
            (t_q + dense + (side_horizon - dense) * j / opts.sparse_instants) / side.dt));
      }
    }
    for (int64_t& s : steps) s = std::min(s, n_steps);
    const QuenchProtocol protocol{eta_p, eta_b, t_q};
    EnsembleResult full = run_sim(spec, grid, SimProtocol{protocol}, side, two_d, &steps);

    // Split off the equilibration pre-phase; flatness check over its last 20%.
    bool flat = true;
    {
      std::vector<double> tail;
      for (int j = 0; j <= n_eq; ++j) {
        if (full.times[j] >= 0.8 * t_q) tail.push_back(full.x_variance_series[j]);
      }
      if (tail.size() >= 2) {
        double mean = 0.0;
        for (double v : tail) mean += v;
        mean /= tail.size();
        flat = mean > 0.0 && std::abs(tail.back() - tail.front()) / mean <= 0.02;
      }
    }
    EnsembleResult main;
    main.metadata = full.metadata;
    main.observable_series.resize(full.observable_series.size());
    for (size_t j = n_eq + 1; j < full.times.size(); ++j) {
      main.times.push_back(full.times[j] - t_q);
      main.y_histograms.push_back(std::move(full.y_histograms[j]));
      main.distance_series.push_back(full.distance_series[j]);
      main.kl_series.push_back(full.kl_series[j]);
      main.x_variance_series.push_back(full.x_variance_series[j]);
      for (size_t o = 0; o < full.observable_series.size(); ++o) {
        main.observable_series[o].push_back(full.observable_series[o][j]);
      }
      if (!full.batch_distances.empty()) {
        main.batch_distances.push_back(std::move(full.batch_distances[j]));
      }
    }
    return std::make_pair(std::move(main), flat);
  };

  const double hot_dt = opts.hot_dt > 0.0 ? opts.hot_dt : cfg.dt;
  const double cold_dt = opts.cold_dt > 0.0 ? opts.cold_dt : cfg.dt;
  auto [hot, hot_flat] = run_side(eta_h, hot_dt, dense, opts.hot_particles);
  auto [cold, cold_flat] = run_side(eta_l, cold_dt, horizon, opts.cold_particles);
  cmp.hot_equilibrated = hot_flat;
  cmp.cold_equilibrated = cold_flat;

  // Crossing: hot L1 strictly below cold L1 with persistence (both series
  // share the dense instants by construction).
  const int persist = std::max(1, opts.crossing_persistence);
  const int n_dense = static_cast<int>(hot.times.size());
  for (int j = 0; j + persist <= n_dense; ++j) {
    bool all_below = true;
    for (int i = j; i < j + persist; ++i) {
      if (!(hot.distance_series[i] < cold.distance_series[i])) {
        all_below = false;
        break;
      }
    }
    if (all_below) {
      cmp.crossing_found = true;
      cmp.crossing_time = hot.times[j];
      break;
    }
  }

  // Rates from the tracked mode amplitudes: by orthogonality <u_n>(t) is a
  // pure exponential a_n e^{-lambda_n t}, so the windows only need to close
  // before the signal sinks under the sampling noise ~1/sqrt(n_particles).
  // The cold ensemble relaxes through <u2>; the hot one (a2 ~ 0) through <u3>.
  const double hot_lo = opts.hot_fit_lo > 0.0 ? opts.hot_fit_lo : 0.2 / l3;
  const double hot_hi = opts.hot_fit_hi > 0.0 ? opts.hot_fit_hi : 4.0 / l3;
  const double cold_lo = opts.cold_fit_lo > 0.0 ? opts.cold_fit_lo : std::min(1.0 / l3, 0.1 / l2);
  const double cold_hi = opts.cold_fit_hi > 0.0 ? opts.cold_fit_hi : 1.8 / l2;
  cmp.hot_fit = fit_exponential_rate(hot.times, hot.observable_series[1], hot_lo, hot_hi,
                                     0.3 * l3, 3.0 * l3, false);
  cmp.cold_fit = fit_exponential_rate(cold.times, cold.observable_series[0], cold_lo, cold_hi,
                                      0.3 * l2, 3.0 * l2, false);

  cmp.verdict = (cmp.crossing_found && cmp.hot_fit.ok && cmp.cold_fit.ok &&
                 cmp.hot_fit.rate > cmp.cold_fit.rate)
                    ? "mpemba-confirmed"
                    : "not-observed";
  cmp.hot = std::move(hot);
  cmp.cold = std::move(cold);
  return cmp;
}

}  // namespace mpemba
