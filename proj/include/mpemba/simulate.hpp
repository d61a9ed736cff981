#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mpemba/spectral.hpp"

namespace mpemba {

struct ConstantProtocol {
  double eta = 0.1;
};

/// eta_start until t_q, eta_bath afterwards (instantaneous quench).
struct QuenchProtocol {
  double eta_start = 0.1;
  double eta_bath = 0.01;
  double t_q = 0.0;
};

struct SchedulePlan;  // schedule.hpp
using SimProtocol = std::variant<ConstantProtocol, QuenchProtocol, const SchedulePlan*>;

/// Learning rate at absolute time t under the protocol.
double protocol_eta(const SimProtocol& protocol, double t);

enum class InitKind { kPoint, kStationary };

enum class DistanceMetric { kL1, kKL };

struct SimConfig {
  int n_particles = 10000;
  double dt = 1e-3;
  double t_end = 1.0;
  uint64_t seed = 1;
  TimeConvention time_convention = TimeConvention::kRescaled;
  int histogram_bins = 64;

  InitKind init = InitKind::kStationary;
  double init_x = 0.0;
  double init_y = 0.0;
  double init_eta = 0.1;  // stationary init: sample from pi at this eta

  double x_max = 0.0;      // <= 0: auto mass guard 10*sqrt(eta_max/a_min)
  int n_instants = 200;    // uniform sampling; +1 for t = 0
  int n_workers = 1;       // 0: hardware concurrency
  int n_batches = 0;       // > 0: per-batch distance series for error bars
  double target_eta = 0.0; // > 0: distances to pi at this eta are recorded
  bool freeze_y = false;   // 2-D only: hold y fixed (valley test mode)

  /// Ensemble means of scalar observables f(y): each entry holds f at the
  /// grid nodes (linearly interpolated at particle positions).
  std::vector<std::vector<double>> observables;
};

struct EnsembleResult {
  std::vector<double> times;
  std::vector<std::vector<double>> y_histograms;  // bin masses, sum to 1
  std::vector<double> distance_series;            // L1 to target (if set)
  std::vector<double> kl_series;                  // KL to target (if set)
  std::vector<double> x_variance_series;  // var of x (2-D) or of y (1-D)
  std::vector<std::vector<double>> batch_distances;  // [instant][batch] L1
  std::vector<std::vector<double>> observable_series;  // [observable][instant]
  std::string metadata;
};

/// 2-D Euler-Maruyama ensemble over the valley-river dynamics.
EnsembleResult simulate(const LandscapeSpec& spec, const Grid& grid, const SimProtocol& protocol,
                        const SimConfig& cfg);

/// 1-D Euler-Maruyama over the coarse-grained free energy F_eta(t)(y).
EnsembleResult simulate_effective_1d(const LandscapeSpec& spec, const Grid& grid,
                                     const SimProtocol& protocol, const SimConfig& cfg);

/// Distance between two bin-mass vectors.
double distance_between(const std::vector<double>& p, const std::vector<double>& q,
                        DistanceMetric metric);

/// Integrate a grid density into histogram bin masses over [y_min, y_max].
std::vector<double> bin_stationary(const StationaryDistribution& target, const Grid& grid,
                                   int n_bins);

double distance_to_target(const std::vector<double>& hist, const StationaryDistribution& target,
                          const Grid& grid, DistanceMetric metric);

/// Least-squares fit of v(t) = A exp(-rate t) + C over [t_lo, t_hi];
/// rate searched in [rate_lo, rate_hi]. With fit_offset = false, C is
/// pinned to 0 and A may take either sign.
struct RateFit {
  double rate = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double rms = 0.0;
  bool ok = false;
};

RateFit fit_exponential_rate(const std::vector<double>& times, const std::vector<double>& values,
                             double t_lo, double t_hi, double rate_lo, double rate_hi,
                             bool fit_offset = true);

struct MpembaExperimentOptions {
  enum class Engine { kEffective1d, kFull2d };
  Engine engine = Engine::kEffective1d;
  int n_modes = 6;
  double equilibration = -1.0;  // <= 0: auto (10 tau_x for 2-D)
  double horizon = -1.0;        // decay-phase length; <= 0: auto from lambda2
  double dense_window = -1.0;   // densely sampled early window; <= 0: auto
  int dense_instants = 300;
  int sparse_instants = 300;
  double hot_dt = -1.0;   // <= 0: cfg.dt
  double cold_dt = -1.0;
  int hot_particles = 0;   // <= 0: cfg.n_particles
  int cold_particles = 0;  // the cold rate needs the larger ensemble: its
                           // slow-mode noise decorrelates only at 1/lambda2
  double hot_fit_lo = -1.0, hot_fit_hi = -1.0;    // KL fit window; <= 0: auto
  double cold_fit_lo = -1.0, cold_fit_hi = -1.0;
  int crossing_persistence = 10;
};

struct MpembaComparison {
  EnsembleResult hot;   // times relative to the quench instant
  EnsembleResult cold;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  bool crossing_found = false;
  double crossing_time = 0.0;
  // Late-time rates from mode-amplitude tracking: the cold ensemble decays
  // through the slow mode u2, the hot ensemble (a2 ~ 0) through u3.
  RateFit hot_fit;
  RateFit cold_fit;
  bool hot_equilibrated = false;
  bool cold_equilibrated = false;
  std::string verdict;  // "mpemba-confirmed" or "not-observed"
};

/// Equilibrate two ensembles at eta_h and eta_l, quench both to eta_b,
/// and compare their relaxation toward pi_{eta_b}.
MpembaComparison mpemba_experiment(const LandscapeSpec& spec, const Grid& grid, double eta_h,
                                   double eta_l, double eta_b, const SimConfig& cfg,
                                   const MpembaExperimentOptions& opts = {});

}  // namespace mpemba
