#pragma once

#include <string>
#include <vector>

#include "mpemba/amplitude.hpp"
#include "mpemba/schedule.hpp"
#include "mpemba/simulate.hpp"

namespace mpemba {

/// 17-significant-digit decimal rendering (round-trip exact).
std::string fmt17(double v);

void write_text_file(const std::string& path, const std::string& content);

std::string amplitude_curve_csv(const AmplitudeCurve& curve);
std::string amplitude_report_json(const AmplitudeCurve& curve, const MpembaReport& report);

std::string eigenvalue_table_csv(const SpectralDecomposition& decomp);

std::string schedule_plan_json(const SchedulePlan& plan, const ScheduleValidation& validation);
/// Two-column (step, lr) table consumable by external training code.
std::string schedule_steps_csv(const SchedulePlan& plan, double steps_per_unit_time);

std::string ensemble_csv(const EnsembleResult& result);
std::string ensemble_histograms_json(const EnsembleResult& result);
std::string mpemba_comparison_json(const MpembaComparison& cmp);

struct PlotSeries {
  std::string label;
  std::string color;
  std::vector<double> xs;
  std::vector<double> ys;
};

struct PlotMarker {
  double x = 0.0;
  double y = 0.0;
};

/// Minimal standalone SVG line plot (linear or log-y axes).
std::string svg_line_plot(const std::string& title, const std::vector<PlotSeries>& series,
                          const std::vector<PlotMarker>& markers, bool log_y = false);

}  // namespace mpemba
