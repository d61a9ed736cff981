#include "mpemba/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mpemba {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

/// JSON has no literal for non-finite numbers; emit null instead.
std::string json_num(double v) { return std::isfinite(v) ? fmt17(v) : "null"; }

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractViolation("cannot open output file '" + path + "'");
  out << content;
}

std::string amplitude_curve_csv(const AmplitudeCurve& curve) {
  std::ostringstream os;
  os << "eta,a2,d_exact,d_boxed,d_cov_lna\n";
  for (size_t i = 0; i < curve.eta_samples.size(); ++i) {
    os << fmt17(curve.eta_samples[i]) << ',' << fmt17(curve.a2_values[i]) << ','
       << fmt17(curve.derivative_values[i]) << ',' << fmt17(curve.derivative_boxed_f[i]) << ','
       << fmt17(curve.derivative_cov_lna[i]) << '\n';
  }
  return os.str();
}

namespace {

const char* verdict_name(MpembaVerdict v) {
  switch (v) {
    case MpembaVerdict::kStrong:
      return "strong";
    case MpembaVerdict::kWeak:
      return "weak";
    default:
      return "none";
  }
}

}  // namespace

std::string amplitude_report_json(const AmplitudeCurve& curve, const MpembaReport& report) {
  std::ostringstream os;
  os << "{\n  \"eta_b\": " << fmt17(curve.eta_b) << ",\n  \"a2_at_bath\": "
     << fmt17(curve.a2_at_bath) << ",\n  \"samples\": [\n";
  for (size_t i = 0; i < curve.eta_samples.size(); ++i) {
    os << "    {\"eta\": " << fmt17(curve.eta_samples[i]) << ", \"a2\": "
       << fmt17(curve.a2_values[i]) << ", \"d_exact\": " << fmt17(curve.derivative_values[i])
       << ", \"d_boxed\": " << fmt17(curve.derivative_boxed_f[i]) << ", \"d_cov_lna\": "
       << fmt17(curve.derivative_cov_lna[i]) << '}'
       << (i + 1 < curve.eta_samples.size() ? "," : "") << '\n';
  }
  os << "  ],\n  \"strong_points\": [\n";
  for (size_t i = 0; i < report.strong_points.size(); ++i) {
    const StrongPoint& sp = report.strong_points[i];
    os << "    {\"eta\": " << fmt17(sp.eta) << ", \"bracket_lo\": " << fmt17(sp.bracket_lo)
       << ", \"bracket_hi\": " << fmt17(sp.bracket_hi) << ", \"residual\": "
       << fmt17(sp.residual) << '}' << (i + 1 < report.strong_points.size() ? "," : "") << '\n';
  }
  os << "  ],\n  \"optimal_plateau\": " << fmt17(report.optimal_plateau)
     << ",\n  \"verdict\": \"" << verdict_name(report.verdict) << "\"\n}\n";
  return os.str();
}

std::string eigenvalue_table_csv(const SpectralDecomposition& decomp) {
  std::ostringstream os;
  os << "index,eigenvalue\n";
  for (size_t i = 0; i < decomp.eigenvalues.size(); ++i) {
    os << (i + 1) << ',' << fmt17(decomp.eigenvalues[i]) << '\n';
  }
  return os.str();
}

std::string schedule_plan_json(const SchedulePlan& plan, const ScheduleValidation& validation) {
  std::ostringstream os;
  os << "{\n  \"warmup_duration\": " << fmt17(plan.warmup_duration) << ",\n  \"eta_star\": "
     << fmt17(plan.eta_star) << ",\n  \"t_stable\": " << fmt17(plan.t_stable)
     << ",\n  \"decay\": {\"p\": " << fmt17(plan.decay.exponent_p) << ", \"m\": "
     << fmt17(plan.decay.coefficient_m) << "},\n  \"curvature_a\": " << fmt17(plan.curvature_a)
     << ",\n  \"slope_k\": " << fmt17(plan.slope_k) << ",\n  \"validation\": {\n"
     << "    \"all_pass\": " << (validation.all_pass ? "true" : "false")
     << ",\n    \"worst_quench_margin\": " << json_num(validation.worst_quench_margin)
     << ",\n    \"worst_equilibrium_margin\": " << json_num(validation.worst_equilibrium_margin)
     << ",\n    \"failing_instants\": [";
  bool first = true;
  for (const ScheduleCheckPoint& pt : validation.points) {
    if (pt.quench_ok && pt.equilibrium_ok && pt.envelope_ok) continue;
    if (!first) os << ", ";
    os << fmt17(pt.t);
    first = false;
  }
  os << "]\n  },\n  \"samples\": [\n";
  for (size_t i = 0; i < plan.samples.size(); ++i) {
    os << "    [" << fmt17(plan.samples[i].first) << ", " << fmt17(plan.samples[i].second) << ']'
       << (i + 1 < plan.samples.size() ? "," : "") << '\n';
  }
  os << "  ]\n}\n";
  return os.str();
}

std::string schedule_steps_csv(const SchedulePlan& plan, double steps_per_unit_time) {
  if (!(steps_per_unit_time > 0.0)) {
    throw ContractViolation("schedule_steps_csv: steps_per_unit_time must be > 0");
  }
  std::ostringstream os;
  os << "step,lr\n";
  const double t_total = plan.samples.empty() ? plan.decay_start() : plan.samples.back().first;
  const long n_steps = std::lround(t_total * steps_per_unit_time);
  for (long s = 0; s <= n_steps; ++s) {
    os << s << ',' << fmt17(plan.value(s / steps_per_unit_time)) << '\n';
  }
  return os.str();
}

std::string ensemble_csv(const EnsembleResult& result) {
  std::ostringstream os;
  os << "# " << result.metadata << '\n';
  const bool with_distance = !result.distance_series.empty();
  os << "time" << (with_distance ? ",distance_l1,distance_kl" : "") << ",x_variance\n";
  for (size_t i = 0; i < result.times.size(); ++i) {
    os << fmt17(result.times[i]);
    if (with_distance) {
      os << ',' << fmt17(result.distance_series[i]) << ',' << fmt17(result.kl_series[i]);
    }
    os << ',' << fmt17(result.x_variance_series[i]) << '\n';
  }
  return os.str();
}

std::string ensemble_histograms_json(const EnsembleResult& result) {
  std::ostringstream os;
  os << "{\n  \"metadata\": \"" << result.metadata << "\",\n  \"times\": [";
  for (size_t i = 0; i < result.times.size(); ++i) {
    os << (i ? ", " : "") << fmt17(result.times[i]);
  }
  os << "],\n  \"histograms\": [\n";
  for (size_t i = 0; i < result.y_histograms.size(); ++i) {
    os << "    [";
    for (size_t b = 0; b < result.y_histograms[i].size(); ++b) {
      os << (b ? ", " : "") << fmt17(result.y_histograms[i][b]);
    }
    os << ']' << (i + 1 < result.y_histograms.size() ? "," : "") << '\n';
  }
  os << "  ]\n}\n";
  return os.str();
}

namespace {

void append_fit(std::ostringstream& os, const char* name, const RateFit& fit) {
  os << "  \"" << name << "\": {\"ok\": " << (fit.ok ? "true" : "false") << ", \"rate\": "
     << fmt17(fit.rate) << ", \"amplitude\": " << fmt17(fit.amplitude) << ", \"offset\": "
     << fmt17(fit.offset) << ", \"rms\": " << fmt17(fit.rms) << '}';
}

void append_series(std::ostringstream& os, const char* name, const EnsembleResult& r) {
  os << "  \"" << name << "\": {\"times\": [";
  for (size_t i = 0; i < r.times.size(); ++i) os << (i ? ", " : "") << fmt17(r.times[i]);
  os << "], \"l1\": [";
  for (size_t i = 0; i < r.distance_series.size(); ++i) {
    os << (i ? ", " : "") << fmt17(r.distance_series[i]);
  }
  os << "], \"kl\": [";
  for (size_t i = 0; i < r.kl_series.size(); ++i) os << (i ? ", " : "") << fmt17(r.kl_series[i]);
  os << "]}";
}

}  // namespace

std::string mpemba_comparison_json(const MpembaComparison& cmp) {
  std::ostringstream os;
  os << "{\n  \"verdict\": \"" << cmp.verdict << "\",\n  \"lambda2\": " << fmt17(cmp.lambda2)
     << ",\n  \"lambda3\": " << fmt17(cmp.lambda3) << ",\n  \"crossing_found\": "
     << (cmp.crossing_found ? "true" : "false") << ",\n  \"crossing_time\": "
     << fmt17(cmp.crossing_time) << ",\n  \"hot_equilibrated\": "
     << (cmp.hot_equilibrated ? "true" : "false") << ",\n  \"cold_equilibrated\": "
     << (cmp.cold_equilibrated ? "true" : "false") << ",\n";
  append_fit(os, "hot_fit", cmp.hot_fit);
  os << ",\n";
  append_fit(os, "cold_fit", cmp.cold_fit);
  os << ",\n";
  append_series(os, "hot", cmp.hot);
  os << ",\n";
  append_series(os, "cold", cmp.cold);
  os << "\n}\n";
  return os.str();
}

std::string svg_line_plot(const std::string& title, const std::vector<PlotSeries>& series,
                          const std::vector<PlotMarker>& markers, bool log_y) {
  const double W = 800.0, H = 500.0, ml = 70.0, mr = 20.0, mt = 40.0, mb = 50.0;
  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  bool first = true;
  auto y_tr = [&](double y) { return log_y ? std::log10(std::max(y, 1e-300)) : y; };
  for (const PlotSeries& s : series) {
    for (size_t i = 0; i < s.xs.size(); ++i) {
      const double yv = y_tr(s.ys[i]);
      if (!std::isfinite(yv) || !std::isfinite(s.xs[i])) continue;
      if (first) {
        x_lo = x_hi = s.xs[i];
        y_lo = y_hi = yv;
        first = false;
      } else {
        x_lo = std::min(x_lo, s.xs[i]);
        x_hi = std::max(x_hi, s.xs[i]);
        y_lo = std::min(y_lo, yv);
        y_hi = std::max(y_hi, yv);
      }
    }
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y_tr(y) - y_lo) / (y_hi - y_lo) * (H - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
     << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"16\">" << title << "</text>\n"
     << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
     << H - mb << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 4;
    const double yv = y_lo + (y_hi - y_lo) * i / 4;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << xv
       << "</text>\n"
       << "<text x=\"" << ml - 6 << "\" y=\"" << H - mb - (H - mt - mb) * i / 4 + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << (log_y ? "1e" + std::to_string(static_cast<int>(std::round(yv))) : std::to_string(yv))
       << "</text>\n";
  }
  double legend_y = mt + 6.0;
  for (const PlotSeries& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.xs.size(); ++i) {
      if (!std::isfinite(s.xs[i]) || !std::isfinite(y_tr(s.ys[i]))) continue;
      os << px(s.xs[i]) << ',' << py(s.ys[i]) << ' ';
    }
    os << "\"/>\n<text x=\"" << W - mr - 6 << "\" y=\"" << legend_y
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << s.color
       << "\">" << s.label << "</text>\n";
    legend_y += 16.0;
  }
  for (const PlotMarker& m : markers) {
    os << "<circle cx=\"" << px(m.x) << "\" cy=\"" << py(m.y)
       << "\" r=\"4\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace mpemba
