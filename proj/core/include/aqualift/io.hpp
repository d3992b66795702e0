#pragma once

#include <aqualift/excitation.hpp>
#include <aqualift/harness.hpp>

#include <string>
#include <vector>

namespace aqualift {

/// Versioned trace CSV: fixed column set, one row per control step.
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows, int n_cables);
std::vector<TraceRow> read_trace_csv(const std::string& path);

/// Kinematic samples for the excitation checkers, from a trace (derivatives
/// by central differences) or from a plan CSV (analytic columns).
std::vector<TrajSample> traj_from_trace(const std::vector<TraceRow>& rows, double g = kGravity);
std::vector<TrajSample> read_traj_csv(const std::string& path);

/// Minimal SVG line plot; one polyline per series.
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<PlotSeries>& series);

}  // namespace aqualift
