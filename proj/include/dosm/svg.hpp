#pragma once

#include <string>
#include <vector>

#include "dosm/eval.hpp"

namespace dosm::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
};

/// Standalone SVG document with the panels stacked vertically. Points that
/// cannot be drawn on a log axis (<= 0) are skipped and counted in a note.
std::string render(const std::vector<Panel>& panels, const std::string& caption = "");

/// Log-log |mean alpha-regret| over rounds plus per-round consensus error.
std::vector<Panel> trace_panels(const eval::RegretTrace& trace);

struct SweepRow {
  double T = 0.0;
  double mean_final_regret = 0.0;
  double se = 0.0;
};

std::vector<Panel> sweep_panels(const std::vector<SweepRow>& rows);

/// Number of <circle> markers in a rendered document.
int count_points(const std::string& svg);

}  // namespace dosm::svg
