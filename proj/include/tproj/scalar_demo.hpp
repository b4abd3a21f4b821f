#pragma once

#include <string>
#include <vector>

#include "tproj/projection.hpp"

namespace tproj {

/// Unit scalar plant x' = x + u + w under a disturbance pulse, driven by the
/// equivalent continuous gain, DLQR, time projection and no control.
struct ScalarComparison {
  ScalarAnalysis analysis;
  std::vector<double> t;
  std::vector<double> continuous, dlqr, projection, open_loop;
  double peak_continuous = 0.0, peak_dlqr = 0.0, peak_projection = 0.0, peak_open_loop = 0.0;
  bool open_loop_unbounded = false;
  double projection_rms_error = 0.0;  // relative to the continuous run
};

struct ScalarPulse {
  double start = 0.2;      // fraction of T
  double end = 0.6;        // fraction of T
  double magnitude = 1.0;
};

ScalarComparison scalar_comparison(double period, double q, double r, const ScalarPulse& pulse = {},
                                   int phases = 6, int ticks_per_phase = 1000);

std::string scalar_csv(const ScalarComparison& c, const std::string& provenance = "");

}  // namespace tproj
