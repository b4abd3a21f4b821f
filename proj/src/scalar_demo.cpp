#include "tproj/scalar_demo.hpp"

#include <algorithm>
#include <cmath>

#include "tproj/csv.hpp"

namespace tproj {

ScalarComparison scalar_comparison(double period, double q, double r, const ScalarPulse& pulse, int phases,
                                   int ticks_per_phase) {
  if (phases < 1 || ticks_per_phase < 10)
    throw Error(ErrorCode::invalid_argument, "scalar_comparison: need phases >= 1 and >= 10 ticks per phase");
  if (!(pulse.start >= 0.0 && pulse.end > pulse.start && pulse.end <= 1.0))
    throw Error(ErrorCode::invalid_argument, "scalar_comparison: pulse must satisfy 0 <= start < end <= 1");
  ScalarComparison out;
  out.analysis = analyze_scalar(period, q, r);
  const ScalarAnalysis& s = out.analysis;
  if (!s.within_bounds())
    throw Error(ErrorCode::synthesis, "scalar gain " + format_number(s.gain) + " outside the stability bounds (" +
                                          format_number(s.lower) + ", " + format_number(s.upper) + ")");

  const LtiModel plant(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0));
  const LtiModel closed(Matrix::Constant(1, 1, 1.0 - s.continuous_gain), Matrix::Zero(1, 1),
                        Matrix::Constant(1, 1, 1.0));
  const double dt = period / ticks_per_phase;
  const WindowMaps wp = window_maps(plant, dt);
  const WindowMaps wc = window_maps(closed, dt);
  const Matrix K = Matrix::Constant(1, 1, s.gain);
  std::vector<double> tp_gain(static_cast<size_t>(ticks_per_phase));
  for (int j = 0; j < ticks_per_phase; ++j)
    tp_gain[static_cast<size_t>(j)] = projection_gain(plant, period, ProfileKind::constant, K, j * dt)(0, 0);

  double xc = 0, xd = 0, xp = 0, xo = 0, ud = 0;
  auto record = [&](double t) {
    out.t.push_back(t);
    out.continuous.push_back(xc);
    out.dlqr.push_back(xd);
    out.projection.push_back(xp);
    out.open_loop.push_back(xo);
  };
  const double w0 = pulse.start * period, w1 = pulse.end * period;
  auto advance = [&](const WindowMaps& p, const WindowMaps& c, double w, double up) {
    xc = c.transition(0, 0) * xc + c.push(0, 0) * w;
    xd = p.transition(0, 0) * xd + p.ramp0(0, 0) * ud + p.push(0, 0) * w;
    xp = p.transition(0, 0) * xp + p.ramp0(0, 0) * up + p.push(0, 0) * w;
    xo = p.transition(0, 0) * xo + p.push(0, 0) * w;
  };
  for (int k = 0; k < phases; ++k) {
    for (int j = 0; j < ticks_per_phase; ++j) {
      const double a = j * dt, b = a + dt;
      record(k * period + a);
      if (j == 0) ud = -s.gain * xd;
      // projection input is evaluated at the tick start and held over the tick
      const double up = tp_gain[static_cast<size_t>(j)] * xp;
      // the pulse lives in the first phase; ticks straddling its edges are split
      std::vector<double> cuts{a};
      if (k == 0) {
        if (w0 > a && w0 < b) cuts.push_back(w0);
        if (w1 > a && w1 < b) cuts.push_back(w1);
      }
      cuts.push_back(b);
      for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        double w = (k == 0 && mid >= w0 && mid < w1) ? pulse.magnitude : 0.0;
        if (cuts.size() == 2) {
          advance(wp, wc, w, up);
        } else {
          double h = cuts[i + 1] - cuts[i];
          advance(window_maps(plant, h), window_maps(closed, h), w, up);
        }
      }
    }
  }
  record(phases * period);

  auto peak = [](const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  out.peak_continuous = peak(out.continuous);
  out.peak_dlqr = peak(out.dlqr);
  out.peak_projection = peak(out.projection);
  out.peak_open_loop = peak(out.open_loop);
  // still growing at the end, and far past every controlled run
  const size_t n = out.open_loop.size();
  out.open_loop_unbounded = std::abs(out.open_loop[n - 1]) > std::abs(out.open_loop[n - 2]) &&
                            out.peak_open_loop > 100.0 * std::max(out.peak_dlqr, out.peak_continuous);
  double num = 0, den = 0;
  for (size_t i = 0; i < n; ++i) {
    num += (out.projection[i] - out.continuous[i]) * (out.projection[i] - out.continuous[i]);
    den += out.continuous[i] * out.continuous[i];
  }
  out.projection_rms_error = den > 0 ? std::sqrt(num / den) : 0.0;
  return out;
}

std::string scalar_csv(const ScalarComparison& c, const std::string& provenance) {
  std::string out = provenance;
  out += "t,continuous,dlqr,time_projection,open_loop\n";
  for (size_t i = 0; i < c.t.size(); ++i)
    out += csv_row({c.t[i], c.continuous[i], c.dlqr[i], c.projection[i], c.open_loop[i]});
  return out;
}

}  // namespace tproj
