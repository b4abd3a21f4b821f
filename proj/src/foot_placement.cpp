#include "tproj/foot_placement.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tproj/csv.hpp"
#include "tproj/parallel.hpp"
#include "tproj/projection.hpp"

namespace tproj {

ErrorFrame ErrorFrame::from_state(const Vector& e) {
  if (e.size() != state::size) throw Error(ErrorCode::invalid_argument, "ErrorFrame: state size");
  ErrorFrame f;
  f.e1 = e.segment<2>(state::swing_x);
  f.e2 = e.segment<2>(state::pelvis_x);
  f.de1 = e.segment<2>(state::swing_vx);
  f.de2 = e.segment<2>(state::pelvis_vx);
  return f;
}

Vector ErrorFrame::to_state() const {
  Vector e(state::size);
  e << e1, e2, de1, de2;
  return e;
}

GainTable compute_gain_table(const WalkingModel& model, const ConstrainedDlqrGain& gain, double mu,
                             int grid) {
  if (grid < 50) throw Error(ErrorCode::invalid_argument, "compute_gain_table: grid size must be >= 50");
  const double T = model.period();
  GainTable table;
  table.period = T;
  table.mu = mu;
  table.params = model.params;
  table.step_bound = kStepBoundRatio * model.params.leg_length;
  table.lateral_min_separation = kLateralSeparationRatio * model.params.leg_length;
  const size_t n = static_cast<size_t>(grid);
  table.times.resize(n);
  table.k_e1.resize(n);
  table.k_de1.resize(n);
  table.k_e2.resize(n);
  table.k_de2.resize(n);
  std::vector<double> cond(n, 1.0);
  std::vector<double> asym(n, 0.0);

  parallel_for(n, [&](size_t i) {
    double t = T * static_cast<double>(i) / static_cast<double>(n - 1);
    double tp = clamp_projection_time(t, T);
    Matrix L;
    try {
      L = constrained_projection_gain(model.phase, gain, tp, &cond[i]);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "compute_gain_table: projection failed at t = " << t << ": " << e.what();
      throw Error(e.code(), os.str());
    }
    // propagate the corrected profile from the actual time to touchdown
    Matrix end_map = Matrix::Identity(8, 8);
    if (t < T) {
      DiscreteMap rem = discretize_window(model.phase.dynamics, t, T, model.phase.profile, T);
      end_map = rem.A + rem.B * L;
    }
    Matrix rows(2, 8);
    for (int axis = 0; axis < 2; ++axis) {
      rows.row(axis) = end_map.row(state::swing_x + axis);
      rows(axis, state::pelvis_x + axis) -= 1.0;
    }
    table.times[i] = t;
    table.k_e1[i] = rows(0, state::swing_x);
    table.k_de1[i] = rows(0, state::swing_vx);
    table.k_e2[i] = rows(0, state::pelvis_x);
    table.k_de2[i] = rows(0, state::pelvis_vx);
    // lateral row must repeat the sagittal one on the lateral coordinates
    double d = 0.0;
    for (int k : {state::swing_x, state::pelvis_x, state::swing_vx, state::pelvis_vx}) {
      d = std::max(d, std::abs(rows(1, k + 1) - rows(0, k)));
      d = std::max(d, std::abs(rows(1, k)));
      d = std::max(d, std::abs(rows(0, k + 1)));
    }
    asym[i] = d;
  });
  table.min_conditioning = *std::min_element(cond.begin(), cond.end());
  for (size_t i = 0; i < n; ++i) {
    double scale = 1.0 + std::abs(table.k_e1[i]) + std::abs(table.k_e2[i]) + std::abs(table.k_de1[i]) +
                   std::abs(table.k_de2[i]);
    if (asym[i] > 1e-9 * scale) {
      std::ostringstream os;
      os << "compute_gain_table: sagittal and lateral gains differ by " << asym[i] << " at t = " << table.times[i];
      throw Error(ErrorCode::numerics, os.str());
    }
  }
  return table;
}

std::array<double, 4> gains_at(const GainTable& table, double t) {
  if (table.times.empty()) throw Error(ErrorCode::invalid_argument, "gains_at: empty table");
  const auto& ts = table.times;
  t = std::clamp(t, ts.front(), ts.back());
  size_t hi = static_cast<size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
  if (hi >= ts.size()) hi = ts.size() - 1;
  size_t lo = hi == 0 ? 0 : hi - 1;
  double w = ts[hi] > ts[lo] ? (t - ts[lo]) / (ts[hi] - ts[lo]) : 0.0;
  auto mix = [&](const std::vector<double>& k) { return (1.0 - w) * k[lo] + w * k[hi]; };
  return {mix(table.k_e1), mix(table.k_de1), mix(table.k_e2), mix(table.k_de2)};
}

Eigen::Vector2d raw_adjustment(const GainTable& table, double t, const ErrorFrame& errors) {
  auto k = gains_at(table, t);
  return k[0] * errors.e1 + k[1] * errors.de1 + k[2] * errors.e2 + k[3] * errors.de2;
}

Eigen::Vector2d apply_gains(const GainTable& table, double t, const ErrorFrame& errors) {
  Eigen::Vector2d dp = raw_adjustment(table, t, errors);
  const double b = table.step_bound;
  dp = dp.cwiseMax(-b).cwiseMin(b);
  if (table.nominal_step_width != 0.0) {
    // touchdown lateral foot offset from the stance foot, along the outward side
    double side = table.nominal_step_width > 0.0 ? 1.0 : -1.0;
    double offset = side * (table.nominal_step_width + dp.y() + errors.e2.y());
    if (offset < table.lateral_min_separation)
      dp.y() += side * (table.lateral_min_separation - offset);
  }
  return dp;
}

double settle_fraction(const GainTable& table, double tol) {
  const size_t n = table.size();
  size_t first = n;  // index from which all later entries are within tol
  for (size_t i = n; i-- > 0;) {
    if (std::abs(table.k_e1[i] - 1.0) > tol) break;
    first = i;
  }
  if (first == n) return 0.0;
  return 1.0 - table.times[first] / table.period;
}

std::vector<double> axis_closed_loop_magnitudes(const ConstrainedDlqrGain& gain, Axis axis) {
  // reduced coordinates follow the rows of the completion basis
  std::vector<int> idx;
  auto states = WalkingModel::axis_states(axis);
  for (Eigen::Index r = 0; r < gain.basis.rows(); ++r) {
    double own = 0.0;
    for (int s : states) own = std::max(own, std::abs(gain.basis(r, s)));
    if (own > 0.5 * gain.basis.row(r).cwiseAbs().maxCoeff()) idx.push_back(static_cast<int>(r));
  }
  Matrix cl = gain.reduced_closed_loop();
  Matrix sub(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i)
    for (size_t j = 0; j < idx.size(); ++j)
      sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cl(idx[i], idx[j]);
  return eig_magnitudes(sub).magnitudes;
}

namespace {

double settle_for(const RobotParams& params, double mu, int grid) {
  WalkingModel m = build_3lp(params);
  ConstrainedDlqrGain g = design_walking_gain(m, mu);
  return settle_fraction(compute_gain_table(m, g, mu, grid));
}

double eigen_gap(const RobotParams& params, double mu) {
  WalkingModel m = build_3lp(params);
  auto mags = axis_closed_loop_magnitudes(design_walking_gain(m, mu), Axis::sagittal);
  double gap = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < mags.size(); ++i) gap = std::min(gap, mags[i] - mags[i + 1]);
  return gap;
}

}  // namespace

MuTuning tune_mu(const RobotParams& base, double frequency, MuCriterion criterion, int grid) {
  RobotParams params = base.with_frequency(frequency);
  params.validate();
  MuTuning out;
  out.criterion = criterion;
  if (criterion == MuCriterion::stabilization_fraction) {
    // the settle fraction grows with mu; bisect for the target
    const double step = 1.0 / static_cast<double>(grid - 1);
    double lo = kMuLow, hi = kMuHigh;
    double f_lo = settle_for(params, lo, grid), f_hi = settle_for(params, hi, grid);
    if (f_lo > kTargetSettleFraction + step || f_hi < kTargetSettleFraction - step) {
      bool low_closer = std::abs(f_lo - kTargetSettleFraction) < std::abs(f_hi - kTargetSettleFraction);
      out.mu = low_closer ? lo : hi;
      out.achieved = low_closer ? f_lo : f_hi;
      out.attained = false;
      return out;
    }
    double mu = lo, f = f_lo;
    for (int it = 0; it < 60; ++it) {
      mu = 0.5 * (lo + hi);
      f = settle_for(params, mu, grid);
      if (std::abs(f - kTargetSettleFraction) <= step) break;
      if (f < kTargetSettleFraction) lo = mu; else hi = mu;
      if (hi - lo < 1e-4) break;
    }
    out.mu = mu;
    out.achieved = f;
    out.attained = std::abs(f - kTargetSettleFraction) <= step;
    return out;
  }

  // first mu at which two per-axis modes meet in magnitude
  const double tol = 1e-3;
  double prev = kMuLow;
  double best_mu = kMuLow, best_gap = eigen_gap(params, kMuLow);
  if (best_gap <= tol) return MuTuning{criterion, kMuLow, best_gap, true};
  for (double mu = kMuLow + 0.25; mu <= kMuHigh + 1e-12; mu += 0.25) {
    double gap = eigen_gap(params, mu);
    if (gap < best_gap) {
      best_gap = gap;
      best_mu = mu;
    }
    if (gap <= tol) {
      double lo = prev, hi = mu, hi_gap = gap;
      while (hi - lo > 1e-4) {
        double mid = 0.5 * (lo + hi);
        double gm = eigen_gap(params, mid);
        if (gm <= tol) {
          hi = mid;
          hi_gap = gm;
        } else {
          lo = mid;
        }
      }
      return MuTuning{criterion, hi, hi_gap, true};
    }
    prev = mu;
  }
  return MuTuning{criterion, best_mu, best_gap, false};
}

std::string gain_table_csv(const GainTable& table, const std::string& provenance) {
  std::ostringstream os;
  os << provenance;
  if (provenance.empty()) {
    os << comment_block(format_robot_params(table.params));
    os << "# mu = " << format_number(table.mu) << '\n';
  }
  os << "# step_bound_m = " << format_number(table.step_bound) << '\n'
     << "# lateral_min_separation_m = " << format_number(table.lateral_min_separation) << '\n';
  std::string out = os.str();
  out += "t,k_e1,k_de1,k_e2,k_de2\n";
  for (size_t i = 0; i < table.size(); ++i)
    out += csv_row({table.times[i], table.k_e1[i], table.k_de1[i], table.k_e2[i], table.k_de2[i]});
  return out;
}

}  // namespace tproj
