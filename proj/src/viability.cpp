#include "tproj/viability.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "tproj/csv.hpp"
#include "tproj/lp.hpp"
#include "tproj/parallel.hpp"
#include "tproj/projection.hpp"

namespace tproj {

const char* viability_label_name(ViabilityLabel l) {
  switch (l) {
    case ViabilityLabel::nonviable: return "nonviable";
    case ViabilityLabel::max_only: return "max_only";
    case ViabilityLabel::tp_viable: return "tp_viable";
    case ViabilityLabel::undetermined: return "undetermined";
  }
  return "?";
}

void ViabilityConfig::validate() const {
  auto bad = [](const std::string& w) { throw Error(ErrorCode::invalid_argument, "viability: " + w); };
  if (coord_x < 0 || coord_x >= state::size || coord_y < 0 || coord_y >= state::size || coord_x == coord_y)
    bad("slice coordinates must be two distinct state indices in [0, 8)");
  if (!(range_x > 0 && range_y > 0)) bad("ranges must be positive");
  if (resolution < 2) bad("resolution must be >= 2");
  if (steps < 1 || steps > 20) bad("steps must be in [1, 20]");
  if (sub_phases < 1 || sub_phases > 50) bad("sub_phases must be in [1, 50]");
  if (!(torque_limit > 0)) bad("torque limit must be positive");
  if (!(reach_ratio > 0)) bad("reach ratio must be positive");
  if (!(epsilon > 0)) bad("epsilon must be positive");
  if (lp_iterations < 100) bad("lp_iterations must be >= 100");
}

double ViabilityConfig::cell_value(int i, double range) const {
  return -range + 2.0 * range * i / (resolution - 1);
}

double AxisProblem::nominal_torque(double t) const {
  double s = t / period;
  return nominal_params(0) * (1.0 - s) + nominal_params(1) * s;
}

namespace {

Matrix take(const Matrix& m, const std::array<int, 4>& r, const std::array<int, 4>& c) {
  Matrix out(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out(i, j) = m(r[static_cast<size_t>(i)], c[static_cast<size_t>(j)]);
  return out;
}

// axis-local state: swing, pelvis, swing rate, pelvis rate
constexpr int kSwing = 0, kPelvis = 1, kSwingRate = 2;

}  // namespace

AxisProblem axis_problem(const WalkingModel& model, const ConstrainedDlqrGain& gain, const Vector& nominal_X,
                         const Vector& nominal_U, Axis axis, int sub_phases) {
  const auto ix = WalkingModel::axis_states(axis);
  const auto ip = WalkingModel::axis_params(axis);
  const int k = static_cast<int>(axis);
  const LtiModel& full = model.phase.dynamics;
  Matrix a = take(full.a, ix, ix);
  Matrix b(4, 1);
  for (int i = 0; i < 4; ++i) b(i, 0) = full.b(ix[static_cast<size_t>(i)], k);

  AxisProblem p;
  p.period = model.period();
  p.sub_phases = sub_phases;
  p.dynamics = LtiModel(a, b);
  const double T = p.period, h = T / sub_phases;
  WindowMaps w = window_maps(p.dynamics, h);
  p.transition = w.transition;
  p.ramp_start = w.ramp0 - w.ramp1 / h;
  p.ramp_end = w.ramp1 / h;
  p.switch_block = take(model.phase.switch_matrix, ix, ix);
  p.nominal_params = Vector(2);
  p.nominal_params << nominal_U(ip[0]), nominal_U(ip[1]);
  Vector sc = model.state_scale();
  p.scale = Vector(4);
  for (int i = 0; i < 4; ++i) p.scale(i) = sc(ix[static_cast<size_t>(i)]);

  NominalGait nom;
  nom.X = nominal_X;
  nom.U = nominal_U;
  for (int i = 0; i <= sub_phases; ++i) {
    double t = i * h;
    Vector xs = nom.state_at(model, t);
    Vector v(4);
    for (int r = 0; r < 4; ++r) v(r) = xs(ix[static_cast<size_t>(r)]);
    p.nominal.push_back(v);
    if (i == sub_phases) break;
    Matrix L = constrained_projection_gain(model.phase, gain, t);
    Matrix La(2, 4);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 4; ++c) La(r, c) = L(ip[static_cast<size_t>(r)], ix[static_cast<size_t>(c)]);
    p.projection.push_back(La);
    DiscreteMap rem = discretize_window(p.dynamics, t, T, ProfileKind::linear, T);
    p.rem_A.push_back(rem.A);
    p.rem_B.push_back(rem.B);
  }
  return p;
}

namespace {

double sq_norm(const AxisProblem& p, const Vector& e) { return e.cwiseProduct(p.scale).squaredNorm(); }

double reach_of(const AxisProblem& p, int boundary, const Vector& e) {
  const Vector& n = p.nominal[static_cast<size_t>(boundary)];
  return (n(kSwing) + e(kSwing)) - (n(kPelvis) + e(kPelvis));
}

// Time projection updated at sub-phase starts, with reach re-aiming and
// torque clamping. Returns squared normalized norms per touchdown.
std::vector<double> run_projection(const AxisProblem& p, const Vector& e0, const ViabilityConfig& cfg,
                                   double reach) {
  const double inf = std::numeric_limits<double>::infinity();
  const double T = p.period, h = T / p.sub_phases;
  const double vel_tol = 1e-7;
  std::vector<double> out{sq_norm(p, e0)};
  Vector e = e0;
  bool valid = true;
  for (int s = 1; s <= cfg.steps; ++s) {
    for (int i = 0; i < p.sub_phases && valid; ++i) {
      const size_t si = static_cast<size_t>(i);
      Vector dU = p.projection[si] * e;
      Vector end = p.rem_A[si] * e + p.rem_B[si] * dU;
      double r = reach_of(p, p.sub_phases, end);
      if (std::abs(r) > reach) {
        Matrix M(2, 2);
        M.row(0) = p.rem_B[si].row(kSwing) - p.rem_B[si].row(kPelvis);
        M.row(1) = p.rem_B[si].row(kSwingRate);
        Vector rhs(2);
        rhs << std::copysign(reach, r) - r, -end(kSwingRate);
        try {
          dU += solve_linear(M, rhs, 1e-12).x;
        } catch (const Error&) {
        }
      }
      Vector U = (p.nominal_params + dU).cwiseMax(-cfg.torque_limit).cwiseMin(cfg.torque_limit);
      double t0 = i * h, t1 = (i + 1) * h;
      double ua = U(0) * (1.0 - t0 / T) + U(1) * t0 / T;
      double ub = U(0) * (1.0 - t1 / T) + U(1) * t1 / T;
      e = p.transition * e + p.ramp_start * (ua - p.nominal_torque(t0)) + p.ramp_end * (ub - p.nominal_torque(t1));
      if ((cfg.reach_every_sub_phase || i + 1 == p.sub_phases) && std::abs(reach_of(p, i + 1, e)) > reach * (1.0 + 1e-9))
        valid = false;
    }
    if (valid && cfg.touchdown_rest && std::abs(e(kSwingRate) * p.scale(kSwingRate)) > vel_tol) valid = false;
    e = p.switch_block * e;
    out.push_back(valid && e.allFinite() ? sq_norm(p, e) : inf);
    if (!valid) {
      for (int r = s + 1; r <= cfg.steps; ++r) out.push_back(inf);
      break;
    }
  }
  return out;
}

LpProblem build_lp(const AxisProblem& p, const Vector& e0, int horizon, const ViabilityConfig& cfg, double reach) {
  const double T = p.period, h = T / p.sub_phases;
  const Eigen::Index nv = 2 * static_cast<Eigen::Index>(horizon) * p.sub_phases;
  Vector c = e0;
  Matrix G = Matrix::Zero(4, nv);
  std::vector<Vector> ub_rows;
  std::vector<double> ub_rhs;
  std::vector<Vector> eq_rows;
  std::vector<double> eq_rhs;
  auto add_box = [&](const Vector& row, double offset, double lim) {
    // -lim <= offset + row x <= lim
    ub_rows.push_back(row);
    ub_rhs.push_back(lim - offset);
    ub_rows.push_back(-row);
    ub_rhs.push_back(lim + offset);
  };
  Eigen::Index var = 0;
  for (int s = 0; s < horizon; ++s) {
    for (int i = 0; i < p.sub_phases; ++i) {
      double t0 = i * h, t1 = (i + 1) * h;
      c = p.transition * c - p.ramp_start * p.nominal_torque(t0) - p.ramp_end * p.nominal_torque(t1);
      G = p.transition * G;
      G.col(var) += p.ramp_start.col(0);
      G.col(var + 1) += p.ramp_end.col(0);
      var += 2;
      if (cfg.reach_every_sub_phase || i + 1 == p.sub_phases) {
        const Vector& n = p.nominal[static_cast<size_t>(i + 1)];
        Vector row = (G.row(kSwing) - G.row(kPelvis)).transpose();
        add_box(row, n(kSwing) - n(kPelvis) + c(kSwing) - c(kPelvis), reach);
      }
    }
    if (cfg.touchdown_rest) {
      eq_rows.push_back(G.row(kSwingRate).transpose());
      eq_rhs.push_back(-c(kSwingRate));
    }
    c = p.switch_block * c;
    G = p.switch_block * G;
  }
  for (int j = 0; j < 4; ++j)
    add_box(p.scale(j) * G.row(j).transpose(), p.scale(j) * c(j), cfg.epsilon);

  LpProblem lp;
  lp.lower = Vector::Constant(nv, -cfg.torque_limit);
  lp.upper = Vector::Constant(nv, cfg.torque_limit);
  lp.A_eq.resize(static_cast<Eigen::Index>(eq_rows.size()), nv);
  lp.b_eq.resize(static_cast<Eigen::Index>(eq_rows.size()));
  for (size_t r = 0; r < eq_rows.size(); ++r) {
    lp.A_eq.row(static_cast<Eigen::Index>(r)) = eq_rows[r].transpose();
    lp.b_eq(static_cast<Eigen::Index>(r)) = eq_rhs[r];
  }
  lp.A_ub.resize(static_cast<Eigen::Index>(ub_rows.size()), nv);
  lp.b_ub.resize(static_cast<Eigen::Index>(ub_rows.size()));
  for (size_t r = 0; r < ub_rows.size(); ++r) {
    lp.A_ub.row(static_cast<Eigen::Index>(r)) = ub_rows[r].transpose();
    lp.b_ub(static_cast<Eigen::Index>(r)) = ub_rhs[r];
  }
  return lp;
}

// Replays an LP input sequence through independent closed-form propagation.
bool replay_certificate(const AxisProblem& p, const Vector& e0, const Vector& x, int horizon,
                        const ViabilityConfig& cfg, double reach) {
  const double T = p.period, h = T / p.sub_phases;
  const double tol = 1e-6;
  if ((x.cwiseAbs().array() > cfg.torque_limit * (1.0 + tol)).any()) return false;
  Vector e = e0;
  Eigen::Index var = 0;
  PiecewiseConstant none = PiecewiseConstant::zero(0, h);
  for (int s = 0; s < horizon; ++s) {
    for (int i = 0; i < p.sub_phases; ++i) {
      double t0 = i * h, t1 = (i + 1) * h;
      Vector a(1), b(1);
      a << x(var) - p.nominal_torque(t0);
      b << x(var + 1) - p.nominal_torque(t1);
      var += 2;
      e = propagate(p.dynamics, e, InputProfile::linear(a, b, h), none, h);
      if ((cfg.reach_every_sub_phase || i + 1 == p.sub_phases) && std::abs(reach_of(p, i + 1, e)) > reach * (1.0 + tol))
        return false;
    }
    if (cfg.touchdown_rest && std::abs(e(kSwingRate) * p.scale(kSwingRate)) > tol) return false;
    e = p.switch_block * e;
  }
  return e.cwiseProduct(p.scale).lpNorm<Eigen::Infinity>() <= cfg.epsilon * (1.0 + 1e-3);
}

}  // namespace

AxisOutcome evaluate_axis(const AxisProblem& p, const Vector& e0, const ViabilityConfig& cfg, double reach) {
  AxisOutcome out;
  out.tp_norm2 = run_projection(p, e0, cfg, reach);
  out.feasible.assign(static_cast<size_t>(cfg.steps + 1), 0);
  out.witness.assign(static_cast<size_t>(cfg.steps + 1), Vector());
  out.feasible[0] = e0.cwiseProduct(p.scale).lpNorm<Eigen::Infinity>() <= cfg.epsilon ? 1 : 0;
  for (int k = 1; k <= cfg.steps; ++k) {
    LpResult r = find_feasible_point(build_lp(p, e0, k, cfg, reach), cfg.lp_iterations);
    out.feasible[static_cast<size_t>(k)] =
        r.status == LpStatus::feasible ? 1 : (r.status == LpStatus::infeasible ? 0 : -1);
    if (r.status == LpStatus::feasible) out.witness[static_cast<size_t>(k)] = r.x;
  }
  return out;
}

ViabilityGrid viability(const WalkingModel& model, const ConstrainedDlqrGain& gain, const Vector& nominal_X,
                        const Vector& nominal_U, const ViabilityConfig& cfg) {
  cfg.validate();
  if (nominal_X.size() != state::size || nominal_U.size() != model.phase.parameters())
    throw Error(ErrorCode::invalid_argument, "viability: nominal gait size mismatch");
  const double reach = cfg.reach_ratio * model.params.leg_length;
  const std::array<AxisProblem, 2> problems{
      axis_problem(model, gain, nominal_X, nominal_U, Axis::sagittal, cfg.sub_phases),
      axis_problem(model, gain, nominal_X, nominal_U, Axis::lateral, cfg.sub_phases)};

  ViabilityGrid g;
  g.config = cfg;
  for (int i = 0; i < cfg.resolution; ++i) {
    g.xs.push_back(cfg.cell_value(i, cfg.range_x));
    g.ys.push_back(cfg.cell_value(i, cfg.range_y));
  }

  // cells share per-axis sub-problems; solve each distinct one once
  using Key = std::pair<int, std::array<double, 4>>;
  std::map<Key, size_t> index;
  std::vector<Key> keys;
  std::vector<std::array<size_t, 2>> cell_keys;
  for (int iy = 0; iy < cfg.resolution; ++iy)
    for (int ix = 0; ix < cfg.resolution; ++ix) {
      Vector e = Vector::Zero(state::size);
      e(cfg.coord_x) = g.xs[static_cast<size_t>(ix)];
      e(cfg.coord_y) = g.ys[static_cast<size_t>(iy)];
      std::array<size_t, 2> ck{};
      for (int a = 0; a < 2; ++a) {
        auto st = WalkingModel::axis_states(static_cast<Axis>(a));
        Key key{a, {e(st[0]), e(st[1]), e(st[2]), e(st[3])}};
        auto it = index.find(key);
        if (it == index.end()) {
          it = index.emplace(key, keys.size()).first;
          keys.push_back(key);
        }
        ck[static_cast<size_t>(a)] = it->second;
      }
      cell_keys.push_back(ck);
    }
  std::vector<AxisOutcome> outcomes(keys.size());
  parallel_for(keys.size(), [&](size_t i) {
    const auto& [axis, vals] = keys[i];
    Vector e(4);
    e << vals[0], vals[1], vals[2], vals[3];
    outcomes[i] = evaluate_axis(problems[static_cast<size_t>(axis)], e, cfg, reach);
  });

  const double eps2 = cfg.epsilon * cfg.epsilon;
  for (const auto& ck : cell_keys) {
    const AxisOutcome& ox = outcomes[ck[0]];
    const AxisOutcome& oy = outcomes[ck[1]];
    bool tp = false, mx = false, unknown = false;
    for (int k = 0; k <= cfg.steps; ++k) {
      const size_t kk = static_cast<size_t>(k);
      if (ox.tp_norm2[kk] + oy.tp_norm2[kk] <= eps2) tp = true;
      if (ox.feasible[kk] == 1 && oy.feasible[kk] == 1) mx = true;
      if ((ox.feasible[kk] == -1 && oy.feasible[kk] != 0) || (oy.feasible[kk] == -1 && ox.feasible[kk] != 0))
        unknown = true;
    }
    ViabilityLabel label = ViabilityLabel::nonviable;
    if (tp) label = ViabilityLabel::tp_viable;
    else if (mx) label = ViabilityLabel::max_only;
    else if (unknown) label = ViabilityLabel::undetermined;
    if (tp && !mx) ++g.nesting_violations;
    if (tp) ++g.tp_count;
    if (mx) ++g.max_count;
    if (label == ViabilityLabel::undetermined) ++g.undetermined;
    g.labels.push_back(label);
  }

  // replay LP witnesses on a 5x5 sample of cells
  const int sample = std::min(5, cfg.resolution);
  for (int sy = 0; sy < sample; ++sy)
    for (int sx = 0; sx < sample; ++sx) {
      int ix = sx * (cfg.resolution - 1) / std::max(1, sample - 1);
      int iy = sy * (cfg.resolution - 1) / std::max(1, sample - 1);
      const auto& ck = cell_keys[static_cast<size_t>(iy * cfg.resolution + ix)];
      for (int a = 0; a < 2; ++a) {
        const auto& [axis, vals] = keys[ck[static_cast<size_t>(a)]];
        const AxisOutcome& o = outcomes[ck[static_cast<size_t>(a)]];
        Vector e(4);
        e << vals[0], vals[1], vals[2], vals[3];
        for (int k = 1; k <= cfg.steps; ++k)
          if (o.feasible[static_cast<size_t>(k)] == 1 &&
              !replay_certificate(problems[static_cast<size_t>(axis)], e, o.witness[static_cast<size_t>(k)], k, cfg,
                                  reach))
            ++g.certificate_failures;
      }
    }
  return g;
}

std::string viability_csv(const ViabilityGrid& g, const std::string& provenance) {
  std::ostringstream os;
  os << provenance;
  os << "# slice = " << g.config.coord_x << "," << g.config.coord_y << '\n'
     << "# tp_viable = " << g.tp_count << '\n'
     << "# max_viable = " << g.max_count << '\n'
     << "# coverage = " << format_number(g.coverage()) << '\n'
     << "# nesting_violations = " << g.nesting_violations << '\n'
     << "# undetermined = " << g.undetermined << '\n';
  os << "cell_x,cell_y,label\n";
  for (int iy = 0; iy < g.config.resolution; ++iy)
    for (int ix = 0; ix < g.config.resolution; ++ix)
      os << format_number(g.xs[static_cast<size_t>(ix)]) << ',' << format_number(g.ys[static_cast<size_t>(iy)]) << ','
         << viability_label_name(g.at(ix, iy)) << '\n';
  return os.str();
}

}  // namespace tproj
