#include <algorithm>
#include <cmath>
#include <random>

#include "hydrocal/adjoint.hpp"

namespace hydrocal {

std::vector<double> gauge_rainfall_mmh(const DrainagePlan& plan, const Forcing& forcing,
                                       const Catchment& gauge) {
  (void)plan;
  std::vector<double> rain(forcing.steps(), 0.0);
  for (size_t t = 0; t < forcing.steps(); ++t) {
    double sum = 0;
    for (int32_t cell : gauge.members) sum += forcing.rainfall[t][cell];
    rain[t] = sum / gauge.members.size();
  }
  return rain;
}

namespace {

std::vector<double> to_mmh(const SimulationResult& result, const DrainagePlan& plan,
                           const Catchment& gauge, size_t gauge_index) {
  const double area = plan.drained_area[gauge.outlet];
  std::vector<double> mmh = result.gauge_outflow_volume[gauge_index];
  for (double& v : mmh) v /= area;
  return mmh;
}

}  // namespace

std::vector<double> simulate_gauge_mmh(const DrainagePlan& plan, const ParameterField& theta,
                                       const StateField& h0, const Forcing& forcing,
                                       const Catchment& gauge) {
  SimulationResult result = run(plan, theta, h0, forcing, {gauge});
  return to_mmh(result, plan, gauge, 0);
}

CostBreakdown model_cost(const DrainagePlan& plan, const ParameterField& theta,
                         const StateField& h0, const Forcing& forcing, const Catchment& gauge,
                         const CostConfig& config, const std::vector<double>& obs_mmh,
                         const ParameterField* background, bool smooth) {
  const std::vector<double> sim = simulate_gauge_mmh(plan, theta, h0, forcing, gauge);
  const std::vector<double> rain = gauge_rainfall_mmh(plan, forcing, gauge);
  double jreg = 0;
  if (background && config.alpha_reg != 0)
    jreg = tikhonov_term(theta, *background, config.sigma_theta, plan.active);
  return evaluate_cost(config, sim, obs_mmh, rain, smooth, jreg);
}

namespace {

// Adjoint of the quartic drainage q = h − h c (c⁴+h⁴)^(−1/4).
void drain_partials(double h, double c, double& dq_dh, double& dq_dc) {
  const double r4 = c * c * c * c + h * h * h * h;
  const double r = std::pow(r4, 0.25);
  const double r5 = r * r4;
  dq_dh = 1.0 - c / r + c * h * h * h * h / r5;
  dq_dc = -h / r + h * c * c * c * c / r5;
}

struct CellAdjoint {
  double hi = 0, hp = 0, htr = 0, htl = 0;  // dJ/d state entering the step
};

// Reverse of step_cell. Inputs: adjoints of (hi1, hp1, htr2, htl2) and of the
// local runoff; accumulates parameter gradients and returns the adjoint of
// the incoming state.
CellAdjoint step_cell_adjoint(const std::array<double, kNumParams>& params,
                              const CellDetail& d, double lam_hi1, double lam_hp1,
                              double lam_htr2, double lam_htl2, double lam_runoff,
                              double* grad_params) {
  const double cp = params[kCp], ctr = params[kCtr], ml = params[kMl], ctl = params[kCtl];

  // E: drainage of both transfer stores.
  double dq_dh, dq_dc;
  drain_partials(d.htr1c, ctr, dq_dh, dq_dc);
  double lam_htr1c = lam_htr2 * (1.0 - dq_dh) + lam_runoff * dq_dh;
  grad_params[kCtr] += (lam_runoff - lam_htr2) * dq_dc;
  drain_partials(d.htl1c, ctl, dq_dh, dq_dc);
  double lam_htl1c = lam_htl2 * (1.0 - dq_dh) + lam_runoff * dq_dh;
  grad_params[kCtl] += (lam_runoff - lam_htl2) * dq_dc;

  // D: exchange flux and clipping at zero.
  double lam_htr1 = 0, lam_htl1 = 0, lam_flux = 0;
  if (!d.clip_tr) {
    lam_htr1 += lam_htr1c;
    lam_flux += lam_htr1c;
  }
  if (!d.clip_tl) {
    lam_htl1 += lam_htl1c;
    lam_flux += lam_htl1c;
  }
  if (lam_flux != 0) {
    const double x25 = d.x > 0 ? std::pow(d.x, 2.5) : 0.0;
    grad_params[kMl] += lam_flux * (d.x > 0 ? std::pow(d.x, 3.5) : 0.0);
    lam_htr1 += lam_flux * ml * 3.5 * x25 / ctr;
    grad_params[kCtr] -= lam_flux * ml * 3.5 * x25 * d.htr1 / (ctr * ctr);
  }

  // C: 90/10 split.
  CellAdjoint out;
  const double lam_pr_split = 0.9 * lam_htr1 + 0.1 * lam_htl1;
  out.htr = lam_htr1;
  out.htl = lam_htl1;

  // B: production store.
  const double lam_ps = lam_hp1 - lam_pr_split;
  const double lam_es = -lam_hp1;
  double lam_pn = lam_pr_split;
  double lam_en = 0;
  out.hp = lam_hp1;
  if (d.pn > 0) {
    const double sp = d.sp, w = d.w;
    const double num = cp * (1 - sp * sp) * w;
    const double den = 1 + sp * w;
    const double dps_dw = (cp * (1 - sp * sp) * den - num * sp) / (den * den);
    const double dps_dsp = (-2 * cp * sp * w * den - num * w) / (den * den);
    const double dps_dcp_direct = (1 - sp * sp) * w / den;
    const double dw_dpn = (1 - w * w) / cp;
    const double dw_dcp = -(1 - w * w) * d.pn / (cp * cp);
    lam_pn += lam_ps * dps_dw * dw_dpn;
    out.hp += lam_ps * dps_dsp / cp;
    grad_params[kCp] +=
        lam_ps * (dps_dcp_direct + dps_dw * dw_dcp + dps_dsp * (-d.sp * cp) / (cp * cp));
  } else if (d.en > 0) {
    const double sp = d.sp, v = d.v, hp_in = d.sp * cp;
    const double num = hp_in * (2 - sp) * v;
    const double den = 1 + (1 - sp) * v;
    const double des_dv = (hp_in * (2 - sp) * den - num * (1 - sp)) / (den * den);
    const double des_dsp = (-hp_in * v * den + num * v) / (den * den);
    const double des_dhp_direct = (2 - sp) * v / den;
    const double dv_den = (1 - v * v) / cp;
    const double dv_dcp = -(1 - v * v) * d.en / (cp * cp);
    lam_en += lam_es * des_dv * dv_den;
    out.hp += lam_es * (des_dhp_direct + des_dsp / cp);
    grad_params[kCp] += lam_es * (des_dv * dv_dcp + des_dsp * (-hp_in) / (cp * cp));
  }

  // A: interception store.
  double lam_htmp;
  if (d.pn > 0) {
    lam_htmp = lam_pn;
    grad_params[kCi] += lam_hi1 - lam_pn;
  } else {
    lam_htmp = lam_hi1;
  }
  if (d.et_from_store) {
    // ei = hi + p: interception emptied, htmp constant 0, en = e − hi − p.
    out.hi = -lam_en;
  } else {
    // ei = e: htmp = hi + p − e.
    out.hi = lam_htmp;
  }
  return out;
}

}  // namespace

AdjointResult gradient(const DrainagePlan& plan, const ParameterField& theta,
                       const StateField& h0, const Forcing& forcing, const Catchment& gauge,
                       const CostConfig& config, const std::vector<double>& obs_mmh,
                       const ParameterField* background) {
  Trajectory trajectory;
  SimulationResult result = run(plan, theta, h0, forcing, {gauge}, &trajectory);
  const std::vector<double> sim = to_mmh(result, plan, gauge, 0);
  const std::vector<double> rain = gauge_rainfall_mmh(plan, forcing, gauge);

  CostEval cost = evaluate_cost_with_gradient(config, sim, obs_mmh, rain);

  AdjointResult out;
  out.gradient = ParameterField(plan.nrows, plan.ncols, {0, 0, 0, 0, 0, 0});
  out.breakdown = cost.breakdown;

  const size_t n_cells = plan.cell_count();
  const size_t steps = forcing.steps();
  const double area = plan.cell_area();
  const double gauge_area = plan.drained_area[gauge.outlet];

  std::vector<CellAdjoint> lam(n_cells);
  std::vector<double> lam_hr(n_cells, 0.0);
  std::vector<double> lam_inflow(n_cells, 0.0);

  std::vector<double> inflow(n_cells, 0.0);
  std::vector<double> stored(n_cells, 0.0);
  std::vector<CellDetail> details(n_cells);
  std::vector<CellStep> steps_fwd(n_cells);

  for (size_t t = steps; t-- > 0;) {
    const StateField& state = trajectory.states[t];
    // Replay the step to recover per-cell intermediates and routed volumes.
    std::fill(inflow.begin(), inflow.end(), 0.0);
    for (int32_t cell : plan.topo_order) {
      CellStep cs = step_cell(theta.at_cell(cell),
                              {state[kHi][cell], state[kHp][cell], state[kHtr][cell],
                               state[kHr][cell], state[kHtl][cell]},
                              forcing.rainfall[t][cell], forcing.pet[t][cell], &details[cell]);
      steps_fwd[cell] = cs;
      stored[cell] = state[kHr][cell] + cs.runoff * area + inflow[cell];
      const double gain = 1.0 - std::exp(-1.0 / theta[kCr][cell]);
      int32_t down = plan.downstream[cell];
      if (down != kNoDownstream) inflow[down] += stored[cell] * gain;
    }

    // Reverse topo order: downstream adjoints are ready before upstream.
    std::fill(lam_inflow.begin(), lam_inflow.end(), 0.0);
    for (auto it = plan.topo_order.rbegin(); it != plan.topo_order.rend(); ++it) {
      const int32_t cell = *it;
      const double cr = theta[kCr][cell];
      const double gain = 1.0 - std::exp(-1.0 / cr);
      double lam_out = 0;
      if (cell == gauge.outlet) lam_out += cost.grad_sim[t] / gauge_area;
      const int32_t down = plan.downstream[cell];
      if (down != kNoDownstream) lam_out += lam_inflow[down];

      const double lam_stored = lam_out * gain + lam_hr[cell] * (1.0 - gain);
      const double dgain_dcr = -std::exp(-1.0 / cr) / (cr * cr);
      out.gradient[kCr][cell] += (lam_out - lam_hr[cell]) * stored[cell] * dgain_dcr;
      lam_inflow[cell] = lam_stored;
      const double lam_runoff = lam_stored * area;
      const double lam_hr_prev = lam_stored;

      double grad_params[kNumParams] = {0, 0, 0, 0, 0, 0};
      CellAdjoint prev = step_cell_adjoint(theta.at_cell(cell), details[cell], lam[cell].hi,
                                           lam[cell].hp, lam[cell].htr, lam[cell].htl,
                                           lam_runoff, grad_params);
      for (int j = 0; j < kNumParams; ++j)
        if (j != kCr) out.gradient[j][cell] += grad_params[j];
      lam[cell] = prev;
      lam_hr[cell] = lam_hr_prev;
    }
  }

  if (background && config.alpha_reg != 0) {
    const double jreg = tikhonov_term(theta, *background, config.sigma_theta, plan.active);
    out.breakdown.jreg = jreg;
    out.breakdown.total += config.alpha_reg * jreg;
    tikhonov_gradient(theta, *background, config.sigma_theta, plan.active, config.alpha_reg,
                      out.gradient);
  }
  return out;
}

std::vector<GradientTestRow> gradient_test(const DrainagePlan& plan, const ParameterField& theta,
                                           const StateField& h0, const Forcing& forcing,
                                           const Catchment& gauge, const CostConfig& config,
                                           const std::vector<double>& obs_mmh,
                                           const ParameterField* background, int directions,
                                           uint64_t seed) {
  const ParamBounds bounds = ParamBounds::defaults();
  AdjointResult adj = gradient(plan, theta, h0, forcing, gauge, config, obs_mmh, background);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<GradientTestRow> rows;
  const double epsilons[] = {1e-3, 1e-4, 1e-5, 1e-6, 1e-7};

  for (int dir = 0; dir < directions; ++dir) {
    // Direction scaled by the parameter ranges so every field moves.
    ParameterField direction(plan.nrows, plan.ncols, {0, 0, 0, 0, 0, 0});
    double norm = 0;
    for (int j = 0; j < kNumParams; ++j)
      for (size_t i = 0; i < plan.cell_count(); ++i) {
        if (!plan.active[i]) continue;
        const double d = normal(rng) * (bounds.upper[j] - bounds.lower[j]);
        direction[j][i] = d;
        norm += d * d;
      }
    norm = std::sqrt(norm);
    for (int j = 0; j < kNumParams; ++j)
      for (size_t i = 0; i < plan.cell_count(); ++i) direction[j][i] /= norm;

    // The bound scaling below is part of the direction for both quotients.
    double dd_scaled = 0;
    for (int j = 0; j < kNumParams; ++j)
      for (size_t i = 0; i < plan.cell_count(); ++i)
        dd_scaled += adj.gradient[j][i] * direction[j][i] * (bounds.upper[j] - bounds.lower[j]);

    for (double eps : epsilons) {
      ParameterField plus = theta, minus = theta;
      for (int j = 0; j < kNumParams; ++j)
        for (size_t i = 0; i < plan.cell_count(); ++i) {
          plus[j][i] += eps * direction[j][i] * (bounds.upper[j] - bounds.lower[j]);
          minus[j][i] -= eps * direction[j][i] * (bounds.upper[j] - bounds.lower[j]);
        }
      const double j_plus =
          model_cost(plan, plus, h0, forcing, gauge, config, obs_mmh, background).total;
      const double j_minus =
          model_cost(plan, minus, h0, forcing, gauge, config, obs_mmh, background).total;
      const double fd = (j_plus - j_minus) / (2 * eps);
      const double denom = std::max(std::abs(dd_scaled), 1e-300);
      rows.push_back({eps, std::abs(fd - dd_scaled) / denom, dir});
    }
  }
  return rows;
}

double gradient_test_best_error(const std::vector<GradientTestRow>& rows) {
  // Worst direction, each direction collapsed to its best ε.
  double worst = 0;
  int max_dir = -1;
  for (const auto& r : rows) max_dir = std::max(max_dir, r.direction);
  for (int dir = 0; dir <= max_dir; ++dir) {
    double best = 1e300;
    for (const auto& r : rows)
      if (r.direction == dir) best = std::min(best, r.relative_error);
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace hydrocal
