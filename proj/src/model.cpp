#include <cmath>

#include "hydrocal/model.hpp"

namespace hydrocal {

std::array<double, kNumParams> ParamBounds::midpoint_log() const {
  std::array<double, kNumParams> mid{};
  for (int j = 0; j < kNumParams; ++j) {
    if (j == kMl) {
      mid[j] = 0.5 * (lower[j] + upper[j]);
    } else {
      mid[j] = std::pow(10.0, 0.5 * (std::log10(lower[j]) + std::log10(upper[j])));
    }
  }
  return mid;
}

ParameterField::ParameterField(int nrows, int ncols,
                               const std::array<double, kNumParams>& uniform) {
  for (int j = 0; j < kNumParams; ++j) fields[j] = Grid<double>(nrows, ncols, uniform[j]);
}

void ParameterField::validate_bounds(const ParamBounds& bounds, const Grid<uint8_t>& active) const {
  for (int j = 0; j < kNumParams; ++j) {
    for (size_t i = 0; i < active.size(); ++i) {
      if (!active[i]) continue;
      double v = fields[j][i];
      if (v < bounds.lower[j] || v > bounds.upper[j])
        fail(ErrorCode::InvalidArgument, std::string(kParamNames[j]) + "=" + std::to_string(v) +
                                             " outside bounds at cell " + std::to_string(i));
    }
  }
}

StateField StateField::default_initial(const ParameterField& theta) {
  StateField h(theta.fields[0].nrows(), theta.fields[0].ncols());
  for (size_t i = 0; i < h[kHp].size(); ++i) {
    h[kHp][i] = 0.5 * theta[kCp][i];
    h[kHtr][i] = 0.2 * theta[kCtr][i];
    h[kHtl][i] = 0.2 * theta[kCtl][i];
  }
  return h;
}

Forcing Forcing::uniform(int nrows, int ncols, const std::vector<double>& rain,
                         const std::vector<double>& pet, int64_t start_hour) {
  if (rain.size() != pet.size())
    fail(ErrorCode::LengthMismatch, "rainfall and PET series lengths differ");
  Forcing f;
  f.start_hour = start_hour;
  f.rainfall.reserve(rain.size());
  f.pet.reserve(pet.size());
  for (size_t t = 0; t < rain.size(); ++t) {
    f.rainfall.emplace_back(nrows, ncols, rain[t]);
    f.pet.emplace_back(nrows, ncols, pet[t]);
  }
  f.missing.assign(rain.size(), 0);
  return f;
}

namespace {

// Quartic power-law drainage: q = h − (h⁻⁴ + c⁻⁴)^(−1/4), rewritten to avoid
// dividing by h = 0.
inline double drain_outflow(double h, double c) {
  return h - h * c / std::pow(c * c * c * c + h * h * h * h, 0.25);
}

}  // namespace

CellStep step_cell(const std::array<double, kNumParams>& params,
                   const std::array<double, kNumStates>& state, double p, double e,
                   CellDetail* detail) {
  const double ci = params[kCi], cp = params[kCp], ctr = params[kCtr];
  const double ml = params[kMl], ctl = params[kCtl];
  const double hi = state[kHi], hp = state[kHp], htr = state[kHtr], htl = state[kHtl];

  // Interception store.
  const double avail = hi + p;
  const double ei = std::min(e, avail);
  const double htmp = avail - ei;
  const double pn = std::max(0.0, htmp - ci);
  const double hi1 = htmp - pn;
  const double en = e - ei;

  // Production store, GR tanh infiltration/evaporation forms. Throughfall and
  // residual PET are mutually exclusive by construction.
  const double sp = hp / cp;
  double ps = 0, es = 0, w = 0, v = 0;
  if (pn > 0) {
    w = std::tanh(pn / cp);
    ps = cp * (1.0 - sp * sp) * w / (1.0 + sp * w);
  } else if (en > 0) {
    v = std::tanh(en / cp);
    es = hp * (2.0 - sp) * v / (1.0 + (1.0 - sp) * v);
  }
  const double hp1 = hp + ps - es;
  const double pr = pn - ps;

  // 90/10 split into the fast and slow transfer stores, then the exchange
  // term applied to both before drainage; clipping at 0 is the source of
  // non-conservativity.
  const double htr1 = htr + 0.9 * pr;
  const double htl1 = htl + 0.1 * pr;
  const double exch_flux = ml * std::pow(htr1 / ctr, 3.5);
  const double htr1c = std::max(0.0, htr1 + exch_flux);
  const double htl1c = std::max(0.0, htl1 + exch_flux);

  const double qtr = drain_outflow(htr1c, ctr);
  const double qtl = drain_outflow(htl1c, ctl);

  CellStep out;
  out.hi1 = hi1;
  out.hp1 = hp1;
  out.htr2 = htr1c - qtr;
  out.htl2 = htl1c - qtl;
  out.runoff = qtr + qtl;
  out.exchange = (htr1c - htr1) + (htl1c - htl1);
  out.actual_et = ei + es;
  if (!std::isfinite(out.runoff) || !std::isfinite(out.hi1) || !std::isfinite(out.hp1) ||
      !std::isfinite(out.htr2) || !std::isfinite(out.htl2))
    fail(ErrorCode::NonFiniteFlux, "non-finite flux in cell step");
  if (detail) {
    detail->avail = avail;
    detail->ei = ei;
    detail->htmp = htmp;
    detail->pn = pn;
    detail->en = en;
    detail->sp = sp;
    detail->w = w;
    detail->v = v;
    detail->ps = ps;
    detail->es = es;
    detail->pr = pr;
    detail->htr1 = htr1;
    detail->htl1 = htl1;
    detail->x = htr1 / ctr;
    detail->exch_flux = exch_flux;
    detail->htr1c = htr1c;
    detail->htl1c = htl1c;
    detail->qtr = qtr;
    detail->qtl = qtl;
    detail->et_from_store = e > avail;
    detail->clip_tr = htr1 + exch_flux < 0;
    detail->clip_tl = htl1 + exch_flux < 0;
  }
  return out;
}

SimulationResult run(const DrainagePlan& plan, const ParameterField& theta,
                     const StateField& h0, const Forcing& forcing,
                     const std::vector<Catchment>& gauges, Trajectory* trajectory) {
  const size_t n_cells = plan.cell_count();
  for (int j = 0; j < kNumParams; ++j)
    if (theta[j].nrows() != plan.nrows || theta[j].ncols() != plan.ncols)
      fail(ErrorCode::ShapeMismatch, "parameter field shape differs from plan");
  for (int j = 0; j < kNumStates; ++j)
    if (h0.fields[j].nrows() != plan.nrows || h0.fields[j].ncols() != plan.ncols)
      fail(ErrorCode::ShapeMismatch, "state field shape differs from plan");
  for (size_t t = 0; t < forcing.steps(); ++t)
    if (forcing.rainfall[t].nrows() != plan.nrows || forcing.rainfall[t].ncols() != plan.ncols ||
        forcing.pet[t].nrows() != plan.nrows || forcing.pet[t].ncols() != plan.ncols)
      fail(ErrorCode::ShapeMismatch, "forcing grid shape differs from plan");
  if (forcing.pet.size() != forcing.rainfall.size())
    fail(ErrorCode::MissingForcing, "rainfall/PET step counts differ");

  const double area = plan.cell_area();
  SimulationResult result;
  result.gauge_discharge_m3s.assign(gauges.size(), {});
  result.gauge_outflow_volume.assign(gauges.size(), {});
  for (auto& series : result.gauge_discharge_m3s) series.reserve(forcing.steps());
  for (auto& series : result.gauge_outflow_volume) series.reserve(forcing.steps());

  StateField state = h0;
  double storage0 = 0;
  for (int32_t cell : plan.topo_order)
    storage0 += (state[kHi][cell] + state[kHp][cell] + state[kHtr][cell] + state[kHtl][cell]) * area +
                state[kHr][cell];

  if (trajectory) {
    trajectory->states.clear();
    trajectory->states.reserve(forcing.steps() + 1);
    trajectory->states.push_back(state);
  }

  std::vector<double> inflow(n_cells, 0.0);
  for (size_t t = 0; t < forcing.steps(); ++t) {
    if (forcing.missing.size() > t && forcing.missing[t])
      fail(ErrorCode::MissingForcing, "forcing gap at step " + std::to_string(t));
    std::fill(inflow.begin(), inflow.end(), 0.0);
    for (int32_t cell : plan.topo_order) {
      const double p = forcing.rainfall[t][cell];
      const double e = forcing.pet[t][cell];
      if (p < 0 || e < 0)
        fail(ErrorCode::InvalidArgument, "negative forcing at step " + std::to_string(t));
      CellStep cs = step_cell(theta.at_cell(cell),
                              {state[kHi][cell], state[kHp][cell], state[kHtr][cell],
                               state[kHr][cell], state[kHtl][cell]},
                              p, e);
      state[kHi][cell] = cs.hi1;
      state[kHp][cell] = cs.hp1;
      state[kHtr][cell] = cs.htr2;
      state[kHtl][cell] = cs.htl2;

      // Linear routing reservoir over volume (local runoff + upstream inflow).
      const double stored = state[kHr][cell] + cs.runoff * area + inflow[cell];
      const double gain = 1.0 - std::exp(-1.0 / theta[kCr][cell]);
      const double out_volume = stored * gain;
      state[kHr][cell] = stored - out_volume;

      int32_t down = plan.downstream[cell];
      if (down != kNoDownstream)
        inflow[down] += out_volume;
      else
        result.ledger.total_outflow += out_volume;

      result.ledger.total_rainfall += p * area;
      result.ledger.total_evaporation += cs.actual_et * area;
      result.ledger.total_exchange += cs.exchange * area;

      for (size_t g = 0; g < gauges.size(); ++g) {
        if (gauges[g].outlet == cell) {
          result.gauge_outflow_volume[g].push_back(out_volume);
          result.gauge_discharge_m3s[g].push_back(out_volume * kVolumeToM3s);
        }
      }
    }
    if (trajectory) trajectory->states.push_back(state);
  }

  double storage1 = 0;
  for (int32_t cell : plan.topo_order)
    storage1 += (state[kHi][cell] + state[kHp][cell] + state[kHtr][cell] + state[kHtl][cell]) * area +
                state[kHr][cell];
  result.ledger.storage_change = storage1 - storage0;
  result.final_state = std::move(state);
  return result;
}

}  // namespace hydrocal
