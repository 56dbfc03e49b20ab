#include <algorithm>
#include <cmath>
#include <numeric>

#include "hydrocal/cost.hpp"

namespace hydrocal {

namespace {

double sabs(double x, double tau) { return std::sqrt(x * x + tau * tau); }

struct GradSink {
  std::vector<double>* lam_q = nullptr;   // dJ/d q(t), slice-local indices
  std::vector<double>* lam_qb = nullptr;  // dJ/d baseflow(t)
};

// Value of one signature on a (sliced) series, with optional gradient
// accumulation scaled by `w`. `bf` must be the separation of `q` whenever a
// baseflow-dependent signature is requested.
double sig_eval(SignatureId id, const CostConfig& cfg, const std::vector<double>& q,
                const std::vector<double>& rain, const BaseflowResult* bf,
                const EventWindow* window, bool smooth, double w, const GradSink& sink) {
  const int n = static_cast<int>(q.size());
  int t0 = 0, t1 = n - 1;
  if (window) {
    t0 = window->start;
    t1 = window->end;
  }
  auto sum_range = [&](const std::vector<double>& v) {
    double s = 0;
    for (int t = t0; t <= t1; ++t) s += v[t];
    return s;
  };

  switch (id) {
    case SignatureId::Crc:
    case SignatureId::Erc: {
      const double sum_p = sum_range(rain);
      if (sum_p <= 0)
        fail(window ? ErrorCode::ZeroEventRainfall : ErrorCode::ZeroRainfall,
             "runoff coefficient needs positive rainfall");
      if (sink.lam_q)
        for (int t = t0; t <= t1; ++t) (*sink.lam_q)[t] += w / sum_p;
      return sum_range(q) / sum_p;
    }
    case SignatureId::Crchf:
    case SignatureId::Erchf: {
      const double sum_p = sum_range(rain);
      if (sum_p <= 0)
        fail(window ? ErrorCode::ZeroEventRainfall : ErrorCode::ZeroRainfall,
             "runoff coefficient needs positive rainfall");
      double s = 0;
      for (int t = t0; t <= t1; ++t) s += q[t] - bf->baseflow[t];
      if (sink.lam_q)
        for (int t = t0; t <= t1; ++t) {
          (*sink.lam_q)[t] += w / sum_p;
          (*sink.lam_qb)[t] -= w / sum_p;
        }
      return s / sum_p;
    }
    case SignatureId::Crclf:
    case SignatureId::Erclf: {
      const double sum_p = sum_range(rain);
      if (sum_p <= 0)
        fail(window ? ErrorCode::ZeroEventRainfall : ErrorCode::ZeroRainfall,
             "runoff coefficient needs positive rainfall");
      if (sink.lam_qb)
        for (int t = t0; t <= t1; ++t) (*sink.lam_qb)[t] += w / sum_p;
      return sum_range(bf->baseflow) / sum_p;
    }
    case SignatureId::Crch2r:
    case SignatureId::Erch2r: {
      const double sum_q = sum_range(q);
      if (sum_q <= 0) return 0.0;  // flat zero-discharge region
      double sum_qq = 0;
      for (int t = t0; t <= t1; ++t) sum_qq += q[t] - bf->baseflow[t];
      if (sink.lam_q)
        for (int t = t0; t <= t1; ++t) {
          (*sink.lam_q)[t] += w * (1.0 / sum_q - sum_qq / (sum_q * sum_q));
          (*sink.lam_qb)[t] -= w / sum_q;
        }
      return sum_qq / sum_q;
    }
    case SignatureId::Cfp2:
    case SignatureId::Cfp10:
    case SignatureId::Cfp50:
    case SignatureId::Cfp90: {
      double p = id == SignatureId::Cfp2 ? 0.02
                 : id == SignatureId::Cfp10 ? 0.10
                 : id == SignatureId::Cfp50 ? 0.50 : 0.90;
      if (cfg.quantile_convention == QuantileConvention::Exceedance) p = 1.0 - p;
      std::vector<int> order(q.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return q[a] < q[b]; });
      const double pos = p * (q.size() - 1);
      const size_t lo = static_cast<size_t>(pos);
      const size_t hi = std::min(lo + 1, q.size() - 1);
      const double frac = pos - lo;
      if (sink.lam_q) {
        (*sink.lam_q)[order[lo]] += w * (1 - frac);
        (*sink.lam_q)[order[hi]] += w * frac;
      }
      return q[order[lo]] * (1 - frac) + q[order[hi]] * frac;
    }
    case SignatureId::Eff: {
      double s = 0;
      for (int t = t0; t <= t1; ++t) s += q[t] - bf->baseflow[t];
      if (sink.lam_q)
        for (int t = t0; t <= t1; ++t) {
          (*sink.lam_q)[t] += w;
          (*sink.lam_qb)[t] -= w;
        }
      return s;
    }
    case SignatureId::Ebf: {
      if (sink.lam_qb)
        for (int t = t0; t <= t1; ++t) (*sink.lam_qb)[t] += w;
      return sum_range(bf->baseflow);
    }
    case SignatureId::Elt: {
      if (smooth)
        fail(ErrorCode::NonDifferentiableCost, "Elt is argmax-based and not differentiable");
      int aq = t0, ap = t0;
      for (int t = t0; t <= t1; ++t) {
        if (q[t] > q[aq]) aq = t;
        if (rain[t] > rain[ap]) ap = t;
      }
      return static_cast<double>(aq - ap);
    }
    case SignatureId::Epf: {
      if (!smooth) {
        double m = q[t0];
        for (int t = t0; t <= t1; ++t) m = std::max(m, q[t]);
        return m;
      }
      // Softmax-weighted mean; sharp enough to track the true peak while
      // keeping a usable gradient.
      const double k = cfg.softmax_sharpness;
      double m = q[t0];
      for (int t = t0; t <= t1; ++t) m = std::max(m, q[t]);
      double z = 0, s = 0;
      for (int t = t0; t <= t1; ++t) {
        const double e = std::exp(k * (q[t] - m));
        z += e;
        s += e * q[t];
      }
      const double value = s / z;
      if (sink.lam_q)
        for (int t = t0; t <= t1; ++t) {
          const double wt = std::exp(k * (q[t] - m)) / z;
          (*sink.lam_q)[t] += w * wt * (1.0 + k * (q[t] - value));
        }
      return value;
    }
  }
  fail(ErrorCode::InvalidArgument, "unhandled signature");
}

bool needs_baseflow(const CostConfig& cfg) {
  auto scan = [](const std::vector<SignatureTerm>& terms) {
    for (const auto& t : terms)
      switch (t.id) {
        case SignatureId::Crchf: case SignatureId::Crclf: case SignatureId::Crch2r:
        case SignatureId::Erchf: case SignatureId::Erclf: case SignatureId::Erch2r:
        case SignatureId::Eff: case SignatureId::Ebf:
          return true;
        default: break;
      }
    return false;
  };
  return scan(cfg.continuous_terms) || scan(cfg.flood_terms);
}

bool event_in_season(const CostConfig& cfg, size_t event_index) {
  if (!cfg.season) return true;
  if (cfg.event_months.size() <= event_index)
    fail(ErrorCode::InvalidArgument, "season filter requires event peak months");
  const int month = cfg.event_months[event_index];
  const auto [lo, hi] = *cfg.season;
  return lo <= hi ? (month >= lo && month <= hi) : (month >= lo || month <= hi);
}

struct Assembled {
  CostBreakdown breakdown;
  std::vector<double> grad;  // slice-local, empty when not requested
};

Assembled assemble(const CostConfig& cfg, const std::vector<double>& sim_full,
                   const std::vector<double>& obs_full, const std::vector<double>& rain_full,
                   bool smooth, bool want_grad, double jreg) {
  if (sim_full.size() != obs_full.size() || sim_full.size() != rain_full.size())
    fail(ErrorCode::LengthMismatch, "sim/obs/rainfall lengths differ");
  const int w0 = cfg.warmup_steps;
  if (w0 < 0 || static_cast<size_t>(w0) + 2 > sim_full.size())
    fail(ErrorCode::InvalidArgument, "warm-up leaves too short an evaluation window");

  const std::vector<double> sim(sim_full.begin() + w0, sim_full.end());
  const std::vector<double> obs(obs_full.begin() + w0, obs_full.end());
  const std::vector<double> rain(rain_full.begin() + w0, rain_full.end());
  const int n = static_cast<int>(sim.size());

  std::vector<EventWindow> events = cfg.events;
  for (auto& e : events) {
    if (e.start < w0 || e.end >= static_cast<int>(sim_full.size()) || e.start > e.end)
      fail(ErrorCode::WindowOutOfRange, "event window outside the evaluation period");
    e.start -= w0;
    e.peak -= w0;
    e.end -= w0;
  }

  std::vector<double> lam_q, lam_qb;
  GradSink sink;
  if (want_grad) {
    lam_q.assign(n, 0.0);
    lam_qb.assign(n, 0.0);
    sink.lam_q = &lam_q;
    sink.lam_qb = &lam_qb;
  }

  const bool use_bf = needs_baseflow(cfg);
  BaseflowTape sim_tape;
  BaseflowResult sim_bf, obs_bf;
  if (use_bf) {
    sim_bf = baseflow_separate_tape(sim, sim_tape);
    obs_bf = baseflow_separate(obs);
  }

  CostBreakdown out;
  out.jreg = jreg;

  // Dominant metric.
  if (cfg.dominant == CostConfig::Dominant::OneMinusNSE) {
    const double obs_mean = std::accumulate(obs.begin(), obs.end(), 0.0) / n;
    double num = 0, den = 0;
    for (int t = 0; t < n; ++t) {
      num += (sim[t] - obs[t]) * (sim[t] - obs[t]);
      den += (obs[t] - obs_mean) * (obs[t] - obs_mean);
    }
    if (den == 0) fail(ErrorCode::ConstantObs, "observed series has zero variance");
    out.jd = num / den;
    if (want_grad)
      for (int t = 0; t < n; ++t) lam_q[t] += cfg.delta_d * 2.0 * (sim[t] - obs[t]) / den;
  } else {
    const double mu_s = std::accumulate(sim.begin(), sim.end(), 0.0) / n;
    const double mu_o = std::accumulate(obs.begin(), obs.end(), 0.0) / n;
    double var_s = 0, var_o = 0, cov = 0;
    for (int t = 0; t < n; ++t) {
      var_s += (sim[t] - mu_s) * (sim[t] - mu_s);
      var_o += (obs[t] - mu_o) * (obs[t] - mu_o);
      cov += (sim[t] - mu_s) * (obs[t] - mu_o);
    }
    var_s /= n; var_o /= n; cov /= n;
    if (var_o == 0 || mu_o == 0)
      fail(ErrorCode::DegenerateObs, "constant or zero-mean observations");
    const double sg_s = std::sqrt(var_s), sg_o = std::sqrt(var_o);
    const double r = sg_s > 0 ? cov / (sg_s * sg_o) : 0.0;
    const double sr = sg_s / sg_o, sm = mu_s / mu_o;
    const double term = cfg.kge_alpha * (r - 1) * (r - 1) + cfg.kge_beta * (sr - 1) * (sr - 1) +
                        cfg.kge_gamma * (sm - 1) * (sm - 1);
    const double root = std::sqrt(term);
    out.jd = root;
    if (want_grad && root > 1e-14 && sg_s > 0) {
      for (int t = 0; t < n; ++t) {
        const double dmu = 1.0 / n;
        const double dsg = (sim[t] - mu_s) / (n * sg_s);
        const double dcov = (obs[t] - mu_o) / n;
        const double dr = dcov / (sg_s * sg_o) - r * dsg / sg_s;
        const double dterm = 2 * cfg.kge_alpha * (r - 1) * dr +
                             2 * cfg.kge_beta * (sr - 1) * dsg / sg_o +
                             2 * cfg.kge_gamma * (sm - 1) * dmu / mu_o;
        lam_q[t] += cfg.delta_d * dterm / (2 * root);
      }
    }
  }

  // Continuous signature terms.
  for (const auto& term : cfg.continuous_terms) {
    const double so = sig_eval(term.id, cfg, obs, rain, use_bf ? &obs_bf : nullptr, nullptr,
                               false, 0.0, {});
    if (so == 0)
      fail(ErrorCode::ZeroObservedSignature,
           std::string("observed ") + to_string(term.id) + " is zero");
    const double ss = sig_eval(term.id, cfg, sim, rain, use_bf ? &sim_bf : nullptr, nullptr,
                               smooth, 0.0, {});
    const double x = ss / so - 1.0;
    const double c = smooth ? sabs(x, cfg.tau) : std::abs(x);
    out.jc += term.weight * c;
    if (want_grad) {
      const double dc = (x / sabs(x, cfg.tau)) / so;
      sig_eval(term.id, cfg, sim, rain, use_bf ? &sim_bf : nullptr, nullptr, smooth,
               cfg.delta_c * term.weight * dc, sink);
    }
  }

  // Flood-event signature terms, averaged over qualifying events.
  for (const auto& term : cfg.flood_terms) {
    std::vector<size_t> selected;
    std::vector<double> so_values;
    for (size_t e = 0; e < events.size(); ++e) {
      if (!event_in_season(cfg, e)) continue;
      const double so = sig_eval(term.id, cfg, obs, rain, use_bf ? &obs_bf : nullptr, &events[e],
                                 false, 0.0, {});
      if (so == 0) continue;  // dropped: undefined ratio
      selected.push_back(e);
      so_values.push_back(so);
    }
    if (selected.empty()) continue;
    const double inv_n = 1.0 / selected.size();
    for (size_t k = 0; k < selected.size(); ++k) {
      const EventWindow& window = events[selected[k]];
      const double ss = sig_eval(term.id, cfg, sim, rain, use_bf ? &sim_bf : nullptr, &window,
                                 smooth, 0.0, {});
      const double x = ss / so_values[k] - 1.0;
      out.jf += term.weight * inv_n * (smooth ? sabs(x, cfg.tau) : std::abs(x));
      if (want_grad) {
        const double dc = (x / sabs(x, cfg.tau)) / so_values[k];
        sig_eval(term.id, cfg, sim, rain, use_bf ? &sim_bf : nullptr, &window, smooth,
                 cfg.delta_f * term.weight * inv_n * dc, sink);
      }
    }
  }

  out.total = cfg.delta_d * out.jd + cfg.delta_c * out.jc + cfg.delta_f * out.jf +
              cfg.alpha_reg * out.jreg;

  Assembled result;
  result.breakdown = out;
  if (want_grad) {
    if (use_bf) baseflow_adjoint(sim_tape, lam_qb, lam_q);
    result.grad.assign(sim_full.size(), 0.0);
    for (int t = 0; t < n; ++t) result.grad[w0 + t] = lam_q[t];
  }
  return result;
}

}  // namespace

CostBreakdown evaluate_cost(const CostConfig& config, const std::vector<double>& sim,
                            const std::vector<double>& obs, const std::vector<double>& rainfall,
                            bool smooth, double jreg) {
  return assemble(config, sim, obs, rainfall, smooth, false, jreg).breakdown;
}

CostEval evaluate_cost_with_gradient(const CostConfig& config, const std::vector<double>& sim,
                                     const std::vector<double>& obs,
                                     const std::vector<double>& rainfall) {
  Assembled a = assemble(config, sim, obs, rainfall, true, true, 0.0);
  return {a.breakdown, std::move(a.grad)};
}

double tikhonov_term(const ParameterField& theta, const ParameterField& background,
                     const std::array<double, kNumParams>& sigma, const Grid<uint8_t>& active) {
  double sum = 0;
  for (int j = 0; j < kNumParams; ++j)
    for (size_t i = 0; i < active.size(); ++i) {
      if (!active[i]) continue;
      const double d = (theta[j][i] - background[j][i]) / sigma[j];
      sum += d * d;
    }
  return sum;
}

void tikhonov_gradient(const ParameterField& theta, const ParameterField& background,
                       const std::array<double, kNumParams>& sigma, const Grid<uint8_t>& active,
                       double scale, ParameterField& grad) {
  for (int j = 0; j < kNumParams; ++j)
    for (size_t i = 0; i < active.size(); ++i) {
      if (!active[i]) continue;
      grad[j][i] += scale * 2.0 * (theta[j][i] - background[j][i]) / (sigma[j] * sigma[j]);
    }
}

}  // namespace hydrocal
