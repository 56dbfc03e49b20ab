#include <algorithm>
#include <cmath>
#include <numeric>

#include "hydrocal/metrics.hpp"

namespace hydrocal {

namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

void check_pair(const std::vector<double>& sim, const std::vector<double>& obs) {
  if (sim.size() != obs.size())
    fail(ErrorCode::LengthMismatch, "sim length " + std::to_string(sim.size()) +
                                        " != obs length " + std::to_string(obs.size()));
  if (obs.size() < 2) fail(ErrorCode::LengthMismatch, "need at least 2 values");
}

}  // namespace

double nse(const std::vector<double>& sim, const std::vector<double>& obs) {
  check_pair(sim, obs);
  const double obs_mean = mean(obs);
  double num = 0, den = 0;
  for (size_t t = 0; t < obs.size(); ++t) {
    num += (sim[t] - obs[t]) * (sim[t] - obs[t]);
    den += (obs[t] - obs_mean) * (obs[t] - obs_mean);
  }
  if (den == 0) fail(ErrorCode::ConstantObs, "observed series has zero variance");
  return 1.0 - num / den;
}

double kge(const std::vector<double>& sim, const std::vector<double>& obs, double alpha,
           double beta, double gamma) {
  check_pair(sim, obs);
  const size_t n = obs.size();
  const double mu_s = mean(sim), mu_o = mean(obs);
  double var_s = 0, var_o = 0, cov = 0;
  for (size_t t = 0; t < n; ++t) {
    var_s += (sim[t] - mu_s) * (sim[t] - mu_s);
    var_o += (obs[t] - mu_o) * (obs[t] - mu_o);
    cov += (sim[t] - mu_s) * (obs[t] - mu_o);
  }
  var_s /= n;
  var_o /= n;
  cov /= n;
  if (var_o == 0 || mu_o == 0) fail(ErrorCode::DegenerateObs, "constant or zero-mean observations");
  const double sigma_s = std::sqrt(var_s), sigma_o = std::sqrt(var_o);
  const double r = sigma_s > 0 ? cov / (sigma_s * sigma_o) : 0.0;
  const double term = alpha * (r - 1) * (r - 1) +
                      beta * (sigma_s / sigma_o - 1) * (sigma_s / sigma_o - 1) +
                      gamma * (mu_s / mu_o - 1) * (mu_s / mu_o - 1);
  return 1.0 - std::sqrt(term);
}

namespace {

// One filter pass over s (already in the desired direction). Quickflow is
// clipped into [0, s] and the clipped value feeds the recursion.
void filter_pass(const std::vector<double>& s, double a, std::vector<double>& baseflow,
                 std::vector<int8_t>* mask) {
  const size_t n = s.size();
  baseflow.resize(n);
  if (mask) mask->assign(n, 1);
  double f_prev = 0.0;
  baseflow[0] = s[0];
  if (mask) (*mask)[0] = 0;
  const double c = 0.5 * (1.0 + a);
  for (size_t k = 1; k < n; ++k) {
    double f = a * f_prev + c * (s[k] - s[k - 1]);
    int8_t m = 1;
    if (f < 0) {
      f = 0;
      m = 0;
    } else if (f > s[k]) {
      f = s[k];
      m = 2;
    }
    baseflow[k] = s[k] - f;
    if (mask) (*mask)[k] = m;
    f_prev = f;
  }
}

}  // namespace

BaseflowResult baseflow_separate_tape(const std::vector<double>& q, BaseflowTape& tape, double a) {
  if (q.size() < 3) fail(ErrorCode::LengthMismatch, "need at least 3 values");
  for (double v : q)
    if (v < 0) fail(ErrorCode::NegativeFlow, "negative discharge in baseflow separation");
  tape.a = a;
  tape.n = q.size();

  std::vector<double> b1, b2, b3;
  filter_pass(q, a, b1, &tape.masks[0]);
  std::reverse(b1.begin(), b1.end());
  filter_pass(b1, a, b2, &tape.masks[1]);
  std::reverse(b2.begin(), b2.end());
  filter_pass(b2, a, b3, &tape.masks[2]);

  BaseflowResult result;
  result.baseflow = std::move(b3);
  result.quickflow.resize(q.size());
  for (size_t k = 0; k < q.size(); ++k) result.quickflow[k] = q[k] - result.baseflow[k];
  return result;
}

BaseflowResult baseflow_separate(const std::vector<double>& q, double a) {
  BaseflowTape tape;
  return baseflow_separate_tape(q, tape, a);
}

namespace {

// Adjoint of filter_pass: lambda_b (dJ/d baseflow) -> lambda_s accumulation.
void filter_pass_adjoint(const std::vector<int8_t>& mask, double a,
                         const std::vector<double>& lambda_b, std::vector<double>& lambda_s) {
  const size_t n = mask.size();
  lambda_s.assign(n, 0.0);
  const double c = 0.5 * (1.0 + a);
  std::vector<double> lambda_f(n, 0.0);
  for (size_t k = n; k-- > 1;) {
    lambda_s[k] += lambda_b[k];
    lambda_f[k] -= lambda_b[k];
    if (mask[k] == 1) {
      lambda_f[k - 1] += a * lambda_f[k];
      lambda_s[k] += c * lambda_f[k];
      lambda_s[k - 1] -= c * lambda_f[k];
    } else if (mask[k] == 2) {
      lambda_s[k] += lambda_f[k];
    }
  }
  lambda_s[0] += lambda_b[0];
}

}  // namespace

void baseflow_adjoint(const BaseflowTape& tape, const std::vector<double>& lambda_baseflow,
                      std::vector<double>& lambda_q) {
  const size_t n = tape.n;
  std::vector<double> lam3 = lambda_baseflow;
  std::vector<double> lam2, lam1, lam0;
  filter_pass_adjoint(tape.masks[2], tape.a, lam3, lam2);
  std::reverse(lam2.begin(), lam2.end());
  filter_pass_adjoint(tape.masks[1], tape.a, lam2, lam1);
  std::reverse(lam1.begin(), lam1.end());
  filter_pass_adjoint(tape.masks[0], tape.a, lam1, lam0);
  if (lambda_q.size() != n) lambda_q.assign(n, 0.0);
  for (size_t k = 0; k < n; ++k) lambda_q[k] += lam0[k];
}

double quantile(const std::vector<double>& values, double p) {
  if (values.empty()) fail(ErrorCode::EmptySeries, "quantile of empty series");
  if (p < 0 || p > 1) fail(ErrorCode::InvalidArgument, "quantile fraction outside [0,1]");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double pos = p * (sorted.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - lo;
  return sorted[lo] * (1 - frac) + sorted[hi] * frac;
}

double flow_percentile(const std::vector<double>& q, double p, QuantileConvention convention) {
  if (p <= 0 || p >= 1) fail(ErrorCode::InvalidArgument, "percentile fraction outside (0,1)");
  return quantile(q, convention == QuantileConvention::Exceedance ? 1.0 - p : p);
}

const char* to_string(SignatureId id) {
  static constexpr const char* names[kNumSignatures] = {
      "Crc", "Crchf", "Crclf", "Crch2r", "Cfp2", "Cfp10", "Cfp50", "Cfp90",
      "Eff", "Ebf", "Erc", "Erchf", "Erclf", "Erch2r", "Elt", "Epf"};
  return names[static_cast<int>(id)];
}

SignatureId signature_from_string(const std::string& name) {
  for (int i = 0; i < kNumSignatures; ++i)
    if (name == to_string(static_cast<SignatureId>(i))) return static_cast<SignatureId>(i);
  fail(ErrorCode::ParseError, "unknown signature '" + name + "'");
}

bool is_continuous_signature(SignatureId id) { return static_cast<int>(id) < 8; }

bool is_smooth_signature(SignatureId id) { return id != SignatureId::Elt; }

const char* signature_unit(SignatureId id) {
  switch (id) {
    case SignatureId::Crc:
    case SignatureId::Crchf:
    case SignatureId::Crclf:
    case SignatureId::Crch2r:
    case SignatureId::Erc:
    case SignatureId::Erchf:
    case SignatureId::Erclf:
    case SignatureId::Erch2r:
      return "-";
    case SignatureId::Elt:
      return "h";
    default:
      return "mm";
  }
}

ContinuousSignatures continuous_signatures(const std::vector<double>& rainfall,
                                           const std::vector<double>& discharge,
                                           QuantileConvention convention) {
  if (rainfall.size() != discharge.size())
    fail(ErrorCode::LengthMismatch, "rainfall/discharge lengths differ");
  const double sum_p = std::accumulate(rainfall.begin(), rainfall.end(), 0.0);
  if (sum_p <= 0) fail(ErrorCode::ZeroRainfall, "runoff coefficients need positive rainfall");
  BaseflowResult separated = baseflow_separate(discharge);
  const double sum_q = std::accumulate(discharge.begin(), discharge.end(), 0.0);
  const double sum_qq = std::accumulate(separated.quickflow.begin(), separated.quickflow.end(), 0.0);
  const double sum_qb = std::accumulate(separated.baseflow.begin(), separated.baseflow.end(), 0.0);

  ContinuousSignatures sig;
  sig.values[0] = {SignatureId::Crc, sum_q / sum_p, true};
  sig.values[1] = {SignatureId::Crchf, sum_qq / sum_p, true};
  sig.values[2] = {SignatureId::Crclf, sum_qb / sum_p, true};
  sig.values[3] = {SignatureId::Crch2r, sum_q > 0 ? sum_qq / sum_q : 0.0, sum_q > 0};
  sig.values[4] = {SignatureId::Cfp2, flow_percentile(discharge, 0.02, convention), true};
  sig.values[5] = {SignatureId::Cfp10, flow_percentile(discharge, 0.10, convention), true};
  sig.values[6] = {SignatureId::Cfp50, flow_percentile(discharge, 0.50, convention), true};
  sig.values[7] = {SignatureId::Cfp90, flow_percentile(discharge, 0.90, convention), true};
  return sig;
}

EventSignatures event_signatures(const std::vector<double>& rainfall,
                                 const std::vector<double>& discharge,
                                 const EventWindow& window) {
  if (rainfall.size() != discharge.size())
    fail(ErrorCode::LengthMismatch, "rainfall/discharge lengths differ");
  const int n = static_cast<int>(discharge.size());
  if (window.start < 0 || window.end >= n || window.start > window.end)
    fail(ErrorCode::WindowOutOfRange, "event window outside series");

  // Baseflow is separated on the full series, then restricted to the window.
  BaseflowResult separated = baseflow_separate(discharge);

  double sum_p = 0, sum_q = 0, sum_qq = 0, sum_qb = 0, peak_q = 0;
  int argmax_q = window.start, argmax_p = window.start;
  for (int t = window.start; t <= window.end; ++t) {
    sum_p += rainfall[t];
    sum_q += discharge[t];
    sum_qq += separated.quickflow[t];
    sum_qb += separated.baseflow[t];
    if (discharge[t] > discharge[argmax_q]) argmax_q = t;
    if (rainfall[t] > rainfall[argmax_p]) argmax_p = t;
  }
  peak_q = discharge[argmax_q];
  if (sum_p <= 0)
    fail(ErrorCode::ZeroEventRainfall, "event runoff coefficients need positive rainfall");

  EventSignatures sig;
  sig.values[0] = {SignatureId::Eff, sum_qq, true};
  sig.values[1] = {SignatureId::Ebf, sum_qb, true};
  sig.values[2] = {SignatureId::Erc, sum_q / sum_p, true};
  sig.values[3] = {SignatureId::Erchf, sum_qq / sum_p, true};
  sig.values[4] = {SignatureId::Erclf, sum_qb / sum_p, true};
  sig.values[5] = {SignatureId::Erch2r, sum_q > 0 ? sum_qq / sum_q : 0.0, sum_q > 0};
  sig.values[6] = {SignatureId::Elt, static_cast<double>(argmax_q - argmax_p), true};
  sig.values[7] = {SignatureId::Epf, peak_q, true};
  return sig;
}

double signature_value(SignatureId id, const std::vector<double>& rainfall,
                       const std::vector<double>& discharge,
                       const std::optional<EventWindow>& window, QuantileConvention convention) {
  if (is_continuous_signature(id)) {
    return continuous_signatures(rainfall, discharge, convention)[id].value;
  }
  if (!window) fail(ErrorCode::WindowOutOfRange, "event signature requires an event window");
  return event_signatures(rainfall, discharge, *window)[id].value;
}

}  // namespace hydrocal
