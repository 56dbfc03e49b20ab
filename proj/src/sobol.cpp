#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hydrocal/adjoint.hpp"
#include "hydrocal/sobol.hpp"

namespace hydrocal {

namespace {

// Joe–Kuo primitive polynomials and initial direction numbers, dims 2..16.
struct JoeKuo {
  int s;
  uint32_t a;
  uint32_t m[6];
};
constexpr JoeKuo kJoeKuo[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
};

}  // namespace

SobolSequence::SobolSequence(int dimension, uint64_t scramble_seed) : dim_(dimension) {
  if (dimension < 1 || dimension > 16)
    fail(ErrorCode::InvalidArgument, "Sobol sequence supports 1..16 dimensions");
  directions_.resize(dim_);
  // First dimension: van der Corput, v_k = 2^(31-k).
  for (int k = 0; k < 32; ++k) directions_[0][k] = 1u << (31 - k);
  for (int d = 1; d < dim_; ++d) {
    const JoeKuo& jk = kJoeKuo[d - 1];
    auto& v = directions_[d];
    for (int k = 0; k < jk.s; ++k) v[k] = jk.m[k] << (31 - k);
    for (int k = jk.s; k < 32; ++k) {
      v[k] = v[k - jk.s] ^ (v[k - jk.s] >> jk.s);
      for (int l = 1; l < jk.s; ++l)
        if ((jk.a >> (jk.s - 1 - l)) & 1u) v[k] ^= v[k - l];
    }
  }
  shift_.assign(dim_, 0);
  std::mt19937_64 rng(scramble_seed);
  for (int d = 0; d < dim_; ++d)
    shift_[d] = static_cast<uint32_t>(rng() & 0xffffffffu);
}

std::vector<double> SobolSequence::point(uint32_t i) const {
  // Gray-code construction evaluated directly: XOR v_k for set bits of gray(i).
  std::vector<double> p(dim_);
  const uint32_t gray = i ^ (i >> 1);
  for (int d = 0; d < dim_; ++d) {
    uint32_t x = shift_[d];
    for (int k = 0; k < 32; ++k)
      if ((gray >> k) & 1u) x ^= directions_[d][k];
    p[d] = (static_cast<double>(x) + 0.5) / 4294967296.0;
  }
  return p;
}

SampleDesign saltelli_sample(int n, const std::vector<double>& lower,
                             const std::vector<double>& upper, uint64_t seed) {
  if (n < 2 || (n & (n - 1)) != 0) fail(ErrorCode::BadN, "base size N must be a power of two");
  if (lower.size() != upper.size() || lower.empty())
    fail(ErrorCode::InvalidArgument, "bounds size mismatch");
  const int k = static_cast<int>(lower.size());
  for (int j = 0; j < k; ++j)
    if (!(lower[j] < upper[j])) fail(ErrorCode::InvalidArgument, "empty bound interval");

  SobolSequence seq(2 * k, seed);
  SampleDesign design;
  design.base_size = n;
  design.dimension = k;
  design.a.resize(n, std::vector<double>(k));
  design.b.resize(n, std::vector<double>(k));
  for (int i = 0; i < n; ++i) {
    std::vector<double> p = seq.point(static_cast<uint32_t>(i));
    for (int j = 0; j < k; ++j) {
      design.a[i][j] = lower[j] + p[j] * (upper[j] - lower[j]);
      design.b[i][j] = lower[j] + p[k + j] * (upper[j] - lower[j]);
    }
  }
  design.ab.resize(k, design.a);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) design.ab[j][i][j] = design.b[i][j];
  return design;
}

SobolIndices sobol_indices(const std::vector<double>& y_a, const std::vector<double>& y_b,
                           const std::vector<std::vector<double>>& y_ab) {
  const size_t n = y_a.size();
  if (y_b.size() != n) fail(ErrorCode::LengthMismatch, "yA/yB lengths differ");
  for (const auto& col : y_ab)
    if (col.size() != n) fail(ErrorCode::LengthMismatch, "yAB length differs");
  for (double v : y_a)
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "non-finite evaluation");

  double mean = 0;
  for (size_t i = 0; i < n; ++i) mean += y_a[i] + y_b[i];
  mean /= 2.0 * n;
  double variance = 0;
  for (size_t i = 0; i < n; ++i)
    variance += (y_a[i] - mean) * (y_a[i] - mean) + (y_b[i] - mean) * (y_b[i] - mean);
  variance /= 2.0 * n;
  if (variance <= 0) fail(ErrorCode::ZeroVariance, "constant model output");

  SobolIndices out;
  out.variance = variance;
  out.evaluations = n * (y_ab.size() + 2);
  for (const auto& col : y_ab) {
    double first = 0, total = 0;
    for (size_t i = 0; i < n; ++i) {
      first += y_b[i] * (col[i] - y_a[i]);
      total += (y_a[i] - col[i]) * (y_a[i] - col[i]);
    }
    out.first_order.push_back(first / n / variance);
    out.total_order.push_back(total / (2.0 * n) / variance);
  }
  return out;
}

std::vector<GssaRow> signature_gssa(const DrainagePlan& plan, const Catchment& gauge,
                                    const StateField& h0, const Forcing& forcing,
                                    const std::vector<EventWindow>& events,
                                    const ParamBounds& bounds, int n, uint64_t seed,
                                    const std::vector<SignatureId>& signatures) {
  bool wants_events = false;
  for (SignatureId id : signatures)
    if (!is_continuous_signature(id)) wants_events = true;
  if (wants_events && events.empty())
    fail(ErrorCode::NoEvents, "event-signature GSSA requires at least one segmented event");

  SampleDesign design =
      saltelli_sample(n, {bounds.lower.begin(), bounds.lower.end()},
                      {bounds.upper.begin(), bounds.upper.end()}, seed);
  const std::vector<double> rain = gauge_rainfall_mmh(plan, forcing, gauge);

  // Windows without rainfall make the runoff-coefficient family undefined;
  // the rainfall is shared by every run, so filter the windows once.
  std::vector<EventWindow> usable;
  for (const EventWindow& w : events) {
    double sum = 0;
    for (int t = w.start; t <= w.end && t < static_cast<int>(rain.size()); ++t) sum += rain[t];
    if (sum > 0) usable.push_back(w);
  }
  if (wants_events && usable.empty())
    fail(ErrorCode::NoEvents, "no event window contains rainfall");

  auto evaluate_row = [&](const std::vector<double>& row) {
    std::array<double, kNumParams> uniform;
    std::copy(row.begin(), row.end(), uniform.begin());
    ParameterField theta(plan.nrows, plan.ncols, uniform);
    std::vector<double> sim = simulate_gauge_mmh(plan, theta, h0, forcing, gauge);
    std::vector<double> values(signatures.size(), 0.0);
    for (size_t s = 0; s < signatures.size(); ++s) {
      const SignatureId id = signatures[s];
      if (is_continuous_signature(id)) {
        values[s] = signature_value(id, rain, sim, std::nullopt);
      } else {
        double sum = 0;
        for (const EventWindow& w : usable) sum += signature_value(id, rain, sim, w);
        values[s] = sum / usable.size();
      }
    }
    return values;
  };

  const size_t ns = signatures.size();
  std::vector<std::vector<double>> y_a(ns), y_b(ns);
  std::vector<std::vector<std::vector<double>>> y_ab(ns);
  for (size_t s = 0; s < ns; ++s) {
    y_a[s].resize(n);
    y_b[s].resize(n);
    y_ab[s].assign(kNumParams, std::vector<double>(n));
  }
  for (int i = 0; i < n; ++i) {
    std::vector<double> va = evaluate_row(design.a[i]);
    std::vector<double> vb = evaluate_row(design.b[i]);
    for (size_t s = 0; s < ns; ++s) {
      y_a[s][i] = va[s];
      y_b[s][i] = vb[s];
    }
    for (int j = 0; j < kNumParams; ++j) {
      std::vector<double> vj = evaluate_row(design.ab[j][i]);
      for (size_t s = 0; s < ns; ++s) y_ab[s][j][i] = vj[s];
    }
  }

  std::vector<GssaRow> table;
  for (size_t s = 0; s < ns; ++s) {
    GssaRow row;
    row.signature = signatures[s];
    try {
      row.indices = sobol_indices(y_a[s], y_b[s], y_ab[s]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroVariance) throw;
      row.defined = false;
      row.indices.first_order.assign(kNumParams, 0.0);
      row.indices.total_order.assign(kNumParams, 0.0);
    }
    table.push_back(std::move(row));
  }
  return table;
}

}  // namespace hydrocal
