#include <algorithm>
#include <cmath>
#include <limits>

#include "hydrocal/segmentation.hpp"

namespace hydrocal {

std::vector<int> detect_peaks(const std::vector<double>& q, double mph, int mpd) {
  const int n = static_cast<int>(q.size());
  if (n < 3) return {};
  std::vector<int> candidates;
  for (int i = 1; i + 1 < n; ++i)
    if (q[i] > q[i - 1] && q[i] > q[i + 1] && q[i] > mph) candidates.push_back(i);

  // Larger peak wins inside the exclusion distance; ties keep the earlier one.
  std::vector<int> order = candidates;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return q[a] != q[b] ? q[a] > q[b] : a < b; });
  std::vector<int> kept;
  for (int idx : order) {
    bool blocked = false;
    for (int k : kept)
      if (std::abs(k - idx) < mpd) {
        blocked = true;
        break;
      }
    if (!blocked) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

namespace {

std::vector<double> rainfall_gradient(const std::vector<double>& p) {
  const size_t n = p.size();
  std::vector<double> grad(n, 0.0);
  if (n < 2) return grad;
  grad[0] = p[1] - p[0];
  grad[n - 1] = p[n - 1] - p[n - 2];
  for (size_t k = 1; k + 1 < n; ++k) grad[k] = 0.5 * (p[k + 1] - p[k - 1]);
  return grad;
}

// L2 norm of the 24 hourly rainfall values starting 1 h before t, clipped to
// the series bounds.
double rainfall_energy(const std::vector<double>& p, int t) {
  const int n = static_cast<int>(p.size());
  double sum_sq = 0;
  for (int k = std::max(0, t - 1); k <= std::min(n - 1, t + 22); ++k) sum_sq += p[k] * p[k];
  return std::sqrt(sum_sq);
}

}  // namespace

EventStart event_start(const std::vector<double>& rainfall, int t_peak,
                       const SegmentationOptions& options) {
  const int h = options.history_hours;
  if (t_peak < h)
    fail(ErrorCode::InsufficientHistory,
         "peak at step " + std::to_string(t_peak) + " has less than " + std::to_string(h) +
             " h of rainfall history");

  std::vector<double> grad = rainfall_gradient(rainfall);
  std::vector<double> window_grad(grad.begin() + (t_peak - h), grad.begin() + t_peak + 1);
  const double grad_threshold = quantile(window_grad, options.gradient_quantile);

  double max_energy = 0;
  for (int t = t_peak - h; t <= t_peak; ++t)
    max_energy = std::max(max_energy, rainfall_energy(rainfall, t));

  // Candidates are gradient peaks; a flat-topped gradient (rectangular burst)
  // resolves to its trailing edge, which is the burst onset hour under the
  // central-difference convention.
  for (int t = t_peak - h + 1; t < t_peak; ++t) {
    if (grad[t] <= grad_threshold) continue;
    const double before = t > 0 ? grad[t - 1] : -std::numeric_limits<double>::infinity();
    const double after =
        t + 1 < static_cast<int>(grad.size()) ? grad[t + 1] : -std::numeric_limits<double>::infinity();
    if (!(grad[t] >= before && grad[t] > after)) continue;
    if (rainfall_energy(rainfall, t) > options.energy_fraction * max_energy)
      return {t, false};
  }
  return {t_peak - h, true};
}

std::vector<FloodEvent> segment(const std::vector<double>& rainfall,
                                const std::vector<double>& discharge,
                                const SegmentationOptions& options) {
  if (rainfall.size() != discharge.size())
    fail(ErrorCode::LengthMismatch, "rainfall/discharge lengths differ");
  const int n = static_cast<int>(discharge.size());
  if (n < 3) return {};

  const double mph =
      options.min_peak_height ? *options.min_peak_height : quantile(discharge, 0.995);
  std::vector<int> peaks = detect_peaks(discharge, mph, options.min_peak_distance);
  if (peaks.empty()) return {};

  BaseflowResult separated = baseflow_separate(discharge);

  std::vector<FloodEvent> events;
  for (int t_peak : peaks) {
    if (t_peak < options.history_hours) continue;  // dropped: not enough history
    EventStart start = event_start(rainfall, t_peak, options);

    // Ending date: minimize the 48 h quickflow mass starting 1 h before t_e.
    const int e_max = std::min(n - 1, start.start + options.max_duration_hours);
    int best_e = t_peak;
    double best_score = -1;
    for (int t_e = t_peak; t_e <= e_max; ++t_e) {
      double score = 0;
      for (int t = std::max(0, t_e - 1); t <= std::min(n - 1, t_e + 47); ++t)
        score += std::abs(discharge[t] - separated.baseflow[t]);
      if (best_score < 0 || score < best_score) {
        best_score = score;
        best_e = t_e;
      }
    }
    FloodEvent event;
    event.start = start.start;
    event.peak = t_peak;
    event.end = best_e;
    event.start_fallback = start.fallback;
    events.push_back(event);
  }

  std::sort(events.begin(), events.end(),
            [](const FloodEvent& a, const FloodEvent& b) { return a.start < b.start; });

  // Merge events occurring within the 10-day horizon, and any overlap left.
  std::vector<FloodEvent> merged;
  for (const FloodEvent& event : events) {
    if (!merged.empty()) {
      FloodEvent& group = merged.back();
      if (event.end < group.start + options.max_duration_hours || event.start <= group.end) {
        group.end = std::max(group.end, event.end);
        if (discharge[event.peak] > discharge[group.peak]) group.peak = event.peak;
        group.merged_from += event.merged_from;
        group.start_fallback = group.start_fallback || event.start_fallback;
        continue;
      }
    }
    merged.push_back(event);
  }
  return merged;
}

}  // namespace hydrocal
