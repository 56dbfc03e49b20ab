#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hydrocal/metrics.hpp"

namespace hydrocal {

struct FloodEvent {
  int start = 0;  // sd, step index
  int peak = 0;   // t_j of the highest retained peak within the event
  int end = 0;    // ed
  int merged_from = 1;
  bool start_fallback = false;  // no qualifying gradient peak, start = peak - 72
};

struct SegmentationOptions {
  std::optional<double> min_peak_height;  // default: 0.995-quantile of Q
  int min_peak_distance = 12;             // hours
  int history_hours = 72;
  int max_duration_hours = 240;  // 10 days
  double energy_fraction = 0.2;
  double gradient_quantile = 0.8;
};

/// Strict local maxima above mph, pairwise separated by >= mpd hours;
/// among conflicting peaks the larger wins, ties go to the earlier one.
std::vector<int> detect_peaks(const std::vector<double>& q, double mph, int mpd);

/// Flood start for a retained discharge peak: earliest rainfall-gradient peak
/// in (t_peak-72, t_peak) whose 24 h rainfall energy exceeds 0.2 of the window
/// maximum. Returns the fallback t_peak-72 with a flag when nothing qualifies.
struct EventStart {
  int start = 0;
  bool fallback = false;
};
EventStart event_start(const std::vector<double>& rainfall, int t_peak,
                       const SegmentationOptions& options = {});

std::vector<FloodEvent> segment(const std::vector<double>& rainfall,
                                const std::vector<double>& discharge,
                                const SegmentationOptions& options = {});

}  // namespace hydrocal
