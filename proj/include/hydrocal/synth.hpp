#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hydrocal/model.hpp"

namespace hydrocal {

/// Deterministic storm schedule for twin experiments: `storm_count` triangular
/// hyetographs of `storm_duration` hours peaking at `storm_intensity`, evenly
/// spaced over the period, on top of a constant potential-evaporation rate.
struct SynthSpec {
  int duration_hours = 720;
  int storm_count = 3;
  int storm_duration = 12;
  double storm_intensity = 5.0;  // mm/h
  double pet_rate = 0.1;         // mm/h
  double noise = 0.0;            // multiplicative observation noise std-dev
  int64_t start_hour = 0;
};

struct SynthResult {
  Forcing forcing;
  std::vector<double> clean_mmh;  // forward run at theta_true, gauge depth units
  std::vector<double> obs_mmh;    // clean series with noise applied
  std::vector<double> obs_m3s;
  double noisy_vs_clean_nse = 1.0;
};

/// Build forcing and synthetic observations obs = forward(theta_true), with
/// optional multiplicative Gaussian noise (seeded, clamped at zero).
SynthResult synth_generate(const DrainagePlan& plan, const Catchment& gauge,
                           const std::array<double, kNumParams>& theta_true,
                           const SynthSpec& spec, uint64_t seed);

}  // namespace hydrocal
