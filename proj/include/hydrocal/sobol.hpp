#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hydrocal/cost.hpp"
#include "hydrocal/metrics.hpp"
#include "hydrocal/model.hpp"

namespace hydrocal {

/// Digitally-scrambled Sobol' low-discrepancy sequence, up to 16 dimensions.
class SobolSequence {
 public:
  SobolSequence(int dimension, uint64_t scramble_seed);
  /// Point i (0-based), components in (0,1).
  std::vector<double> point(uint32_t i) const;
  int dimension() const { return dim_; }

 private:
  int dim_;
  std::vector<std::array<uint32_t, 32>> directions_;  // per dim
  std::vector<uint32_t> shift_;                       // digital scramble per dim
};

struct SampleDesign {
  int base_size = 0;  // N
  int dimension = 0;  // k
  std::vector<std::vector<double>> a;                  // N rows of k
  std::vector<std::vector<double>> b;                  // N rows of k
  std::vector<std::vector<std::vector<double>>> ab;    // k matrices of N rows
  size_t evaluation_count() const { return static_cast<size_t>(base_size) * (dimension + 2); }
};

/// Saltelli design over box bounds; N must be a power of two.
SampleDesign saltelli_sample(int n, const std::vector<double>& lower,
                             const std::vector<double>& upper, uint64_t seed);

struct SobolIndices {
  std::vector<double> first_order;
  std::vector<double> total_order;
  double variance = 0;
  size_t evaluations = 0;
};

/// Saltelli-2010 estimator pair: S_j = (1/N) Σ yB (yAB_j − yA) / V,
/// ST_j = (1/2N) Σ (yA − yAB_j)² / V, with V from pooled yA,yB.
SobolIndices sobol_indices(const std::vector<double>& y_a, const std::vector<double>& y_b,
                           const std::vector<std::vector<double>>& y_ab);

struct GssaRow {
  SignatureId signature;
  SobolIndices indices;
  bool defined = true;  // false when the signature had zero variance
};

/// Signature-based GSA of the 6 uniform parameters: one forward run per
/// design row, all 16 signatures per run, indices per (signature, parameter).
/// Event signatures are averaged over the fixed windows segmented once on the
/// reference series.
std::vector<GssaRow> signature_gssa(const DrainagePlan& plan, const Catchment& gauge,
                                    const StateField& h0, const Forcing& forcing,
                                    const std::vector<EventWindow>& events,
                                    const ParamBounds& bounds, int n, uint64_t seed,
                                    const std::vector<SignatureId>& signatures);

}  // namespace hydrocal
