#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hydrocal/error.hpp"

namespace hydrocal {

double nse(const std::vector<double>& sim, const std::vector<double>& obs);
double kge(const std::vector<double>& sim, const std::vector<double>& obs, double alpha = 1.0,
           double beta = 1.0, double gamma = 1.0);

/// Lyne–Hollick recursive filter, a = 0.925, three passes
/// (forward/backward/forward), quickflow clipped to [0, Q] at every step.
struct BaseflowResult {
  std::vector<double> baseflow;
  std::vector<double> quickflow;
};
BaseflowResult baseflow_separate(const std::vector<double>& q, double a = 0.925);

/// Per-pass clip state kept so the separation can be differentiated.
struct BaseflowTape {
  // mask value per element per pass: 0 = clipped low, 1 = linear, 2 = clipped to s.
  std::array<std::vector<int8_t>, 3> masks;
  double a = 0.925;
  size_t n = 0;
};
BaseflowResult baseflow_separate_tape(const std::vector<double>& q, BaseflowTape& tape,
                                      double a = 0.925);
/// Given dJ/dQb, accumulate dJ/dq for the taped separation.
void baseflow_adjoint(const BaseflowTape& tape, const std::vector<double>& lambda_baseflow,
                      std::vector<double>& lambda_q);

/// CDF-convention quantile with linear interpolation between order statistics.
double quantile(const std::vector<double>& values, double p);

/// Flow percentile under the exceedance convention (default): Cfp2 is the
/// flow exceeded 2% of the time, i.e. quantile(Q, 1-0.02).
enum class QuantileConvention { Exceedance, Cdf };
double flow_percentile(const std::vector<double>& q, double p,
                       QuantileConvention convention = QuantileConvention::Exceedance);

enum class SignatureId : int {
  Crc, Crchf, Crclf, Crch2r, Cfp2, Cfp10, Cfp50, Cfp90,
  Eff, Ebf, Erc, Erchf, Erclf, Erch2r, Elt, Epf,
};
inline constexpr int kNumSignatures = 16;
const char* to_string(SignatureId id);
SignatureId signature_from_string(const std::string& name);
bool is_continuous_signature(SignatureId id);
/// Elt is argmax-based and excluded from differentiable costs.
bool is_smooth_signature(SignatureId id);
const char* signature_unit(SignatureId id);

struct SignatureValue {
  SignatureId id;
  double value = 0;
  bool defined = true;  // false when e.g. Crch2r has zero total discharge
};

struct ContinuousSignatures {
  std::array<SignatureValue, 8> values;  // Crc..Cfp90 in enum order
  const SignatureValue& operator[](SignatureId id) const {
    return values[static_cast<int>(id)];
  }
};

/// P and Q in mm/h over the whole period. Hourly step, so sums are mm.
ContinuousSignatures continuous_signatures(
    const std::vector<double>& rainfall, const std::vector<double>& discharge,
    QuantileConvention convention = QuantileConvention::Exceedance);

struct EventWindow {
  int start = 0;  // inclusive step indices into the series
  int peak = 0;
  int end = 0;
};

struct EventSignatures {
  std::array<SignatureValue, 8> values;  // Eff..Epf in enum order offset by 8
  const SignatureValue& operator[](SignatureId id) const {
    return values[static_cast<int>(id) - 8];
  }
};

EventSignatures event_signatures(const std::vector<double>& rainfall,
                                 const std::vector<double>& discharge, const EventWindow& window);

double signature_value(SignatureId id, const std::vector<double>& rainfall,
                       const std::vector<double>& discharge,
                       const std::optional<EventWindow>& window,
                       QuantileConvention convention = QuantileConvention::Exceedance);

}  // namespace hydrocal
