#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "hydrocal/metrics.hpp"
#include "hydrocal/model.hpp"

namespace hydrocal {

struct SignatureTerm {
  SignatureId id;
  double weight = 1.0;
};

/// Multi-criteria cost: J = δ_d j_d + δ_c j_c + δ_f j_f + α_reg J_reg, with
/// j_c/j_f built from relative signature errors and j_f averaged over the
/// pre-segmented events.
struct CostConfig {
  enum class Dominant { OneMinusNSE, OneMinusKGE };
  Dominant dominant = Dominant::OneMinusNSE;
  double kge_alpha = 1.0, kge_beta = 1.0, kge_gamma = 1.0;

  std::vector<SignatureTerm> continuous_terms;
  std::vector<SignatureTerm> flood_terms;
  double delta_d = 1.0, delta_c = 0.0, delta_f = 0.0;

  double alpha_reg = 0.0;
  std::array<double, kNumParams> sigma_theta{};  // B = diag(σ_θ²)

  std::vector<EventWindow> events;  // fixed windows segmented on the observations
  std::vector<int> event_months;    // month of each event peak (1..12); may be empty
  std::optional<std::pair<int, int>> season;  // inclusive month range restricting j_f

  int warmup_steps = 0;  // leading steps excluded from all metrics

  double tau = 1e-8;               // |x| -> sqrt(x²+τ²) smoothing
  double softmax_sharpness = 50.;  // per mm, Epf max smoothing
  QuantileConvention quantile_convention = QuantileConvention::Exceedance;

  static std::array<double, kNumParams> default_sigma(const ParamBounds& bounds) {
    std::array<double, kNumParams> s{};
    for (int j = 0; j < kNumParams; ++j) s[j] = (bounds.upper[j] - bounds.lower[j]) / 4.0;
    return s;
  }
};

struct CostBreakdown {
  double total = 0;
  double jd = 0, jc = 0, jf = 0, jreg = 0;
};

/// Evaluate on gauge series (mm/h). `smooth` selects the differentiable
/// surrogates (smoothed |x|, soft Epf max) and rejects Elt; the exact form
/// allows Elt and uses the true max. `jreg` is supplied by the caller that
/// owns the parameter field.
CostBreakdown evaluate_cost(const CostConfig& config, const std::vector<double>& sim,
                            const std::vector<double>& obs, const std::vector<double>& rainfall,
                            bool smooth = false, double jreg = 0.0);

struct CostEval {
  CostBreakdown breakdown;
  std::vector<double> grad_sim;  // dJ_obs/d sim(t), regularization excluded
};

/// Smooth cost value plus its analytic series gradient.
CostEval evaluate_cost_with_gradient(const CostConfig& config, const std::vector<double>& sim,
                                     const std::vector<double>& obs,
                                     const std::vector<double>& rainfall);

/// Σ over fields and active cells of ((θ - θ*)/σ)².
double tikhonov_term(const ParameterField& theta, const ParameterField& background,
                     const std::array<double, kNumParams>& sigma, const Grid<uint8_t>& active);
/// d J_reg/dθ = 2 (θ - θ*)/σ², accumulated into grad.
void tikhonov_gradient(const ParameterField& theta, const ParameterField& background,
                       const std::array<double, kNumParams>& sigma, const Grid<uint8_t>& active,
                       double scale, ParameterField& grad);

}  // namespace hydrocal
