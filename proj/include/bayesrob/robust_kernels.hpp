#pragma once

// Weight and parameter updates for the Bayesian reweighting heuristics
// (EROR, ESOR, ASOR) and the graduated non-convexity baselines (GNC-GM,
// GNC-TLS). Everything here is a pure function of its arguments except
// Reweighter, which owns the per-run latent state.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bayesrob {

enum class Method { kEror, kEsor, kAsor, kGncGm, kGncTls, kNone };

enum class StoppingRule {
  kCostChange,           ///< normalized change of sum_i w_i r_i^2 below tolerance
  kMaxWeightedResidual,  ///< max_i w_i r_i^2 below the inlier threshold
};

std::string_view to_string(Method method);
std::string_view to_string(StoppingRule rule);
/// Accepts "eror", "esor", "asor", "gnc-gm", "gnc-tls", "none" (case-insensitive, '_' or '-').
Method parse_method(std::string_view name);
StoppingRule parse_stopping_rule(std::string_view name);

/// Priors of the adaptive SOR model. Defaults are the values reported to
/// work best across applications.
struct AsorHyperParams {
  double shape = 0.5;              ///< a: Gamma shape of the outlier indicator
  double scale_prior_shape = 1e4;  ///< A: shape of the Gamma prior on b, must exceed 1
  double scale_prior_rate = 1e3;   ///< B: rate of the Gamma prior on b
  double initial_scale = 1e4;      ///< initial b_hat
  double inlier_prior = 0.5;       ///< theta: prior probability of no outlier

  /// alpha = a + 0.5
  double posterior_shape() const { return shape + 0.5; }
  /// zeta = (1/theta - 1) * Gamma(alpha) / Gamma(a)
  double zeta() const;
  double log_zeta() const;

  void validate() const;
};

struct RobustConfig {
  Method method = Method::kEsor;
  /// c_bar^2: largest squared residual expected from an inlier. Also the
  /// floor chi (EROR) and gamma (ESOR).
  double inlier_threshold_sq = 1.0;
  AsorHyperParams asor;
  double convergence_tol = 1e-5;
  std::size_t max_iterations = 1000;
  StoppingRule stopping_rule = StoppingRule::kCostChange;
  double weight_sum_floor = 1e-8;
  /// GNC annealing factor for the control parameter.
  double gnc_factor = 1.4;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Closed-form weight rules

/// w = 1 / (1 + r^2 / mu)
double eror_weight(double r_sq, double mu);

/// mu = max((max_i r_i^2 + min_i r_i^2) / 2, chi), over measurement slots only.
double eror_mu_update(std::span<const double> measurement_residuals_sq, double chi);

/// w = 1 / (1 + exp(0.5 (r^2 - rho^2))); saturates to 0 instead of overflowing.
double esor_weight(double r_sq, double rho_sq);

/// rho^2 = max(sum_i w_i r_i^2 / sum_i w_i, gamma). Returns nullopt when the
/// weights sum to zero, which the loop treats as the weight-sum floor.
std::optional<double> esor_rho_update(std::span<const double> weights,
                                      std::span<const double> residuals_sq, double gamma);

struct AsorState {
  std::vector<double> beta;   ///< beta_i = 0.5 r_i^2 + b_hat
  std::vector<double> omega;  ///< posterior probability that measurement i is clean
  double b_hat = 0.0;
};

/// Posterior no-outlier probability, evaluated in the log domain:
/// Omega = sigmoid(-(ln zeta + a ln b_hat - alpha ln beta + 0.5 r^2)).
double asor_omega(double r_sq, double beta, double b_hat, const AsorHyperParams& hp);

/// One ASOR parametric + weight update over measurement residuals. Order:
/// beta_i, then Omega_i, then b_hat, then w_i = Omega_i + (1 - Omega_i) alpha / beta_i.
/// `weights_out` must have the same length as `measurement_residuals_sq`.
void asor_iteration_update(std::span<const double> measurement_residuals_sq, AsorState& state,
                           const AsorHyperParams& hp, std::span<double> weights_out);

// ---------------------------------------------------------------------------
// GNC baselines

struct GncControl {
  double mu = 0.0;          ///< value the next update will use
  double applied_mu = 0.0;  ///< value the current weights were computed with
  bool initialized = false;
};

/// Weight for a fixed control parameter. GM: (mu c^2 / (r^2 + mu c^2))^2.
/// TLS: 0 above (mu+1)/mu c^2, 1 below mu/(mu+1) c^2, sqrt(c^2 mu (mu+1) / r^2) - mu between.
double gnc_weight(Method method, double r_sq, double mu, double inlier_threshold_sq);

/// Initializes the control parameter on first use (GM: 2 r_max^2 / c^2,
/// TLS: c^2 / (2 r_max^2 - c^2)), writes weights for the current control
/// value, then anneals it (GM: divide by factor down to 1, TLS: multiply).
void gnc_baseline_update(Method method, std::span<const double> residuals_sq, GncControl& control,
                         double inlier_threshold_sq, double factor, std::span<double> weights_out);

// ---------------------------------------------------------------------------

/// Weights over every residual slot plus the latent parameters of the active
/// method. Slot 0 is the prior term when `has_prior` is set; its weight stays 1.
struct WeightState {
  std::vector<double> weights;
  bool has_prior = false;
  std::optional<double> mu;       ///< EROR
  std::optional<double> rho_sq;   ///< ESOR
  std::optional<AsorState> asor;  ///< ASOR
  std::optional<GncControl> gnc;  ///< GNC-GM / GNC-TLS

  std::size_t measurement_begin() const { return has_prior ? 1 : 0; }
  std::span<const double> measurement_weights() const {
    return std::span<const double>(weights).subspan(measurement_begin());
  }
};

enum class UpdateStatus { kUpdated, kWeightSumFloor };

/// Owns the WeightState of one robust solve and applies the parametric and
/// weight updates of the configured method. Slots flagged in `known_inliers`
/// keep weight 1 and stay out of the parametric updates, like the prior.
class Reweighter {
 public:
  Reweighter(const RobustConfig& config, std::size_t slot_count, bool has_prior,
             std::vector<bool> known_inliers = {});

  UpdateStatus update(std::span<const double> residuals_sq);

  const WeightState& state() const { return state_; }
  std::span<const double> weights() const { return state_.weights; }
  /// Scalar latent parameter for tracing: mu, rho^2, b_hat or the GNC control.
  double parameter_snapshot() const;
  /// True once GM weights have been computed at mu = 1.
  bool schedule_finished() const;

 private:
  RobustConfig config_;
  WeightState state_;
  std::vector<std::size_t> robust_slots_;
};

}  // namespace bayesrob
