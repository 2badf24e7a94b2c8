#include "bayesrob/robust_kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "bayesrob/errors.hpp"

namespace bayesrob {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be finite");
}

std::string normalize_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    out.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

// 1 / (1 + exp(z)) without overflow.
double logistic_complement(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kEror: return "eror";
    case Method::kEsor: return "esor";
    case Method::kAsor: return "asor";
    case Method::kGncGm: return "gnc-gm";
    case Method::kGncTls: return "gnc-tls";
    case Method::kNone: return "none";
  }
  return "unknown";
}

std::string_view to_string(StoppingRule rule) {
  switch (rule) {
    case StoppingRule::kCostChange: return "cost-change";
    case StoppingRule::kMaxWeightedResidual: return "max-weighted-residual";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  const std::string n = normalize_name(name);
  for (Method m : {Method::kEror, Method::kEsor, Method::kAsor, Method::kGncGm, Method::kGncTls,
                   Method::kNone}) {
    if (n == to_string(m)) return m;
  }
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

StoppingRule parse_stopping_rule(std::string_view name) {
  const std::string n = normalize_name(name);
  if (n == "cost-change") return StoppingRule::kCostChange;
  if (n == "max-weighted-residual") return StoppingRule::kMaxWeightedResidual;
  throw InvalidArgument("unknown stopping rule '" + std::string(name) + "'");
}

double AsorHyperParams::log_zeta() const {
  return std::log(1.0 / inlier_prior - 1.0) + std::lgamma(posterior_shape()) - std::lgamma(shape);
}

double AsorHyperParams::zeta() const { return std::exp(log_zeta()); }

void AsorHyperParams::validate() const {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw InvalidArgument("asor shape a must be > 0");
  if (!(scale_prior_shape > 1.0) || !std::isfinite(scale_prior_shape)) {
    throw InvalidArgument("asor prior shape A must be > 1");
  }
  if (!(scale_prior_rate > 0.0) || !std::isfinite(scale_prior_rate)) {
    throw InvalidArgument("asor prior rate B must be > 0");
  }
  if (!(initial_scale > 0.0) || !std::isfinite(initial_scale)) {
    throw InvalidArgument("asor initial b must be > 0");
  }
  if (!(inlier_prior > 0.0 && inlier_prior < 1.0)) {
    throw InvalidArgument("asor theta must lie in (0, 1)");
  }
}

void RobustConfig::validate() const {
  if (!(inlier_threshold_sq > 0.0) || !std::isfinite(inlier_threshold_sq)) {
    throw InvalidArgument("inlier threshold must be positive and finite");
  }
  if (!(convergence_tol > 0.0)) throw InvalidArgument("convergence tolerance must be positive");
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
  if (!(weight_sum_floor >= 0.0)) throw InvalidArgument("weight_sum_floor must be nonnegative");
  if (!(gnc_factor > 1.0)) throw InvalidArgument("gnc factor must exceed 1");
  asor.validate();
}

double eror_weight(double r_sq, double mu) {
  require_finite(r_sq, "squared residual");
  require_finite(mu, "mu");
  if (r_sq < 0.0) throw InvalidArgument("squared residual must be nonnegative");
  if (!(mu > 0.0)) throw InvalidArgument("mu must be positive");
  return 1.0 / (1.0 + r_sq / mu);
}

double eror_mu_update(std::span<const double> measurement_residuals_sq, double chi) {
  if (measurement_residuals_sq.empty()) {
    throw InvalidArgument("eror_mu_update needs at least one measurement residual");
  }
  const auto [lo, hi] =
      std::minmax_element(measurement_residuals_sq.begin(), measurement_residuals_sq.end());
  return std::max(0.5 * (*hi + *lo), chi);
}

double esor_weight(double r_sq, double rho_sq) {
  require_finite(r_sq, "squared residual");
  require_finite(rho_sq, "rho^2");
  if (!(rho_sq > 0.0)) throw InvalidArgument("rho^2 must be positive");
  return logistic_complement(0.5 * (r_sq - rho_sq));
}

std::optional<double> esor_rho_update(std::span<const double> weights,
                                      std::span<const double> residuals_sq, double gamma) {
  if (weights.size() != residuals_sq.size()) {
    throw InvalidArgument("esor_rho_update: weight and residual counts differ");
  }
  double sum_w = 0.0;
  double sum_wr = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    sum_w += weights[i];
    sum_wr += weights[i] * residuals_sq[i];
  }
  if (!(sum_w > 0.0)) return std::nullopt;
  return std::max(sum_wr / sum_w, gamma);
}

double asor_omega(double r_sq, double beta, double b_hat, const AsorHyperParams& hp) {
  const double z = hp.log_zeta() + hp.shape * std::log(b_hat) -
                   hp.posterior_shape() * std::log(beta) + 0.5 * r_sq;
  return logistic_complement(z);
}

void asor_iteration_update(std::span<const double> measurement_residuals_sq, AsorState& state,
                           const AsorHyperParams& hp, std::span<double> weights_out) {
  const std::size_t m = measurement_residuals_sq.size();
  if (weights_out.size() != m) throw InvalidArgument("asor update: weight span has wrong size");
  if (!(state.b_hat > 0.0)) throw InvalidArgument("asor update: b_hat must be positive");
  state.beta.resize(m);
  state.omega.resize(m);

  const double alpha = hp.posterior_shape();
  const double log_zeta = hp.log_zeta();
  const double a_log_b = hp.shape * std::log(state.b_hat);
  for (std::size_t i = 0; i < m; ++i) {
    const double r_sq = measurement_residuals_sq[i];
    state.beta[i] = 0.5 * r_sq + state.b_hat;
    state.omega[i] =
        logistic_complement(log_zeta + a_log_b - alpha * std::log(state.beta[i]) + 0.5 * r_sq);
  }

  double shape_sum = hp.scale_prior_shape - 1.0;
  double rate_sum = hp.scale_prior_rate;
  for (std::size_t i = 0; i < m; ++i) {
    const double outlier_mass = 1.0 - state.omega[i];
    shape_sum += hp.shape * outlier_mass;
    rate_sum += outlier_mass * alpha / state.beta[i];
  }
  state.b_hat = shape_sum / rate_sum;

  for (std::size_t i = 0; i < m; ++i) {
    weights_out[i] = state.omega[i] + (1.0 - state.omega[i]) * alpha / state.beta[i];
  }
}

double gnc_weight(Method method, double r_sq, double mu, double c_sq) {
  switch (method) {
    case Method::kGncGm: {
      const double s = mu * c_sq;
      const double ratio = s / (r_sq + s);
      return ratio * ratio;
    }
    case Method::kGncTls: {
      if (std::isinf(mu)) return r_sq <= c_sq ? 1.0 : 0.0;
      const double upper = (mu + 1.0) / mu * c_sq;
      const double lower = mu / (mu + 1.0) * c_sq;
      if (r_sq >= upper) return 0.0;
      if (r_sq <= lower) return 1.0;
      return std::clamp(std::sqrt(c_sq * mu * (mu + 1.0) / r_sq) - mu, 0.0, 1.0);
    }
    default:
      throw InvalidArgument("gnc_weight: method must be GNC-GM or GNC-TLS");
  }
}

void gnc_baseline_update(Method method, std::span<const double> residuals_sq, GncControl& control,
                         double c_sq, double factor, std::span<double> weights_out) {
  if (method != Method::kGncGm && method != Method::kGncTls) {
    throw InvalidArgument("gnc_baseline_update: method must be GNC-GM or GNC-TLS");
  }
  if (weights_out.size() != residuals_sq.size()) {
    throw InvalidArgument("gnc update: weight span has wrong size");
  }
  if (!control.initialized) {
    const double r_max =
        residuals_sq.empty() ? 0.0 : *std::max_element(residuals_sq.begin(), residuals_sq.end());
    if (method == Method::kGncGm) {
      control.mu = std::max(2.0 * r_max / c_sq, 1.0);
    } else {
      const double denom = 2.0 * r_max - c_sq;
      // Every residual already sits well inside the threshold: the surrogate
      // is the TLS cost itself.
      control.mu = denom > 0.0 ? c_sq / denom : std::numeric_limits<double>::infinity();
    }
    control.initialized = true;
  }
  for (std::size_t i = 0; i < residuals_sq.size(); ++i) {
    weights_out[i] = gnc_weight(method, residuals_sq[i], control.mu, c_sq);
  }
  control.applied_mu = control.mu;
  if (method == Method::kGncGm) {
    control.mu = std::max(control.mu / factor, 1.0);
  } else {
    control.mu *= factor;
  }
}

Reweighter::Reweighter(const RobustConfig& config, std::size_t slot_count, bool has_prior,
                       std::vector<bool> known_inliers)
    : config_(config) {
  config_.validate();
  if (slot_count < (has_prior ? 2u : 1u)) {
    throw InvalidArgument("robust problem needs at least one measurement residual");
  }
  if (!known_inliers.empty() && known_inliers.size() != slot_count) {
    throw InvalidArgument("known-inlier mask must cover every residual slot");
  }
  state_.weights.assign(slot_count, 1.0);
  state_.has_prior = has_prior;
  for (std::size_t i = state_.measurement_begin(); i < slot_count; ++i) {
    if (known_inliers.empty() || !known_inliers[i]) robust_slots_.push_back(i);
  }
  if (robust_slots_.empty()) throw InvalidArgument("every measurement is marked as a known inlier");
  switch (config_.method) {
    case Method::kAsor:
      state_.asor = AsorState{{}, {}, config_.asor.initial_scale};
      break;
    case Method::kGncGm:
    case Method::kGncTls:
      state_.gnc = GncControl{};
      break;
    default:
      break;
  }
}

UpdateStatus Reweighter::update(std::span<const double> residuals_sq) {
  if (residuals_sq.size() != state_.weights.size()) {
    throw InvalidArgument("residual count does not match the weight vector");
  }
  for (double r : residuals_sq) {
    if (!std::isfinite(r) || r < 0.0) {
      throw InvalidArgument("squared residuals must be finite and nonnegative");
    }
  }
  const std::size_t first = state_.measurement_begin();
  const auto measurement_w = std::span<const double>(state_.weights).subspan(first);
  const double c_sq = config_.inlier_threshold_sq;

  // Gather the slots the method may reweight; known inliers and the prior stay at 1.
  std::vector<double> r(robust_slots_.size());
  std::vector<double> w(robust_slots_.size());
  for (std::size_t k = 0; k < robust_slots_.size(); ++k) {
    r[k] = residuals_sq[robust_slots_[k]];
    w[k] = state_.weights[robust_slots_[k]];
  }

  switch (config_.method) {
    case Method::kNone:
      break;
    case Method::kEror: {
      const double mu = eror_mu_update(r, c_sq);
      state_.mu = mu;
      for (std::size_t k = 0; k < r.size(); ++k) w[k] = eror_weight(r[k], mu);
      break;
    }
    case Method::kEsor: {
      // Centroid over every present slot, the prior included.
      std::vector<double> present_w = w;
      std::vector<double> present_r = r;
      if (state_.has_prior) {
        present_w.push_back(state_.weights[0]);
        present_r.push_back(residuals_sq[0]);
      }
      const auto rho = esor_rho_update(present_w, present_r, c_sq);
      if (!rho || std::accumulate(measurement_w.begin(), measurement_w.end(), 0.0) <
                      config_.weight_sum_floor) {
        return UpdateStatus::kWeightSumFloor;
      }
      state_.rho_sq = *rho;
      for (std::size_t k = 0; k < r.size(); ++k) w[k] = esor_weight(r[k], *rho);
      break;
    }
    case Method::kAsor:
      asor_iteration_update(r, *state_.asor, config_.asor, w);
      break;
    case Method::kGncGm:
    case Method::kGncTls:
      gnc_baseline_update(config_.method, r, *state_.gnc, c_sq, config_.gnc_factor, w);
      break;
  }
  for (std::size_t k = 0; k < robust_slots_.size(); ++k) state_.weights[robust_slots_[k]] = w[k];
  if (state_.has_prior) state_.weights[0] = 1.0;

  const double measurement_sum = std::accumulate(measurement_w.begin(), measurement_w.end(), 0.0);
  if (measurement_sum < config_.weight_sum_floor) return UpdateStatus::kWeightSumFloor;
  return UpdateStatus::kUpdated;
}

double Reweighter::parameter_snapshot() const {
  if (state_.mu) return *state_.mu;
  if (state_.rho_sq) return *state_.rho_sq;
  if (state_.asor) return state_.asor->b_hat;
  if (state_.gnc) return state_.gnc->applied_mu;
  return 0.0;
}

bool Reweighter::schedule_finished() const {
  return state_.gnc && state_.gnc->initialized && state_.gnc->applied_mu <= 1.0;
}

}  // namespace bayesrob
