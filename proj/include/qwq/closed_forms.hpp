// qwq/closed_forms.hpp
// Analytical expressions for the Werner-mixed two-spin state
//   rho_t^eps = (1 - eps) 1/4 + eps rho_S(t)
// and for its t -> infinity limits. All logarithms are natural.

#pragma once

#include "qwq/core.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace qwq {

namespace detail {

inline void check_sigma0(double sigma0) {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");
}

inline void check_epsilon(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
}

}  // namespace detail

/// E_t = exp(-t^2 / (2 sigma0^2)).
inline double decay_factor(double sigma0, double t) {
  detail::check_sigma0(sigma0);
  return std::exp(-t * t / (2.0 * sigma0 * sigma0));
}

/// Binary entropy in nats, H(0) = H(1) = 0.
inline double shannon_entropy(double u) {
  constexpr double slack = 1e-12;
  if (!(u >= -slack && u <= 1.0 + slack)) {
    throw std::domain_error("shannon_entropy: argument outside [0, 1]");
  }
  u = std::clamp(u, 0.0, 1.0);
  auto term = [](double p) { return p > 0.0 ? -p * std::log(p) : 0.0; };
  return term(u) + term(1.0 - u);
}

inline double purity_closed(double eps, double sigma0, double t) {
  detail::check_epsilon(eps);
  const double e = decay_factor(sigma0, t);
  return 0.25 * (1.0 + eps * eps * (1.0 + 2.0 * e * e));
}

/// CHSH value of rho_t^{eps=1} for the fixed measurement settings
/// A = x, y and B = -(x+y)/sqrt2, (-x+y)/sqrt2.
inline double chsh_fixed_directions_closed(double sigma0, double t) {
  return (1.0 + 3.0 * decay_factor(sigma0, t)) / kSqrt2;
}

/// Time at which the fixed-direction CHSH value drops to 2.
inline double chsh_crossing_time(double sigma0) {
  detail::check_sigma0(sigma0);
  return sigma0 * std::sqrt(2.0 * std::log(3.0 / (2.0 * kSqrt2 - 1.0)));
}

inline double bell_closed(double eps, double sigma0, double t) {
  detail::check_epsilon(eps);
  const double e = decay_factor(sigma0, t);
  return (1.0 + kSqrt2) * std::max(0.0, eps * std::sqrt(1.0 + e * e) - 1.0);
}

inline double steering_closed(double eps, double sigma0, double t) {
  detail::check_epsilon(eps);
  const double e = decay_factor(sigma0, t);
  return 0.5 * (1.0 + std::sqrt(3.0)) * std::max(0.0, eps * std::sqrt(1.0 + 2.0 * e * e) - 1.0);
}

inline double concurrence_closed(double eps, double sigma0, double t) {
  detail::check_epsilon(eps);
  const double e = decay_factor(sigma0, t);
  return 0.5 * std::max(0.0, eps * (1.0 + 2.0 * e) - 1.0);
}

/// GME concurrence of the model two-walker pure state.
inline double gme_closed(double sigma0, double t) {
  return std::sqrt(1.0 - decay_factor(sigma0, t));
}

struct SuddenDeathTimes {
  std::optional<double> bell;
  std::optional<double> steering;
  std::optional<double> entanglement;
};

/// Finite times at which B, S and E vanish; empty when the quantifier is
/// zero from the start or only decays asymptotically (eps = 1).
inline SuddenDeathTimes sudden_death_times(double eps, double sigma0) {
  detail::check_epsilon(eps);
  detail::check_sigma0(sigma0);
  SuddenDeathTimes out;
  if (eps >= 1.0) return out;
  const double e2 = eps * eps;
  if (eps > 1.0 / kSqrt2) out.bell = sigma0 * std::sqrt(std::log(e2 / (1.0 - e2)));
  if (eps > 1.0 / std::sqrt(3.0)) out.steering = sigma0 * std::sqrt(std::log(2.0 * e2 / (1.0 - e2)));
  if (eps > 1.0 / 3.0) out.entanglement = sigma0 * std::sqrt(2.0 * std::log(2.0 * eps / (1.0 - eps)));
  return out;
}

inline double discord_closed(double eps, double sigma0, double t) {
  detail::check_epsilon(eps);
  const double e = decay_factor(sigma0, t);
  return 0.5 * (1.0 + eps) * (kLn2 - shannon_entropy(0.5 + eps * e / (1.0 + eps)));
}

/// von Neumann entropy of rho_t^eps.
inline double entropy_closed(double eps, double sigma0, double t) {
  detail::check_epsilon(eps);
  const double e = decay_factor(sigma0, t);
  return 0.5 * (1.0 - eps) * kLn2 + 0.5 * (1.0 + eps) * shannon_entropy(0.5 + eps * e / (1.0 + eps)) +
         shannon_entropy(0.5 * (1.0 + eps));
}

inline double rbn_closed(double eps, double sigma0, double t) {
  const double e = decay_factor(sigma0, t);
  return discord_closed(eps, sigma0, t) + shannon_entropy(0.5 * (1.0 + eps * e)) -
         shannon_entropy(0.5 * (1.0 + eps));
}

/// Projection of the Bloch direction onto the coin axis (x+z)/sqrt2.
inline double nu(double theta, double phi) {
  return (std::cos(phi) + std::cos(theta) * std::sin(phi)) / kSqrt2;
}

inline double irreality_asymptotic(double theta, double phi) {
  return shannon_entropy(0.5 * (1.0 + nu(theta, phi)));
}

inline double eta_asymptotic(double theta1, double phi1, double theta2, double phi2) {
  const double n1 = nu(theta1, phi1), n2 = nu(theta2, phi2);
  return shannon_entropy(0.5 * (1.0 + n1)) + shannon_entropy(0.5 * (1.0 + n2)) -
         shannon_entropy(0.5 * (1.0 + n1 * n2));
}

inline double rbn_asymptotic(double eps) {
  detail::check_epsilon(eps);
  return kLn2 - shannon_entropy(0.5 * (1.0 + eps));
}

}  // namespace qwq
