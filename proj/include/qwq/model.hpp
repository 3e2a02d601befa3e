// qwq/model.hpp
// Gaussian initial states and the two-lobe Gaussian model of the walk.

#pragma once

#include "qwq/closed_forms.hpp"
#include "qwq/walk.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace qwq {

/// Discrete normalization K = sum_{x in Z} exp(-x^2 / (2 sigma0^2)).
inline double theta_normalization(double sigma0) {
  detail::check_sigma0(sigma0);
  const double w = 1.0 / (2.0 * sigma0 * sigma0);
  double sum = 1.0;
  for (long x = 1;; ++x) {
    const double term = std::exp(-w * double(x) * double(x));
    sum += 2.0 * term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

/// f(x) = exp(-x^2 / (4 sigma0^2)) / sqrt(K), untruncated.
inline double gaussian_profile(double sigma0, int x) {
  return std::exp(-double(x) * double(x) / (4.0 * sigma0 * sigma0)) / std::sqrt(theta_normalization(sigma0));
}

/// (cos(alpha/2)|up> + sin(alpha/2)|down>) (x) f, truncated to
/// |x| <= gaussian_support_radius(sigma0).
inline WalkerState gaussian_walker(double sigma0, double alpha, const LatticeWindow& window) {
  detail::check_sigma0(sigma0);
  const int radius = gaussian_support_radius(sigma0);
  if (!window.contains(-radius) || !window.contains(radius)) {
    throw DimensionError("gaussian_walker: window does not cover the Gaussian support");
  }
  const double inv_sqrt_k = 1.0 / std::sqrt(theta_normalization(sigma0));
  WalkerState::Amplitudes amps = WalkerState::Amplitudes::Zero(2, window.size());
  for (int x = -radius; x <= radius; ++x) {
    const double f = std::exp(-double(x) * double(x) / (4.0 * sigma0 * sigma0)) * inv_sqrt_k;
    amps(0, window.index(x)) = std::cos(alpha / 2) * f;
    amps(1, window.index(x)) = std::sin(alpha / 2) * f;
  }
  return WalkerState(window, std::move(amps));
}

/// Spin singlet with both walkers in the same Gaussian:
/// (|up f>|down f> - |down f>|up f>)/sqrt2.
inline ProductSumState singlet_gaussian_pair(double sigma0, const LatticeWindow& window) {
  const WalkerState up = gaussian_walker(sigma0, 0.0, window);
  const WalkerState down = gaussian_walker(sigma0, kPi, window);
  return ProductSumState({{1.0 / kSqrt2, up, down}, {-1.0 / kSqrt2, down, up}});
}

/// |up f>|down f>, the uncorrelated reference for the joint distribution.
inline ProductSumState product_gaussian_pair(double sigma0, const LatticeWindow& window) {
  return ProductSumState({{1.0, gaussian_walker(sigma0, 0.0, window), gaussian_walker(sigma0, kPi, window)}});
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

enum class ModelRegime { reliable, marginal, invalid };

struct GaussianWalkParams {
  double sigma0 = 5.0;
  double alpha = 0.0;
  int t = 0;

  void validate() const {
    detail::check_sigma0(sigma0);
    if (!(alpha >= 0.0 && alpha <= kPi)) throw std::invalid_argument("alpha must lie in [0, pi]");
    if (t < 0) throw std::invalid_argument("t must be nonnegative");
  }

  /// reliable for sigma0 >= 3; invalid below 1, where the lobes are not Gaussian.
  ModelRegime regime() const noexcept {
    if (sigma0 >= 3.0) return ModelRegime::reliable;
    if (sigma0 >= 1.0) return ModelRegime::marginal;
    return ModelRegime::invalid;
  }
};

/// Lobe weights: q_u^pm = (c_u^pm cos(alpha/2) + s_u^pm sin(alpha/2)) / 4.
struct AnsatzCoefficients {
  static constexpr double c_a_plus = 2.0 + kSqrt2;
  static constexpr double c_a_minus = 2.0 - kSqrt2;
  static constexpr double s_a_plus = kSqrt2;
  static constexpr double s_a_minus = -kSqrt2;
  static constexpr double c_b_plus = kSqrt2;
  static constexpr double c_b_minus = -kSqrt2;
  static constexpr double s_b_plus = 2.0 - kSqrt2;
  static constexpr double s_b_minus = 2.0 + kSqrt2;

  struct Weights {
    double a_plus, a_minus, b_plus, b_minus;
  };

  static Weights weights(double alpha) {
    const double c = std::cos(alpha / 2), s = std::sin(alpha / 2);
    return {(c_a_plus * c + s_a_plus * s) / 4, (c_a_minus * c + s_a_minus * s) / 4,
            (c_b_plus * c + s_b_plus * s) / 4, (c_b_minus * c + s_b_minus * s) / 4};
  }
};

/// Raw (unnormalized) model amplitudes (a(x), b(x)).
inline std::pair<double, double> model_amplitudes(const GaussianWalkParams& p, int x) {
  p.validate();
  const double shift = p.t / kSqrt2;
  const double pref = std::pow(2.0 * kPi * p.sigma0 * p.sigma0, -0.25);
  const double w = 1.0 / (4.0 * p.sigma0 * p.sigma0);
  const double g_plus = pref * std::exp(-w * (x - shift) * (x - shift));
  const double g_minus = (p.t % 2 == 0 ? 1.0 : -1.0) * pref * std::exp(-w * (x + shift) * (x + shift));
  const auto q = AnsatzCoefficients::weights(p.alpha);
  return {q.a_plus * g_plus + q.a_minus * g_minus, q.b_plus * g_plus + q.b_minus * g_minus};
}

namespace detail {

inline WalkerState::Amplitudes raw_model(const GaussianWalkParams& p, const LatticeWindow& window) {
  WalkerState::Amplitudes amps(2, window.size());
  for (Index i = 0; i < window.size(); ++i) {
    const auto [a, b] = model_amplitudes(p, window.site(i));
    amps(0, i) = a;
    amps(1, i) = b;
  }
  return amps;
}

}  // namespace detail

/// |1 - norm^2| of the raw ansatz on the window, before renormalization.
inline double model_norm_deviation(const GaussianWalkParams& p, const LatticeWindow& window) {
  return std::abs(1.0 - detail::raw_model(p, window).squaredNorm());
}

/// Renormalized model state on the given window.
inline WalkerState model_state(const GaussianWalkParams& p, const LatticeWindow& window) {
  WalkerState::Amplitudes amps = detail::raw_model(p, window);
  amps /= std::sqrt(amps.squaredNorm());
  return WalkerState(window, std::move(amps));
}

inline WalkerState model_state(const GaussianWalkParams& p) {
  return model_state(p, window_for_horizon(p.sigma0, p.t));
}

/// Model two-walker state from the alpha = 0 and alpha = pi model walkers.
inline ProductSumState two_walker_model_state(double sigma0, int t, const LatticeWindow& window) {
  const WalkerState up = model_state({sigma0, 0.0, t}, window);
  const WalkerState down = model_state({sigma0, kPi, t}, window);
  // The two model walkers are orthogonal only up to the ansatz error, so the
  // antisymmetric combination is rescaled to unit norm.
  const double overlap2 = std::norm(inner(up, down));
  const double scale = 1.0 / std::sqrt(1.0 - overlap2);
  return ProductSumState({{scale / kSqrt2, up, down}, {-scale / kSqrt2, down, up}});
}

inline ProductSumState two_walker_model_state(double sigma0, int t) {
  return two_walker_model_state(sigma0, t, window_for_horizon(sigma0, t));
}

/// Unnormalized two-spin amplitude at relative coordinate x_r = x2 - x1:
/// sinh(k x_r)|beta23> + cosh(k x_r)|B4>, k = t / (2 sqrt2 sigma0^2).
inline Eigen::Vector4cd st_spin_vector(double sigma0, double t, double x_r) {
  detail::check_sigma0(sigma0);
  const double arg = t * x_r / (2.0 * kSqrt2 * sigma0 * sigma0);
  return std::sinh(arg) * bell::beta23() + std::cosh(arg) * bell::b4();
}

/// Two-spin reduced state of the model:
/// ((1 - E_t)/2)|beta23><beta23| + ((1 + E_t)/2)|B4><B4|.
inline DensityMatrix spin_density_closed(double sigma0, double t) {
  const double e = decay_factor(sigma0, t);
  const Eigen::Vector4cd b23 = bell::beta23();
  const Eigen::Vector4cd b4 = bell::b4();
  Eigen::MatrixXcd rho = 0.5 * (1.0 - e) * b23 * b23.adjoint() + 0.5 * (1.0 + e) * b4 * b4.adjoint();
  return DensityMatrix(std::move(rho));
}

/// (1 - eps) 1/4 + eps rho.
inline DensityMatrix werner_mixture(double eps, const DensityMatrix& rho) {
  detail::check_epsilon(eps);
  if (rho.dim() != 4) throw DimensionError("werner_mixture: expected a two-qubit state");
  Eigen::MatrixXcd m = (1.0 - eps) * Eigen::MatrixXcd::Identity(4, 4) / 4.0 + eps * rho.matrix();
  return DensityMatrix(std::move(m));
}

inline DensityMatrix werner_state(double eps, double sigma0, double t) {
  return werner_mixture(eps, spin_density_closed(sigma0, t));
}

/// Spin-position linear entropy of a single model walker.
inline double esx_closed(double alpha, double sigma0, double t) {
  return 0.25 * (1.0 - std::sin(2.0 * alpha)) * (1.0 - decay_factor(sigma0, t));
}

}  // namespace qwq
