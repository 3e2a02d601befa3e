// qwq/quantifiers.hpp
// Quantumness quantifiers: entropies, concurrence, GME concurrence, CHSH,
// Bell nonlocality and steering, discord, irreality and realism-based
// nonlocality.

#pragma once

#include "qwq/core.hpp"
#include "qwq/walk.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace qwq {

// ---------------------------------------------------------------------------
// Entropies
// ---------------------------------------------------------------------------

inline double purity(const DensityMatrix& rho) { return rho.purity(); }

inline double linear_entropy(const DensityMatrix& rho) { return 1.0 - rho.purity(); }

inline double von_neumann_entropy(const DensityMatrix& rho) {
  const Eigen::VectorXd w = rho.eigenvalues();
  double s = 0.0;
  for (Index i = 0; i < w.size(); ++i) s += xlogx_neg(w(i));
  return s;
}

namespace detail {

inline double binary_entropy(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return xlogx_neg(u) + xlogx_neg(1.0 - u);
}

inline void require_two_qubit(const DensityMatrix& rho, const char* who) {
  if (rho.dim() != 4) throw DimensionError(std::string(who) + ": expected a 4x4 density matrix");
}

inline Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  const Eigen::VectorXd root =
      es.eigenvalues().unaryExpr([](double v) { return v > tol::kEigenClip ? std::sqrt(v) : 0.0; });
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Entanglement
// ---------------------------------------------------------------------------

/// Wootters concurrence. The spectrum of rho (sy x sy) rho* (sy x sy) is taken
/// from the Hermitian form sqrt(rho) rho~ sqrt(rho), which shares it.
inline double concurrence(const DensityMatrix& rho) {
  detail::require_two_qubit(rho, "concurrence");
  const Eigen::MatrixXcd yy = kron(Eigen::MatrixXcd(pauli(2)), Eigen::MatrixXcd(pauli(2)));
  const Eigen::MatrixXcd flipped = yy * rho.matrix().conjugate() * yy;
  const Eigen::MatrixXcd root = detail::psd_sqrt(rho.matrix());
  Eigen::MatrixXcd r = root * flipped * root;
  r = 0.5 * (r + r.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r, Eigen::EigenvaluesOnly);
  Eigen::VectorXd lam =
      es.eigenvalues().unaryExpr([](double v) { return v > tol::kEigenClip ? std::sqrt(v) : 0.0; });
  std::sort(lam.data(), lam.data() + lam.size(), std::greater<>());
  return std::max(0.0, lam(0) - lam(1) - lam(2) - lam(3));
}

/// Purities of the seven canonical bipartitions, in Bipartition::canonical() order.
inline std::array<double, 7> bipartition_purities(const ProductSumState& state) {
  std::array<double, 7> out{};
  const auto parts = Bipartition::canonical();
  for (std::size_t i = 0; i < parts.size(); ++i) out[i] = purity_of_part(state, parts[i]);
  return out;
}

/// min over bipartitions of sqrt(2 L(rho_part)) for a pure four-party state.
inline double gme_concurrence(const ProductSumState& state) {
  double best = std::numeric_limits<double>::infinity();
  for (double p : bipartition_purities(state)) best = std::min(best, std::sqrt(2.0 * std::max(0.0, 1.0 - p)));
  return best;
}

// ---------------------------------------------------------------------------
// Nonlocality and steering
// ---------------------------------------------------------------------------

struct ChshSettings {
  ObservableDirection a_plus, a_minus, b_plus, b_minus;

  /// A = x, y; B = -(x+y)/sqrt2, (-x+y)/sqrt2.
  static ChshSettings fixed() {
    return {ObservableDirection(0.0, kPi / 2), ObservableDirection(kPi / 2, kPi / 2),
            ObservableDirection(5 * kPi / 4, kPi / 2), ObservableDirection(3 * kPi / 4, kPi / 2)};
  }
};

inline double chsh_value(const DensityMatrix& rho, const ObservableDirection& a_plus,
                         const ObservableDirection& a_minus, const ObservableDirection& b_plus,
                         const ObservableDirection& b_minus) {
  detail::require_two_qubit(rho, "chsh_value");
  const Eigen::Matrix3d T = bloch_decompose(rho).corr_T;
  auto corr = [&](const ObservableDirection& a, const ObservableDirection& b) {
    return a.unit().dot(T * b.unit());
  };
  return std::abs(corr(a_plus, b_plus) + corr(a_minus, b_plus) + corr(a_plus, b_minus) -
                  corr(a_minus, b_minus));
}

inline double chsh_value(const DensityMatrix& rho, const ChshSettings& s) {
  return chsh_value(rho, s.a_plus, s.a_minus, s.b_plus, s.b_minus);
}

/// max{0, (sqrt(c.c - c_min^2) - 1)/(sqrt2 - 1)}, c = singular values of T.
inline double bell_nonlocality(const DensityMatrix& rho) {
  detail::require_two_qubit(rho, "bell_nonlocality");
  const Eigen::Vector3d c = bloch_decompose(rho).correlation_singular_values();
  const double top_two = c(0) * c(0) + c(1) * c(1);
  return std::max(0.0, (std::sqrt(top_two) - 1.0) / (kSqrt2 - 1.0));
}

inline double epr_steering(const DensityMatrix& rho) {
  detail::require_two_qubit(rho, "epr_steering");
  const Eigen::Matrix3d T = bloch_decompose(rho).corr_T;
  return std::max(0.0, (T.norm() - 1.0) / (std::sqrt(3.0) - 1.0));
}

// ---------------------------------------------------------------------------
// Projective measurement maps
// ---------------------------------------------------------------------------

enum class Side { A, B };

struct MeasurementContext {
  ObservableDirection dir_a;
  ObservableDirection dir_b;
};

/// Unread measurement of v.sigma on qubit factor `factor` of a multipartite state.
inline DensityMatrix measure_factor(const DensityMatrix& rho, std::span<const int> dims, int factor,
                                    const Eigen::Vector3d& v) {
  if (factor < 0 || static_cast<std::size_t>(factor) >= dims.size() || dims[factor] != 2) {
    throw DimensionError("measure_factor: measured factor must be a qubit");
  }
  if (detail::checked_total(dims) != static_cast<std::size_t>(rho.dim())) {
    throw DimensionError("measure_factor: dims do not match the state");
  }
  Index before = 1, after = 1;
  for (int f = 0; f < factor; ++f) before *= dims[f];
  for (std::size_t f = factor + 1; f < dims.size(); ++f) after *= dims[f];
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.dim(), rho.dim());
  for (int s : {1, -1}) {
    const Eigen::MatrixXcd p = kron(kron(Eigen::MatrixXcd::Identity(before, before),
                                         Eigen::MatrixXcd(spin_projector(v, s))),
                                    Eigen::MatrixXcd::Identity(after, after));
    out += p * rho.matrix() * p;
  }
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(std::move(out));
}

inline DensityMatrix measure_map(const DensityMatrix& rho, Side side, const ObservableDirection& dir) {
  detail::require_two_qubit(rho, "measure_map");
  const std::array<int, 2> dims{2, 2};
  return measure_factor(rho, dims, side == Side::A ? 0 : 1, dir.unit());
}

/// Phi_AB = Phi_A o Phi_B.
inline DensityMatrix measure_map(const DensityMatrix& rho, const MeasurementContext& ctx) {
  return measure_map(measure_map(rho, Side::B, ctx.dir_b), Side::A, ctx.dir_a);
}

// ---------------------------------------------------------------------------
// Closed-form entropies of measured two-qubit states
// ---------------------------------------------------------------------------

/// Entropies of Phi_A(rho), Phi_B(rho) and Phi_AB(rho) evaluated straight
/// from the Bloch data (a, b, T), without eigendecompositions.
class MeasuredEntropies {
 public:
  explicit MeasuredEntropies(const DensityMatrix& rho) : MeasuredEntropies(bloch_decompose(rho)) {}

  explicit MeasuredEntropies(const TwoQubitState& st)
      : a_(st.bloch_a), b_(st.bloch_b), T_(st.corr_T), entropy_(von_neumann_entropy(st.rho)) {}

  double entropy() const noexcept { return entropy_; }
  double marginal_a() const { return detail::binary_entropy(0.5 * (1.0 + a_.norm())); }
  double marginal_b() const { return detail::binary_entropy(0.5 * (1.0 + b_.norm())); }
  double mutual_information() const { return marginal_a() + marginal_b() - entropy_; }

  /// S(Phi_A(rho)) for measurement direction v on A.
  double measured_a(const Eigen::Vector3d& v) const { return one_sided(a_, b_, T_.transpose(), v); }
  /// S(Phi_B(rho)).
  double measured_b(const Eigen::Vector3d& v) const { return one_sided(b_, a_, T_, v); }

  /// S(Phi_AB(rho)): Shannon entropy of the four joint outcome probabilities.
  double measured_ab(const Eigen::Vector3d& va, const Eigen::Vector3d& vb) const {
    return joint(a_.dot(va), b_.dot(vb), va.dot(T_ * vb));
  }

  /// Same, from precomputed a.va, b.vb and va.T.vb.
  static double joint(double av, double bv, double tvv) {
    double s = 0.0;
    for (int sa : {1, -1})
      for (int sb : {1, -1}) s += xlogx_neg(0.25 * (1.0 + sa * av + sb * bv + sa * sb * tvv));
    return s;
  }

  const Eigen::Vector3d& bloch_a() const noexcept { return a_; }
  const Eigen::Vector3d& bloch_b() const noexcept { return b_; }
  const Eigen::Matrix3d& corr_T() const noexcept { return T_; }

 private:
  // Measuring the side with Bloch vector `own` along v leaves the other side
  // in Bloch state (other + s Tv)/(1 + s own.v) with probability (1 + s own.v)/2.
  static double one_sided(const Eigen::Vector3d& own, const Eigen::Vector3d& other,
                          const Eigen::Matrix3d& T_to_other, const Eigen::Vector3d& v) {
    const double ov = own.dot(v);
    const Eigen::Vector3d tv = T_to_other * v;
    double s = 0.0;
    for (int sign : {1, -1}) {
      const double p = 0.5 * (1.0 + sign * ov);
      if (p <= tol::kEigenClip) continue;
      const double r = std::min(1.0, (other + sign * tv).norm() / (2.0 * p));
      s += xlogx_neg(p) + p * detail::binary_entropy(0.5 * (1.0 + r));
    }
    return s;
  }

  Eigen::Vector3d a_, b_;
  Eigen::Matrix3d T_;
  double entropy_;
};

// ---------------------------------------------------------------------------
// Direction optimization
// ---------------------------------------------------------------------------

struct OptimizationConfig {
  int theta_points = 64;
  int phi_points = 32;
  int refine_iterations = 40;
  double tolerance = 1e-9;

  void validate() const {
    if (theta_points < 16 || phi_points < 8) {
      throw std::invalid_argument("OptimizationConfig: grid resolution must be at least 16x8");
    }
    if (refine_iterations < 0 || !(tolerance > 0.0)) {
      throw std::invalid_argument("OptimizationConfig: invalid refinement settings");
    }
  }

  double theta_at(int i) const { return 2.0 * kPi * i / theta_points; }
  double phi_at(int j) const { return kPi * j / (phi_points - 1); }
  double theta_step() const { return 2.0 * kPi / theta_points; }
  double phi_step() const { return kPi / (phi_points - 1); }
};

struct OptimizationResult {
  double value = 0.0;
  std::vector<ObservableDirection> directions;
  bool converged = false;
  int sweeps = 0;
};

namespace detail {

inline Eigen::Vector3d angles_to_unit(double theta, double phi) {
  return {std::cos(theta) * std::sin(phi), std::sin(theta) * std::sin(phi), std::cos(phi)};
}

struct RefineOutcome {
  std::vector<double> angles;
  double value;
  bool converged;
  int sweeps;
};

// Coordinate descent over (theta_1, phi_1, ...) with a Brent line search in a
// bracket of one grid spacing around the current point. Angles are left
// unconstrained; any real (theta, phi) names a valid unit vector.
inline RefineOutcome refine_angles(const std::function<double(std::span<const double>)>& f,
                                   std::vector<double> x, const OptimizationConfig& cfg) {
  double fx = f(x);
  const int bits = std::numeric_limits<double>::digits / 2;
  for (int sweep = 1; sweep <= cfg.refine_iterations; ++sweep) {
    const double before = fx;
    for (std::size_t c = 0; c < x.size(); ++c) {
      const double h = c % 2 == 0 ? cfg.theta_step() : cfg.phi_step();
      const double x0 = x[c];
      auto line = [&](double y) {
        x[c] = y;
        return f(x);
      };
      const auto [ymin, fmin] = boost::math::tools::brent_find_minima(line, x0 - h, x0 + h, bits);
      if (fmin < fx) {
        x[c] = ymin;
        fx = fmin;
      } else {
        x[c] = x0;
      }
    }
    if (before - fx < cfg.tolerance) return {std::move(x), fx, true, sweep};
  }
  return {std::move(x), fx, cfg.refine_iterations == 0, cfg.refine_iterations};
}

inline OptimizationResult to_result(const RefineOutcome& r, double sign) {
  OptimizationResult out;
  out.value = sign * r.value;
  out.converged = r.converged;
  out.sweeps = r.sweeps;
  for (std::size_t i = 0; i + 1 < r.angles.size(); i += 2) {
    out.directions.push_back(ObservableDirection::from_vector(angles_to_unit(r.angles[i], r.angles[i + 1])));
  }
  return out;
}

// Grid table of unit vectors, row-major in (theta index, phi index).
inline std::vector<Eigen::Vector3d> direction_grid(const OptimizationConfig& cfg) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(std::size_t(cfg.theta_points) * cfg.phi_points);
  for (int i = 0; i < cfg.theta_points; ++i)
    for (int j = 0; j < cfg.phi_points; ++j) out.push_back(angles_to_unit(cfg.theta_at(i), cfg.phi_at(j)));
  return out;
}

inline std::pair<double, double> grid_angles(const OptimizationConfig& cfg, std::size_t k) {
  return {cfg.theta_at(int(k) / cfg.phi_points), cfg.phi_at(int(k) % cfg.phi_points)};
}

// Minimizes f over one direction: full grid, then refinement of the best point.
inline OptimizationResult minimize_one(const std::function<double(const Eigen::Vector3d&)>& f,
                                       const OptimizationConfig& cfg) {
  cfg.validate();
  const auto grid = direction_grid(cfg);
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = f(grid[k]);
    if (v < best_value) {
      best_value = v;
      best = k;
    }
  }
  const auto [th, ph] = grid_angles(cfg, best);
  const auto r = refine_angles(
      [&](std::span<const double> x) { return f(angles_to_unit(x[0], x[1])); }, {th, ph}, cfg);
  return to_result(r, 1.0);
}

// Minimizes f over a pair of directions. `pair_grid(i, j)` evaluates grid
// points i and j cheaply; `f` is the exact objective used for refinement.
template <typename PairGrid>
OptimizationResult minimize_two(
    PairGrid&& pair_grid,
    const std::function<double(const Eigen::Vector3d&, const Eigen::Vector3d&)>& f,
    const std::vector<std::array<double, 4>>& seeds, const OptimizationConfig& cfg, double sign) {
  cfg.validate();
  const std::size_t n = std::size_t(cfg.theta_points) * cfg.phi_points;
  std::size_t bi = 0, bj = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = pair_grid(i, j);
      if (v < best_value) {
        best_value = v;
        bi = i;
        bj = j;
      }
    }
  }
  auto objective = [&](std::span<const double> x) {
    return f(angles_to_unit(x[0], x[1]), angles_to_unit(x[2], x[3]));
  };
  const auto [t1, p1] = grid_angles(cfg, bi);
  const auto [t2, p2] = grid_angles(cfg, bj);
  std::vector<std::array<double, 4>> starts = {{t1, p1, t2, p2}};
  starts.insert(starts.end(), seeds.begin(), seeds.end());
  // Seeds compete on their raw value; only the best start is refined, plus the
  // grid optimum, so the cost stays two refinements.
  std::size_t best_seed = 0;
  double best_seed_value = std::numeric_limits<double>::infinity();
  for (std::size_t s = 1; s < starts.size(); ++s) {
    const double v = objective(starts[s]);
    if (v < best_seed_value) {
      best_seed_value = v;
      best_seed = s;
    }
  }
  RefineOutcome best = refine_angles(objective, {starts[0].begin(), starts[0].end()}, cfg);
  if (best_seed != 0) {
    RefineOutcome alt = refine_angles(objective, {starts[best_seed].begin(), starts[best_seed].end()}, cfg);
    if (alt.value < best.value) best = std::move(alt);
  }
  return to_result(best, sign);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Discord
// ---------------------------------------------------------------------------

/// I(rho) - I(Phi(rho)) minimized over the direction measured on `side`.
inline OptimizationResult quantum_discord(const DensityMatrix& rho, Side side,
                                          const OptimizationConfig& cfg = {}) {
  detail::require_two_qubit(rho, "quantum_discord");
  const MeasuredEntropies m(rho);
  const Eigen::Vector3d& own = side == Side::A ? m.bloch_a() : m.bloch_b();
  const double own_marginal = side == Side::A ? m.marginal_a() : m.marginal_b();
  // I(rho) - I(Phi(rho)) = S(rho_own) - S(rho) + S(Phi(rho)) - H((1 + own.v)/2)
  auto f = [&](const Eigen::Vector3d& v) {
    const double measured = side == Side::A ? m.measured_a(v) : m.measured_b(v);
    return own_marginal - m.entropy() + measured - detail::binary_entropy(0.5 * (1.0 + own.dot(v)));
  };
  OptimizationResult r = detail::minimize_one(f, cfg);
  r.value = std::max(0.0, r.value);
  return r;
}

/// I(rho) - I(Phi_AB(rho)) minimized over both directions.
inline OptimizationResult symmetric_discord(const DensityMatrix& rho, const OptimizationConfig& cfg = {}) {
  detail::require_two_qubit(rho, "symmetric_discord");
  cfg.validate();
  const MeasuredEntropies m(rho);
  const double mi = m.mutual_information();
  const auto grid = detail::direction_grid(cfg);
  std::vector<double> av(grid.size()), bv(grid.size()), ha(grid.size()), hb(grid.size());
  std::vector<Eigen::Vector3d> tv(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    av[k] = m.bloch_a().dot(grid[k]);
    bv[k] = m.bloch_b().dot(grid[k]);
    ha[k] = detail::binary_entropy(0.5 * (1.0 + av[k]));
    hb[k] = detail::binary_entropy(0.5 * (1.0 + bv[k]));
    tv[k] = m.corr_T().transpose() * grid[k];
  }
  auto pair_grid = [&](std::size_t i, std::size_t j) {
    const double joint = MeasuredEntropies::joint(av[i], bv[j], tv[i].dot(grid[j]));
    return mi - (ha[i] + hb[j] - joint);
  };
  auto f = [&](const Eigen::Vector3d& va, const Eigen::Vector3d& vb) {
    const double a = m.bloch_a().dot(va), b = m.bloch_b().dot(vb);
    return mi - (detail::binary_entropy(0.5 * (1.0 + a)) + detail::binary_entropy(0.5 * (1.0 + b)) -
                 m.measured_ab(va, vb));
  };
  OptimizationResult r = detail::minimize_two(pair_grid, f, {}, cfg, 1.0);
  r.value = std::max(0.0, r.value);
  return r;
}

// ---------------------------------------------------------------------------
// Irreality and realism-based nonlocality
// ---------------------------------------------------------------------------

/// I_A(rho) = S(Phi_A(rho)) - S(rho) for a measurement on qubit factor `factor`.
inline double irreality(const DensityMatrix& rho, std::span<const int> dims, int factor,
                        const ObservableDirection& dir) {
  const double value = von_neumann_entropy(measure_factor(rho, dims, factor, dir.unit())) -
                       von_neumann_entropy(rho);
  return std::max(0.0, value);
}

inline double irreality(const DensityMatrix& rho, const ObservableDirection& dir, Side side = Side::A) {
  detail::require_two_qubit(rho, "irreality");
  const std::array<int, 2> dims{2, 2};
  return irreality(rho, dims, side == Side::A ? 0 : 1, dir);
}

class InadmissibleDirection : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Default exclusion threshold (nats) on the scaled-irreality denominator.
inline constexpr double kScaledIrrealityDelta = 0.05;

/// (I(rho_t) - I(rho_inf)) / (I(rho_0) - I(rho_inf)); rejects directions whose
/// denominator does not exceed delta.
inline double scaled_irreality(const DensityMatrix& rho_t, const DensityMatrix& rho_0,
                               const DensityMatrix& rho_inf, const ObservableDirection& dir,
                               Side side = Side::A, double delta = kScaledIrrealityDelta) {
  const double i_inf = irreality(rho_inf, dir, side);
  const double denom = irreality(rho_0, dir, side) - i_inf;
  if (!(std::abs(denom) > delta)) {
    throw InadmissibleDirection("scaled_irreality: irreality range below the exclusion threshold");
  }
  return (irreality(rho_t, dir, side) - i_inf) / denom;
}

/// eta_AB = S(Phi_A) + S(Phi_B) - S(Phi_AB) - S(rho), by dense evaluation.
inline double contextual_rbn(const DensityMatrix& rho, const MeasurementContext& ctx) {
  detail::require_two_qubit(rho, "contextual_rbn");
  const double value = von_neumann_entropy(measure_map(rho, Side::A, ctx.dir_a)) +
                       von_neumann_entropy(measure_map(rho, Side::B, ctx.dir_b)) -
                       von_neumann_entropy(measure_map(rho, ctx)) - von_neumann_entropy(rho);
  return std::max(0.0, value);
}

/// Seeds for the realism-based nonlocality search: A = B on the circle
/// orthogonal to the coin axis (x+z)/sqrt2, and all pairs of coordinate axes.
inline std::vector<std::array<double, 4>> rbn_seeds() {
  std::vector<std::array<double, 4>> seeds;
  const Eigen::Vector3d e1 = Eigen::Vector3d(1, 0, -1) / kSqrt2;
  const Eigen::Vector3d e2(0, 1, 0);
  for (int k = 0; k < 8; ++k) {
    const double psi = kPi * k / 8;
    const auto d = ObservableDirection::from_vector(std::cos(psi) * e1 + std::sin(psi) * e2);
    seeds.push_back({d.theta(), d.phi(), d.theta(), d.phi()});
  }
  const std::array<ObservableDirection, 3> axes = {ObservableDirection::x_axis(),
                                                   ObservableDirection::y_axis(),
                                                   ObservableDirection::z_axis()};
  for (const auto& a : axes)
    for (const auto& b : axes) seeds.push_back({a.theta(), a.phi(), b.theta(), b.phi()});
  return seeds;
}

/// N(rho) = max over contexts of eta_AB.
inline OptimizationResult rbn(const DensityMatrix& rho, const OptimizationConfig& cfg = {}) {
  detail::require_two_qubit(rho, "rbn");
  cfg.validate();
  const MeasuredEntropies m(rho);
  const auto grid = detail::direction_grid(cfg);
  std::vector<double> av(grid.size()), bv(grid.size()), sa(grid.size()), sb(grid.size());
  std::vector<Eigen::Vector3d> tv(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    av[k] = m.bloch_a().dot(grid[k]);
    bv[k] = m.bloch_b().dot(grid[k]);
    sa[k] = m.measured_a(grid[k]);
    sb[k] = m.measured_b(grid[k]);
    tv[k] = m.corr_T().transpose() * grid[k];
  }
  const double s = m.entropy();
  auto pair_grid = [&](std::size_t i, std::size_t j) {
    return -(sa[i] + sb[j] - MeasuredEntropies::joint(av[i], bv[j], tv[i].dot(grid[j])) - s);
  };
  auto f = [&](const Eigen::Vector3d& va, const Eigen::Vector3d& vb) {
    return -(m.measured_a(va) + m.measured_b(vb) - m.measured_ab(va, vb) - s);
  };
  OptimizationResult r = detail::minimize_two(pair_grid, f, rbn_seeds(), cfg, -1.0);
  r.value = std::max(0.0, r.value);
  return r;
}

}  // namespace qwq
