// qwq/core.hpp
// Lattice-indexed spinor states, density matrices, Pauli observables and the
// two-qubit Bloch (Luo) representation.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qwq {

using cplx = std::complex<double>;
using Eigen::Index;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kLn2 = std::numbers::ln2;

namespace tol {
inline constexpr double kNorm = 1e-10;
inline constexpr double kHermitian = 1e-12;
inline constexpr double kTrace = 1e-10;
inline constexpr double kPsd = 1e-10;
inline constexpr double kUnitary = 1e-14;
inline constexpr double kFidelityNorm = 1e-8;
// Eigenvalues below this are treated as exact zeros before logs and roots.
inline constexpr double kEigenClip = 1e-12;
}  // namespace tol

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvariantError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Lattice
// ---------------------------------------------------------------------------

/// Inclusive range of integer lattice sites [x_min, x_max].
struct LatticeWindow {
  int x_min = 0;
  int x_max = 0;

  constexpr LatticeWindow() = default;
  LatticeWindow(int lo, int hi) : x_min(lo), x_max(hi) {
    if (lo > hi) {
      throw DimensionError("LatticeWindow: x_min > x_max");
    }
  }

  static LatticeWindow symmetric(int half_width) { return {-half_width, half_width}; }

  Index size() const noexcept { return Index(x_max) - Index(x_min) + 1; }
  bool contains(int x) const noexcept { return x >= x_min && x <= x_max; }
  Index index(int x) const noexcept { return Index(x) - Index(x_min); }
  int site(Index i) const noexcept { return x_min + static_cast<int>(i); }

  friend bool operator==(const LatticeWindow&, const LatticeWindow&) = default;
};

/// Radius beyond which a Gaussian of dispersion sigma0 is truncated to zero.
/// Probability mass outside |x| <= 8 sigma0 is below 1.3e-15.
inline int gaussian_support_radius(double sigma0) {
  if (!(sigma0 > 0.0)) {
    throw std::invalid_argument("gaussian_support_radius: sigma0 must be positive");
  }
  return static_cast<int>(std::ceil(8.0 * sigma0));
}

/// Window large enough to evolve a truncated Gaussian for `horizon` steps:
/// the support grows by exactly one site per step on each side.
inline LatticeWindow window_for_horizon(double sigma0, int horizon) {
  if (horizon < 0) {
    throw std::invalid_argument("window_for_horizon: negative horizon");
  }
  return LatticeWindow::symmetric(horizon + gaussian_support_radius(sigma0));
}

// ---------------------------------------------------------------------------
// Single-walker state
// ---------------------------------------------------------------------------

/// Spin-1/2 amplitudes a(x), b(x) over a lattice window. Row 0 holds spin up,
/// row 1 spin down. Always normalized to within tol::kNorm.
class WalkerState {
 public:
  using Amplitudes = Eigen::Matrix<cplx, 2, Eigen::Dynamic>;

  WalkerState(LatticeWindow window, Amplitudes amps)
      : window_(window), amps_(std::move(amps)) {
    if (amps_.cols() != window_.size()) {
      throw DimensionError("WalkerState: amplitude count does not match window");
    }
    const double n2 = amps_.squaredNorm();
    if (std::abs(n2 - 1.0) > tol::kNorm) {
      throw InvariantError("WalkerState: norm deviates from 1 by " +
                           std::to_string(std::abs(n2 - 1.0)));
    }
  }

  /// |spin> (x) |x> with spin = up*|up> + down*|down>.
  static WalkerState localized(LatticeWindow window, int x, cplx up, cplx down) {
    if (!window.contains(x)) {
      throw DimensionError("WalkerState::localized: site outside window");
    }
    Amplitudes a = Amplitudes::Zero(2, window.size());
    a(0, window.index(x)) = up;
    a(1, window.index(x)) = down;
    return WalkerState(window, std::move(a));
  }

  const LatticeWindow& window() const noexcept { return window_; }
  const Amplitudes& amplitudes() const noexcept { return amps_; }

  cplx up_at(int x) const noexcept { return window_.contains(x) ? amps_(0, window_.index(x)) : cplx{}; }
  cplx down_at(int x) const noexcept {
    return window_.contains(x) ? amps_(1, window_.index(x)) : cplx{};
  }

  double norm_squared() const { return amps_.squaredNorm(); }

  /// Spin-major state vector: index s * L + (x - x_min).
  Eigen::VectorXcd vector() const {
    const Index n = window_.size();
    Eigen::VectorXcd v(2 * n);
    v.head(n) = amps_.row(0).transpose();
    v.tail(n) = amps_.row(1).transpose();
    return v;
  }

 private:
  LatticeWindow window_;
  Amplitudes amps_;
};

// ---------------------------------------------------------------------------
// Small linear-algebra helpers
// ---------------------------------------------------------------------------

/// Kronecker product; works for any pair of matrices or column vectors.
template <typename A, typename B>
Eigen::MatrixXcd kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = cplx(a(i, j)) * b.template cast<cplx>();
    }
  }
  return out;
}

inline double hermitian_defect(const Eigen::MatrixXcd& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Shannon-type -x ln x with the clip convention 0 ln 0 = 0.
inline double xlogx_neg(double x) {
  return x > tol::kEigenClip ? -x * std::log(x) : 0.0;
}

// ---------------------------------------------------------------------------
// Density matrices
// ---------------------------------------------------------------------------

/// Hermitian, unit-trace complex matrix. Hermiticity and trace are checked on
/// construction; positivity is checked on demand (is_psd) because it needs a
/// full eigendecomposition.
class DensityMatrix {
 public:
  explicit DensityMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols()) {
      throw DimensionError("DensityMatrix: matrix must be square and nonempty");
    }
    const double herm = hermitian_defect(m_);
    if (herm >= tol::kHermitian) {
      throw InvariantError("DensityMatrix: not Hermitian (defect " + std::to_string(herm) + ")");
    }
    const cplx tr = m_.trace();
    if (std::abs(tr - 1.0) > tol::kTrace) {
      throw InvariantError("DensityMatrix: trace deviates from 1 by " +
                           std::to_string(std::abs(tr - 1.0)));
    }
  }

  static DensityMatrix pure(const Eigen::VectorXcd& psi) {
    return DensityMatrix(psi * psi.adjoint());
  }

  static DensityMatrix maximally_mixed(Index dim) {
    return DensityMatrix(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
  }

  Index dim() const noexcept { return m_.rows(); }
  const Eigen::MatrixXcd& matrix() const noexcept { return m_; }

  /// Ascending eigenvalues.
  Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  double min_eigenvalue() const { return eigenvalues().minCoeff(); }
  bool is_psd(double tolerance = tol::kPsd) const { return min_eigenvalue() >= -tolerance; }

  double purity() const { return m_.squaredNorm(); }

 private:
  Eigen::MatrixXcd m_;
};

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

/// Unit Bloch vector (cos t sin p, sin t sin p, cos p); theta in [0, 2pi),
/// phi in [0, pi].
class ObservableDirection {
 public:
  ObservableDirection(double theta, double phi) : theta_(wrap(theta)), phi_(phi) {
    constexpr double slack = 1e-12;
    if (!(phi >= -slack && phi <= kPi + slack)) {
      throw std::invalid_argument("ObservableDirection: phi outside [0, pi]");
    }
    phi_ = std::clamp(phi, 0.0, kPi);
  }

  static ObservableDirection from_vector(const Eigen::Vector3d& v) {
    const double n = v.norm();
    if (!(n > 0.0)) {
      throw std::invalid_argument("ObservableDirection::from_vector: zero vector");
    }
    const Eigen::Vector3d u = v / n;
    const double phi = std::acos(std::clamp(u.z(), -1.0, 1.0));
    const double theta = std::atan2(u.y(), u.x());
    return {theta, phi};
  }

  static ObservableDirection x_axis() { return {0.0, kPi / 2}; }
  static ObservableDirection y_axis() { return {kPi / 2, kPi / 2}; }
  static ObservableDirection z_axis() { return {0.0, 0.0}; }

  double theta() const noexcept { return theta_; }
  double phi() const noexcept { return phi_; }

  Eigen::Vector3d unit() const {
    return {std::cos(theta_) * std::sin(phi_), std::sin(theta_) * std::sin(phi_), std::cos(phi_)};
  }

 private:
  static double wrap(double theta) {
    double t = std::fmod(theta, 2.0 * kPi);
    if (t < 0.0) t += 2.0 * kPi;
    if (t >= 2.0 * kPi) t = 0.0;
    return t;
  }

  double theta_;
  double phi_;
};

/// Pauli matrix sigma_i for i in {1, 2, 3} = (x, y, z).
inline Eigen::Matrix2cd pauli(int i) {
  const cplx I{0.0, 1.0};
  Eigen::Matrix2cd m;
  switch (i) {
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -I, I, 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw std::out_of_range("pauli: index must be 1, 2 or 3");
  }
  return m;
}

inline Eigen::Matrix2cd pauli_observable(const Eigen::Vector3d& v) {
  return v.x() * pauli(1) + v.y() * pauli(2) + v.z() * pauli(3);
}

/// v . sigma for the direction's unit vector.
inline Eigen::Matrix2cd pauli_observable(const ObservableDirection& dir) {
  return pauli_observable(dir.unit());
}

/// Projector (1 + s v.sigma)/2, s = +1 or -1.
inline Eigen::Matrix2cd spin_projector(const Eigen::Vector3d& v, int s) {
  return 0.5 * (Eigen::Matrix2cd::Identity() + static_cast<double>(s) * pauli_observable(v));
}

// ---------------------------------------------------------------------------
// Bell basis, two-spin order |uu>, |ud>, |du>, |dd>
// ---------------------------------------------------------------------------

namespace bell {

inline Eigen::Vector4cd b1() { return Eigen::Vector4cd(1, 0, 0, 1) / kSqrt2; }
inline Eigen::Vector4cd b2() { return Eigen::Vector4cd(1, 0, 0, -1) / kSqrt2; }
inline Eigen::Vector4cd b3() { return Eigen::Vector4cd(0, 1, 1, 0) / kSqrt2; }
inline Eigen::Vector4cd b4() { return Eigen::Vector4cd(0, 1, -1, 0) / kSqrt2; }

/// (B2 - B3)/sqrt(2).
inline Eigen::Vector4cd beta23() { return (b2() - b3()) / kSqrt2; }

inline std::array<Eigen::Vector4cd, 4> basis() { return {b1(), b2(), b3(), b4()}; }

}  // namespace bell

// ---------------------------------------------------------------------------
// Two-qubit Bloch form
// ---------------------------------------------------------------------------

/// rho = 1/4 (1x1 + a.sigma x 1 + 1 x b.sigma + sum_ij T_ij sigma_i x sigma_j).
struct TwoQubitState {
  DensityMatrix rho;
  Eigen::Vector3d bloch_a;
  Eigen::Vector3d bloch_b;
  Eigen::Matrix3d corr_T;

  /// Luo-form correlation coefficients |c_i|: singular values of T, descending.
  Eigen::Vector3d correlation_singular_values() const {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(corr_T);
    return svd.singularValues();
  }
};

inline Eigen::Matrix4cd two_qubit_from_bloch(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                             const Eigen::Matrix3d& T) {
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  Eigen::MatrixXcd m = kron(id, id);
  for (int i = 0; i < 3; ++i) {
    m += a(i) * kron(pauli(i + 1), id);
    m += b(i) * kron(id, pauli(i + 1));
    for (int j = 0; j < 3; ++j) {
      m += T(i, j) * kron(pauli(i + 1), pauli(j + 1));
    }
  }
  return m / 4.0;
}

inline TwoQubitState bloch_decompose(const DensityMatrix& rho) {
  if (rho.dim() != 4) {
    throw DimensionError("bloch_decompose: expected a 4x4 density matrix");
  }
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  const Eigen::MatrixXcd& m = rho.matrix();
  Eigen::Vector3d a, b;
  Eigen::Matrix3d T;
  for (int i = 0; i < 3; ++i) {
    a(i) = (m * kron(pauli(i + 1), id)).trace().real();
    b(i) = (m * kron(id, pauli(i + 1))).trace().real();
    for (int j = 0; j < 3; ++j) {
      T(i, j) = (m * kron(pauli(i + 1), pauli(j + 1))).trace().real();
    }
  }
  return {rho, a, b, T};
}

// ---------------------------------------------------------------------------
// Tensor-factor manipulation
// ---------------------------------------------------------------------------

namespace detail {

inline std::size_t checked_total(std::span<const int> dims) {
  std::size_t total = 1;
  for (int d : dims) {
    if (d <= 0) throw DimensionError("factor dimensions must be positive");
    total *= static_cast<std::size_t>(d);
  }
  return total;
}

// For every full index, the composite index over `kept` (in the given order)
// and over the remaining factors (in original order).
struct SplitIndex {
  std::vector<Index> kept;
  std::vector<Index> traced;
  Index kept_dim = 1;
  Index traced_dim = 1;
};

inline SplitIndex split_index(std::span<const int> dims, std::span<const int> kept_factors) {
  const std::size_t n = dims.size();
  std::vector<bool> is_kept(n, false);
  for (int k : kept_factors) {
    if (k < 0 || static_cast<std::size_t>(k) >= n || is_kept[k]) {
      throw DimensionError("invalid or repeated factor index");
    }
    is_kept[k] = true;
  }
  std::vector<int> traced_factors;
  for (std::size_t f = 0; f < n; ++f) {
    if (!is_kept[f]) traced_factors.push_back(static_cast<int>(f));
  }

  const std::size_t total = checked_total(dims);
  SplitIndex out;
  out.kept.resize(total);
  out.traced.resize(total);
  for (int k : kept_factors) out.kept_dim *= dims[k];
  for (int k : traced_factors) out.traced_dim *= dims[k];

  std::vector<int> digit(n, 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Index ki = 0, ti = 0;
    for (int k : kept_factors) ki = ki * dims[k] + digit[k];
    for (int k : traced_factors) ti = ti * dims[k] + digit[k];
    out.kept[idx] = ki;
    out.traced[idx] = ti;
    for (std::size_t f = n; f-- > 0;) {
      if (++digit[f] < dims[f]) break;
      digit[f] = 0;
    }
  }
  return out;
}

inline void check_keep(std::span<const int> dims, std::span<const int> keep) {
  if (keep.empty() || keep.size() >= dims.size()) {
    throw DimensionError("partial_trace: keep must be a nonempty proper subset of the factors");
  }
}

}  // namespace detail

/// Reduced density matrix of `rho` on the factors listed in `keep`; the
/// result's factors appear in the order given by `keep`.
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> dims,
                                   std::span<const int> keep) {
  detail::check_keep(dims, keep);
  if (detail::checked_total(dims) != static_cast<std::size_t>(rho.dim())) {
    throw DimensionError("partial_trace: product of dims does not match matrix dimension");
  }
  const auto split = detail::split_index(dims, keep);
  // Group full indices by traced index.
  std::vector<std::vector<Index>> by_traced(split.traced_dim);
  for (std::size_t i = 0; i < split.traced.size(); ++i) by_traced[split.traced[i]].push_back(Index(i));

  const Eigen::MatrixXcd& m = rho.matrix();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(split.kept_dim, split.kept_dim);
  for (const auto& group : by_traced) {
    for (Index i : group) {
      for (Index j : group) out(split.kept[i], split.kept[j]) += m(i, j);
    }
  }
  return DensityMatrix(std::move(out));
}

/// Reduced state of the pure state |psi><psi| without forming the full matrix.
inline DensityMatrix partial_trace(const Eigen::VectorXcd& psi, std::span<const int> dims,
                                   std::span<const int> keep) {
  detail::check_keep(dims, keep);
  if (detail::checked_total(dims) != static_cast<std::size_t>(psi.size())) {
    throw DimensionError("partial_trace: product of dims does not match vector length");
  }
  const auto split = detail::split_index(dims, keep);
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(split.kept_dim, split.traced_dim);
  for (Index i = 0; i < psi.size(); ++i) M(split.kept[i], split.traced[i]) = psi(i);
  return DensityMatrix(M * M.adjoint());
}

/// Reorders tensor factors: factor k of the result is factor perm[k] of `m`.
inline Eigen::MatrixXcd permute_factors(const Eigen::MatrixXcd& m, std::span<const int> dims,
                                        std::span<const int> perm) {
  if (perm.size() != dims.size()) throw DimensionError("permute_factors: rank mismatch");
  const std::size_t total = detail::checked_total(dims);
  if (total != static_cast<std::size_t>(m.rows()) || m.rows() != m.cols()) {
    throw DimensionError("permute_factors: dimension mismatch");
  }
  const auto split = detail::split_index(dims, perm);  // kept = new composite index
  Eigen::MatrixXcd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = 0; j < total; ++j) {
      out(split.kept[i], split.kept[j]) = m(Index(i), Index(j));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fidelity
// ---------------------------------------------------------------------------

/// |<chi|psi>|^2 for normalized state vectors of equal dimension.
inline double fidelity(const Eigen::VectorXcd& psi, const Eigen::VectorXcd& chi) {
  if (psi.size() != chi.size()) throw DimensionError("fidelity: dimension mismatch");
  if (std::abs(psi.squaredNorm() - 1.0) > tol::kFidelityNorm ||
      std::abs(chi.squaredNorm() - 1.0) > tol::kFidelityNorm) {
    throw InvariantError("fidelity: input state is not normalized");
  }
  return std::norm(chi.dot(psi));
}

}  // namespace qwq
