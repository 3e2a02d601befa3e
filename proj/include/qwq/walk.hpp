// qwq/walk.hpp
// Exact Hadamard-walk evolution for one walker and for two noninteracting
// walkers held as a short sum of product states.

#pragma once

#include "qwq/core.hpp"

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qwq {

class WindowOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a position-containing reduced state would exceed the dense cap.
class DimensionCapExceeded : public DimensionError {
 public:
  using DimensionError::DimensionError;
};

inline constexpr Index kReducedDimensionCap = 4096;

// ---------------------------------------------------------------------------
// Coin
// ---------------------------------------------------------------------------

class CoinOperator {
 public:
  explicit CoinOperator(const Eigen::Matrix2cd& m) : m_(m) {
    const double defect = (m_.adjoint() * m_ - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
    if (defect > tol::kUnitary) {
      throw InvariantError("CoinOperator: matrix is not unitary (defect " + std::to_string(defect) +
                           ")");
    }
  }

  static CoinOperator hadamard() {
    Eigen::Matrix2cd h;
    h << 1, 1, 1, -1;
    return CoinOperator(h / kSqrt2);
  }

  const Eigen::Matrix2cd& matrix() const noexcept { return m_; }

 private:
  Eigen::Matrix2cd m_;
};

// ---------------------------------------------------------------------------
// One walker
// ---------------------------------------------------------------------------

/// One step U = D (C x 1): coin on the spin, then up moves to x+1 and down to x-1.
inline WalkerState step(const WalkerState& state, const CoinOperator& coin = CoinOperator::hadamard()) {
  const Index n = state.window().size();
  const WalkerState::Amplitudes mixed = coin.matrix() * state.amplitudes();
  if (mixed(0, n - 1) != cplx{} || mixed(1, 0) != cplx{}) {
    throw WindowOverflow("step: amplitude would leave the lattice window");
  }
  WalkerState::Amplitudes out = WalkerState::Amplitudes::Zero(2, n);
  if (n > 1) {
    out.row(0).tail(n - 1) = mixed.row(0).head(n - 1);
    out.row(1).head(n - 1) = mixed.row(1).tail(n - 1);
  }
  return WalkerState(state.window(), std::move(out));
}

inline WalkerState evolve(WalkerState state, int t, const CoinOperator& coin = CoinOperator::hadamard()) {
  if (t < 0) throw std::invalid_argument("evolve: negative step count");
  for (int i = 0; i < t; ++i) state = step(state, coin);
  return state;
}

/// p(x) = |a(x)|^2 + |b(x)|^2 over the window.
inline Eigen::VectorXd position_distribution(const WalkerState& state) {
  return state.amplitudes().colwise().squaredNorm().transpose();
}

/// <bra|ket> evaluated on the intersection of the two windows.
inline cplx inner(const WalkerState& bra, const WalkerState& ket) {
  const int lo = std::max(bra.window().x_min, ket.window().x_min);
  const int hi = std::min(bra.window().x_max, ket.window().x_max);
  if (lo > hi) return {};
  const Index len = Index(hi) - lo + 1;
  const auto b = bra.amplitudes().middleCols(bra.window().index(lo), len);
  const auto k = ket.amplitudes().middleCols(ket.window().index(lo), len);
  return (b.conjugate().cwiseProduct(k)).sum();
}

inline double fidelity(const WalkerState& a, const WalkerState& b) { return std::norm(inner(a, b)); }

// ---------------------------------------------------------------------------
// Two walkers
// ---------------------------------------------------------------------------

/// sum_j c_j |L_j> (x) |R_j>, rank 1..4. All left factors share one window and
/// all right factors share another.
class ProductSumState {
 public:
  struct Term {
    cplx coeff;
    WalkerState left;
    WalkerState right;
  };

  explicit ProductSumState(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty() || terms_.size() > 4) {
      throw DimensionError("ProductSumState: rank must be between 1 and 4");
    }
    for (const auto& term : terms_) {
      if (term.left.window() != terms_.front().left.window() ||
          term.right.window() != terms_.front().right.window()) {
        throw DimensionError("ProductSumState: factors must share their windows");
      }
    }
    const double n2 = norm_squared();
    if (std::abs(n2 - 1.0) > tol::kNorm) {
      throw InvariantError("ProductSumState: norm deviates from 1 by " +
                           std::to_string(std::abs(n2 - 1.0)));
    }
  }

  std::size_t rank() const noexcept { return terms_.size(); }
  const std::vector<Term>& terms() const noexcept { return terms_; }
  const LatticeWindow& left_window() const noexcept { return terms_.front().left.window(); }
  const LatticeWindow& right_window() const noexcept { return terms_.front().right.window(); }

  double norm_squared() const {
    cplx sum{};
    for (const auto& j : terms_) {
      for (const auto& k : terms_) {
        sum += std::conj(j.coeff) * k.coeff * inner(j.left, k.left) * inner(j.right, k.right);
      }
    }
    return sum.real();
  }

 private:
  std::vector<Term> terms_;
};

inline ProductSumState evolve_two(const ProductSumState& state, int t,
                                  const CoinOperator& coin = CoinOperator::hadamard()) {
  std::vector<ProductSumState::Term> out;
  out.reserve(state.rank());
  for (const auto& term : state.terms()) {
    out.push_back({term.coeff, evolve(term.left, t, coin), evolve(term.right, t, coin)});
  }
  return ProductSumState(std::move(out));
}

inline cplx inner(const ProductSumState& bra, const ProductSumState& ket) {
  cplx sum{};
  for (const auto& j : bra.terms()) {
    for (const auto& k : ket.terms()) {
      sum += std::conj(j.coeff) * k.coeff * inner(j.left, k.left) * inner(j.right, k.right);
    }
  }
  return sum;
}

inline double fidelity(const ProductSumState& a, const ProductSumState& b) {
  return std::norm(inner(a, b));
}

/// Dense amplitude vector in factor order (S1, S2, X1, X2):
/// index ((s1*2 + s2)*L1 + i1)*L2 + i2.
inline Eigen::VectorXcd to_dense(const ProductSumState& state) {
  const Index l1 = state.left_window().size();
  const Index l2 = state.right_window().size();
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4 * l1 * l2);
  for (const auto& term : state.terms()) {
    for (int s1 = 0; s1 < 2; ++s1) {
      for (int s2 = 0; s2 < 2; ++s2) {
        // block(i1, i2) = c L(s1, i1) R(s2, i2), stored row-major in i2
        Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> block(
            psi.data() + (s1 * 2 + s2) * l1 * l2, l1, l2);
        block.noalias() += term.coeff * term.left.amplitudes().row(s1).transpose() *
                           term.right.amplitudes().row(s2);
      }
    }
  }
  return psi;
}

inline std::array<int, 4> dense_dims(const ProductSumState& state) {
  return {2, 2, static_cast<int>(state.left_window().size()),
          static_cast<int>(state.right_window().size())};
}

/// Reference two-walker evolution on the full 4 L1 L2 vector (same layout as
/// to_dense). Used as an oracle for the low-rank engine.
inline Eigen::VectorXcd dense_evolve_two(Eigen::VectorXcd psi, Index l1, Index l2, int t,
                                         const CoinOperator& coin = CoinOperator::hadamard()) {
  if (psi.size() != 4 * l1 * l2) throw DimensionError("dense_evolve_two: size mismatch");
  const Eigen::Matrix4cd cc = kron(Eigen::MatrixXcd(coin.matrix()), Eigen::MatrixXcd(coin.matrix()));
  using Block = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  for (int step_i = 0; step_i < t; ++step_i) {
    std::array<Block, 4> in, out;
    for (int s = 0; s < 4; ++s) in[s] = Eigen::Map<Block>(psi.data() + s * l1 * l2, l1, l2);
    for (int s = 0; s < 4; ++s) {
      Block mixed = Block::Zero(l1, l2);
      for (int r = 0; r < 4; ++r) mixed += cc(s, r) * in[r];
      const int s1 = s / 2, s2 = s % 2;
      // Walker 1 moves along rows, walker 2 along columns.
      const bool edge1 = s1 == 0 ? mixed.row(l1 - 1).cwiseAbs().maxCoeff() > 0
                                 : mixed.row(0).cwiseAbs().maxCoeff() > 0;
      const bool edge2 = s2 == 0 ? mixed.col(l2 - 1).cwiseAbs().maxCoeff() > 0
                                 : mixed.col(0).cwiseAbs().maxCoeff() > 0;
      if (edge1 || edge2) throw WindowOverflow("dense_evolve_two: amplitude would leave the window");
      Block shifted = Block::Zero(l1, l2);
      const Index r0 = s1 == 0 ? 1 : 0, rs = s1 == 0 ? 0 : 1;
      const Index c0 = s2 == 0 ? 1 : 0, cs = s2 == 0 ? 0 : 1;
      shifted.block(r0, c0, l1 - 1, l2 - 1) = mixed.block(rs, cs, l1 - 1, l2 - 1);
      out[s] = std::move(shifted);
    }
    for (int s = 0; s < 4; ++s) Eigen::Map<Block>(psi.data() + s * l1 * l2, l1, l2) = out[s];
  }
  return psi;
}

// ---------------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------------

enum class Walker { first = 1, second = 2 };
enum class Spin { up = 0, down = 1 };

/// p(x1, x2), rows indexed by walker 1's window.
inline Eigen::MatrixXd joint_distribution(const ProductSumState& state) {
  const Index l1 = state.left_window().size();
  const Index l2 = state.right_window().size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(l1, l2);
  for (int s1 = 0; s1 < 2; ++s1) {
    for (int s2 = 0; s2 < 2; ++s2) {
      Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(l1, l2);
      for (const auto& term : state.terms()) {
        amp.noalias() += term.coeff * term.left.amplitudes().row(s1).transpose() *
                         term.right.amplitudes().row(s2);
      }
      p += amp.cwiseAbs2();
    }
  }
  return p;
}

namespace detail {

// sum_{jk} c_j c_k* A_j(mu, x) conj(A_k(mu, x)) <B_k|B_j>, where A is the
// chosen walker's factor and B the other one.
inline Eigen::VectorXd conditional_profile(const ProductSumState& state, Walker walker, int mu) {
  const auto& terms = state.terms();
  const bool first = walker == Walker::first;
  const Index len = first ? state.left_window().size() : state.right_window().size();
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(len);
  for (const auto& j : terms) {
    for (const auto& k : terms) {
      const auto& aj = first ? j.left : j.right;
      const auto& ak = first ? k.left : k.right;
      const cplx other = first ? inner(k.right, j.right) : inner(k.left, j.left);
      acc += (j.coeff * std::conj(k.coeff) * other) *
             aj.amplitudes().row(mu).transpose().cwiseProduct(ak.amplitudes().row(mu).adjoint());
    }
  }
  return acc.real();
}

}  // namespace detail

/// Probability of finding `walker` at x with the given spin, all else traced.
inline Eigen::VectorXd conditional_spin_distribution(const ProductSumState& state, Walker walker,
                                                     Spin spin) {
  return detail::conditional_profile(state, walker, static_cast<int>(spin));
}

inline Eigen::VectorXd marginal_distribution(const ProductSumState& state, Walker walker) {
  return detail::conditional_profile(state, walker, 0) + detail::conditional_profile(state, walker, 1);
}

// ---------------------------------------------------------------------------
// Bipartitions and reduced states
// ---------------------------------------------------------------------------

/// Nonempty proper subset of {S1, S2, X1, X2}, stored as a bitmask.
class Bipartition {
 public:
  enum Factor : unsigned { S1 = 1, S2 = 2, X1 = 4, X2 = 8 };

  explicit Bipartition(unsigned mask) : mask_(mask) {
    if (mask == 0 || mask >= 15) {
      throw std::invalid_argument("Bipartition: part must be a nonempty proper subset");
    }
  }

  /// The seven inequivalent parts; complements are excluded.
  static std::array<Bipartition, 7> canonical() {
    return {Bipartition(S1),      Bipartition(S2),      Bipartition(X1),     Bipartition(X2),
            Bipartition(S1 | S2), Bipartition(S1 | X1), Bipartition(S1 | X2)};
  }

  unsigned mask() const noexcept { return mask_; }
  bool has(Factor f) const noexcept { return (mask_ & f) != 0; }
  Bipartition complement() const { return Bipartition(15u & ~mask_); }

  std::string name() const {
    std::string out;
    for (auto [f, label] : {std::pair{S1, "S1"}, {S2, "S2"}, {X1, "X1"}, {X2, "X2"}}) {
      if (has(f)) out += label;
    }
    return out;
  }

  friend bool operator==(const Bipartition&, const Bipartition&) = default;

 private:
  unsigned mask_;
};

namespace detail {

enum class Keep { none, spin, position, both };

inline Keep side_keep(bool spin, bool position) {
  if (spin && position) return Keep::both;
  if (spin) return Keep::spin;
  if (position) return Keep::position;
  return Keep::none;
}

// Tr_{not kept} |A_j><A_k| for one walker factor, spin-major when both kept.
inline Eigen::MatrixXcd side_operator(const WalkerState& aj, const WalkerState& ak, Keep keep) {
  const auto& j = aj.amplitudes();
  const auto& k = ak.amplitudes();
  switch (keep) {
    case Keep::none: {
      Eigen::MatrixXcd m(1, 1);
      m(0, 0) = inner(ak, aj);
      return m;
    }
    case Keep::spin: return j * k.adjoint();
    case Keep::position: return j.transpose() * k.conjugate();
    case Keep::both: return aj.vector() * ak.vector().adjoint();
  }
  return {};
}

inline Index side_dim(const LatticeWindow& w, Keep keep) {
  switch (keep) {
    case Keep::none: return 1;
    case Keep::spin: return 2;
    case Keep::position: return w.size();
    case Keep::both: return 2 * w.size();
  }
  return 0;
}

}  // namespace detail

/// Dense reduced state of a part, factors in canonical order S1, S2, X1, X2.
/// Throws DimensionCapExceeded above kReducedDimensionCap.
inline DensityMatrix reduced_state(const ProductSumState& state, const Bipartition& part) {
  using B = Bipartition;
  const auto keep1 = detail::side_keep(part.has(B::S1), part.has(B::X1));
  const auto keep2 = detail::side_keep(part.has(B::S2), part.has(B::X2));
  const Index d1 = detail::side_dim(state.left_window(), keep1);
  const Index d2 = detail::side_dim(state.right_window(), keep2);
  if (d1 * d2 > kReducedDimensionCap) {
    throw DimensionCapExceeded("reduced_state: dimension " + std::to_string(d1 * d2) +
                               " exceeds the dense cap; use purity_of_part");
  }
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d1 * d2, d1 * d2);
  for (const auto& j : state.terms()) {
    for (const auto& k : state.terms()) {
      rho += j.coeff * std::conj(k.coeff) *
             kron(detail::side_operator(j.left, k.left, keep1),
                  detail::side_operator(j.right, k.right, keep2));
    }
  }
  // Natural order is (S1, X1, S2, X2) restricted to kept factors.
  std::vector<int> dims;
  std::vector<int> canonical_rank;  // rank of each natural factor in canonical order
  const std::array<std::pair<B::Factor, int>, 4> natural = {
      std::pair{B::S1, 0}, {B::X1, 2}, {B::S2, 1}, {B::X2, 3}};
  const std::array<int, 4> sizes = {2, static_cast<int>(state.left_window().size()), 2,
                                    static_cast<int>(state.right_window().size())};
  for (std::size_t f = 0; f < natural.size(); ++f) {
    if (part.has(natural[f].first)) {
      dims.push_back(sizes[f]);
      canonical_rank.push_back(natural[f].second);
    }
  }
  std::vector<int> perm(dims.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(),
            [&](int a, int b) { return canonical_rank[a] < canonical_rank[b]; });
  if (!std::is_sorted(canonical_rank.begin(), canonical_rank.end())) {
    rho = permute_factors(rho, dims, perm);
  }
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(std::move(rho));
}

/// Tr(rho_part^2) from 2x2 Gram matrices G_jk = A_j A_k^dagger of the factors,
/// never forming a position-indexed matrix.
inline double purity_of_part(const ProductSumState& state, const Bipartition& part) {
  using B = Bipartition;
  const auto& terms = state.terms();
  const std::size_t n = terms.size();
  std::vector<Eigen::Matrix2cd> g1(n * n), g2(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      g1[j * n + k] = terms[j].left.amplitudes() * terms[k].left.amplitudes().adjoint();
      g2[j * n + k] = terms[j].right.amplitudes() * terms[k].right.amplitudes().adjoint();
    }
  }
  // Tr(M_jk M_lm) for one side, M_jk = Tr_{not kept}|A_j><A_k|.
  auto side = [n](const std::vector<Eigen::Matrix2cd>& g, detail::Keep keep, std::size_t j,
                  std::size_t k, std::size_t l, std::size_t m) -> cplx {
    const auto& G = [&](std::size_t a, std::size_t b) -> const Eigen::Matrix2cd& { return g[a * n + b]; };
    switch (keep) {
      case detail::Keep::none: return G(j, k).trace() * G(l, m).trace();
      case detail::Keep::spin: return (G(j, k) * G(l, m)).trace();
      case detail::Keep::position: return (G(j, m) * G(l, k)).trace();
      case detail::Keep::both: return G(l, k).trace() * G(j, m).trace();
    }
    return {};
  };
  const auto keep1 = detail::side_keep(part.has(B::S1), part.has(B::X1));
  const auto keep2 = detail::side_keep(part.has(B::S2), part.has(B::X2));
  cplx sum{};
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t l = 0; l < n; ++l)
        for (std::size_t m = 0; m < n; ++m) {
          const cplx c = terms[j].coeff * std::conj(terms[k].coeff) * terms[l].coeff *
                         std::conj(terms[m].coeff);
          sum += c * side(g1, keep1, j, k, l, m) * side(g2, keep2, j, k, l, m);
        }
  return sum.real();
}

/// Center-of-mass purity under |x1,x2> -> |2 x_cm = x1+x2>|x_r = x2-x1>.
///
/// On the integer lattice x1+x2 and x2-x1 always share parity, so the map only
/// factorizes inside each parity sector p. The returned value is the
/// sector-conditioned purity sum_p Tr(rho_p^2) / w_p, which is 1 exactly when
/// the state is |cm>|r> within every sector.
inline double cm_relative_factorization_check(const ProductSumState& state) {
  const auto& w1 = state.left_window();
  const auto& w2 = state.right_window();
  const int c_min = w1.x_min + w2.x_min;
  const int r_min = w2.x_min - w1.x_max;
  const Index nc = w1.size() + w2.size() - 1;
  const Index nr = nc;
  const Eigen::VectorXcd psi = to_dense(state);
  const Index l1 = w1.size(), l2 = w2.size();

  double total = 0.0;
  for (int parity = 0; parity < 2; ++parity) {
    // Rows: cm index within this sector. Columns: (spin pair, relative index).
    std::vector<Index> rows;
    for (Index c = 0; c < nc; ++c) {
      if (((c + c_min) % 2 + 2) % 2 == parity) rows.push_back(c);
    }
    std::vector<Index> row_of(nc, -1);
    for (std::size_t i = 0; i < rows.size(); ++i) row_of[rows[i]] = Index(i);
    Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(Index(rows.size()), 4 * nr);
    for (int s = 0; s < 4; ++s) {
      for (Index i1 = 0; i1 < l1; ++i1) {
        for (Index i2 = 0; i2 < l2; ++i2) {
          const int x1 = w1.site(i1), x2 = w2.site(i2);
          const Index c = x1 + x2 - c_min;
          if (row_of[c] < 0) continue;
          amp(row_of[c], s * nr + (x2 - x1 - r_min)) = psi((s * l1 + i1) * l2 + i2);
        }
      }
    }
    const Eigen::MatrixXcd rho = amp * amp.adjoint();
    const double weight = rho.trace().real();
    if (weight > 0.0) total += rho.squaredNorm() / weight;
  }
  return total;
}

enum class RelativeSign { positive, negative };

/// Normalized two-spin state after learning sign(x2 - x1). Sites with x1 = x2
/// belong to neither branch.
inline DensityMatrix conditional_spin_on_sign(const ProductSumState& state, RelativeSign sign) {
  const auto& terms = state.terms();
  const std::size_t n = terms.size();
  const auto& w1 = state.left_window();
  const auto& w2 = state.right_window();
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const auto& lj = terms[j].left.amplitudes();
      const auto& lk = terms[k].left.amplitudes();
      const auto& rj = terms[j].right.amplitudes();
      const auto& rk = terms[k].right.amplitudes();
      // Walk x2 upward, keeping prefix sums over x1 < x2 (or x1 > x2 for the
      // negative branch, handled by walking downward).
      Eigen::Matrix2cd prefix = Eigen::Matrix2cd::Zero();
      Eigen::Matrix4cd acc = Eigen::Matrix4cd::Zero();
      const bool positive = sign == RelativeSign::positive;
      const Index l2 = w2.size();
      // x1 candidates are consumed in order as x2 moves.
      Index i1 = positive ? 0 : w1.size() - 1;
      for (Index step_i = 0; step_i < l2; ++step_i) {
        const Index i2 = positive ? step_i : l2 - 1 - step_i;
        const int x2 = w2.site(i2);
        while (i1 >= 0 && i1 < w1.size() && (positive ? w1.site(i1) < x2 : w1.site(i1) > x2)) {
          prefix += lj.col(i1) * lk.col(i1).adjoint();
          i1 += positive ? 1 : -1;
        }
        const Eigen::Matrix2cd right = rj.col(i2) * rk.col(i2).adjoint();
        acc += kron(Eigen::MatrixXcd(prefix), Eigen::MatrixXcd(right));
      }
      rho += terms[j].coeff * std::conj(terms[k].coeff) * acc;
    }
  }
  const double weight = rho.trace().real();
  if (!(weight > 1e-300)) {
    throw InvariantError("conditional_spin_on_sign: branch has zero probability");
  }
  Eigen::MatrixXcd out = rho / weight;
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(std::move(out));
}

}  // namespace qwq
