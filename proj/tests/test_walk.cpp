#include "qwq/model.hpp"
#include "qwq/walk.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>

using namespace qwq;

namespace {

// Plain-loop reference walk: amplitudes keyed by (spin, site). Up moves right.
using Sparse = std::map<std::pair<int, int>, cplx>;

Sparse reference_step(const Sparse& in) {
  Sparse out;
  const double h = 1.0 / std::sqrt(2.0);
  for (const auto& [key, amp] : in) {
    const auto [s, x] = key;
    // H|up> = (|up> + |down>)/sqrt2, H|down> = (|up> - |down>)/sqrt2
    out[{0, x + 1}] += h * amp;
    out[{1, x - 1}] += (s == 0 ? h : -h) * amp;
  }
  return out;
}

cplx amp_at(const WalkerState& w, int s, int x) {
  return w.window().contains(x) ? w.amplitudes()(s, w.window().index(x)) : cplx{};
}

WalkerState random_walker(std::mt19937_64& gen, const LatticeWindow& w, int support) {
  std::uniform_real_distribution<double> u(-1, 1);
  WalkerState::Amplitudes a = WalkerState::Amplitudes::Zero(2, w.size());
  for (int x = -support; x <= support; ++x)
    for (int s = 0; s < 2; ++s) a(s, w.index(x)) = cplx(u(gen), u(gen));
  a /= std::sqrt(a.squaredNorm());
  return WalkerState(w, std::move(a));
}

const Bipartition kS1S2(Bipartition::S1 | Bipartition::S2);
const Bipartition kS1X1(Bipartition::S1 | Bipartition::X1);

}  // namespace

TEST(Step, LocalizedUpSplitsIntoBothDirections) {
  const LatticeWindow w(-3, 3);
  const WalkerState s1 = step(WalkerState::localized(w, 0, 1.0, 0.0));
  EXPECT_NEAR(std::abs(amp_at(s1, 0, 1) - 1 / kSqrt2), 0, 1e-15);
  EXPECT_NEAR(std::abs(amp_at(s1, 1, -1) - 1 / kSqrt2), 0, 1e-15);
  const WalkerState d1 = step(WalkerState::localized(w, 0, 0.0, 1.0));
  EXPECT_NEAR(std::abs(amp_at(d1, 0, 1) - 1 / kSqrt2), 0, 1e-15);
  EXPECT_NEAR(std::abs(amp_at(d1, 1, -1) + 1 / kSqrt2), 0, 1e-15);
}

TEST(Step, TwoStepsFromUpMatchHandIteration) {
  // |up,0> -> (|up,1> + |down,-1>)/sqrt2
  //        -> (|up,2> + |down,0> + |up,0> - |down,-2>)/2
  const LatticeWindow w(-3, 3);
  const WalkerState s = evolve(WalkerState::localized(w, 0, 1.0, 0.0), 2);
  EXPECT_NEAR(std::abs(amp_at(s, 0, 2) - 0.5), 0, 1e-15);
  EXPECT_NEAR(std::abs(amp_at(s, 1, 0) - 0.5), 0, 1e-15);
  EXPECT_NEAR(std::abs(amp_at(s, 0, 0) - 0.5), 0, 1e-15);
  EXPECT_NEAR(std::abs(amp_at(s, 1, -2) + 0.5), 0, 1e-15);
  EXPECT_NEAR(std::abs(amp_at(s, 0, -2)), 0, 1e-15);
}

TEST(Step, AgreesWithReferenceWalkOnRandomStates) {
  std::mt19937_64 gen(1);
  const LatticeWindow w(-40, 40);
  WalkerState state = random_walker(gen, w, 5);
  Sparse ref;
  for (int x = -5; x <= 5; ++x)
    for (int s = 0; s < 2; ++s) ref[{s, x}] = amp_at(state, s, x);
  for (int t = 0; t < 30; ++t) {
    state = step(state);
    ref = reference_step(ref);
  }
  double worst = 0;
  for (const auto& [key, amp] : ref) worst = std::max(worst, std::abs(amp - amp_at(state, key.first, key.second)));
  EXPECT_LT(worst, 1e-14);
  EXPECT_NEAR(state.amplitudes().squaredNorm(), 1.0, 1e-13);
}

TEST(Step, ThrowsWhenAmplitudeWouldLeaveTheWindow) {
  const LatticeWindow w(-2, 2);
  EXPECT_THROW(evolve(WalkerState::localized(w, 0, 1.0, 0.0), 3), WindowOverflow);
  EXPECT_NO_THROW(evolve(WalkerState::localized(w, 0, 1.0, 0.0), 2));
}

TEST(Step, ZeroStepsIsIdentity) {
  const WalkerState g = gaussian_walker(3.0, 1.0, window_for_horizon(3.0, 5));
  EXPECT_EQ(evolve(g, 0).amplitudes(), g.amplitudes());
}

TEST(Step, SupportGrowsByOneSitePerStep) {
  const int t = 17;
  const double s0 = 2.0;
  const WalkerState w = evolve(gaussian_walker(s0, 0.3, window_for_horizon(s0, t)), t);
  const int bound = gaussian_support_radius(s0) + t;
  for (Index i = 0; i < w.window().size(); ++i) {
    if (std::abs(w.window().site(i)) > bound) EXPECT_EQ(w.amplitudes().col(i).squaredNorm(), 0.0);
  }
}

TEST(PositionDistribution, LocalStartAfterOneStep) {
  const LatticeWindow w(-2, 2);
  const Eigen::VectorXd p = position_distribution(step(WalkerState::localized(w, 0, 1.0, 0.0)));
  EXPECT_NEAR(p(w.index(1)), 0.5, 1e-15);
  EXPECT_NEAR(p(w.index(-1)), 0.5, 1e-15);
  EXPECT_NEAR(p.sum(), 1.0, 1e-15);
}

TEST(PositionDistribution, SymmetricSpinSplitsMassEqually) {
  const double s0 = 5.0;
  const int t = 100;
  const WalkerState w = evolve(gaussian_walker(s0, 3 * kPi / 4, window_for_horizon(s0, t)), t);
  const Eigen::VectorXd p = position_distribution(w);
  double right = 0;
  for (Index i = 0; i < p.size(); ++i)
    if (w.window().site(i) > 0) right += p(i);
  EXPECT_NEAR(right, 0.5, 1e-6);
}

TEST(PositionDistribution, SharpStartIsBimodalNearTheLightConeOverRootTwo) {
  const int t = 100;
  const WalkerState w = evolve(gaussian_walker(0.2, 0.0, window_for_horizon(0.2, t)), t);
  const Eigen::VectorXd p = position_distribution(w);
  Index right_peak = 0, left_peak = 0;
  double best_r = -1, best_l = -1;
  for (Index i = 0; i < p.size(); ++i) {
    const int x = w.window().site(i);
    if (x > 0 && p(i) > best_r) best_r = p(i), right_peak = i;
    if (x < 0 && p(i) > best_l) best_l = p(i), left_peak = i;
  }
  EXPECT_GE(w.window().site(right_peak), 60);
  EXPECT_LE(w.window().site(right_peak), 75);
  EXPECT_LE(w.window().site(left_peak), -60);
  EXPECT_GE(w.window().site(left_peak), -75);
  EXPECT_LT(p(w.window().index(0)), 0.1 * best_r);
}

TEST(WalkerFidelity, UsesTheWindowIntersection) {
  const WalkerState a = WalkerState::localized(LatticeWindow(-2, 2), 1, 0.0, 1.0);
  const WalkerState b = WalkerState::localized(LatticeWindow(0, 5), 1, 0.0, 1.0);
  EXPECT_NEAR(fidelity(a, b), 1.0, 1e-15);
  const WalkerState c = WalkerState::localized(LatticeWindow(3, 5), 3, 0.0, 1.0);
  EXPECT_EQ(fidelity(a, c), 0.0);
}

// ---------------------------------------------------------------------------

TEST(ProductSum, RejectsBadRankAndNorm) {
  const LatticeWindow w(-1, 1);
  const auto up = WalkerState::localized(w, 0, 1.0, 0.0);
  const auto down = WalkerState::localized(w, 0, 0.0, 1.0);
  EXPECT_THROW(ProductSumState({}), DimensionError);
  EXPECT_THROW(ProductSumState({{1.0, up, down}, {1.0, down, up}}), InvariantError);
  const auto other = WalkerState::localized(LatticeWindow(-2, 2), 0, 1.0, 0.0);
  EXPECT_THROW(ProductSumState({{1.0 / kSqrt2, up, down}, {1.0 / kSqrt2, other, down}}), DimensionError);
}

TEST(ProductSum, LowRankEvolutionMatchesDenseReference) {
  std::mt19937_64 gen(2);
  const LatticeWindow w(-12, 12);
  const int t = 8;
  const auto a = random_walker(gen, w, 3), b = random_walker(gen, w, 3);
  const auto c = random_walker(gen, w, 3), d = random_walker(gen, w, 3);
  // Normalize a|b> + c|d> exactly.
  const cplx ov = inner(a, c) * inner(b, d);
  const double norm2 = 2.0 + 2.0 * ov.real();
  const ProductSumState state({{1.0 / std::sqrt(norm2), a, b}, {1.0 / std::sqrt(norm2), c, d}});

  // Dense reference: iterate the coin-and-shift on each walker index by hand.
  const Index l = w.size();
  Eigen::VectorXcd psi = to_dense(state);
  const double h = 1.0 / kSqrt2;
  for (int s = 0; s < t; ++s) {
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(psi.size());
    for (int s1 = 0; s1 < 2; ++s1)
      for (int s2 = 0; s2 < 2; ++s2)
        for (Index i1 = 0; i1 < l; ++i1)
          for (Index i2 = 0; i2 < l; ++i2) {
            const cplx v = psi((Index(s1 * 2 + s2) * l + i1) * l + i2);
            if (v == cplx{}) continue;
            for (int n1 = 0; n1 < 2; ++n1)
              for (int n2 = 0; n2 < 2; ++n2) {
                const double c1 = (s1 == 1 && n1 == 1) ? -h : h;
                const double c2 = (s2 == 1 && n2 == 1) ? -h : h;
                const Index j1 = i1 + (n1 == 0 ? 1 : -1), j2 = i2 + (n2 == 0 ? 1 : -1);
                next((Index(n1 * 2 + n2) * l + j1) * l + j2) += c1 * c2 * v;
              }
          }
    psi = next;
  }
  const ProductSumState evolved = evolve_two(state, t);
  EXPECT_EQ(evolved.rank(), state.rank());
  EXPECT_LT((to_dense(evolved) - psi).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_NEAR(evolved.norm_squared(), 1.0, 1e-12);
}

TEST(ProductSum, SelfFidelityIsOne) {
  const auto s = evolve_two(singlet_gaussian_pair(2.0, window_for_horizon(2.0, 10)), 10);
  EXPECT_NEAR(fidelity(s, s), 1.0, 1e-12);
}

TEST(JointDistribution, SingletShowsAnticorrelatedRidgeAndProductDoesNot) {
  const double s0 = 5.0;
  const int t = 20;
  const auto w = window_for_horizon(s0, t);
  const Eigen::MatrixXd js = joint_distribution(evolve_two(singlet_gaussian_pair(s0, w), t));
  const Eigen::MatrixXd jp = joint_distribution(evolve_two(product_gaussian_pair(s0, w), t));
  EXPECT_NEAR(js.sum(), 1.0, 1e-12);
  EXPECT_NEAR(jp.sum(), 1.0, 1e-12);
  const Index pos = w.index(14), neg = w.index(-14);
  // Singlet: weight sits on x1 = -x2 and is exchange symmetric.
  EXPECT_LT(js(pos, pos), 1e-3 * js(pos, neg));
  EXPECT_LT(js(neg, neg), 1e-3 * js(pos, neg));
  EXPECT_NEAR(js(pos, neg), js(neg, pos), 1e-15);
  // Product start: four lobes, the correlated ones clearly populated.
  EXPECT_GT(jp(pos, pos), 0.1 * jp(pos, neg));
  EXPECT_GT(jp(neg, neg), 0.1 * jp(pos, neg));
}

TEST(ConditionalDistribution, SpinResolvedPiecesAddUpToTheMarginal) {
  const double s0 = 5.0;
  const int t = 25;
  const auto st = evolve_two(singlet_gaussian_pair(s0, window_for_horizon(s0, t)), t);
  const Eigen::VectorXd up = conditional_spin_distribution(st, Walker::first, Spin::up);
  const Eigen::VectorXd down = conditional_spin_distribution(st, Walker::first, Spin::down);
  const Eigen::VectorXd joint_marginal = joint_distribution(st).rowwise().sum();
  EXPECT_LT((up + down - marginal_distribution(st, Walker::first)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((up + down - joint_marginal).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(up.sum(), 0.5, 1e-12);
  EXPECT_GT(up.minCoeff(), -1e-15);
}

TEST(ConditionalDistribution, InitiallyBothSpinsShareTheGaussian) {
  const double s0 = 5.0;
  const auto st = singlet_gaussian_pair(s0, window_for_horizon(s0, 0));
  const Eigen::VectorXd up = conditional_spin_distribution(st, Walker::first, Spin::up);
  const Eigen::VectorXd down = conditional_spin_distribution(st, Walker::first, Spin::down);
  const auto& w = st.left_window();
  for (int x : {-7, 0, 3}) {
    const double f = gaussian_profile(s0, x);
    EXPECT_NEAR(up(w.index(x)), 0.5 * f * f, 1e-15);
    EXPECT_NEAR(down(w.index(x)), 0.5 * f * f, 1e-15);
  }
}

TEST(ConditionalDistribution, UpSpinsDriftRightLater) {
  const double s0 = 5.0;
  const int t = 25;
  const auto st = evolve_two(singlet_gaussian_pair(s0, window_for_horizon(s0, t)), t);
  const Eigen::VectorXd up = conditional_spin_distribution(st, Walker::first, Spin::up);
  const auto& w = st.left_window();
  double right = 0;
  for (Index i = 0; i < w.size(); ++i)
    if (w.site(i) > 0) right += up(i);
  EXPECT_GT(right / up.sum(), 0.8);
}

// ---------------------------------------------------------------------------

namespace {

// Reduced state by brute force from the dense vector. Factor order S1,S2,X1,X2.
Eigen::MatrixXcd dense_reduced(const ProductSumState& s, unsigned mask) {
  const auto dims = dense_dims(s);
  std::vector<int> keep;
  for (int f = 0; f < 4; ++f)
    if (mask & (1u << f)) keep.push_back(f);
  return partial_trace(to_dense(s), dims, keep).matrix();
}

}  // namespace

TEST(ReducedState, AgreesWithDensePartialTraceForEveryBipartition) {
  const double s0 = 1.0;
  const int t = 3;
  const auto st = evolve_two(singlet_gaussian_pair(s0, window_for_horizon(s0, t)), t);
  for (unsigned mask = 1; mask < 15; ++mask) {
    const Bipartition part(mask);
    const DensityMatrix r = reduced_state(st, part);
    EXPECT_LT((r.matrix() - dense_reduced(st, mask)).cwiseAbs().maxCoeff(), 1e-14) << part.name();
    EXPECT_NEAR(r.purity(), purity_of_part(st, part), 1e-12) << part.name();
    EXPECT_TRUE(r.is_psd());
  }
}

TEST(ReducedState, SingleSpinOfTheSingletIsMaximallyMixed) {
  const double s0 = 5.0;
  for (int t : {0, 10}) {
    const auto st = evolve_two(singlet_gaussian_pair(s0, window_for_horizon(s0, t)), t);
    const DensityMatrix r = reduced_state(st, Bipartition(Bipartition::S1));
    EXPECT_LT((r.matrix() - Eigen::MatrixXcd::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ReducedState, PositionIsPureAtTheStart) {
  const auto st = singlet_gaussian_pair(3.0, window_for_horizon(3.0, 0));
  EXPECT_NEAR(purity_of_part(st, Bipartition(Bipartition::X1)), 1.0, 1e-12);
  EXPECT_NEAR(purity_of_part(st, kS1S2), 1.0, 1e-12);
}

TEST(ReducedState, RefusesOversizedRequests) {
  const auto st = singlet_gaussian_pair(20.0, window_for_horizon(20.0, 100));
  EXPECT_THROW(reduced_state(st, Bipartition(Bipartition::X1 | Bipartition::X2)), DimensionCapExceeded);
  EXPECT_NO_THROW(purity_of_part(st, Bipartition(Bipartition::X1 | Bipartition::S1)));
}

TEST(ReducedState, ExactSpinStateApproachesTheGaussianModel) {
  for (auto [s0, bound] : {std::pair{5.0, 0.025}, std::pair{10.0, 1e-2}}) {
    for (int t : {int(s0), int(2 * s0), int(5 * s0)}) {
      const auto st = evolve_two(singlet_gaussian_pair(s0, window_for_horizon(s0, t)), t);
      const Eigen::MatrixXcd diff = reduced_state(st, kS1S2).matrix() - spin_density_closed(s0, t).matrix();
      EXPECT_LT(diff.cwiseAbs().maxCoeff(), bound) << s0 << " " << t;
    }
  }
}

TEST(Purity, ComplementsAgreeAndSpinWalkerPartIsHalf) {
  const double s0 = 5.0;
  for (int t : {0, 7, 30}) {
    const auto st = evolve_two(singlet_gaussian_pair(s0, window_for_horizon(s0, t)), t);
    for (const auto& part : Bipartition::canonical())
      EXPECT_NEAR(purity_of_part(st, part), purity_of_part(st, part.complement()), 1e-12) << part.name();
    EXPECT_NEAR(purity_of_part(st, kS1X1), 0.5, 1e-12);
  }
}

TEST(Purity, ModelSpinPairFollowsTheDecay) {
  const double s0 = 5.0;
  for (int t : {0, 3, 5, 12}) {
    const auto m = two_walker_model_state(s0, t);
    const double e = decay_factor(s0, t);
    EXPECT_NEAR(purity_of_part(m, kS1S2), 0.5 * (1 + e * e), 1e-10);
    EXPECT_NEAR(purity_of_part(m, kS1X1), 0.5, 1e-10);
  }
}

TEST(Bipartition, NamesAndValidation) {
  EXPECT_EQ(kS1X1.name(), "S1X1");
  EXPECT_EQ(kS1X1.complement().name(), "S2X2");
  EXPECT_THROW(Bipartition(0), std::invalid_argument);
  EXPECT_THROW(Bipartition(15), std::invalid_argument);
  EXPECT_EQ(Bipartition::canonical().size(), 7u);
}

TEST(CmRelative, ModelAndStartFactorizeAndExactNearlyDoes) {
  const double s0 = 5.0;
  EXPECT_NEAR(cm_relative_factorization_check(two_walker_model_state(s0, 40)), 1.0, 1e-10);
  EXPECT_NEAR(cm_relative_factorization_check(singlet_gaussian_pair(s0, window_for_horizon(s0, 0))), 1.0, 1e-10);
  const int t = 50;
  const auto exact = evolve_two(singlet_gaussian_pair(s0, window_for_horizon(s0, t)), t);
  EXPECT_GT(cm_relative_factorization_check(exact), 0.99);
}

TEST(CmRelative, ProductPositionsWithUnequalWidthsDoNotFactorize) {
  const auto w = window_for_horizon(4.0, 0);
  const ProductSumState s({{1.0, gaussian_walker(1.0, 0.0, w), gaussian_walker(4.0, 0.0, w)}});
  EXPECT_LT(cm_relative_factorization_check(s), 0.9);
}

TEST(SignConditioning, StartIsTheSingletInBothBranches) {
  const double s0 = 5.0;
  const auto st = singlet_gaussian_pair(s0, window_for_horizon(s0, 0));
  const Eigen::Vector4cd b4 = bell::b4();
  for (auto sign : {RelativeSign::positive, RelativeSign::negative}) {
    const DensityMatrix r = conditional_spin_on_sign(st, sign);
    EXPECT_NEAR((b4.adjoint() * r.matrix() * b4)(0).real(), 1.0, 1e-12);
  }
}

TEST(SignConditioning, LateBranchesCollapseOntoTheSignStates) {
  const double s0 = 5.0;
  const int t = 10 * int(s0);
  const Eigen::Vector4cd plus = (bell::beta23() + bell::b4()) / kSqrt2;
  const Eigen::Vector4cd minus = (bell::beta23() - bell::b4()) / kSqrt2;
  const auto m = two_walker_model_state(s0, t);
  EXPECT_GT((plus.adjoint() * conditional_spin_on_sign(m, RelativeSign::positive).matrix() * plus)(0).real(), 0.999);
  EXPECT_GT((minus.adjoint() * conditional_spin_on_sign(m, RelativeSign::negative).matrix() * minus)(0).real(), 0.999);
  const auto exact = evolve_two(singlet_gaussian_pair(s0, window_for_horizon(s0, t)), t);
  EXPECT_GT((plus.adjoint() * conditional_spin_on_sign(exact, RelativeSign::positive).matrix() * plus)(0).real(), 0.95);
}

TEST(SignConditioning, EmptyBranchThrows) {
  const LatticeWindow w(-1, 1);
  const auto up = WalkerState::localized(w, 0, 1.0, 0.0);
  const auto down = WalkerState::localized(w, 0, 0.0, 1.0);
  const ProductSumState st({{1.0 / kSqrt2, up, down}, {-1.0 / kSqrt2, down, up}});
  EXPECT_THROW(conditional_spin_on_sign(st, RelativeSign::positive), InvariantError);
}
