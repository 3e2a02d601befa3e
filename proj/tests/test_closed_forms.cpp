#include "qwq/closed_forms.hpp"
#include "qwq/model.hpp"
#include "qwq/quantifiers.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <random>

using namespace qwq;

namespace {

// Root of a decreasing function on [lo, hi] by plain bisection.
double bisect(const std::function<double(double)>& f, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double eigen_entropy(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix());
  double s = 0;
  for (double v : es.eigenvalues())
    if (v > 1e-15) s -= v * std::log(v);
  return s;
}

}  // namespace

TEST(Decay, Values) {
  EXPECT_DOUBLE_EQ(decay_factor(5.0, 0.0), 1.0);
  EXPECT_NEAR(decay_factor(5.0, 5.0), 0.60653, 5e-6);
  EXPECT_LT(decay_factor(5.0, 1e3), 1e-300);
  EXPECT_THROW(decay_factor(-1.0, 1.0), std::invalid_argument);
}

TEST(Shannon, ValuesSymmetryAndDomain) {
  EXPECT_NEAR(shannon_entropy(0.5), kLn2, 1e-15);
  EXPECT_EQ(shannon_entropy(1.0), 0.0);
  EXPECT_EQ(shannon_entropy(0.0), 0.0);
  EXPECT_NEAR(shannon_entropy(0.8536), 0.4165, 1e-4);
  EXPECT_NEAR(shannon_entropy(0.3), shannon_entropy(0.7), 1e-15);
  EXPECT_THROW(shannon_entropy(1.1), std::domain_error);
  EXPECT_THROW(shannon_entropy(-0.1), std::domain_error);
}

TEST(Purity, ClosedValuesAndNumericAgreement) {
  EXPECT_NEAR(purity_closed(1.0, 5.0, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(purity_closed(0.0, 5.0, 3.0), 0.25, 1e-15);
  EXPECT_NEAR(purity_closed(0.6, 5.0, 1e3), (1 + 0.36) / 4, 1e-15);
  for (double eps : {0.2, 0.8})
    for (double t : {0.0, 4.0})
      EXPECT_NEAR(purity_closed(eps, 5.0, t), werner_state(eps, 5.0, t).purity(), 1e-12);
}

TEST(Chsh, FixedDirectionValuesAndCrossing) {
  EXPECT_NEAR(chsh_fixed_directions_closed(5.0, 0.0), 2 * kSqrt2, 1e-15);
  EXPECT_NEAR(chsh_fixed_directions_closed(5.0, 1e3), 1 / kSqrt2, 1e-15);
  const double tc = chsh_crossing_time(5.0);
  EXPECT_NEAR(tc / 5.0, 0.995, 5e-4);
  EXPECT_NEAR(chsh_fixed_directions_closed(5.0, tc), 2.0, 1e-12);
  const double by_bisection = bisect([](double t) { return chsh_fixed_directions_closed(5.0, t) - 2.0; }, 0, 50);
  EXPECT_NEAR(tc, by_bisection, 1e-10);
}

TEST(Quantifiers, ClosedValues) {
  EXPECT_NEAR(bell_closed(1.0, 5.0, 0.0), 1.0, 1e-14);
  EXPECT_NEAR(steering_closed(1.0, 5.0, 0.0), 1.0, 1e-14);
  EXPECT_NEAR(concurrence_closed(1.0, 5.0, 0.0), 1.0, 1e-15);
  for (double t : {0.5, 3.0, 20.0}) {
    EXPECT_NEAR(concurrence_closed(1.0, 5.0, t), decay_factor(5.0, t), 1e-15);
    EXPECT_NEAR(gme_closed(5.0, t) * gme_closed(5.0, t) + decay_factor(5.0, t), 1.0, 1e-15);
    EXPECT_EQ(bell_closed(0.5, 5.0, t), 0.0);
    EXPECT_EQ(steering_closed(0.5, 5.0, t), 0.0);
  }
  EXPECT_NEAR(concurrence_closed(0.5, 5.0, 0.0), 0.25, 1e-15);
  EXPECT_EQ(gme_closed(5.0, 0.0), 0.0);
  EXPECT_THROW(bell_closed(-0.1, 5.0, 1.0), std::invalid_argument);
}

TEST(SuddenDeath, ReferenceTimesAgreeWithBisectionOnTheNumericQuantifiers) {
  const double eps = 0.8, s0 = 5.0;
  const auto times = sudden_death_times(eps, s0);
  ASSERT_TRUE(times.bell && times.steering && times.entanglement);
  EXPECT_NEAR(*times.bell, 3.793, 1e-3);
  EXPECT_NEAR(*times.steering, 5.631, 1e-3);
  EXPECT_NEAR(*times.entanglement, 10.197, 1e-3);

  // Threshold crossings of the numeric quantifiers, found from the underlying
  // scalars so the bisection sees a sign change rather than a clamp at zero.
  auto singular = [&](double t) { return bloch_decompose(werner_state(eps, s0, t)).correlation_singular_values(); };
  const double tb = bisect([&](double t) {
    const auto c = singular(t);
    return std::sqrt(c(0) * c(0) + c(1) * c(1)) - 1.0;
  }, 0, 50);
  const double ts = bisect([&](double t) { return singular(t).norm() - 1.0; }, 0, 50);
  const double te = bisect([&](double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(werner_state(eps, s0, t).matrix());
    return 2 * es.eigenvalues()(3) - 1.0;  // concurrence = max(0, 2 lambda_max - 1) here
  }, 0, 50);
  EXPECT_NEAR(*times.bell, tb, 1e-9);
  EXPECT_NEAR(*times.steering, ts, 1e-9);
  EXPECT_NEAR(*times.entanglement, te, 1e-9);
  // And the numeric quantifiers vanish just after, not just before.
  EXPECT_GT(bell_nonlocality(werner_state(eps, s0, tb - 1e-3)), 0.0);
  EXPECT_EQ(bell_nonlocality(werner_state(eps, s0, tb + 1e-3)), 0.0);
  EXPECT_GT(concurrence(werner_state(eps, s0, te - 1e-3)), 0.0);
  EXPECT_NEAR(concurrence(werner_state(eps, s0, te + 1e-3)), 0.0, 1e-12);
}

TEST(SuddenDeath, DomainsOfExistence) {
  const auto pure = sudden_death_times(1.0, 5.0);
  EXPECT_FALSE(pure.bell || pure.steering || pure.entanglement);
  const auto half = sudden_death_times(0.5, 5.0);
  EXPECT_FALSE(half.bell);
  EXPECT_FALSE(half.steering);
  EXPECT_TRUE(half.entanglement);
  const auto low = sudden_death_times(0.3, 5.0);
  EXPECT_FALSE(low.entanglement);
}

TEST(SuddenDeath, ChronologyOnSampledNoise) {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(1 / kSqrt2 + 1e-9, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double eps = u(gen);
    const auto s = sudden_death_times(eps, 5.0);
    ASSERT_TRUE(s.bell && s.steering && s.entanglement) << eps;
    EXPECT_LT(*s.bell, *s.steering) << eps;
    EXPECT_LT(*s.steering, *s.entanglement) << eps;
  }
}

TEST(Discord, ClosedValues) {
  EXPECT_NEAR(discord_closed(1.0, 5.0, 0.0), kLn2, 1e-15);
  EXPECT_EQ(discord_closed(0.0, 5.0, 2.0), 0.0);
  EXPECT_NEAR(discord_closed(0.7, 5.0, 1e3), 0.0, 1e-15);
}

TEST(Entropy, ClosedMatchesEigenDecomposition) {
  EXPECT_NEAR(entropy_closed(1.0, 5.0, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(entropy_closed(0.0, 5.0, 1.0), std::log(4.0), 1e-15);
  for (double eps : {0.0, 0.3, 0.8, 1.0})
    for (double t : {0.0, 1.0, 5.0, 12.0, 40.0})
      EXPECT_NEAR(entropy_closed(eps, 5.0, t), eigen_entropy(werner_state(eps, 5.0, t)), 1e-10) << eps << " " << t;
}

TEST(Rbn, ClosedValues) {
  EXPECT_NEAR(rbn_closed(1.0, 5.0, 0.0), kLn2, 1e-15);
  EXPECT_NEAR(rbn_closed(1.0, 5.0, 1e3), kLn2, 1e-15);
  EXPECT_NEAR(rbn_closed(0.0, 5.0, 2.0), 0.0, 1e-15);
  for (double eps : {0.3, 0.8}) EXPECT_NEAR(rbn_closed(eps, 5.0, 1e3), rbn_asymptotic(eps), 1e-15);
}

TEST(Asymptotics, IrrealityAndEta) {
  EXPECT_NEAR(irreality_asymptotic(0.0, kPi / 4), 0.0, 1e-12);
  EXPECT_NEAR(irreality_asymptotic(kPi, 3 * kPi / 4), 0.0, 1e-12);
  EXPECT_NEAR(irreality_asymptotic(kPi / 2, kPi / 2), kLn2, 1e-15);
  EXPECT_NEAR(irreality_asymptotic(0.0, 0.0), 0.4165, 1e-4);
  EXPECT_NEAR(eta_asymptotic(kPi / 2, kPi / 2, kPi / 2, kPi / 2), kLn2, 1e-15);
  EXPECT_NEAR(eta_asymptotic(0.0, kPi / 4, kPi / 2, kPi / 2), 0.0, 1e-12);
  const double hz = shannon_entropy(0.5 * (1 + 1 / kSqrt2));
  EXPECT_NEAR(eta_asymptotic(0.0, 0.0, 0.0, kPi / 2), 2 * hz - shannon_entropy(0.75), 1e-15);
}

TEST(Properties, MonotoneInTimeAndNoise) {
  using Fn = double (*)(double, double, double);
  const Fn fns[] = {purity_closed, bell_closed, steering_closed, concurrence_closed, discord_closed, rbn_closed};
  const char* names[] = {"purity", "bell", "steering", "concurrence", "discord", "rbn"};
  for (std::size_t f = 0; f < std::size(fns); ++f) {
    for (double eps = 0.0; eps <= 1.0; eps += 0.05) {
      for (double t = 0.0; t < 30.0; t += 0.25) {
        EXPECT_LE(fns[f](eps, 5.0, t + 0.25), fns[f](eps, 5.0, t) + 1e-14) << names[f] << " " << eps << " " << t;
        if (eps + 0.05 <= 1.0) {
          EXPECT_GE(fns[f](eps + 0.05, 5.0, t), fns[f](eps, 5.0, t) - 1e-14) << names[f] << " " << eps << " " << t;
        }
      }
    }
  }
}

TEST(Properties, HierarchyOfNonclassicality) {
  for (double eps : {0.75, 0.9, 1.0})
    for (double t = 0.0; t < 20.0; t += 0.5) {
      const double b = bell_closed(eps, 5.0, t), s = steering_closed(eps, 5.0, t), e = concurrence_closed(eps, 5.0, t);
      if (b > 0) {
        EXPECT_GT(s, 0) << eps << " " << t;
      }
      if (s > 0) {
        EXPECT_GT(e, 0) << eps << " " << t;
      }
      if (e > 0) {
        EXPECT_GT(discord_closed(eps, 5.0, t), 0) << eps << " " << t;
      }
      EXPECT_GE(rbn_closed(eps, 5.0, t), discord_closed(eps, 5.0, t) - 1e-15);
    }
}
