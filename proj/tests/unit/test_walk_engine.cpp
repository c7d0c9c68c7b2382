#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rwre/stats.hpp"
#include "rwre/walk.hpp"

using namespace rwre;

namespace {

const Model kLattice{1, LatticeProduct{CoinFamily{}, true}};
const Model kLattice2{2, LatticeProduct{CoinFamily{0.2, 0.9, 1.0}, true}};
const Model kFully{1, FullyCorrelated{CoinFamily{}}};

// Exact law of the walk for small n by enumerating every path.
void enumerate(const Environment& env, std::int64_t n, std::int64_t t, double x, double w, std::vector<double>& mean) {
  mean[static_cast<std::size_t>(t)] += w * x;
  if (t == n) return;
  const JumpLaw law = env.query(t, Vec{x});
  for (const Atom& a : law.atomic()->atoms()) {
    if (a.weight > 0.0) enumerate(env, n, t + 1, x + a.point[0], w * a.weight, mean);
  }
}

}  // namespace

TEST(QuenchedPath, DeterministicInSeeds) {
  const Environment env(kLattice2, 5);
  const WalkPath a = simulate_quenched_path(env, 200, 99);
  const WalkPath b = simulate_quenched_path(env, 200, 99);
  const WalkPath c = simulate_quenched_path(env, 200, 100);
  EXPECT_EQ(a.positions, b.positions);
  EXPECT_NE(a.positions, c.positions);
  EXPECT_EQ(a.steps(), 200u);
  for (std::size_t k = 1; k < a.positions.size(); ++k) {
    const Vec dx = a.positions[k] - a.positions[k - 1];
    EXPECT_EQ(std::abs(dx[0]), 1.0);
    EXPECT_EQ(std::abs(dx[1]), 1.0);
  }
}

TEST(QuenchedPath, PrefixStableUnderLongerRuns) {
  const Environment env(kLattice, 3);
  const WalkPath short_run = simulate_quenched_path(env, 50, 7);
  const WalkPath long_run = simulate_quenched_path(env, 500, 7);
  for (std::size_t k = 0; k <= 50; ++k) EXPECT_EQ(short_run.positions[k], long_run.positions[k]);
}

TEST(QuenchedDistribution, MatchesPathEnumeration) {
  const Environment env(kLattice, 11);
  const std::int64_t n = 12;
  std::vector<double> mean(n + 1, 0.0);
  enumerate(env, n, 0, 0.0, 1.0, mean);
  const QuenchedMeanCurve exact = quenched_mean_exact(env, n);
  for (std::int64_t k = 0; k <= n; ++k) EXPECT_NEAR(exact.mean_at(k)[0], mean[static_cast<std::size_t>(k)], 1e-12);
}

TEST(QuenchedDistribution, MassIsConservedAndSupportBounded) {
  const Environment env(kLattice2, 4);
  QuenchedDistribution dist(env, Vec{1.0, -2.0});
  for (int k = 0; k < 64; ++k) {
    dist.step();
    EXPECT_NEAR(dist.total_mass(), 1.0, 1e-12);
  }
  EXPECT_LE(dist.support_size(), 129u * 129u);
  EXPECT_EQ(dist.time(), 64);
  // parity: every reachable site has both coordinates of the start's parity after an even number of steps
  EXPECT_EQ(dist.probability(Vec{2.0, -2.0}), 0.0);
}

TEST(QuenchedDistribution, RejectsUnsupportedLaws) {
  const Environment gauss(Model{1, LatticeProduct{GaussianFamily{Vec(1), Mat::identity(1), 0.0}, true}}, 1);
  EXPECT_FALSE(exact_propagation_supported(gauss.model()));
  QuenchedDistribution dist(gauss, Vec(1));
  EXPECT_THROW(dist.step(), std::invalid_argument);
  EXPECT_THROW(QuenchedDistribution(Environment(kLattice, 1), Vec{0.5}), std::invalid_argument);
  EXPECT_TRUE(exact_propagation_supported(kLattice));
  EXPECT_TRUE(exact_propagation_supported(Model{1, DiracField{Displacement::plus_minus, 2.0, true}}));
  EXPECT_FALSE(exact_propagation_supported(Model{1, DiracField{Displacement::box, 1.0, true}}));
}

TEST(QuenchedMean, ExactAgreesWithMonteCarlo) {
  for (const Model& m : {kLattice, kLattice2}) {
    const Environment env(m, 8);
    const std::vector<std::int64_t> grid{1, 2, 4, 8, 16, 32};
    const QuenchedMeanCurve exact = quenched_mean_exact(env, 32);
    const QuenchedMeanCurve mc = quenched_mean_mc(env, grid, 20000, 123);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (int j = 0; j < m.dim; ++j) {
        EXPECT_NEAR(mc.means[i][j], exact.mean_at(grid[i])[j], 4.0 * mc.standard_errors[i][j]);
      }
    }
  }
}

TEST(QuenchedMean, McIndependentOfWorkerCount) {
  const Environment env(kLattice, 2);
  const std::vector<std::int64_t> grid{4, 16};
  const auto a = quenched_mean_mc(env, grid, 1000, 5, 1);
  const auto b = quenched_mean_mc(env, grid, 1000, 5, 8);
  EXPECT_EQ(a.means, b.means);
  EXPECT_EQ(a.standard_errors, b.standard_errors);
}

TEST(QuenchedMean, FullyCorrelatedVarianceIsNOverThree) {
  // E^omega X_n = sum of n i.i.d. (2p - 1), p ~ U(0, 1): variance n / 3
  const std::int64_t n = 64;
  std::vector<double> xs;
  for (std::uint64_t r = 0; r < 4000; ++r) xs.push_back(quenched_mean_exact(replica_environment(kFully, 3, r), n).means.back()[0]);
  const double var = sample_variance(xs);
  // Var of a sample variance of near-Gaussian data: 2 sigma^4 / (R - 1)
  EXPECT_NEAR(var, n / 3.0, 4.0 * (n / 3.0) * std::sqrt(2.0 / 3999.0));
}

TEST(QuenchedMean, DiracFieldIsDeterministic) {
  const Environment env = make_dirac(6, 1, Displacement::plus_minus, 1.0, false);
  const WalkPath path = simulate_quenched_path(env, 100, 1);
  const QuenchedMeanCurve exact = quenched_mean_exact(env, 100);
  for (std::size_t k = 0; k <= 100; ++k) EXPECT_EQ(exact.means[k][0], path.positions[k][0]);
  const QuenchedMeanCurve mc = quenched_mean_mc(env, std::vector<std::int64_t>{100}, 50, 9);
  EXPECT_EQ(mc.standard_errors[0][0], 0.0);
}

TEST(AveragedWalk, DiracFieldIsDiffusive) {
  const Model m{1, DiracField{Displacement::plus_minus, 1.0, true}};
  const std::size_t n = 64;
  std::vector<double> ends;
  for (std::uint64_t r = 0; r < 4000; ++r) ends.push_back(simulate_averaged_path(m, 2, n, r).positions.back()[0]);
  const Estimate e = mean_and_se(ends);
  EXPECT_NEAR(e.value, 0.0, 4.0 * e.se);
  EXPECT_NEAR(sample_variance(ends) / n, 1.0, 4.0 * std::sqrt(2.0 / 3999.0));
}

TEST(Moments, VelocityAndCovarianceBiasedCoin) {
  const Model m{1, LatticeProduct{CoinFamily{0.5, 1.0, 1.0}, true}};
  const MomentEstimate e = velocity_and_covariance(m, 31, 50000, 2);
  EXPECT_NEAR(e.velocity[0], 0.5, 4.0 * e.velocity_se[0]);
  EXPECT_NEAR(e.diffusion(0, 0), 0.75, 4.0 * e.diffusion_se(0, 0));
  EXPECT_THROW(velocity_and_covariance(m, 1, 1, 1), std::invalid_argument);
}

TEST(ScaledPath, CentringAndScaling) {
  WalkPath p;
  for (int k = 0; k <= 256; ++k) p.positions.push_back(Vec{double(k)});
  const std::vector<double> t{0.25, 1.0};
  const ScaledPath s = scaled_path(p, 1.0 / 256.0, t, Vec{1.0});
  EXPECT_DOUBLE_EQ(s.values[0][0], 0.0);
  const ScaledPath raw = scaled_path(p, 1.0 / 256.0, t, Vec{0.0});
  EXPECT_DOUBLE_EQ(raw.values[1][0], 256.0 / 16.0);
  EXPECT_EQ(scaled_index(0.3, 0.1), 2);  // floor(2.9999999999999996)
  EXPECT_THROW(scaled_path(p, 1.0 / 512.0, t, Vec{0.0}), std::out_of_range);
}

TEST(EnvironmentChain, StationaryForProductEnvironments) {
  // levels are i.i.d., so the environment seen at time n has the prior law: E[p] = 1/2
  const auto f = [](const JumpLaw& law) { return 0.5 * (1.0 + law_mean(law)[0]); };
  const Estimate e = env_chain_observable(kLattice, 4, 25, f, 20000);
  EXPECT_NEAR(e.value, 0.5, 4.0 * e.se);
}

TEST(Martingale, ResidualHasMeanZero) {
  const Environment env(kLattice, 12);
  std::vector<double> r;
  for (std::uint64_t w = 0; w < 5000; ++w) r.push_back(martingale_residual(env, simulate_quenched_path(env, 40, w))[0]);
  const Estimate e = mean_and_se(r);
  EXPECT_NEAR(e.value, 0.0, 4.0 * e.se);
}
