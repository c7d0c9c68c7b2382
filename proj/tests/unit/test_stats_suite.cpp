#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "rwre/analysis.hpp"

using namespace rwre;

namespace {

const Model kLattice{1, LatticeProduct{CoinFamily{}, true}};
const Model kFully{1, FullyCorrelated{CoinFamily{}}};
const Model kDirac{1, DiracField{Displacement::plus_minus, 1.0, false}};

// (1/3) sum_{k<n} P(Y_k = 0): Y sticks at 0 with probability 2/3, else moves
// by +-2 with probability 1/4 each (1/2 stay).
std::vector<double> lattice_variance_oracle(int n_max) {
  std::map<int, double> dist{{0, 1.0}};
  std::vector<double> out(n_max + 1, 0.0);
  double acc = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    acc += dist[0] / 3.0;
    out[n] = acc;
    std::map<int, double> next;
    for (const auto& [y, p] : dist) {
      if (y == 0) {
        next[0] += p * 2.0 / 3.0;
        next[2] += p / 6.0;
        next[-2] += p / 6.0;
      } else {
        next[y] += p / 2.0;
        next[y + 2] += p / 4.0;
        next[y - 2] += p / 4.0;
      }
    }
    dist = std::move(next);
  }
  return out;
}

}  // namespace

TEST(Basic, MeanAndStandardError) {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const Estimate e = mean_and_se(xs);
  EXPECT_DOUBLE_EQ(e.value, 2.5);
  EXPECT_NEAR(e.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_DOUBLE_EQ(sample_variance(xs), 5.0 / 3.0);
}

TEST(Basic, BootstrapSeTracksTheAnalyticSe) {
  const auto xs = synthetic_normals(4, 0, 2000);
  const double boot = bootstrap_se(xs, 400, 9);
  EXPECT_NEAR(boot, mean_and_se(xs).se, 0.15 * mean_and_se(xs).se);
  EXPECT_EQ(boot, bootstrap_se(xs, 400, 9));
}

TEST(Basic, Correlations) {
  std::vector<double> a, b;
  for (int i = 0; i < 100; ++i) {
    a.push_back(i);
    b.push_back(-2.0 * i + 1.0);
  }
  EXPECT_NEAR(pearson_correlation(a, b), -1.0, 1e-12);
  const auto z = synthetic_normals(1, 0, 20000);
  EXPECT_LT(std::abs(autocorrelation(z, 1)), 4.0 / std::sqrt(20000.0));
}

TEST(FitExponent, ExactPowerLaws) {
  std::vector<double> n, half, linear, zero;
  for (int k = 4; k <= 12; ++k) {
    n.push_back(std::ldexp(1.0, k));
    half.push_back(std::sqrt(n.back()));
    linear.push_back(3.0 * n.back());
    zero.push_back(0.0);
  }
  EXPECT_NEAR(fit_exponent(n, half, zero).exponent, 0.5, 1e-12);
  EXPECT_NEAR(fit_exponent(n, linear, zero).exponent, 1.0, 1e-12);
  EXPECT_NEAR(fit_exponent(n, linear, zero).intercept, std::log(3.0), 1e-12);
}

TEST(FitExponent, UsesOnlyPointsAboveThreeSe) {
  const std::vector<double> g{1, 2, 4, 8, 16};
  const std::vector<double> y{1, 2, 4, 8, 16};
  const std::vector<double> se{0.5, 1.0, 2.0, 0.1, 0.1};  // points 2 and 3 are unusable
  EXPECT_THROW(fit_exponent(g, y, se), std::invalid_argument);
  ScanCurve c;
  for (std::size_t i = 0; i < g.size(); ++i) c.push(g[i], y[i], se[i]);
  c.try_fit();
  EXPECT_FALSE(c.fit);
}

TEST(FitExponent, CoverageOfTheConfidenceInterval) {
  const FitCoverage c = exponent_fit_coverage(100, 8, 0.5, 0.05, 2024);
  EXPECT_GE(c.coverage(), 0.90);
}

TEST(Kolmogorov, SurvivalFunction) {
  EXPECT_NEAR(kolmogorov_survival(1.3581), 0.05, 2e-4);
  EXPECT_NEAR(kolmogorov_survival(1.6276), 0.01, 1e-4);
  EXPECT_NEAR(kolmogorov_survival(0.8276), 0.5, 1e-3);
  // both series agree where they meet
  EXPECT_NEAR(kolmogorov_survival(std::nextafter(1.0, 0.0)), kolmogorov_survival(1.0), 1e-12);
  EXPECT_EQ(kolmogorov_survival(0.0), 1.0);
}

TEST(KsGaussian, SelfCalibration) {
  int passed = 0;
  for (int t = 0; t < 100; ++t) passed += ks_gaussian_test(synthetic_normals(55, t, 10000), 0.0, 1.0).p_value > 0.01;
  EXPECT_GE(passed, 95);
}

TEST(KsGaussian, ConstantSampleIsRejected) {
  const std::vector<double> xs(100, 0.0);
  const GofTestResult r = ks_gaussian_test(xs, 0.0, 1.0);
  EXPECT_GE(r.statistic, 0.5);
  EXPECT_LT(r.p_value, 1e-10);
  EXPECT_THROW(ks_gaussian_test(xs, 0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(ks_gaussian_test(std::vector<double>(49, 0.0), 0.0, 1.0), std::invalid_argument);
}

TEST(KsGaussian, UniformAgainstMatchedNormalIsRejected) {
  StreamKey k;
  k.master_seed = 3;
  k.tag = static_cast<std::uint32_t>(StreamTag::synthetic);
  Stream s(k);
  std::vector<double> u;
  for (int i = 0; i < 10000; ++i) u.push_back(s.next());
  EXPECT_LT(ks_gaussian_test(u, 0.5, 1.0 / 12.0).p_value, 0.001);
}

TEST(KsTwoSample, SameAndShiftedSamples) {
  const auto a = synthetic_normals(8, 0, 5000);
  const auto b = synthetic_normals(8, 1, 5000);
  EXPECT_GT(ks_two_sample(a, b).p_value, 0.01);
  std::vector<double> shifted = b;
  for (double& x : shifted) x += 0.2;
  const TwoSampleKs r = ks_two_sample(a, shifted);
  EXPECT_GT(r.statistic, r.critical_01);
}

TEST(KsCalibrationHarness, TypeOneErrorNearNominal) {
  const KsCalibration c = ks_null_calibration(400, 1000, 0.01, 77, 2);
  EXPECT_GE(c.rate(), 0.0025);
  EXPECT_LE(c.rate(), 0.05);
}

TEST(LatticeSpacing, GcdOfOffsets) {
  EXPECT_EQ(lattice_spacing(std::vector<double>{1, 3, 7, -5}), 2.0);
  EXPECT_EQ(lattice_spacing(std::vector<double>{0.5, 1.5}), 0.0);
  EXPECT_EQ(lattice_spacing(std::vector<double>{4, 4}), 0.0);
}

TEST(Phi, LatticeCoinValues) {
  const std::vector<Vec> x{Vec{0.0}, Vec{1.0}, Vec{2.0}, Vec{-3.0}};
  const PhiEstimate p = estimate_phi(kLattice, 5, x, 20000);
  // phi(0) = Var(2p - 1) = 1/3; other lattice sites are independent
  EXPECT_NEAR(p.curve.estimates[0], 1.0 / 3.0, 4.0 * p.curve.standard_errors[0]);
  for (std::size_t i = 1; i < x.size(); ++i) EXPECT_NEAR(p.curve.estimates[i], 0.0, 4.0 * p.curve.standard_errors[i]);
  EXPECT_EQ(p.curve.grid[3], 3.0);
}

TEST(Phi, FiniteRangeVanishesBeyondTwoRanges) {
  const Model m{1, FiniteRange{CoinFamily{}, 1.0, Interpolation::average}};
  const std::vector<Vec> x{Vec{0.0}, Vec{1.0}, Vec{2.5}, Vec{4.0}};
  const PhiEstimate p = estimate_phi(m, 2, x, 20000);
  EXPECT_GT(p.curve.estimates[1], 4.0 * p.curve.standard_errors[1]);
  EXPECT_NEAR(p.curve.estimates[2], 0.0, 4.0 * p.curve.standard_errors[2]);
  EXPECT_NEAR(p.curve.estimates[3], 0.0, 4.0 * p.curve.standard_errors[3]);
}

TEST(Phi, FullyCorrelatedIsConstantInX) {
  const std::vector<Vec> x{Vec{0.0}, Vec{0.5}, Vec{7.0}};
  const PhiEstimate p = estimate_phi(kFully, 3, x, 5000);
  EXPECT_EQ(p.curve.estimates[0], p.curve.estimates[1]);
  EXPECT_EQ(p.curve.estimates[0], p.curve.estimates[2]);
}

TEST(VarianceScan, LatticeMatchesTheChainOracle) {
  const std::vector<std::int64_t> n{1, 2, 3, 4, 6, 8};
  const auto oracle = lattice_variance_oracle(8);
  EXPECT_NEAR(oracle[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(oracle[2], 5.0 / 9.0, 1e-15);
  const VarianceScan s = variance_scan(kLattice, 14, n, 20000, MeanMethod::exact);
  for (std::size_t i = 0; i < n.size(); ++i) {
    EXPECT_NEAR(s.curve.estimates[i], oracle[static_cast<std::size_t>(n[i])], 4.0 * s.curve.standard_errors[i]) << n[i];
  }
}

TEST(VarianceScan, FullyCorrelatedIsLinear) {
  std::vector<std::int64_t> n;
  for (int k = 4; k <= 9; ++k) n.push_back(std::int64_t{1} << k);
  const VarianceScan s = variance_scan(kFully, 6, n, 1000, MeanMethod::exact);
  ASSERT_TRUE(s.curve.fit);
  EXPECT_GE(s.curve.fit->exponent, 0.9);
  EXPECT_LE(s.curve.fit->exponent, 1.1);
  for (std::size_t i = 0; i < n.size(); ++i) {
    EXPECT_NEAR(s.curve.estimates[i], n[i] / 3.0, 4.0 * s.curve.standard_errors[i]);
  }
}

TEST(VarianceScan, MixingLatticeIsSubdiffusive) {
  std::vector<std::int64_t> n;
  for (int k = 4; k <= 9; ++k) n.push_back(std::int64_t{1} << k);
  const VarianceScan s = variance_scan(kLattice, 6, n, 300, MeanMethod::exact);
  ASSERT_TRUE(s.curve.fit);
  EXPECT_LT(s.curve.fit->ci_high, 0.9);
}

TEST(VarianceScan, DiracFieldVarianceIsTheWalkVariance) {
  std::vector<std::int64_t> n;
  for (int k = 2; k <= 7; ++k) n.push_back(std::int64_t{1} << k);
  const VarianceScan s = variance_scan(kDirac, 3, n, 2000, MeanMethod::exact);
  ASSERT_TRUE(s.curve.fit);
  EXPECT_NEAR(s.curve.fit->exponent, 1.0, 0.1);
  for (std::size_t i = 0; i < n.size(); ++i) EXPECT_NEAR(s.curve.estimates[i], double(n[i]), 4.0 * s.curve.standard_errors[i]);
}

TEST(VarianceScan, MonteCarloMeansAgreeWithExact) {
  const std::vector<std::int64_t> n{4, 8, 16};
  const VarianceScan exact = variance_scan(kLattice, 21, n, 400, MeanMethod::exact);
  const VarianceScan mc = variance_scan(kLattice, 21, n, 400, MeanMethod::monte_carlo, 2000);
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double se = std::hypot(exact.curve.standard_errors[i], mc.curve.standard_errors[i]);
    EXPECT_NEAR(mc.curve.estimates[i], exact.curve.estimates[i], 4.0 * se);
  }
}

TEST(VarianceIdentity, ExactAtOneWithinErrorsBeyond) {
  const std::vector<std::int64_t> n{1, 4, 8};
  const IdentityReport r = variance_identity_check(kLattice, 9, n, 2000, 50000);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_NEAR(r.rows[0].residual, 0.0, 1e-10 * r.rows[0].lhs);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    EXPECT_TRUE(r.rows[i].within(4.0)) << r.rows[i].n << " " << r.rows[i].residual << " " << r.rows[i].combined_se;
  }
}

TEST(VarianceIdentity, FullyCorrelatedBothSidesAreNPhiZero) {
  const std::vector<std::int64_t> n{1, 2, 5};
  const IdentityReport r = variance_identity_check(kFully, 4, n, 3000, 2000);
  for (const IdentityRow& row : r.rows) {
    EXPECT_NEAR(row.rhs, row.n * r.rows[0].rhs, 1e-9 * row.rhs);
    EXPECT_NEAR(row.lhs, row.n / 3.0, 4.0 * row.lhs_se + 4.0 * row.rhs_se);
    EXPECT_TRUE(row.within(4.0));
  }
}

TEST(CrossTerms, VanishOffTheDiagonal) {
  const std::vector<std::pair<std::int64_t, std::int64_t>> pairs{{0, 1}, {1, 3}, {2, 6}};
  for (const CrossTermRow& row : cross_term_check(kLattice, 2, 20000, pairs)) {
    EXPECT_NEAR(row.covariance.value, 0.0, 4.0 * row.covariance.se) << row.k << "," << row.l;
  }
}

TEST(Fclt, MixingLatticeMarginalsAndCovariance) {
  const Model weak{1, LatticeProduct{CoinFamily{0.45, 0.55, 1.0}, true}};
  FcltOptions opt;
  opt.epsilon = 1.0 / 256.0;
  opt.walks = 4000;
  const FcltResult r = fclt_check(weak, 77, opt);
  EXPECT_EQ(r.marginals.size(), 3u);
  EXPECT_EQ(r.jitter_spacing[0], 2.0);
  EXPECT_TRUE(r.marginals_pass(0.001)) << r.min_p_value();
  for (const CovarianceEntry& c : r.covariances) EXPECT_TRUE(c.within(5.0)) << c.s << "," << c.t;
}

TEST(Fclt, RejectsCoarseEpsilon) {
  FcltOptions opt;
  opt.epsilon = 1.0 / 32.0;
  EXPECT_THROW(fclt_check(kLattice, 1, opt), std::invalid_argument);
}

TEST(Fclt, DiracFieldQuenchedCentredProcessIsZero) {
  FcltOptions opt;
  opt.epsilon = 1.0 / 128.0;
  opt.walks = 100;
  opt.centering = Centering::quenched_mean;
  opt.jitter = false;
  opt.reference = Mat::identity(1);
  const FcltResult r = fclt_check(kDirac, 5, opt);
  for (const CovarianceEntry& c : r.covariances) {
    EXPECT_EQ(c.estimate, 0.0);
    EXPECT_EQ(c.se, 0.0);
  }
}

TEST(Dichotomy, FullyCorrelatedVelocityCentringFails) {
  FcltOptions opt;
  opt.epsilon = 1.0 / 256.0;
  opt.walks = 3000;
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const DichotomyResult d = counterexample_check(kFully, seeds, opt);
  EXPECT_GE(d.velocity_failures, 2u);
  EXPECT_GE(d.quenched_passes, 2u);
  EXPECT_NEAR(d.quenched_centred.front().reference(0, 0), 2.0 / 3.0, 1e-15);
}

TEST(MaxDrift, MixingDecaysFullyCorrelatedDoesNot) {
  // d = 1 mixing: the curve falls like n^{-1/4}, so 64x in n gives a mean ratio near 0.35
  const std::vector<std::int64_t> n{64, 4096};
  const MaxDriftResult mix = max_drift_check(kLattice, 3, 10, n);
  const MaxDriftResult fc = max_drift_check(kFully, 3, 10, n);
  EXPECT_LT(mix.mean_curve.estimates[1], 0.6 * mix.mean_curve.estimates[0]);
  EXPECT_GT(fc.mean_curve.estimates[1], 0.6 * fc.mean_curve.estimates[0]);
  EXPECT_EQ(mix.ratios.size(), 10u);
}

TEST(MaxDrift, DeterministicLawGivesZero) {
  const Model fixed{1, LatticeProduct{FixedFamily{DiracLaw{Vec{1.0}}}, true}};
  const std::vector<std::int64_t> n{4, 16, 64};
  const MaxDriftResult r = max_drift_check(fixed, 1, 3, n);
  for (const auto& c : r.curves)
    for (double v : c) EXPECT_EQ(v, 0.0);
}

TEST(Centring, AnalyticVelocityWhenAvailable) {
  EXPECT_EQ(centring_velocity(kLattice, 1).source, "analytic");
  const Model avg{1, FiniteRange{GaussianFamily{Vec{0.1}, Mat::identity(1), 0.5}, 1.0, Interpolation::average}};
  const VelocityChoice v = centring_velocity(avg, 1);
  EXPECT_EQ(v.source, "pre-pass");
  EXPECT_NEAR(v.velocity[0], 0.1, 0.01);
}
