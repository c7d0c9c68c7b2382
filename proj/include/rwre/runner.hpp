#ifndef RWRE_RUNNER_HPP
#define RWRE_RUNNER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rwre/analysis.hpp"
#include "rwre/config.hpp"
#include "rwre/diff_chain.hpp"
#include "rwre/report.hpp"
#include "rwre/walk.hpp"

namespace rwre {

inline std::string describe_family(const SiteFamily& f) {
  return std::visit(Overloaded{
                        [](const CoinFamily& c) {
                          return "coin(p~U[" + format_number(c.p_lo) + "," + format_number(c.p_hi) +
                                 "],step=" + format_number(c.step) + ")";
                        },
                        [](const FixedFamily&) { return std::string("fixed"); },
                        [](const GaussianFamily& g) {
                          return "gaussian(mean=" + format_number(g.base_mean[0]) +
                                 ",var=" + format_number(g.cov(0, 0)) +
                                 ",spread=" + format_number(g.drift_spread) + ")";
                        },
                    },
                    f);
}

/// Compact, deterministic model label used in every report row.
inline std::string describe_model(const Model& m) {
  const std::string d = ",d=" + std::to_string(m.dim);
  return std::visit(Overloaded{
                        [&](const LatticeProduct& l) {
                          return "lattice[" + describe_family(l.family) + d +
                                 (l.uniform_offset ? "" : ",no-offset") + "]";
                        },
                        [&](const FiniteRange& f) {
                          return "finite-range[" + describe_family(f.family) + d + ",R=" + format_number(f.range) +
                                 (f.rule == Interpolation::nearest ? ",nearest" : ",average") + "]";
                        },
                        [&](const FullyCorrelated& f) { return "fully-correlated[" + describe_family(f.family) + d + "]"; },
                        [&](const DiracField& f) {
                          return std::string("dirac[") + (f.displacement == Displacement::box ? "box" : "plus-minus") +
                                 ",scale=" + format_number(f.scale) + d + "]";
                        },
                    },
                    m.spec);
}

namespace detail {

class ReportBuilder {
 public:
  ReportBuilder(const ExperimentConfig& c, ExperimentReport& r) : rep_(r), model_(describe_model(c.model)) {}

  void row(const std::string& section, std::uint64_t seed, std::int64_t replica, int component,
           const std::string& grid_name, double grid_value, const std::string& quantity, double estimate,
           double se = std::numeric_limits<double>::quiet_NaN()) {
    rep_.rows.push_back({section, model_, seed, replica, component, grid_name, grid_value, quantity, estimate, se});
  }

  void curve(const std::string& section, const ScanCurve& c, std::uint64_t seed) {
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      row(section, seed, -1, -1, c.grid_name, c.grid[i], c.quantity, c.estimates[i], c.standard_errors[i]);
    }
    if (c.fit) fit(section, *c.fit, seed, c.quantity);
  }

  void fit(const std::string& section, const ExponentFit& f, std::uint64_t seed, const std::string& quantity) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row(section, seed, -1, -1, "", nan, quantity + ":exponent", f.exponent, f.exponent_se);
    row(section, seed, -1, -1, "", nan, quantity + ":exponent_ci_low", f.ci_low);
    row(section, seed, -1, -1, "", nan, quantity + ":exponent_ci_high", f.ci_high);
    row(section, seed, -1, -1, "", nan, quantity + ":fit_points", static_cast<double>(f.points));
  }

  void verdict(const std::string& name, bool passed, double observed, const std::string& threshold,
               const std::string& detail = "") {
    rep_.verdicts.push_back({name, passed, observed, threshold, detail});
  }

  void meta(const std::string& k, const std::string& v) { rep_.metadata.emplace_back(k, v); }

  /// Verdict on an exponent range; missing fit is a failure.
  void exponent_range(const std::string& name, const std::optional<ExponentFit>& fit, const Criteria& k) {
    if (!k.exponent_min && !k.exponent_max) return;
    const std::string lo = k.exponent_min ? format_number(*k.exponent_min) : "-inf";
    const std::string hi = k.exponent_max ? format_number(*k.exponent_max) : "inf";
    if (!fit) {
      verdict(name, false, std::numeric_limits<double>::quiet_NaN(), "[" + lo + ", " + hi + "]",
              "fewer than 4 usable grid points");
      return;
    }
    const bool ok = (!k.exponent_min || fit->exponent >= *k.exponent_min) &&
                    (!k.exponent_max || fit->exponent <= *k.exponent_max);
    verdict(name, ok, fit->exponent, "[" + lo + ", " + hi + "]",
            "95% CI [" + format_number(fit->ci_low) + ", " + format_number(fit->ci_high) + "]");
  }

 private:
  ExperimentReport& rep_;
  std::string model_;
};

inline double z_score(double diff, double se) {
  if (se > 0.0) return std::abs(diff) / se;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

inline ChainKind chain_kind(const ExperimentConfig& c) {
  return c.chain == "independent" ? ChainKind::independent_env : ChainKind::same_env;
}

inline std::string count_of(std::size_t k, std::size_t m) { return std::to_string(k) + " of " + std::to_string(m); }

inline void run_moments(const ExperimentConfig& c, ReportBuilder& b) {
  const MomentEstimate est = velocity_and_covariance(c.model, c.seed, c.replicas, c.walks, c.workers);
  const int d = c.model.dim;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < d; ++i) b.row("velocity", c.seed, -1, i, "", nan, "v", est.velocity[i], est.velocity_se[i]);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      b.row("diffusion", c.seed, -1, i * d + j, "", nan, "D", est.diffusion(i, j), est.diffusion_se(i, j));
    }
  }
  const auto am = analytic_moments(c.model);
  if (!am) {
    b.meta("oracle", "none (no closed-form moments for this model)");
    return;
  }
  b.meta("oracle", "analytic");
  double zv = 0.0, zd = 0.0;
  for (int i = 0; i < d; ++i) {
    b.row("velocity", c.seed, -1, i, "", nan, "v_analytic", am->velocity[i]);
    zv = std::max(zv, z_score(est.velocity[i] - am->velocity[i], est.velocity_se[i]));
    for (int j = 0; j < d; ++j) {
      b.row("diffusion", c.seed, -1, i * d + j, "", nan, "D_analytic", am->diffusion(i, j));
      zd = std::max(zd, z_score(est.diffusion(i, j) - am->diffusion(i, j), est.diffusion_se(i, j)));
    }
  }
  const std::string thr = "<= " + format_number(c.criteria.k_se) + " SE";
  b.verdict("velocity-matches-analytic", zv <= c.criteria.k_se, zv, thr, "max |v_hat - v| / SE");
  b.verdict("diffusion-matches-analytic", zd <= c.criteria.k_se, zd, thr, "max |D_hat - D| / SE");
}

inline void run_variance_scan(const ExperimentConfig& c, ReportBuilder& b) {
  const MeanMethod method = c.mean_method == "mc" ? MeanMethod::monte_carlo : MeanMethod::exact;
  const VarianceScan s = variance_scan(c.model, c.seed, c.n, c.replicas, method, c.walks, c.workers);
  b.meta("velocity_source", s.velocity.source);
  b.meta("mean_method", c.mean_method);
  for (std::size_t r = 0; r < s.per_replica.size(); ++r) {
    for (std::size_t g = 0; g < c.n.size(); ++g) {
      b.row("replica", derive_seed(c.seed, r, SeedRole::environment), static_cast<std::int64_t>(r), -1, "n",
            static_cast<double>(c.n[g]), "sq_deviation", s.per_replica[r][g]);
    }
  }
  b.curve("curve", s.curve, c.seed);
  b.exponent_range("variance-exponent", s.curve.fit, c.criteria);
}

inline void run_phi_decay(const ExperimentConfig& c, ReportBuilder& b) {
  std::vector<Vec> xs;
  for (double v : c.x) {
    Vec x(c.model.dim);
    x[0] = v;
    xs.push_back(x);
  }
  const PhiEstimate phi = estimate_phi(c.model, c.seed, xs, c.replicas, c.workers);
  b.curve("phi", phi.curve, c.seed);
  std::optional<double> zero_beyond = c.criteria.zero_beyond;
  const bool constant = std::holds_alternative<FullyCorrelated>(c.model.spec);
  if (!zero_beyond) {
    if (const auto* f = std::get_if<FiniteRange>(&c.model.spec)) {
      zero_beyond = 2.0 * f->range;
    } else if (!constant) {
      zero_beyond = 1.0;
    }
  }
  if (zero_beyond) {
    double worst = 0.0;
    std::size_t tested = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (phi.curve.grid[i] > *zero_beyond) {
        worst = std::max(worst, z_score(phi.curve.estimates[i], phi.curve.standard_errors[i]));
        ++tested;
      }
    }
    b.verdict("phi-vanishes-beyond-range", tested > 0 && worst <= c.criteria.k_se, worst,
              "<= " + format_number(c.criteria.k_se) + " SE for |x| > " + format_number(*zero_beyond),
              std::to_string(tested) + " separations tested");
  }
  if (constant) {
    double spread = 0.0;
    for (double e : phi.curve.estimates) spread = std::max(spread, std::abs(e - phi.curve.estimates.front()));
    b.verdict("phi-constant-in-x", spread <= 1e-12, spread, "<= 1e-12", "max |phi(x) - phi(x_0)|");
  }
}

inline void run_identity(const ExperimentConfig& c, ReportBuilder& b) {
  const IdentityReport rep = variance_identity_check(c.model, c.seed, c.n, c.replicas, c.y_replicas, c.workers);
  b.meta("phi_separations", std::to_string(rep.separations));
  for (const IdentityRow& r : rep.rows) {
    const double n = static_cast<double>(r.n);
    b.row("identity", c.seed, -1, -1, "n", n, "lhs", r.lhs, r.lhs_se);
    b.row("identity", c.seed, -1, -1, "n", n, "rhs", r.rhs, r.rhs_se);
    b.row("identity", c.seed, -1, -1, "n", n, "residual", r.residual, r.combined_se);
    const double z = z_score(r.residual, r.combined_se);
    if (r.n == 1) {
      const double tol = 1e-10 * std::max(1.0, std::abs(r.lhs));
      b.verdict("identity-n=1-exact", std::abs(r.residual) <= tol, std::abs(r.residual), "<= 1e-10 (relative)");
    } else {
      b.verdict("identity-n=" + std::to_string(r.n), z <= c.criteria.k_se, z,
                "<= " + format_number(c.criteria.k_se) + " combined SE",
                "lhs " + format_number(r.lhs) + ", rhs " + format_number(r.rhs));
    }
  }
}

inline void fclt_rows(ReportBuilder& b, const std::string& section, const FcltResult& f, std::int64_t idx) {
  for (const MarginalTest& m : f.marginals) {
    b.row(section, f.env_seed, idx, m.coordinate, "t", m.t, "ks_statistic", m.test.statistic);
    b.row(section, f.env_seed, idx, m.coordinate, "t", m.t, "ks_p_value", m.test.p_value);
    b.row(section, f.env_seed, idx, m.coordinate, "t", m.t, "reference_variance", m.test.ref_variance);
  }
  for (const CovarianceEntry& e : f.covariances) {
    b.row(section, f.env_seed, idx, e.coordinate, "s", e.s, "cov@t=" + format_number(e.t), e.estimate, e.se);
    b.row(section, f.env_seed, idx, e.coordinate, "s", e.s, "cov_reference@t=" + format_number(e.t), e.reference);
  }
}

inline FcltOptions fclt_options(const ExperimentConfig& c) {
  FcltOptions o;
  o.epsilon = c.epsilon;
  o.times = c.t;
  o.walks = c.walks;
  o.workers = c.workers;
  return o;
}

inline std::vector<std::uint64_t> environment_seeds(const ExperimentConfig& c) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < c.environments; ++i) seeds.push_back(derive_seed(c.seed, i, SeedRole::environment));
  return seeds;
}

inline void run_fclt(const ExperimentConfig& c, ReportBuilder& b) {
  FcltOptions o = fclt_options(c);
  o.centering = c.centering == "quenched-mean" ? Centering::quenched_mean : Centering::velocity;
  if (o.centering == Centering::quenched_mean) o.reference = quenched_centred_reference(c.model, c.seed, c.workers);
  const auto seeds = environment_seeds(c);
  std::size_t marg_pass = 0, cov_pass = 0;
  double worst_cov = 0.0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const FcltResult f = fclt_check(c.model, seeds[i], o);
    if (i == 0) {
      b.meta("velocity_source", f.velocity.source);
      b.meta("centering", c.centering);
      if (!f.mean_method.empty()) b.meta("quenched_mean_method", f.mean_method);
      b.meta("reference_D00", format_number(f.reference(0, 0)));
    }
    fclt_rows(b, "fclt", f, static_cast<std::int64_t>(i));
    if (f.marginals_pass(c.criteria.alpha)) ++marg_pass;
    double seed_worst = 0.0;
    for (const auto& e : f.covariances) seed_worst = std::max(seed_worst, z_score(e.estimate - e.reference, e.se));
    worst_cov = std::max(worst_cov, seed_worst);
    if (seed_worst <= c.criteria.cov_k_se) ++cov_pass;
  }
  const std::size_t m = seeds.size();
  const std::size_t need = c.criteria.min_pass;
  if (c.criteria.negative_control) {
    const std::size_t fails = m - marg_pass;
    b.verdict("marginals-reject (negative control)", fails >= need, static_cast<double>(fails),
              ">= " + std::to_string(need) + " of " + std::to_string(m),
              count_of(fails, m) + " seeds with some KS p <= " + format_number(c.criteria.alpha));
    return;
  }
  b.verdict("marginals-gaussian", marg_pass >= need, static_cast<double>(marg_pass),
            ">= " + std::to_string(need) + " of " + std::to_string(m),
            count_of(marg_pass, m) + " seeds with every KS p > " + format_number(c.criteria.alpha));
  b.verdict("covariance-min-s-t", cov_pass >= need, static_cast<double>(cov_pass),
            ">= " + std::to_string(need) + " of " + std::to_string(m),
            "entries within " + format_number(c.criteria.cov_k_se) + " SE; worst " + format_number(worst_cov) + " SE");
}

inline void run_counterexample(const ExperimentConfig& c, ReportBuilder& b) {
  const auto seeds = environment_seeds(c);
  const DichotomyResult d = counterexample_check(c.model, seeds, fclt_options(c), c.criteria.alpha);
  if (!d.velocity_centred.empty()) {
    b.meta("velocity_source", d.velocity_centred.front().velocity.source);
    b.meta("reference_D00", format_number(d.velocity_centred.front().reference(0, 0)));
    b.meta("reference_noise00", format_number(d.quenched_centred.front().reference(0, 0)));
    b.meta("quenched_mean_method", d.quenched_centred.front().mean_method);
  }
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    fclt_rows(b, "velocity-centred", d.velocity_centred[i], static_cast<std::int64_t>(i));
    fclt_rows(b, "quenched-centred", d.quenched_centred[i], static_cast<std::int64_t>(i));
  }
  const std::size_t m = seeds.size(), need = c.criteria.min_pass;
  const std::string thr = ">= " + std::to_string(need) + " of " + std::to_string(m);
  b.verdict("velocity-centred-rejected", d.velocity_failures >= need, static_cast<double>(d.velocity_failures), thr,
            count_of(d.velocity_failures, m) + " seeds with some KS p <= " + format_number(c.criteria.alpha));
  b.verdict("quenched-centred-gaussian", d.quenched_passes >= need, static_cast<double>(d.quenched_passes), thr,
            count_of(d.quenched_passes, m) + " seeds with every KS p > " + format_number(c.criteria.alpha));
}

inline void run_max_drift(const ExperimentConfig& c, ReportBuilder& b) {
  const MaxDriftResult r = max_drift_check(c.model, c.seed, c.replicas, c.n, c.workers);
  b.meta("velocity_source", r.velocity.source);
  std::size_t decayed = 0;
  for (std::size_t i = 0; i < r.curves.size(); ++i) {
    const std::uint64_t s = derive_seed(c.seed, i, SeedRole::environment);
    for (std::size_t g = 0; g < r.n_grid.size(); ++g) {
      b.row("replica", s, static_cast<std::int64_t>(i), -1, "n", static_cast<double>(r.n_grid[g]), "max_drift",
            r.curves[i][g]);
    }
    b.row("replica", s, static_cast<std::int64_t>(i), -1, "", std::numeric_limits<double>::quiet_NaN(), "ratio",
          r.ratios[i]);
    if (r.ratios[i] < c.criteria.ratio) ++decayed;
  }
  b.curve("mean", r.mean_curve, c.seed);
  const std::size_t m = r.curves.size(), need = c.criteria.min_pass;
  const std::string detail = count_of(decayed, m) + " replicas with curve(" + std::to_string(r.n_grid.back()) +
                             ") < " + format_number(c.criteria.ratio) + " curve(" + std::to_string(r.n_grid.front()) + ")";
  if (c.criteria.negative_control) {
    b.verdict("no-decay (negative control)", decayed < need, static_cast<double>(decayed),
              "< " + std::to_string(need) + " of " + std::to_string(m), detail);
  } else {
    b.verdict("max-drift-decays", decayed >= need, static_cast<double>(decayed),
              ">= " + std::to_string(need) + " of " + std::to_string(m), detail);
  }
}

inline void run_ychain_exit(const ExperimentConfig& c, ReportBuilder& b) {
  const ChainKind kind = chain_kind(c);
  b.meta("chain", chain_kind_name(kind));
  b.meta("step_cap", std::to_string(c.step_cap));
  try {
    const ExitScan s = exit_time_scan(c.model, c.seed, c.r, c.replicas, c.step_cap, kind, c.workers);
    b.curve("exit", s.curve, c.seed);
    for (std::size_t i = 0; i < c.r.size(); ++i) {
      b.row("exit", c.seed, -1, -1, "r", c.r[i], "capped_fraction", s.capped_fraction[i]);
      b.row("exit", c.seed, -1, -1, "r", c.r[i], "min_exit_time", s.min_steps[i]);
    }
    if (s.curve.fit) {
      b.verdict("exit-slope-envelope", s.curve.fit->exponent <= c.criteria.envelope, s.curve.fit->exponent,
                "<= " + format_number(c.criteria.envelope));
    } else {
      b.verdict("exit-slope-envelope", false, std::numeric_limits<double>::quiet_NaN(),
                "<= " + format_number(c.criteria.envelope), "no exponent fit (needs >= 4 usable radii)");
    }
    b.exponent_range("exit-slope-range", s.curve.fit, c.criteria);
  } catch (const InsufficientData& ex) {
    for (double r : c.r) b.row("exit", c.seed, -1, -1, "r", r, "capped_fraction", 1.0);
    b.verdict("exit-data", false, 1.0, "some uncapped runs", ex.what());
  }
  const SymmetryCheck sym = symmetry_check(c.model, derive_seed(c.seed, 1, SeedRole::chain), c.replicas, kind, c.workers);
  double worst = 0.0;
  for (std::size_t j = 0; j < sym.per_coordinate.size(); ++j) {
    const auto& k = sym.per_coordinate[j];
    b.row("symmetry", c.seed, -1, static_cast<int>(j), "", std::numeric_limits<double>::quiet_NaN(), "ks_distance",
          k.statistic);
    b.row("symmetry", c.seed, -1, static_cast<int>(j), "", std::numeric_limits<double>::quiet_NaN(),
          "critical_0.01", k.critical_01);
    worst = std::max(worst, k.statistic / k.critical_01);
  }
  b.verdict("y1-symmetric", sym.passed, worst, "< 1", "KS distance over its 0.01-level critical value");
  if (c.escape_r.empty()) return;
  const std::size_t escape_replicas = std::max<std::size_t>(2, std::min<std::size_t>(c.replicas, 1000));
  double worst_scaled = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.escape_r.size(); ++i) {
    const double r = c.escape_r[i];
    const auto budget = static_cast<std::int64_t>(std::ceil(c.escape_budget * r * r * r));
    const EscapeResult e = exit_escape_probability(c.model, derive_seed(c.seed, 2 + i, SeedRole::chain), r,
                                                   c.escape_r0, budget, escape_replicas, {}, kind, c.workers);
    for (std::size_t s = 0; s < e.starts.size(); ++s) {
      b.row("escape", c.seed, static_cast<std::int64_t>(s), -1, "r", r, "p_escape@y0=" + format_number(e.starts[s][0]),
            e.probabilities[s].value, e.probabilities[s].se);
    }
    b.row("escape", c.seed, -1, -1, "r", r, "p_escape_min", e.min_probability);
    b.row("escape", c.seed, -1, -1, "r", r, "p_escape_mean", e.mean_probability);
    b.row("escape", c.seed, -1, -1, "r", r, "r_times_p_min", r * e.min_probability);
    worst_scaled = std::min(worst_scaled, r * e.min_probability);
  }
  b.meta("escape_r0", format_number(c.escape_r0));
  b.meta("escape_replicas_per_start", std::to_string(escape_replicas));
  b.verdict("escape-scaled-bounded-below", worst_scaled >= c.criteria.escape_scaled_min, worst_scaled,
            ">= " + format_number(c.criteria.escape_scaled_min), "min over r of r * min-over-shell P(escape)");
}

inline std::vector<double> default_excursion_grid(std::int64_t n) {
  std::vector<double> a;
  for (std::int64_t v = 2; v <= n / 8; v *= 2) a.push_back(static_cast<double>(v));
  return a;
}

inline void run_excursion(const ExperimentConfig& c, ReportBuilder& b) {
  const std::int64_t n = c.n.front();
  const std::vector<double> a = c.a.empty() ? default_excursion_grid(n) : c.a;
  b.meta("chain", chain_kind_name(chain_kind(c)));
  b.meta("max_mixing_exponent", format_number(1.0 / c.epsilon));
  try {
    const ExcursionStats s = excursion_scan(c.model, c.seed, n, c.epsilon, c.replicas, a, chain_kind(c), c.workers);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    b.row("excursion", c.seed, -1, -1, "", nan, "box_radius", s.box_radius);
    b.row("excursion", c.seed, -1, -1, "", nan, "complete_excursions", static_cast<double>(s.complete_excursions));
    b.row("excursion", c.seed, -1, -1, "", nan, "observed_excursions", static_cast<double>(s.observed_excursions));
    b.row("excursion", c.seed, -1, -1, "", nan, "tail_exponent", s.tail_exponent);
    b.curve("tail", s.tail, c.seed);
    b.verdict("interleaving", s.all_interleaved, s.all_interleaved ? 1.0 : 0.0, "every replica",
              "0 = V0_in < V1_out < V1_in < ...");
    ExponentFit tail;
    tail.exponent = s.tail_exponent;
    tail.ci_low = s.tail_ci_low;
    tail.ci_high = s.tail_ci_high;
    b.exponent_range("tail-exponent", tail, c.criteria);
  } catch (const InsufficientData& ex) {
    b.verdict("excursion-data", false, 0.0, ">= 10 complete excursions", ex.what());
  }
}

inline void run_occupation(const ExperimentConfig& c, ReportBuilder& b) {
  const ScanCurve s = occupation_time(c.model, c.seed, c.n, c.epsilon, c.replicas, chain_kind(c), c.workers);
  b.meta("chain", chain_kind_name(chain_kind(c)));
  b.curve("occupation", s, c.seed);
  Criteria k = c.criteria;
  k.exponent_min.reset();
  b.exponent_range("occupation-exponent", s.fit, k);
}

}  // namespace detail

/// Runs one experiment. The report is a pure function of the config: worker
/// count and wall-clock never enter it.
inline ExperimentReport run(const ExperimentConfig& c) {
  ExperimentReport rep;
  rep.experiment = experiment_name(c.experiment);
  rep.config = c.text;
  rep.seed = c.seed;
  rep.metadata.emplace_back("model", describe_model(c.model));
  detail::ReportBuilder b(c, rep);
  switch (c.experiment) {
    case Experiment::moments: detail::run_moments(c, b); break;
    case Experiment::variance_scan: detail::run_variance_scan(c, b); break;
    case Experiment::phi_decay: detail::run_phi_decay(c, b); break;
    case Experiment::identity_check: detail::run_identity(c, b); break;
    case Experiment::fclt: detail::run_fclt(c, b); break;
    case Experiment::max_drift: detail::run_max_drift(c, b); break;
    case Experiment::ychain_exit: detail::run_ychain_exit(c, b); break;
    case Experiment::ychain_excursion: detail::run_excursion(c, b); break;
    case Experiment::occupation: detail::run_occupation(c, b); break;
    case Experiment::counterexample: detail::run_counterexample(c, b); break;
  }
  return rep;
}

}  // namespace rwre

#endif  // RWRE_RUNNER_HPP
