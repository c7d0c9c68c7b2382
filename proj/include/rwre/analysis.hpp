#ifndef RWRE_ANALYSIS_HPP
#define RWRE_ANALYSIS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rwre/diff_chain.hpp"
#include "rwre/environment.hpp"
#include "rwre/parallel.hpp"
#include "rwre/stats.hpp"
#include "rwre/walk.hpp"

namespace rwre {

inline constexpr std::size_t kBootstrapResamples = 200;
inline constexpr std::size_t kPrepassEnvironments = 1000;
inline constexpr std::size_t kPrepassWalks = 1000;

struct VelocityChoice {
  Vec velocity;
  std::string source;  // "analytic" or "pre-pass"
};

/// Analytic v when the family has one, else v-hat from a 10^6-step pre-pass.
inline VelocityChoice centring_velocity(const Model& model, std::uint64_t master, int workers = 1) {
  if (const auto m = analytic_moments(model)) return {m->velocity, "analytic"};
  const MomentEstimate est = velocity_and_covariance(model, derive_seed(master, 0, SeedRole::calibration),
                                                     kPrepassEnvironments, kPrepassWalks, workers);
  return {est.velocity, "pre-pass"};
}

/// E[cov(omega_{0,0})], analytic when available, else averaged over replicas.
inline Mat expected_local_covariance(const Model& model, std::uint64_t master, std::size_t replicas = 10000,
                                     int workers = 1) {
  if (const auto m = analytic_moments(model); m && m->noise) return *m->noise;
  const auto covs = parallel_map(replicas, workers, [&](std::size_t r) {
    const Environment env(model, derive_seed(master, r, SeedRole::calibration));
    return law_cov(env.query(0, Vec(model.dim)));
  });
  Mat s(model.dim);
  for (const Mat& c : covs) s += c;
  return s * (1.0 / static_cast<double>(replicas));
}

/// Limiting covariance of the quenched-mean-centred process: D minus the
/// per-step variance of the quenched mean. That variance is o(n) except under
/// the fully correlated model, where it is n Var(D(omega)) and the limit is E[cov(omega_{0,0})].
inline Mat quenched_centred_reference(const Model& model, std::uint64_t master, int workers = 1) {
  if (std::holds_alternative<FullyCorrelated>(model.spec)) return expected_local_covariance(model, master, 10000, workers);
  if (const auto m = analytic_moments(model)) return m->diffusion;
  return velocity_and_covariance(model, derive_seed(master, 0, SeedRole::calibration), kPrepassEnvironments,
                                 kPrepassWalks, workers)
      .diffusion;
}

// ---------------------------------------------------------------------------
// phi(x) = E[g(omega) . g(T^{0,x} omega)], g = D - v.
// ---------------------------------------------------------------------------

struct PhiEstimate {
  ScanCurve curve;  // grid = |x|
  std::vector<Vec> separations;
  Vec velocity;     // v-hat, the mean origin drift over the replicas
  std::vector<std::vector<double>> products;  // [x][replica] g(0) . g(x)
};

inline PhiEstimate estimate_phi(std::span<const Environment> envs, std::span<const Vec> x_grid, int workers = 1) {
  if (envs.size() < 2) throw std::invalid_argument("estimate_phi needs at least 2 environments");
  const int d = envs.front().dim();
  const auto drifts = parallel_map(envs.size(), workers, [&](std::size_t r) {
    std::vector<Vec> out;
    out.reserve(x_grid.size() + 1);
    out.push_back(local_drift(envs[r]));
    for (const Vec& x : x_grid) out.push_back(law_mean(envs[r].query(0, x)));
    return out;
  });
  PhiEstimate est;
  est.curve.grid_name = "|x|";
  est.curve.quantity = "phi";
  est.separations.assign(x_grid.begin(), x_grid.end());
  est.velocity = Vec(d);
  for (const auto& dr : drifts) est.velocity += dr[0];
  est.velocity *= 1.0 / static_cast<double>(envs.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    std::vector<double> prod;
    prod.reserve(envs.size());
    for (const auto& dr : drifts) prod.push_back((dr[0] - est.velocity).dot(dr[i + 1] - est.velocity));
    const Estimate e = mean_and_se(prod);
    est.curve.push(x_grid[i].norm(), e.value, e.se);
    est.products.push_back(std::move(prod));
  }
  est.curve.try_fit();
  return est;
}

inline PhiEstimate estimate_phi(const Model& model, std::uint64_t master, std::span<const Vec> x_grid,
                                std::size_t replicas, int workers = 1) {
  std::vector<Environment> envs;
  envs.reserve(replicas);
  for (std::size_t r = 0; r < replicas; ++r) envs.push_back(replica_environment(model, master, r));
  return estimate_phi(envs, x_grid, workers);
}

// ---------------------------------------------------------------------------
// Variance of the quenched mean.
// ---------------------------------------------------------------------------

struct VarianceScan {
  ScanCurve curve;  // E|E^omega_0[X_n] - n v|^2 vs n
  VelocityChoice velocity;
  MeanMethod method = MeanMethod::exact;
  std::vector<std::vector<double>> per_replica;  // [replica][grid index]
};

/// Per-replica |E^omega_0[X_n] - n v|^2 at every grid point. With Monte Carlo
/// means the walk noise sum_j se_j^2 is subtracted, which removes its bias.
inline std::vector<double> quenched_deviation(const Environment& env, std::span<const std::int64_t> n_grid,
                                              const Vec& v, MeanMethod method, std::size_t walks,
                                              std::uint64_t walk_master) {
  std::vector<double> out;
  out.reserve(n_grid.size());
  if (method == MeanMethod::exact) {
    QuenchedDistribution dist(env, Vec(env.dim()));
    std::size_t g = 0;
    for (std::int64_t n = 0; g < n_grid.size(); ++n) {
      if (n > 0) dist.step();
      while (g < n_grid.size() && n_grid[g] == n) {
        out.push_back((dist.mean() - v * static_cast<double>(n)).norm2());
        ++g;
      }
    }
    return out;
  }
  const QuenchedMeanCurve c = quenched_mean_mc(env, n_grid, walks, walk_master);
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    out.push_back((c.means[g] - v * static_cast<double>(n_grid[g])).norm2() - c.standard_errors[g].norm2());
  }
  return out;
}

inline VarianceScan variance_scan(const Model& model, std::uint64_t master, std::span<const std::int64_t> n_grid,
                                  std::size_t env_replicas, MeanMethod method, std::size_t walks = 1000,
                                  int workers = 1, std::size_t resamples = kBootstrapResamples) {
  if (n_grid.empty() || !std::is_sorted(n_grid.begin(), n_grid.end()) || n_grid.front() < 1) {
    throw std::invalid_argument("variance_scan: n_grid must be increasing and >= 1");
  }
  if (env_replicas < 2) throw std::invalid_argument("variance_scan needs at least 2 environment replicas");
  if (method == MeanMethod::exact && !exact_propagation_supported(model)) {
    throw std::invalid_argument("variance_scan: exact means need atomic laws on the integer lattice");
  }
  VarianceScan scan;
  scan.method = method;
  scan.velocity = centring_velocity(model, master, workers);
  scan.per_replica = parallel_map(env_replicas, workers, [&](std::size_t r) {
    return quenched_deviation(replica_environment(model, master, r), n_grid, scan.velocity.velocity, method, walks,
                              derive_seed(master, r, SeedRole::walk));
  });
  scan.curve.grid_name = "n";
  scan.curve.quantity = "quenched_mean_variance";
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    std::vector<double> xs;
    xs.reserve(env_replicas);
    for (const auto& row : scan.per_replica) xs.push_back(row[g]);
    const double mean = mean_and_se(xs).value;
    scan.curve.push(static_cast<double>(n_grid[g]), mean,
                    bootstrap_se(xs, resamples, derive_seed(master, g, SeedRole::bootstrap)));
  }
  scan.curve.try_fit();
  return scan;
}

// ---------------------------------------------------------------------------
// E|E^omega_0[X_n] - nv|^2 = sum_{k<n} E_0[phi(Y_k)].
// ---------------------------------------------------------------------------

struct IdentityRow {
  std::int64_t n = 0;
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  double rhs_se = 0.0;
  double residual = 0.0;     // lhs - rhs
  double combined_se = 0.0;  // SE of the residual

  bool within(double k) const { return std::abs(residual) <= k * combined_se; }
};

struct IdentityReport {
  std::vector<IdentityRow> rows;
  Vec velocity;  // v-hat shared by both sides
  std::size_t env_replicas = 0;
  std::size_t y_replicas = 0;
  std::size_t separations = 0;  // distinct Y values at which phi-hat was evaluated
};

/// The left side uses exact quenched means over env_replicas environments; the
/// right side averages phi-hat, estimated on the same environments, along
/// y_replicas independent Y paths. With v-hat the mean origin drift both sides
/// agree identically at n = 1.
inline IdentityReport variance_identity_check(const Model& model, std::uint64_t master,
                                              std::span<const std::int64_t> n_list, std::size_t env_replicas,
                                              std::size_t y_replicas, int workers = 1) {
  if (n_list.empty() || !std::is_sorted(n_list.begin(), n_list.end()) || n_list.front() < 1) {
    throw std::invalid_argument("variance_identity_check: n values must be increasing and >= 1");
  }
  if (!exact_propagation_supported(model)) {
    throw std::invalid_argument("variance_identity_check needs a lattice model with exact quenched means");
  }
  if (env_replicas < 2 || y_replicas < 2) throw std::invalid_argument("variance_identity_check needs >= 2 replicas");
  const int d = model.dim;
  const std::int64_t n_max = n_list.back();

  std::vector<Environment> envs;
  envs.reserve(env_replicas);
  for (std::size_t r = 0; r < env_replicas; ++r) envs.push_back(replica_environment(model, master, r));
  const auto means = parallel_map(env_replicas, workers, [&](std::size_t r) {
    const QuenchedMeanCurve c = quenched_mean_exact(envs[r], n_max);
    std::vector<Vec> out;
    for (std::int64_t n : n_list) out.push_back(c.means[static_cast<std::size_t>(n)]);
    return out;
  });

  const std::uint64_t y_master = derive_seed(master, 0, SeedRole::chain);
  const auto paths = parallel_map(y_replicas, workers, [&](std::size_t j) {
    return simulate_diff_chain(model, y_master, Vec(d), static_cast<std::size_t>(n_max), ChainKind::same_env, j).values;
  });

  using Key = std::array<double, kMaxDim>;
  const auto key_of = [](const Vec& y) {
    Key k{};
    for (int j = 0; j < y.dim(); ++j) k[j] = y[j];
    return k;
  };
  std::map<Key, std::size_t> index;
  std::vector<Vec> visited;
  for (const auto& p : paths) {
    for (std::int64_t k = 0; k < n_max; ++k) {
      const Vec& y = p[static_cast<std::size_t>(k)];
      if (index.emplace(key_of(y), visited.size()).second) visited.push_back(y);
    }
  }
  const PhiEstimate phi = estimate_phi(envs, visited, workers);

  IdentityReport rep;
  rep.velocity = phi.velocity;
  rep.env_replicas = env_replicas;
  rep.y_replicas = y_replicas;
  rep.separations = visited.size();
  const double big_r = static_cast<double>(env_replicas);
  const double big_j = static_cast<double>(y_replicas);
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const std::int64_t n = n_list[i];
    std::vector<double> occupation(visited.size(), 0.0);
    std::vector<double> q(y_replicas, 0.0);
    for (std::size_t j = 0; j < y_replicas; ++j) {
      for (std::int64_t k = 0; k < n; ++k) {
        const std::size_t s = index.at(key_of(paths[j][static_cast<std::size_t>(k)]));
        q[j] += phi.curve.estimates[s];
        occupation[s] += 1.0 / big_j;
      }
    }
    std::vector<double> lhs(env_replicas), h(env_replicas, 0.0), diff(env_replicas);
    for (std::size_t r = 0; r < env_replicas; ++r) {
      lhs[r] = (means[r][i] - phi.velocity * static_cast<double>(n)).norm2();
      for (std::size_t s = 0; s < visited.size(); ++s) {
        if (occupation[s] != 0.0) h[r] += phi.products[s][r] * occupation[s];
      }
      diff[r] = lhs[r] - h[r];
    }
    const Estimate l = mean_and_se(lhs);
    const Estimate rq = mean_and_se(q);
    IdentityRow row;
    row.n = n;
    row.lhs = l.value;
    row.lhs_se = l.se;
    row.rhs = rq.value;
    row.rhs_se = std::sqrt(rq.se * rq.se + sample_variance(h) / big_r);
    row.residual = row.lhs - row.rhs;
    row.combined_se = std::sqrt(sample_variance(diff) / big_r + rq.se * rq.se);
    rep.rows.push_back(row);
  }
  return rep;
}

/// Mean over replicas of (dm_k - v) . (dm_l - v), dm_k = E^omega_0[X_{k+1} - X_k]
/// by exact propagation; zero for k != l when levels are independent.
struct CrossTermRow {
  std::int64_t k = 0;
  std::int64_t l = 0;
  Estimate covariance;
};

inline std::vector<CrossTermRow> cross_term_check(const Model& model, std::uint64_t master, std::size_t replicas,
                                                  std::span<const std::pair<std::int64_t, std::int64_t>> pairs,
                                                  int workers = 1) {
  if (!exact_propagation_supported(model)) {
    throw std::invalid_argument("cross_term_check needs a lattice model with exact quenched means");
  }
  std::int64_t n_max = 0;
  for (const auto& [k, l] : pairs) {
    if (k < 0 || l < 0) throw std::invalid_argument("cross_term_check: negative step index");
    n_max = std::max({n_max, k + 1, l + 1});
  }
  const Vec v = centring_velocity(model, master, workers).velocity;
  const auto increments = parallel_map(replicas, workers, [&](std::size_t r) {
    const QuenchedMeanCurve c = quenched_mean_exact(replica_environment(model, master, r), n_max);
    std::vector<Vec> dm;
    for (std::int64_t k = 0; k < n_max; ++k) {
      dm.push_back(c.means[static_cast<std::size_t>(k + 1)] - c.means[static_cast<std::size_t>(k)] - v);
    }
    return dm;
  });
  std::vector<CrossTermRow> out;
  for (const auto& [k, l] : pairs) {
    std::vector<double> prod;
    prod.reserve(replicas);
    for (const auto& dm : increments) {
      prod.push_back(dm[static_cast<std::size_t>(k)].dot(dm[static_cast<std::size_t>(l)]));
    }
    out.push_back({k, l, mean_and_se(prod)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quenched functional CLT checks.
// ---------------------------------------------------------------------------

struct MarginalTest {
  double t = 0.0;
  int coordinate = 0;
  GofTestResult test;
};

struct CovarianceEntry {
  double s = 0.0;
  double t = 0.0;
  int coordinate = 0;
  double estimate = 0.0;
  double se = 0.0;
  double reference = 0.0;

  bool within(double k) const { return std::abs(estimate - reference) <= k * se; }
};

struct FcltOptions {
  double epsilon = 1.0 / 1024.0;
  std::vector<double> times{0.25, 0.5, 1.0};
  std::size_t walks = 10000;
  Centering centering = Centering::velocity;
  std::optional<Mat> reference;   // default: the averaged diffusion matrix
  std::optional<Vec> velocity;    // default: centring_velocity
  std::size_t mean_walks = 10000;  // Monte Carlo quenched mean when exact propagation is unavailable
  bool jitter = true;
  int workers = 1;
};

struct FcltResult {
  std::uint64_t env_seed = 0;
  double epsilon = 0.0;
  Centering centering = Centering::velocity;
  VelocityChoice velocity;
  std::string mean_method;  // for quenched-mean centring: "exact" or "monte-carlo"
  Mat reference;
  std::vector<double> jitter_spacing;  // per coordinate; 0 when not on a lattice
  std::vector<MarginalTest> marginals;
  std::vector<CovarianceEntry> covariances;

  double min_p_value() const {
    double p = 1.0;
    for (const auto& m : marginals) p = std::min(p, m.test.p_value);
    return p;
  }
  bool marginals_pass(double alpha) const { return min_p_value() > alpha; }
};

/// KS tests of B(t) against Normal(0, t D_jj) for every t and coordinate, and
/// Cov(B(s), B(t)) against min(s, t) D_jj, over quenched walks in one environment.
/// Lattice-valued positions get a deterministic Uniform(-h/2, h/2) jitter,
/// h the lattice spacing, whose variance h^2 eps / 12 joins the reference.
inline FcltResult fclt_check(const Model& model, std::uint64_t env_seed, const FcltOptions& opt) {
  if (!(opt.epsilon > 0.0) || std::floor(1.0 / opt.epsilon) < 64.0) {
    throw std::invalid_argument("fclt_check needs floor(1/eps) >= 64");
  }
  if (opt.times.empty() || !std::is_sorted(opt.times.begin(), opt.times.end()) || opt.times.front() <= 0.0) {
    throw std::invalid_argument("fclt_check: times must be positive and increasing");
  }
  if (opt.walks < kMinKsSample) throw std::invalid_argument("fclt_check needs at least 50 walks");
  const int d = model.dim;
  const Environment env(model, env_seed);
  const double eps = opt.epsilon;
  const std::size_t nt = opt.times.size();
  std::vector<std::int64_t> idx;
  for (double t : opt.times) idx.push_back(scaled_index(t, eps));
  const std::int64_t n_max = idx.back();

  FcltResult res;
  res.env_seed = env_seed;
  res.epsilon = eps;
  res.centering = opt.centering;
  res.velocity = opt.velocity ? VelocityChoice{*opt.velocity, "given"} : centring_velocity(model, env_seed, opt.workers);
  if (opt.reference) {
    res.reference = *opt.reference;
  } else {
    const auto am = analytic_moments(model);
    res.reference = am ? am->diffusion
                       : velocity_and_covariance(model, derive_seed(env_seed, 0, SeedRole::calibration),
                                                 kPrepassEnvironments, kPrepassWalks, opt.workers)
                             .diffusion;
  }

  std::vector<Vec> centre(nt, Vec(d));
  if (opt.centering == Centering::velocity) {
    for (std::size_t i = 0; i < nt; ++i) centre[i] = res.velocity.velocity * static_cast<double>(idx[i]);
  } else if (exact_propagation_supported(model)) {
    res.mean_method = "exact";
    const QuenchedMeanCurve c = quenched_mean_exact(env, n_max);
    for (std::size_t i = 0; i < nt; ++i) centre[i] = c.mean_at(idx[i]);
  } else {
    res.mean_method = "monte-carlo";
    const QuenchedMeanCurve c =
        quenched_mean_mc(env, idx, opt.mean_walks, derive_seed(env_seed, 1, SeedRole::walk_alt), opt.workers);
    for (std::size_t i = 0; i < nt; ++i) centre[i] = c.means[i];
  }

  const std::uint64_t walk_master = derive_seed(env_seed, 0, SeedRole::walk);
  const auto raw = parallel_map(opt.walks, opt.workers, [&](std::size_t w) {
    const WalkPath p = simulate_quenched_path(env, static_cast<std::size_t>(n_max), derive_seed(walk_master, w, SeedRole::walk));
    std::vector<Vec> out;
    for (std::int64_t k : idx) out.push_back(p.positions[static_cast<std::size_t>(k)]);
    return out;
  });

  res.jitter_spacing.assign(static_cast<std::size_t>(d), 0.0);
  if (opt.jitter) {
    for (int j = 0; j < d; ++j) {
      std::vector<double> coord;
      coord.reserve(raw.size() * nt);
      for (const auto& row : raw) {
        for (const Vec& x : row) coord.push_back(x[j]);
      }
      res.jitter_spacing[static_cast<std::size_t>(j)] = lattice_spacing(coord);
    }
  }

  const double root = std::sqrt(eps);
  // b[i][j][w]: B(t_i)_j for walk w.
  std::vector<std::vector<std::vector<double>>> b(nt, std::vector<std::vector<double>>(d));
  for (std::size_t w = 0; w < raw.size(); ++w) {
    const std::uint64_t ws = derive_seed(walk_master, w, SeedRole::walk);
    for (std::size_t i = 0; i < nt; ++i) {
      for (int j = 0; j < d; ++j) {
        double x = raw[w][i][j];
        const double h = res.jitter_spacing[static_cast<std::size_t>(j)];
        if (h > 0.0) {
          StreamKey key;
          key.master_seed = ws;
          key.level = idx[i];
          key.cell[0] = j;
          key.tag = static_cast<std::uint32_t>(StreamTag::jitter);
          x += (Stream(key).at(0) - 0.5) * h;
        }
        b[i][static_cast<std::size_t>(j)].push_back(root * (x - centre[i][j]));
      }
    }
  }

  for (std::size_t i = 0; i < nt; ++i) {
    for (int j = 0; j < d; ++j) {
      const double h = res.jitter_spacing[static_cast<std::size_t>(j)];
      const double var = opt.times[i] * res.reference(j, j) + h * h * eps / 12.0;
      res.marginals.push_back({opt.times[i], j, ks_gaussian_test(b[i][static_cast<std::size_t>(j)], 0.0, var)});
    }
  }
  const double m = static_cast<double>(opt.walks);
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t k = i; k < nt; ++k) {
      for (int j = 0; j < d; ++j) {
        const auto& a = b[i][static_cast<std::size_t>(j)];
        const auto& c = b[k][static_cast<std::size_t>(j)];
        const double ma = mean_and_se(a).value;
        const double mc = mean_and_se(c).value;
        std::vector<double> prod(a.size());
        for (std::size_t w = 0; w < a.size(); ++w) prod[w] = (a[w] - ma) * (c[w] - mc);
        const Estimate e = mean_and_se(prod);
        const double h = res.jitter_spacing[static_cast<std::size_t>(j)];
        CovarianceEntry entry;
        entry.s = opt.times[i];
        entry.t = opt.times[k];
        entry.coordinate = j;
        entry.estimate = e.value * m / (m - 1.0);
        entry.se = e.se;
        entry.reference = opt.times[i] * res.reference(j, j) + (i == k ? h * h * eps / 12.0 : 0.0);
        res.covariances.push_back(entry);
      }
    }
  }
  return res;
}

/// B_eps against D and the quenched-mean-centred B~_eps against E[cov(omega_{0,0})],
/// per environment seed.
struct DichotomyResult {
  std::vector<FcltResult> velocity_centred;
  std::vector<FcltResult> quenched_centred;
  std::size_t velocity_failures = 0;  // seeds whose B_eps marginals reject at alpha
  std::size_t quenched_passes = 0;    // seeds whose B~_eps marginals all pass at alpha
};

inline DichotomyResult counterexample_check(const Model& model, std::span<const std::uint64_t> env_seeds,
                                            FcltOptions opt, double alpha = 0.01) {
  DichotomyResult out;
  const auto am = analytic_moments(model);
  const Mat diffusion = opt.reference ? *opt.reference
                        : am          ? am->diffusion
                                      : velocity_and_covariance(model, derive_seed(env_seeds.empty() ? 0 : env_seeds[0], 0,
                                                                                    SeedRole::calibration),
                                                                kPrepassEnvironments, kPrepassWalks, opt.workers)
                                            .diffusion;
  const Mat noise = quenched_centred_reference(model, env_seeds.empty() ? 0 : env_seeds[0], opt.workers);
  for (std::uint64_t seed : env_seeds) {
    FcltOptions a = opt;
    a.centering = Centering::velocity;
    a.reference = diffusion;
    out.velocity_centred.push_back(fclt_check(model, seed, a));
    if (!out.velocity_centred.back().marginals_pass(alpha)) ++out.velocity_failures;
    FcltOptions q = opt;
    q.centering = Centering::quenched_mean;
    q.reference = noise;
    out.quenched_centred.push_back(fclt_check(model, seed, q));
    if (out.quenched_centred.back().marginals_pass(alpha)) ++out.quenched_passes;
  }
  return out;
}

// ---------------------------------------------------------------------------
// n^{-1/2} max_{k<=n} |E^omega_0[X_k] - k v|.
// ---------------------------------------------------------------------------

struct MaxDriftResult {
  std::vector<std::int64_t> n_grid;
  std::vector<std::vector<double>> curves;  // [replica][grid index]
  ScanCurve mean_curve;
  std::vector<double> ratios;  // last over first grid value, per replica
  VelocityChoice velocity;
};

inline std::vector<double> max_drift_curve(const Environment& env, std::span<const std::int64_t> n_grid, const Vec& v) {
  QuenchedDistribution dist(env, Vec(env.dim()));
  std::vector<double> out;
  double running = 0.0;
  std::size_t g = 0;
  for (std::int64_t n = 0; g < n_grid.size(); ++n) {
    if (n > 0) dist.step();
    running = std::max(running, (dist.mean() - v * static_cast<double>(n)).norm());
    while (g < n_grid.size() && n_grid[g] == n) {
      out.push_back(running / std::sqrt(static_cast<double>(n)));
      ++g;
    }
  }
  return out;
}

inline MaxDriftResult max_drift_check(const Model& model, std::uint64_t master, std::size_t env_replicas,
                                      std::span<const std::int64_t> n_grid, int workers = 1) {
  if (n_grid.size() < 2 || !std::is_sorted(n_grid.begin(), n_grid.end()) || n_grid.front() < 1) {
    throw std::invalid_argument("max_drift_check: n_grid needs >= 2 increasing values >= 1");
  }
  if (!exact_propagation_supported(model)) {
    throw std::invalid_argument("max_drift_check needs a lattice model with exact quenched means");
  }
  MaxDriftResult res;
  res.n_grid.assign(n_grid.begin(), n_grid.end());
  res.velocity = centring_velocity(model, master, workers);
  res.curves = parallel_map(env_replicas, workers, [&](std::size_t r) {
    return max_drift_curve(replica_environment(model, master, r), n_grid, res.velocity.velocity);
  });
  res.mean_curve.grid_name = "n";
  res.mean_curve.quantity = "max_drift";
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    std::vector<double> xs;
    for (const auto& c : res.curves) xs.push_back(c[g]);
    const Estimate e = mean_and_se(xs);
    res.mean_curve.push(static_cast<double>(n_grid[g]), e.value, e.se);
  }
  for (const auto& c : res.curves) {
    res.ratios.push_back(c.front() > 0.0 ? c.back() / c.front() : std::numeric_limits<double>::quiet_NaN());
  }
  return res;
}

// ---------------------------------------------------------------------------
// Self-calibration of the statistical machinery.
// ---------------------------------------------------------------------------

/// Standard normals by Box-Muller from the synthetic stream of (seed, trial).
inline std::vector<double> synthetic_normals(std::uint64_t seed, std::int64_t trial, std::size_t count) {
  StreamKey key;
  key.master_seed = seed;
  key.level = trial;
  key.tag = static_cast<std::uint32_t>(StreamTag::synthetic);
  Stream s(key);
  std::vector<double> out;
  out.reserve(count + 1);
  while (out.size() < count) {
    const double radius = std::sqrt(-2.0 * std::log(s.next_open()));
    const double angle = 2.0 * std::numbers::pi * s.next();
    out.push_back(radius * std::cos(angle));
    out.push_back(radius * std::sin(angle));
  }
  out.resize(count);
  return out;
}

struct KsCalibration {
  std::size_t trials = 0;
  std::size_t sample_size = 0;
  double alpha = 0.01;
  std::size_t rejections = 0;
  double rate() const { return trials ? static_cast<double>(rejections) / static_cast<double>(trials) : 0.0; }
};

/// Type-I error of ks_gaussian_test on Normal(0, 1) samples.
inline KsCalibration ks_null_calibration(std::size_t trials, std::size_t sample_size, double alpha, std::uint64_t seed,
                                         int workers = 1) {
  const auto rejected = parallel_map(trials, workers, [&](std::size_t t) {
    const auto xs = synthetic_normals(seed, static_cast<std::int64_t>(t), sample_size);
    return ks_gaussian_test(xs, 0.0, 1.0).p_value < alpha ? 1 : 0;
  });
  KsCalibration c{trials, sample_size, alpha, 0};
  for (int r : rejected) c.rejections += static_cast<std::size_t>(r);
  return c;
}

struct FitCoverage {
  std::size_t trials = 0;
  std::size_t covered = 0;
  double coverage() const { return trials ? static_cast<double>(covered) / static_cast<double>(trials) : 0.0; }
};

/// CI coverage of fit_exponent on y = n^exponent (1 + rel_noise z), n = 2^4 .. 2^(3 + points).
inline FitCoverage exponent_fit_coverage(std::size_t trials, std::size_t points, double exponent, double rel_noise,
                                         std::uint64_t seed) {
  FitCoverage c{trials, 0};
  for (std::size_t t = 0; t < trials; ++t) {
    const auto z = synthetic_normals(seed, static_cast<std::int64_t>(t), points);
    ScanCurve curve;
    for (std::size_t i = 0; i < points; ++i) {
      const double n = std::ldexp(1.0, static_cast<int>(i) + 4);
      const double y = std::pow(n, exponent);
      curve.push(n, y * (1.0 + rel_noise * z[i]), rel_noise * y);
    }
    curve.fit_loglog();
    if (curve.fit->contains(exponent)) ++c.covered;
  }
  return c;
}

}  // namespace rwre

#endif  // RWRE_ANALYSIS_HPP
