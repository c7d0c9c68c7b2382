#ifndef RWRE_DIFF_CHAIN_HPP
#define RWRE_DIFF_CHAIN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/parallel.hpp"
#include "rwre/stats.hpp"
#include "rwre/walk.hpp"

namespace rwre {

enum class ChainKind {
  same_env,         // Y = X~ - X, both walks in one environment
  independent_env,  // Ybar = X^ - X, walks in independent environments
};

inline const char* chain_kind_name(ChainKind k) { return k == ChainKind::same_env ? "same-env" : "independent-env"; }

/// Thrown when a scan cannot produce an estimate from the data it collected.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DiffChainPath {
  std::vector<Vec> values;  // Y_0 .. Y_N
  ChainKind kind = ChainKind::same_env;
  Vec start;
};

/// Steps two walks, X from the origin and X~ from x0, and exposes their difference.
class DiffChain {
 public:
  DiffChain(Environment env_x, Environment env_tilde, const Vec& x0, std::uint64_t walk_seed_x,
            std::uint64_t walk_seed_tilde)
      : env_x_(std::move(env_x)), env_tilde_(std::move(env_tilde)), x_(env_x_.dim()), tilde_(x0),
        seed_x_(walk_seed_x), seed_tilde_(walk_seed_tilde) {}

  /// Replica `replica` of the chain under master seed `master`.
  static DiffChain replica(const Model& model, std::uint64_t master, const Vec& x0, ChainKind kind,
                           std::uint64_t replica) {
    Environment env(model, derive_seed(master, replica, SeedRole::environment));
    Environment other = kind == ChainKind::same_env
                            ? env
                            : Environment(model, derive_seed(master, replica, SeedRole::environment_alt));
    return DiffChain(std::move(env), std::move(other), x0, derive_seed(master, replica, SeedRole::walk),
                     derive_seed(master, replica, SeedRole::walk_alt));
  }

  Vec value() const { return tilde_ - x_; }
  std::int64_t time() const { return time_; }

  void step() {
    Stream sx(walk_step_key(seed_x_, time_));
    Stream st(walk_step_key(seed_tilde_, time_));
    x_ = quenched_step(env_x_, time_, x_, sx);
    tilde_ = quenched_step(env_tilde_, time_, tilde_, st);
    ++time_;
  }

 private:
  Environment env_x_;
  Environment env_tilde_;
  Vec x_;
  Vec tilde_;
  std::uint64_t seed_x_;
  std::uint64_t seed_tilde_;
  std::int64_t time_ = 0;
};

inline DiffChainPath run_chain(DiffChain chain, std::size_t steps, ChainKind kind) {
  DiffChainPath path;
  path.kind = kind;
  path.start = chain.value();
  path.values.reserve(steps + 1);
  path.values.push_back(chain.value());
  for (std::size_t k = 0; k < steps; ++k) {
    chain.step();
    path.values.push_back(chain.value());
  }
  return path;
}

inline DiffChainPath simulate_diff_chain(const Model& model, std::uint64_t master, const Vec& x0, std::size_t steps,
                                         ChainKind kind, std::uint64_t replica) {
  return run_chain(DiffChain::replica(model, master, x0, kind, replica), steps, kind);
}

/// Explicit environments and walk seeds; identical seeds with x0 = 0 in one
/// environment give Y = 0 identically.
inline DiffChainPath simulate_diff_chain(const Environment& env_x, const Environment& env_tilde, const Vec& x0,
                                         std::size_t steps, std::uint64_t seed_x, std::uint64_t seed_tilde) {
  const ChainKind kind = same_view(env_x, env_tilde) ? ChainKind::same_env : ChainKind::independent_env;
  return run_chain(DiffChain(env_x, env_tilde, x0, seed_x, seed_tilde), steps, kind);
}

inline bool in_box(const Vec& y, double r) { return y.max_abs() <= r; }

// ---------------------------------------------------------------------------
// Exit times.
// ---------------------------------------------------------------------------

struct ExitRecord {
  double r = 0.0;
  std::int64_t steps = 0;  // U_r, or the cap when capped
  bool capped = false;
};

inline constexpr std::int64_t kDefaultStepCap = 1'000'000;

/// First exit times from every box in r_grid along one chain path.
inline std::vector<ExitRecord> exit_times(DiffChain chain, std::span<const double> r_grid, std::int64_t step_cap) {
  std::vector<ExitRecord> out;
  for (double r : r_grid) out.push_back({r, 0, false});
  std::size_t pending = out.size();
  std::vector<bool> done(out.size(), false);
  auto record = [&] {
    const Vec y = chain.value();
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!done[i] && !in_box(y, out[i].r)) {
        out[i].steps = chain.time();
        done[i] = true;
        --pending;
      }
    }
  };
  record();
  while (pending > 0 && chain.time() < step_cap) {
    chain.step();
    record();
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!done[i]) {
      out[i].steps = step_cap;
      out[i].capped = true;
    }
  }
  return out;
}

struct ExitScan {
  ScanCurve curve;  // mean U_r over uncapped runs vs r
  std::vector<double> capped_fraction;
  std::vector<double> min_steps;
  ChainKind kind = ChainKind::same_env;
  std::int64_t step_cap = kDefaultStepCap;
};

/// E_0[U_r] for each r, chains started at Y_0 = 0. Capped runs are excluded
/// from the mean and reported in capped_fraction; an r whose runs were all
/// capped gets a NaN estimate. Throws InsufficientData when every run is capped.
inline ExitScan exit_time_scan(const Model& model, std::uint64_t master, std::span<const double> r_grid,
                               std::size_t replicas, std::int64_t step_cap = kDefaultStepCap,
                               ChainKind kind = ChainKind::same_env, int workers = 1) {
  if (r_grid.empty() || replicas < 2) throw std::invalid_argument("exit_time_scan needs radii and >= 2 replicas");
  const Vec origin(model.dim);
  const auto runs = parallel_map(replicas, workers, [&](std::size_t i) {
    return exit_times(DiffChain::replica(model, master, origin, kind, i), r_grid, step_cap);
  });
  ExitScan scan;
  scan.kind = kind;
  scan.step_cap = step_cap;
  scan.curve.grid_name = "r";
  scan.curve.quantity = "mean_exit_time";
  bool any = false;
  for (std::size_t k = 0; k < r_grid.size(); ++k) {
    std::vector<double> times;
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& run : runs) {
      if (!run[k].capped) {
        times.push_back(static_cast<double>(run[k].steps));
        mn = std::min(mn, static_cast<double>(run[k].steps));
      }
    }
    scan.capped_fraction.push_back(1.0 - static_cast<double>(times.size()) / static_cast<double>(replicas));
    scan.min_steps.push_back(times.empty() ? std::numeric_limits<double>::quiet_NaN() : mn);
    if (times.empty()) {
      scan.curve.push(r_grid[k], std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    any = true;
    const Estimate e = mean_and_se(times);
    scan.curve.push(r_grid[k], e.value, e.se);
  }
  if (!any) throw InsufficientData("exit_time_scan: every run hit the step cap (degenerate chain)");
  if (r_grid.size() >= 4) {
    std::vector<double> g, est, se;
    for (std::size_t k = 0; k < r_grid.size(); ++k) {
      if (std::isfinite(scan.curve.estimates[k])) {
        g.push_back(scan.curve.grid[k]);
        est.push_back(scan.curve.estimates[k]);
        se.push_back(scan.curve.standard_errors[k]);
      }
    }
    if (g.size() >= 4) scan.curve.fit = fit_exponent(g, est, se);
  }
  return scan;
}

// ---------------------------------------------------------------------------
// Excursions outside B_{n^eps}.
// ---------------------------------------------------------------------------

/// Exit times V_i^out and entrance times V_i^in of one path; V_0^in = 0.
struct ExcursionRecord {
  double r = 0.0;
  std::vector<std::int64_t> exits;
  std::vector<std::int64_t> entries;  // entries[i] closes exits[i]; may be one shorter
  std::int64_t horizon = 0;

  /// 0 = V_0^in < V_1^out < V_1^in < V_2^out < ...
  bool interleaved() const {
    std::int64_t last = 0;
    for (std::size_t i = 0; i < exits.size(); ++i) {
      if (exits[i] <= last) return false;
      last = exits[i];
      if (i < entries.size()) {
        if (entries[i] <= last) return false;
        last = entries[i];
      }
    }
    return entries.size() <= exits.size() && entries.size() + 1 >= exits.size();
  }
};

inline ExcursionRecord excursions(DiffChain chain, double r, std::int64_t horizon) {
  ExcursionRecord rec;
  rec.r = r;
  rec.horizon = horizon;
  bool inside = in_box(chain.value(), r);
  while (chain.time() < horizon) {
    chain.step();
    const bool now = in_box(chain.value(), r);
    if (inside && !now) rec.exits.push_back(chain.time());
    if (!inside && now) rec.entries.push_back(chain.time());
    inside = now;
  }
  return rec;
}

struct ExcursionStats {
  double box_radius = 0.0;
  double max_mixing_exponent = 0.0;  // the p with p * eps = 1
  std::size_t complete_excursions = 0;
  std::size_t observed_excursions = 0;  // excursions watched for at least max(a_grid) steps
  ScanCurve tail;                       // P{length >= a} vs a
  double tail_exponent = 0.0;           // minus the fitted slope
  double tail_ci_low = 0.0;
  double tail_ci_high = 0.0;
  bool all_interleaved = true;
};

/// Excursion lengths V_j^in - V_j^out of Y outside B_{n^eps}, chains of length
/// n from Y_0 = 0. The tail P{length >= a} uses only excursions that began at
/// least max(a_grid) steps before the horizon, so censoring cannot bias it.
inline ExcursionStats excursion_scan(const Model& model, std::uint64_t master, std::int64_t n, double eps,
                                     std::size_t replicas, std::span<const double> a_grid,
                                     ChainKind kind = ChainKind::same_env, int workers = 1) {
  if (n < 1 || !(eps > 0.0) || a_grid.empty()) throw std::invalid_argument("excursion_scan: bad arguments");
  const double r = std::pow(static_cast<double>(n), eps);
  const double a_max = *std::max_element(a_grid.begin(), a_grid.end());
  const Vec origin(model.dim);
  const auto records = parallel_map(replicas, workers, [&](std::size_t i) {
    return excursions(DiffChain::replica(model, master, origin, kind, i), r, n);
  });
  ExcursionStats st;
  st.box_radius = r;
  st.max_mixing_exponent = 1.0 / eps;
  std::vector<double> lengths;  // exact or censored at >= a_max
  for (const ExcursionRecord& rec : records) {
    st.all_interleaved = st.all_interleaved && rec.interleaved();
    st.complete_excursions += rec.entries.size();
    for (std::size_t i = 0; i < rec.exits.size(); ++i) {
      if (static_cast<double>(n - rec.exits[i]) < a_max) continue;
      lengths.push_back(i < rec.entries.size() ? static_cast<double>(rec.entries[i] - rec.exits[i])
                                               : std::numeric_limits<double>::infinity());
    }
  }
  st.observed_excursions = lengths.size();
  if (st.complete_excursions < 10 || lengths.size() < 10) {
    throw InsufficientData("excursion_scan: fewer than 10 complete excursions");
  }
  st.tail.grid_name = "a";
  st.tail.quantity = "P(length>=a)";
  const double m = static_cast<double>(lengths.size());
  for (double a : a_grid) {
    const double p = static_cast<double>(std::count_if(lengths.begin(), lengths.end(), [a](double l) { return l >= a; })) / m;
    st.tail.push(a, p, std::sqrt(p * (1.0 - p) / m));
  }
  st.tail.fit_loglog();
  st.tail_exponent = -st.tail.fit->exponent;
  st.tail_ci_low = -st.tail.fit->ci_high;
  st.tail_ci_high = -st.tail.fit->ci_low;
  return st;
}

// ---------------------------------------------------------------------------
// Occupation of B_{n^eps}.
// ---------------------------------------------------------------------------

/// sum_{k<n} 1{Y_k in B_{n^eps}} averaged over replicas, for each n in the grid.
inline ScanCurve occupation_time(const Model& model, std::uint64_t master, std::span<const std::int64_t> n_grid,
                                 double eps, std::size_t replicas, ChainKind kind = ChainKind::same_env,
                                 int workers = 1) {
  if (n_grid.empty() || !std::is_sorted(n_grid.begin(), n_grid.end()) || n_grid.front() < 1) {
    throw std::invalid_argument("occupation_time: n_grid must be increasing and >= 1");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("occupation_time: eps must be > 0");
  const Vec origin(model.dim);
  const std::int64_t n_max = n_grid.back();
  const auto counts = parallel_map(replicas, workers, [&](std::size_t i) {
    DiffChain chain = DiffChain::replica(model, master, origin, kind, i);
    std::vector<double> occ(n_grid.size(), 0.0);
    for (std::int64_t k = 0; k < n_max; ++k) {
      const Vec y = chain.value();
      for (std::size_t g = 0; g < n_grid.size(); ++g) {
        if (k < n_grid[g] && in_box(y, std::pow(static_cast<double>(n_grid[g]), eps))) occ[g] += 1.0;
      }
      chain.step();
    }
    return occ;
  });
  ScanCurve curve;
  curve.grid_name = "n";
  curve.quantity = "occupation";
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    std::vector<double> xs;
    xs.reserve(counts.size());
    for (const auto& c : counts) xs.push_back(c[g]);
    const Estimate e = mean_and_se(xs);
    curve.push(static_cast<double>(n_grid[g]), e.value, e.se);
  }
  if (n_grid.size() >= 4) curve.fit_loglog();
  return curve;
}

// ---------------------------------------------------------------------------
// Escape from the shell B_r \ B_{r0}.
// ---------------------------------------------------------------------------

struct EscapeResult {
  double r = 0.0;
  double r0 = 0.0;
  std::int64_t time_budget = 0;
  std::vector<Vec> starts;
  std::vector<Estimate> probabilities;
  double min_probability = 0.0;
  double mean_probability = 0.0;
};

/// Design points (r0 + j) e_1 and their mirror images, j = 1 .. floor(r - r0),
/// listed outward with the positive point first.
inline std::vector<Vec> shell_design(int d, double r, double r0) {
  std::vector<Vec> pts;
  for (int j = 1; r0 + j <= r; ++j) {
    Vec y(d);
    y[0] = r0 + j;
    pts.push_back(y);
    pts.push_back(-y);
  }
  return pts;
}

/// Whether the chain leaves B_r within the budget without re-entering B_{r0}.
/// A start already outside B_r counts as an immediate escape.
inline bool escapes(DiffChain chain, double r, double r0, std::int64_t budget) {
  if (!in_box(chain.value(), r)) return true;
  while (chain.time() < budget) {
    chain.step();
    const Vec y = chain.value();
    if (!in_box(y, r)) return true;
    if (in_box(y, r0)) return false;
  }
  return false;
}

inline EscapeResult exit_escape_probability(const Model& model, std::uint64_t master, double r, double r0,
                                            std::int64_t time_budget, std::size_t replicas,
                                            std::vector<Vec> starts = {}, ChainKind kind = ChainKind::same_env,
                                            int workers = 1) {
  if (!(r0 < r) || r0 < 0.0) throw std::invalid_argument("exit_escape_probability needs 0 <= r0 < r");
  if (starts.empty()) starts = shell_design(model.dim, r, r0);
  EscapeResult res{r, r0, time_budget, starts, {}, 1.0, 0.0};
  const std::size_t total = starts.size() * replicas;
  const auto hits = parallel_map(total, workers, [&](std::size_t idx) {
    const Vec& y = starts[idx / replicas];
    return escapes(DiffChain::replica(model, master, y, kind, idx), r, r0, time_budget) ? 1.0 : 0.0;
  });
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const Estimate e = mean_and_se(std::span<const double>(hits.data() + s * replicas, replicas));
    res.probabilities.push_back(e);
    res.min_probability = std::min(res.min_probability, e.value);
    res.mean_probability += e.value / static_cast<double>(starts.size());
  }
  return res;
}

// ---------------------------------------------------------------------------
// Symmetry and increment structure.
// ---------------------------------------------------------------------------

struct SymmetryCheck {
  std::vector<TwoSampleKs> per_coordinate;
  bool passed = true;
};

/// Two-sample KS distance between Y_1^j and -Y_1^j for every coordinate.
inline SymmetryCheck symmetry_check(const Model& model, std::uint64_t master, std::size_t replicas, ChainKind kind,
                                    int workers = 1) {
  const Vec origin(model.dim);
  const auto ys = parallel_map(replicas, workers, [&](std::size_t i) {
    DiffChain c = DiffChain::replica(model, master, origin, kind, i);
    c.step();
    return c.value();
  });
  SymmetryCheck out;
  for (int j = 0; j < model.dim; ++j) {
    std::vector<double> a, b;
    for (const Vec& y : ys) {
      a.push_back(y[j]);
      b.push_back(-y[j]);
    }
    const TwoSampleKs ks = ks_two_sample(a, b);
    out.passed = out.passed && ks.statistic < ks.critical_01;
    out.per_coordinate.push_back(ks);
  }
  return out;
}

/// Correlation across replicas between h(dY_k) and h(dY_{k+lag}) with
/// h = 1{increment is zero} on coordinate 0; independent increments give 0 +- 1/sqrt(R).
inline Estimate increment_dependence(const Model& model, std::uint64_t master, std::size_t replicas, ChainKind kind,
                                     std::size_t k, std::size_t lag, int workers = 1) {
  const Vec origin(model.dim);
  const auto pairs = parallel_map(replicas, workers, [&](std::size_t i) {
    const DiffChainPath p = simulate_diff_chain(model, master, origin, k + lag + 1, kind, i);
    const auto h = [&](std::size_t t) { return p.values[t + 1][0] == p.values[t][0] ? 1.0 : 0.0; };
    return std::pair<double, double>{h(k), h(k + lag)};
  });
  std::vector<double> a, b;
  for (const auto& [x, y] : pairs) {
    a.push_back(x);
    b.push_back(y);
  }
  return {pearson_correlation(a, b), 1.0 / std::sqrt(static_cast<double>(replicas))};
}

}  // namespace rwre

#endif  // RWRE_DIFF_CHAIN_HPP
