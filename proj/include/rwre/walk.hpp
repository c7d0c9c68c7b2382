#ifndef RWRE_WALK_HPP
#define RWRE_WALK_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/jump_law.hpp"
#include "rwre/parallel.hpp"
#include "rwre/stats.hpp"
#include "rwre/stream.hpp"
#include "rwre/vec.hpp"

namespace rwre {

/// Replicas are grouped in fixed blocks for partial sums; the block layout
/// depends only on the replica count, never on the worker count.
inline constexpr std::size_t kReduceBlock = 256;

struct WalkPath {
  std::vector<Vec> positions;  // X_0 .. X_N
  std::uint64_t env_seed = 0;
  std::uint64_t walk_seed = 0;
  Vec start;

  std::size_t steps() const { return positions.empty() ? 0 : positions.size() - 1; }
};

inline StreamKey walk_step_key(std::uint64_t walk_seed, std::int64_t n) {
  StreamKey key;
  key.master_seed = walk_seed;
  key.level = n;
  key.tag = static_cast<std::uint32_t>(StreamTag::walk);
  return key;
}

/// One quenched transition from (n, x): x' = x + jump, jump ~ omega_{n,x}.
inline Vec quenched_step(const Environment& env, std::int64_t n, const Vec& x, Stream& stream) {
  return x + law_sample(env.query(n, x), stream);
}

/// Path under P^omega_{0,start}; step n draws from the stream keyed (walk_seed, n).
inline WalkPath simulate_quenched_path(const Environment& env, std::size_t steps, std::uint64_t walk_seed,
                                       const Vec& start) {
  WalkPath path;
  path.env_seed = env.seed();
  path.walk_seed = walk_seed;
  path.start = start;
  path.positions.reserve(steps + 1);
  path.positions.push_back(start);
  Vec x = start;
  for (std::size_t n = 0; n < steps; ++n) {
    Stream s(walk_step_key(walk_seed, static_cast<std::int64_t>(n)));
    x = quenched_step(env, static_cast<std::int64_t>(n), x, s);
    path.positions.push_back(x);
  }
  return path;
}

inline WalkPath simulate_quenched_path(const Environment& env, std::size_t steps, std::uint64_t walk_seed) {
  return simulate_quenched_path(env, steps, walk_seed, Vec(env.dim()));
}

inline Environment replica_environment(const Model& model, std::uint64_t master_seed, std::uint64_t replica) {
  return Environment(model, derive_seed(master_seed, replica, SeedRole::environment));
}

/// Path under the averaged measure P_0: a fresh environment per replica.
inline WalkPath simulate_averaged_path(const Model& model, std::uint64_t master_seed, std::size_t steps,
                                       std::uint64_t replica) {
  const Environment env = replica_environment(model, master_seed, replica);
  return simulate_quenched_path(env, steps, derive_seed(master_seed, replica, SeedRole::walk));
}

// ---------------------------------------------------------------------------
// Quenched mean E^omega_0[X_n].
// ---------------------------------------------------------------------------

enum class MeanMethod { monte_carlo, exact };

struct QuenchedMeanCurve {
  std::vector<std::int64_t> n_grid;
  std::vector<Vec> means;
  std::vector<Vec> standard_errors;
  MeanMethod method = MeanMethod::exact;
  std::size_t walks = 0;

  const Vec& mean_at(std::int64_t n) const {
    const auto it = std::lower_bound(n_grid.begin(), n_grid.end(), n);
    if (it == n_grid.end() || *it != n) {
      throw std::out_of_range("quenched mean curve has no entry for n = " + std::to_string(n));
    }
    return means[static_cast<std::size_t>(it - n_grid.begin())];
  }
};

inline constexpr double kPruneMass = 1e-15;
inline constexpr std::size_t kSupportCap = 10'000'000;

/// Forward propagation of the quenched law pi_0^{omega,n} for environments
/// whose laws are atomic on the integer lattice. Probabilities live on a dense
/// box that tracks the support; sites below kPruneMass are dropped and the rest
/// renormalised.
class QuenchedDistribution {
 public:
  using Coord = std::array<std::int64_t, kMaxDim>;

  QuenchedDistribution(Environment env, const Vec& start, double prune = kPruneMass,
                       std::size_t support_cap = kSupportCap)
      : env_(std::move(env)), d_(env_.dim()), prune_(prune), cap_(support_cap) {
    if (start.dim() != d_) throw std::invalid_argument("start point has the wrong dimension");
    for (int j = 0; j < d_; ++j) {
      lo_[j] = to_lattice(start[j], "start point");
      extent_[j] = 1;
    }
    mass_.assign(1, 1.0);
  }

  std::int64_t time() const { return time_; }
  const Environment& environment() const { return env_; }

  void step() {
    scratch_.clear();
    Coord lo_new{}, hi_new{};
    for (int j = 0; j < d_; ++j) {
      lo_new[j] = std::numeric_limits<std::int64_t>::max();
      hi_new[j] = std::numeric_limits<std::int64_t>::min();
    }
    std::optional<JumpLaw> level_law;
    if (env_.spatially_constant()) level_law = env_.query(time_, Vec(d_));
    for_each_site([&](const Coord& c, double p) {
      Vec x(d_);
      for (int j = 0; j < d_; ++j) x[j] = static_cast<double>(c[j]);
      const JumpLaw law = level_law ? *level_law : env_.query(time_, x);
      const AtomicLaw* atomic = law.atomic();
      std::span<const Atom> atoms;
      Atom point_mass;
      if (atomic != nullptr) {
        atoms = atomic->atoms();
      } else if (law.is_dirac()) {
        point_mass = Atom{law_mean(law), 1.0};
        atoms = std::span<const Atom>(&point_mass, 1);
      } else {
        throw std::invalid_argument("exact propagation needs atomic laws; got a Gaussian law at n = " +
                                    std::to_string(time_));
      }
      for (const Atom& a : atoms) {
        if (a.weight == 0.0) continue;
        Contribution t{};
        for (int j = 0; j < d_; ++j) {
          t.coord[j] = c[j] + to_lattice(a.point[j], "atom");
          lo_new[j] = std::min(lo_new[j], t.coord[j]);
          hi_new[j] = std::max(hi_new[j], t.coord[j]);
        }
        t.mass = p * a.weight;
        scratch_.push_back(t);
      }
    });
    std::size_t volume = 1;
    for (int j = 0; j < d_; ++j) {
      lo_[j] = lo_new[j];
      extent_[j] = hi_new[j] - lo_new[j] + 1;
      volume *= static_cast<std::size_t>(extent_[j]);
      if (volume > cap_) throw std::length_error("exact propagation support exceeds the cap");
    }
    mass_.assign(volume, 0.0);
    for (const Contribution& t : scratch_) mass_[index(t.coord)] += t.mass;
    ++time_;
    prune();
  }

  Vec mean() const {
    Vec m(d_);
    for_each_site([&](const Coord& c, double p) {
      for (int j = 0; j < d_; ++j) m[j] += p * static_cast<double>(c[j]);
    });
    return m;
  }

  double total_mass() const {
    double s = 0.0;
    for (double p : mass_) s += p;
    return s;
  }

  std::size_t support_size() const {
    return static_cast<std::size_t>(std::count_if(mass_.begin(), mass_.end(), [](double p) { return p > 0.0; }));
  }

  double probability(const Vec& x) const {
    Coord c{};
    for (int j = 0; j < d_; ++j) {
      c[j] = to_lattice(x[j], "query point");
      if (c[j] < lo_[j] || c[j] >= lo_[j] + extent_[j]) return 0.0;
    }
    return mass_[index(c)];
  }

  /// Visits every site with positive mass in increasing linear order.
  template <class F>
  void for_each_site(F&& f) const {
    Coord c = lo_;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
      if (mass_[i] > 0.0) f(c, mass_[i]);
      int j = 0;
      while (j < d_ && ++c[j] >= lo_[j] + extent_[j]) {
        c[j] = lo_[j];
        ++j;
      }
    }
  }

 private:
  struct Contribution {
    Coord coord;
    double mass;
  };

  static std::int64_t to_lattice(double v, const char* what) {
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9) {
      throw std::invalid_argument(std::string("exact propagation needs integer lattice points; ") + what +
                                  " coordinate " + std::to_string(v) + " is off-lattice");
    }
    return static_cast<std::int64_t>(r);
  }

  std::size_t index(const Coord& c) const {
    std::size_t idx = 0;
    std::size_t stride = 1;
    for (int j = 0; j < d_; ++j) {
      idx += static_cast<std::size_t>(c[j] - lo_[j]) * stride;
      stride *= static_cast<std::size_t>(extent_[j]);
    }
    return idx;
  }

  void prune() {
    bool dropped = false;
    for (double& p : mass_) {
      if (p > 0.0 && p < prune_) {
        p = 0.0;
        dropped = true;
      }
    }
    if (dropped) {
      const double total = total_mass();
      for (double& p : mass_) p /= total;
      shrink();
    } else if (!mass_.empty() && (mass_.front() == 0.0 || mass_.back() == 0.0 || d_ > 1)) {
      shrink();
    }
  }

  void shrink() {
    Coord lo{}, hi{};
    for (int j = 0; j < d_; ++j) {
      lo[j] = std::numeric_limits<std::int64_t>::max();
      hi[j] = std::numeric_limits<std::int64_t>::min();
    }
    for_each_site([&](const Coord& c, double) {
      for (int j = 0; j < d_; ++j) {
        lo[j] = std::min(lo[j], c[j]);
        hi[j] = std::max(hi[j], c[j]);
      }
    });
    bool same = true;
    for (int j = 0; j < d_; ++j) same = same && lo[j] == lo_[j] && hi[j] == lo_[j] + extent_[j] - 1;
    if (same) return;
    const Coord old_lo = lo_;
    const Coord old_extent = extent_;
    std::vector<double> old = std::move(mass_);
    std::size_t volume = 1;
    for (int j = 0; j < d_; ++j) {
      lo_[j] = lo[j];
      extent_[j] = hi[j] - lo[j] + 1;
      volume *= static_cast<std::size_t>(extent_[j]);
    }
    mass_.assign(volume, 0.0);
    Coord c = old_lo;
    for (std::size_t i = 0; i < old.size(); ++i) {
      if (old[i] > 0.0) mass_[index(c)] = old[i];
      int j = 0;
      while (j < d_ && ++c[j] >= old_lo[j] + old_extent[j]) {
        c[j] = old_lo[j];
        ++j;
      }
    }
  }

  Environment env_;
  int d_;
  double prune_;
  std::size_t cap_;
  std::int64_t time_ = 0;
  Coord lo_{};
  Coord extent_{};
  std::vector<double> mass_;
  std::vector<Contribution> scratch_;
};

namespace detail {

inline bool integral(double v) { return std::abs(v - std::round(v)) <= 1e-9; }

inline bool family_on_lattice(const SiteFamily& family) {
  return std::visit(Overloaded{
                        [](const CoinFamily& c) { return integral(c.step); },
                        [](const FixedFamily& f) {
                          const AtomicLaw* a = f.law.atomic();
                          if (a == nullptr) {
                            if (!f.law.is_dirac()) return false;
                            const Vec z = law_mean(f.law);
                            for (int j = 0; j < z.dim(); ++j) {
                              if (!integral(z[j])) return false;
                            }
                            return true;
                          }
                          for (const Atom& at : a->atoms()) {
                            for (int j = 0; j < at.point.dim(); ++j) {
                              if (!integral(at.point[j])) return false;
                            }
                          }
                          return true;
                        },
                        [](const GaussianFamily&) { return false; },
                    },
                    family);
}

}  // namespace detail

/// Whether every law of the model is atomic on the integer lattice, so that
/// quenched_mean_exact applies from integer starting points.
inline bool exact_propagation_supported(const Model& model) {
  return std::visit(Overloaded{
                        [](const LatticeProduct& l) { return detail::family_on_lattice(l.family); },
                        [](const FiniteRange& f) { return detail::family_on_lattice(f.family); },
                        [](const FullyCorrelated& f) { return detail::family_on_lattice(f.family); },
                        [](const DiracField& f) { return f.displacement == Displacement::plus_minus && detail::integral(f.scale); },
                    },
                    model.spec);
}

/// E^omega_{start}[X_n] for n = 0..n_max by exact propagation.
inline QuenchedMeanCurve quenched_mean_exact(const Environment& env, std::int64_t n_max, const Vec& start) {
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  QuenchedMeanCurve curve;
  curve.method = MeanMethod::exact;
  QuenchedDistribution dist(env, start);
  curve.n_grid.push_back(0);
  curve.means.push_back(dist.mean());
  for (std::int64_t n = 1; n <= n_max; ++n) {
    dist.step();
    curve.n_grid.push_back(n);
    curve.means.push_back(dist.mean());
  }
  curve.standard_errors.assign(curve.means.size(), Vec(env.dim()));
  return curve;
}

inline QuenchedMeanCurve quenched_mean_exact(const Environment& env, std::int64_t n_max) {
  return quenched_mean_exact(env, n_max, Vec(env.dim()));
}

/// Monte Carlo estimate from M quenched walks with seeds derive_seed(walk_master, j, walk).
inline QuenchedMeanCurve quenched_mean_mc(const Environment& env, std::span<const std::int64_t> n_grid,
                                          std::size_t walks, std::uint64_t walk_master, int workers = 1) {
  if (walks < 2) throw std::invalid_argument("quenched_mean_mc needs at least 2 walks");
  if (!std::is_sorted(n_grid.begin(), n_grid.end()) || n_grid.empty() || n_grid.front() < 0) {
    throw std::invalid_argument("n_grid must be nonempty, nonnegative and increasing");
  }
  const int d = env.dim();
  const std::size_t g = n_grid.size();
  const auto n_max = static_cast<std::size_t>(n_grid.back());
  struct Partial {
    std::vector<Vec> sum, sum_sq;
  };
  const std::size_t blocks = (walks + kReduceBlock - 1) / kReduceBlock;
  const auto partials = parallel_map(blocks, workers, [&](std::size_t b) {
    Partial p{std::vector<Vec>(g, Vec(d)), std::vector<Vec>(g, Vec(d))};
    const std::size_t end = std::min(walks, (b + 1) * kReduceBlock);
    for (std::size_t w = b * kReduceBlock; w < end; ++w) {
      const WalkPath path = simulate_quenched_path(env, n_max, derive_seed(walk_master, w, SeedRole::walk));
      for (std::size_t i = 0; i < g; ++i) {
        const Vec& x = path.positions[static_cast<std::size_t>(n_grid[i])];
        p.sum[i] += x;
        for (int j = 0; j < d; ++j) p.sum_sq[i][j] += x[j] * x[j];
      }
    }
    return p;
  });
  QuenchedMeanCurve curve;
  curve.method = MeanMethod::monte_carlo;
  curve.walks = walks;
  curve.n_grid.assign(n_grid.begin(), n_grid.end());
  const double m = static_cast<double>(walks);
  for (std::size_t i = 0; i < g; ++i) {
    Vec s(d), s2(d);
    for (const Partial& p : partials) {
      s += p.sum[i];
      s2 += p.sum_sq[i];
    }
    Vec mean = s * (1.0 / m);
    Vec se(d);
    for (int j = 0; j < d; ++j) {
      const double var = std::max(0.0, (s2[j] - m * mean[j] * mean[j]) / (m - 1.0));
      se[j] = std::sqrt(var / m);
    }
    curve.means.push_back(mean);
    curve.standard_errors.push_back(se);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Averaged moments.
// ---------------------------------------------------------------------------

struct MomentEstimate {
  Vec velocity;
  Vec velocity_se;
  Mat diffusion;
  Mat diffusion_se;
  std::size_t environments = 0;
  std::size_t walks_per_environment = 0;
};

/// Monte Carlo v-hat and D-hat from n_env environments with n_walk one-step
/// walks each. Standard errors treat environments as i.i.d. clusters.
inline MomentEstimate velocity_and_covariance(const Model& model, std::uint64_t master_seed, std::size_t n_env,
                                              std::size_t n_walk, int workers = 1) {
  if (n_env < 2 || n_walk < 1) throw std::invalid_argument("velocity_and_covariance needs n_env >= 2, n_walk >= 1");
  const int d = model.dim;
  // Per environment: mean step and mean outer product of the steps.
  struct Cluster {
    Vec mean;
    Mat second;
  };
  const auto clusters = parallel_map(n_env, workers, [&](std::size_t e) {
    const Environment env = replica_environment(model, master_seed, e);
    const JumpLaw law = env.query(0, Vec(d));
    Cluster c{Vec(d), Mat(d)};
    for (std::size_t w = 0; w < n_walk; ++w) {
      Stream s(walk_step_key(derive_seed(master_seed, e * n_walk + w, SeedRole::walk), 0));
      const Vec x = law_sample(law, s);
      c.mean += x;
      c.second += Mat::outer(x, x);
    }
    c.mean *= 1.0 / static_cast<double>(n_walk);
    c.second *= 1.0 / static_cast<double>(n_walk);
    return c;
  });
  const double k = static_cast<double>(n_env);
  MomentEstimate out{Vec(d), Vec(d), Mat(d), Mat(d), n_env, n_walk};
  for (const Cluster& c : clusters) out.velocity += c.mean;
  out.velocity *= 1.0 / k;
  Mat second(d);
  for (const Cluster& c : clusters) second += c.second;
  second *= 1.0 / k;
  out.diffusion = second - Mat::outer(out.velocity, out.velocity);
  // Cluster-level values of the centred second moment give the D standard error.
  for (int i = 0; i < d; ++i) {
    double sv = 0.0;
    for (const Cluster& c : clusters) sv += (c.mean[i] - out.velocity[i]) * (c.mean[i] - out.velocity[i]);
    out.velocity_se[i] = std::sqrt(sv / (k - 1.0) / k);
    for (int j = 0; j < d; ++j) {
      const double target = out.diffusion(i, j);
      double sd = 0.0;
      for (const Cluster& c : clusters) {
        const double centred = c.second(i, j) - c.mean[i] * out.velocity[j] - out.velocity[i] * c.mean[j] +
                               out.velocity[i] * out.velocity[j];
        sd += (centred - target) * (centred - target);
      }
      out.diffusion_se(i, j) = std::sqrt(sd / (k - 1.0) / k);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Diffusively scaled processes.
// ---------------------------------------------------------------------------

enum class Centering { velocity, quenched_mean };

struct ScaledPath {
  double epsilon = 1.0;
  std::vector<double> times;
  std::vector<Vec> values;
  Centering centering = Centering::velocity;
};

/// floor(t / eps) as used in the scaled processes.
inline std::int64_t scaled_index(double t, double eps) {
  if (!(eps > 0.0) || !(t >= 0.0)) throw std::invalid_argument("scaled index needs eps > 0 and t >= 0");
  return static_cast<std::int64_t>(std::floor(t / eps));
}

/// sqrt(eps) (X_[t/eps] - [t/eps] v).
inline ScaledPath scaled_path(const WalkPath& path, double eps, std::span<const double> times, const Vec& velocity) {
  ScaledPath out{eps, {times.begin(), times.end()}, {}, Centering::velocity};
  const double root = std::sqrt(eps);
  for (double t : times) {
    const std::int64_t k = scaled_index(t, eps);
    if (static_cast<std::size_t>(k) >= path.positions.size()) {
      throw std::out_of_range("path too short for t = " + std::to_string(t));
    }
    out.values.push_back((path.positions[static_cast<std::size_t>(k)] - velocity * static_cast<double>(k)) * root);
  }
  return out;
}

/// sqrt(eps) (X_[t/eps] - E^omega_0[X_[t/eps]]).
inline ScaledPath scaled_path(const WalkPath& path, double eps, std::span<const double> times,
                              const QuenchedMeanCurve& quenched_mean) {
  ScaledPath out{eps, {times.begin(), times.end()}, {}, Centering::quenched_mean};
  const double root = std::sqrt(eps);
  for (double t : times) {
    const std::int64_t k = scaled_index(t, eps);
    if (static_cast<std::size_t>(k) >= path.positions.size()) {
      throw std::out_of_range("path too short for t = " + std::to_string(t));
    }
    out.values.push_back((path.positions[static_cast<std::size_t>(k)] - quenched_mean.mean_at(k)) * root);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Environment seen from the particle.
// ---------------------------------------------------------------------------

/// Monte Carlo estimate of the P_n-expectation of f(omega_{0,0}) for the
/// environment T^{n, X_n} omega, over independent (environment, walk) replicas.
inline Estimate env_chain_observable(const Model& model, std::uint64_t master_seed, std::size_t n,
                                     const std::function<double(const JumpLaw&)>& f, std::size_t replicas,
                                     int workers = 1) {
  const auto values = parallel_map(replicas, workers, [&](std::size_t r) {
    const Environment env = replica_environment(model, master_seed, r);
    const WalkPath path = simulate_quenched_path(env, n, derive_seed(master_seed, r, SeedRole::walk));
    const Environment seen = env.shifted(static_cast<std::int64_t>(n), path.positions.back());
    return f(seen.query(0, Vec(model.dim)));
  });
  return mean_and_se(values);
}

/// Per-replica value of X_N - sum_{k<N} D(T^{k,X_k} omega); a martingale under P^omega_0.
inline Vec martingale_residual(const Environment& env, const WalkPath& path) {
  Vec drift_sum(env.dim());
  for (std::size_t k = 0; k + 1 < path.positions.size(); ++k) {
    drift_sum += law_mean(env.query(static_cast<std::int64_t>(k), path.positions[k]));
  }
  return path.positions.back() - path.start - drift_sum;
}

}  // namespace rwre

#endif  // RWRE_WALK_HPP
