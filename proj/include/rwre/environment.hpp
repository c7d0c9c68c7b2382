#ifndef RWRE_ENVIRONMENT_HPP
#define RWRE_ENVIRONMENT_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

#include "rwre/jump_law.hpp"
#include "rwre/stream.hpp"
#include "rwre/vec.hpp"

namespace rwre {

// ---------------------------------------------------------------------------
// Site law families: how one cell turns a handful of uniforms into a JumpLaw.
// ---------------------------------------------------------------------------

/// Independent +-step coin on every coordinate, p_j ~ Uniform(p_lo, p_hi).
/// In d = 1 the law is Atomic{(+step, p), (-step, 1 - p)}.
struct CoinFamily {
  double p_lo = 0.0;
  double p_hi = 1.0;
  double step = 1.0;
};

/// Nonrandom site law.
struct FixedFamily {
  JumpLaw law;
};

/// Gaussian{base_mean + drift_spread * (2u - 1), cov}, one u per coordinate.
struct GaussianFamily {
  Vec base_mean;
  Mat cov;
  double drift_spread = 0.0;
};

using SiteFamily = std::variant<CoinFamily, FixedFamily, GaussianFamily>;

inline constexpr int kMaxFamilyUniforms = kMaxDim;

inline void validate_family(const SiteFamily& family, int d) {
  check_dim(d);
  std::visit(Overloaded{
                 [](const CoinFamily& c) {
                   if (!(c.p_lo >= 0.0 && c.p_lo <= c.p_hi && c.p_hi <= 1.0)) {
                     throw std::invalid_argument("coin family needs 0 <= p_lo <= p_hi <= 1");
                   }
                   if (!(c.step > 0.0) || !std::isfinite(c.step)) {
                     throw std::invalid_argument("coin family needs a positive finite step");
                   }
                 },
                 [d](const FixedFamily& f) {
                   if (f.law.dim() != d) throw std::invalid_argument("fixed family law has the wrong dimension");
                 },
                 [d](const GaussianFamily& g) {
                   if (g.base_mean.dim() != d || g.cov.dim() != d) {
                     throw std::invalid_argument("gaussian family has the wrong dimension");
                   }
                   if (!(g.drift_spread >= 0.0)) throw std::invalid_argument("gaussian family needs drift_spread >= 0");
                   GaussianLaw probe(g.base_mean, g.cov);  // validates the covariance
                   (void)probe;
                 },
             },
             family);
}

inline int family_uniform_count(const SiteFamily& family, int d) {
  return std::visit(Overloaded{
                        [d](const CoinFamily&) { return d; },
                        [](const FixedFamily&) { return 0; },
                        [d](const GaussianFamily& g) { return g.drift_spread > 0.0 ? d : 0; },
                    },
                    family);
}

inline JumpLaw family_law(const SiteFamily& family, int d, std::span<const double> u) {
  return std::visit(Overloaded{
                        [&](const CoinFamily& c) -> JumpLaw {
                          std::array<Atom, kMaxAtoms> atoms;
                          std::array<double, kMaxDim> p{};
                          for (int j = 0; j < d; ++j) p[j] = c.p_lo + (c.p_hi - c.p_lo) * u[j];
                          const int count = 1 << d;
                          for (int mask = 0; mask < count; ++mask) {
                            Atom& a = atoms[mask];
                            a.point = Vec(d);
                            a.weight = 1.0;
                            for (int j = 0; j < d; ++j) {
                              const bool down = (mask >> j) & 1;
                              a.point[j] = down ? -c.step : c.step;
                              a.weight *= down ? 1.0 - p[j] : p[j];
                            }
                          }
                          return AtomicLaw(std::span<const Atom>(atoms.data(), count));
                        },
                        [](const FixedFamily& f) { return f.law; },
                        [&](const GaussianFamily& g) -> JumpLaw {
                          Vec mean = g.base_mean;
                          if (g.drift_spread > 0.0) {
                            for (int j = 0; j < d; ++j) mean[j] += g.drift_spread * (2.0 * u[j] - 1.0);
                          }
                          return GaussianLaw(mean, g.cov);
                        },
                    },
                    family);
}

// ---------------------------------------------------------------------------
// Models.
// ---------------------------------------------------------------------------

/// i.i.d. laws on unit cells [U + x], U ~ Uniform[0,1)^d drawn once per environment.
struct LatticeProduct {
  SiteFamily family;
  bool uniform_offset = true;
};

enum class Interpolation {
  nearest,  // law of the nearest integer cell centre, ties to the smaller coordinate
  average,  // family applied to the mean of the uniforms of every centre within `range`
};

/// Spatially dependent level: points more than 2 * range apart share no cell.
struct FiniteRange {
  SiteFamily family;
  double range = 1.0;
  Interpolation rule = Interpolation::average;
};

/// One law per level shared by every x.
struct FullyCorrelated {
  SiteFamily family;
};

enum class Displacement {
  plus_minus,  // each coordinate +-scale with probability 1/2
  box,         // each coordinate Uniform(-scale, scale)
};

/// Every law is a point mass at x + z with z drawn per unit cell.
struct DiracField {
  Displacement displacement = Displacement::plus_minus;
  double scale = 1.0;
  bool uniform_offset = true;
};

using ModelSpec = std::variant<LatticeProduct, FiniteRange, FullyCorrelated, DiracField>;

struct Model {
  int dim = 1;
  ModelSpec spec;
};

inline std::string model_kind_name(const Model& m) {
  return std::visit(Overloaded{
                        [](const LatticeProduct&) { return std::string("lattice"); },
                        [](const FiniteRange&) { return std::string("finite-range"); },
                        [](const FullyCorrelated&) { return std::string("fully-correlated"); },
                        [](const DiracField&) { return std::string("dirac"); },
                    },
                    m.spec);
}

inline void validate_model(const Model& m) {
  check_dim(m.dim);
  std::visit(Overloaded{
                 [&](const LatticeProduct& l) { validate_family(l.family, m.dim); },
                 [&](const FiniteRange& f) {
                   validate_family(f.family, m.dim);
                   if (!(f.range > 0.0) || !std::isfinite(f.range)) {
                     throw std::invalid_argument("finite-range model needs range > 0");
                   }
                   if (f.rule == Interpolation::average && f.range < 0.5 * std::sqrt(static_cast<double>(m.dim))) {
                     throw std::invalid_argument("average interpolation needs range >= sqrt(d)/2 so every point has a centre");
                   }
                 },
                 [&](const FullyCorrelated& f) { validate_family(f.family, m.dim); },
                 [](const DiracField& f) {
                   if (!(f.scale >= 0.0) || !std::isfinite(f.scale)) {
                     throw std::invalid_argument("dirac field needs a finite scale >= 0");
                   }
                 },
             },
             m.spec);
}

/// Closed-form one-step moments of the averaged law, when the family admits them.
struct AveragedMoments {
  Vec velocity;                // v = E_0[X_1]
  Mat diffusion;               // D = E_0[(X_1 - v)(X_1 - v)^T]
  std::optional<Mat> noise;    // E[cov(omega_{0,0})]: the quenched-centred diffusion
};

namespace detail {

struct CoinMoments {
  double mean_s;    // E[2p - 1]
  double second_s;  // E[(2p - 1)^2]
};

inline CoinMoments coin_moments(const CoinFamily& c) {
  const double a = 2.0 * c.p_lo - 1.0;
  const double b = 2.0 * c.p_hi - 1.0;
  return {0.5 * (a + b), (a * a + a * b + b * b) / 3.0};
}

inline AveragedMoments family_moments(const SiteFamily& family, int d, bool noise_known) {
  return std::visit(Overloaded{
                        [&](const CoinFamily& c) {
                          const CoinMoments cm = coin_moments(c);
                          AveragedMoments m{Vec(d), Mat(d), std::nullopt};
                          Mat noise(d);
                          for (int j = 0; j < d; ++j) {
                            m.velocity[j] = c.step * cm.mean_s;
                            m.diffusion(j, j) = c.step * c.step * (1.0 - cm.mean_s * cm.mean_s);
                            noise(j, j) = c.step * c.step * (1.0 - cm.second_s);
                          }
                          if (noise_known) m.noise = noise;
                          return m;
                        },
                        [&](const FixedFamily& f) {
                          return AveragedMoments{law_mean(f.law), law_cov(f.law), law_cov(f.law)};
                        },
                        [&](const GaussianFamily& g) {
                          Mat diff = g.cov;
                          for (int j = 0; j < d; ++j) diff(j, j) += g.drift_spread * g.drift_spread / 3.0;
                          return AveragedMoments{g.base_mean, diff, g.cov};
                        },
                    },
                    family);
}

}  // namespace detail

inline std::optional<AveragedMoments> analytic_moments(const Model& m) {
  const int d = m.dim;
  return std::visit(
      Overloaded{
          [d](const LatticeProduct& l) -> std::optional<AveragedMoments> {
            return detail::family_moments(l.family, d, true);
          },
          [d](const FullyCorrelated& f) -> std::optional<AveragedMoments> {
            return detail::family_moments(f.family, d, true);
          },
          [d](const FiniteRange& f) -> std::optional<AveragedMoments> {
            if (f.rule == Interpolation::nearest) return detail::family_moments(f.family, d, true);
            // Averaging uniforms keeps E[u] = 1/2 but changes their spread, so
            // only families whose averaged law ignores the spread stay closed-form.
            if (std::holds_alternative<GaussianFamily>(f.family) &&
                std::get<GaussianFamily>(f.family).drift_spread > 0.0) {
              return std::nullopt;
            }
            return detail::family_moments(f.family, d, std::holds_alternative<FixedFamily>(f.family) ||
                                                           std::holds_alternative<GaussianFamily>(f.family));
          },
          [d](const DiracField& f) -> std::optional<AveragedMoments> {
            const double var = f.displacement == Displacement::plus_minus ? f.scale * f.scale
                                                                          : f.scale * f.scale / 3.0;
            return AveragedMoments{Vec(d), Mat::identity(d) * var, Mat(d)};
          },
      },
      m.spec);
}

// ---------------------------------------------------------------------------
// Environment: a queryable, shiftable random field (n, x) -> JumpLaw.
// ---------------------------------------------------------------------------

class Environment {
 public:
  Environment(Model model, std::uint64_t seed)
      : model_(std::make_shared<const Model>(std::move(model))), seed_(seed), shift_space_(model_->dim),
        offset_(model_->dim) {
    validate_model(*model_);
    bool use_offset = false;
    if (const auto* l = std::get_if<LatticeProduct>(&model_->spec)) use_offset = l->uniform_offset;
    if (const auto* f = std::get_if<DiracField>(&model_->spec)) use_offset = f->uniform_offset;
    if (use_offset) {
      StreamKey key;
      key.master_seed = seed_;
      key.tag = static_cast<std::uint32_t>(StreamTag::offset);
      const Stream s(key);
      for (int j = 0; j < model_->dim; ++j) offset_[j] = s.at(static_cast<std::uint64_t>(j));
    }
  }

  const Model& model() const { return *model_; }
  int dim() const { return model_->dim; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t shift_level() const { return shift_level_; }
  const Vec& shift_space() const { return shift_space_; }
  /// The lattice embedding offset U (zero when disabled or not applicable).
  const Vec& lattice_offset() const { return offset_; }

  /// T^{m,y}: the shifted environment sees (n, x) as (n + m, x + y).
  Environment shifted(std::int64_t m, const Vec& y) const {
    Environment e = *this;
    e.shift_level_ += m;
    e.shift_space_ += y;
    return e;
  }

  JumpLaw query(std::int64_t n, const Vec& x) const {
    const std::int64_t level = n + shift_level_;
    const Vec pos = x + shift_space_;
    const int d = model_->dim;
    return std::visit(Overloaded{
                          [&](const LatticeProduct& l) { return cell_law(l.family, level, floor_cell(pos)); },
                          [&](const FiniteRange& f) { return finite_range_law(f, level, pos); },
                          [&](const FullyCorrelated& f) { return cell_law(f.family, level, {}); },
                          [&](const DiracField& f) {
                            const Stream s(site_key(level, floor_cell(pos)));
                            Vec z(d);
                            for (int j = 0; j < d; ++j) {
                              const double u = s.at(static_cast<std::uint64_t>(j));
                              z[j] = f.displacement == Displacement::plus_minus ? (u < 0.5 ? f.scale : -f.scale)
                                                                                : f.scale * (2.0 * u - 1.0);
                            }
                            return JumpLaw(DiracLaw{z});
                          },
                      },
                      model_->spec);
  }

  /// True when every x on a level sees the same law.
  bool spatially_constant() const {
    if (std::holds_alternative<FullyCorrelated>(model_->spec)) return true;
    if (const auto* l = std::get_if<LatticeProduct>(&model_->spec)) return std::holds_alternative<FixedFamily>(l->family);
    if (const auto* f = std::get_if<FiniteRange>(&model_->spec)) return std::holds_alternative<FixedFamily>(f->family);
    return false;
  }

  /// Same underlying field and the same shift.
  friend bool same_view(const Environment& a, const Environment& b) {
    return a.model_ == b.model_ && a.seed_ == b.seed_ && a.shift_level_ == b.shift_level_ &&
           a.shift_space_ == b.shift_space_;
  }

 private:
  using Cell = std::array<std::int64_t, kMaxDim>;

  StreamKey site_key(std::int64_t level, const Cell& cell) const {
    StreamKey key;
    key.master_seed = seed_;
    key.level = level;
    key.cell = cell;
    key.tag = static_cast<std::uint32_t>(StreamTag::site);
    return key;
  }

  Cell floor_cell(const Vec& pos) const {
    Cell c{};
    for (int j = 0; j < model_->dim; ++j) c[j] = static_cast<std::int64_t>(std::floor(offset_[j] + pos[j]));
    return c;
  }

  JumpLaw cell_law(const SiteFamily& family, std::int64_t level, const Cell& cell) const {
    const int d = model_->dim;
    const int k = family_uniform_count(family, d);
    std::array<double, kMaxFamilyUniforms> u{};
    if (k > 0) {
      const Stream s(site_key(level, cell));
      for (int i = 0; i < k; ++i) u[i] = s.at(static_cast<std::uint64_t>(i));
    }
    return family_law(family, d, std::span<const double>(u.data(), k));
  }

  JumpLaw finite_range_law(const FiniteRange& f, std::int64_t level, const Vec& pos) const {
    const int d = model_->dim;
    if (f.rule == Interpolation::nearest) {
      Cell c{};
      for (int j = 0; j < d; ++j) c[j] = static_cast<std::int64_t>(std::ceil(pos[j] - 0.5));
      return cell_law(f.family, level, c);
    }
    const int k = family_uniform_count(f.family, d);
    std::array<double, kMaxFamilyUniforms> acc{};
    Cell lo{}, hi{};
    for (int j = 0; j < d; ++j) {
      lo[j] = static_cast<std::int64_t>(std::ceil(pos[j] - f.range));
      hi[j] = static_cast<std::int64_t>(std::floor(pos[j] + f.range));
    }
    const double r2 = f.range * f.range;
    long count = 0;
    Cell c = lo;
    while (true) {
      double dist2 = 0.0;
      for (int j = 0; j < d; ++j) {
        const double dx = static_cast<double>(c[j]) - pos[j];
        dist2 += dx * dx;
      }
      if (dist2 <= r2) {
        ++count;
        if (k > 0) {
          const Stream s(site_key(level, c));
          for (int i = 0; i < k; ++i) acc[i] += s.at(static_cast<std::uint64_t>(i));
        }
      }
      int j = 0;
      while (j < d && ++c[j] > hi[j]) {
        c[j] = lo[j];
        ++j;
      }
      if (j == d) break;
    }
    for (int i = 0; i < k; ++i) acc[i] /= static_cast<double>(count);
    return family_law(f.family, d, std::span<const double>(acc.data(), k));
  }

  std::shared_ptr<const Model> model_;
  std::uint64_t seed_;
  std::int64_t shift_level_ = 0;
  Vec shift_space_;
  Vec offset_;
};

inline Environment make_lattice_product(std::uint64_t seed, int d, SiteFamily family, bool uniform_offset = true) {
  return Environment(Model{d, LatticeProduct{std::move(family), uniform_offset}}, seed);
}

inline Environment make_finite_range(std::uint64_t seed, int d, double range, SiteFamily family,
                                     Interpolation rule = Interpolation::average) {
  return Environment(Model{d, FiniteRange{std::move(family), range, rule}}, seed);
}

inline Environment make_fully_correlated(std::uint64_t seed, int d, SiteFamily family) {
  return Environment(Model{d, FullyCorrelated{std::move(family)}}, seed);
}

inline Environment make_dirac(std::uint64_t seed, int d, Displacement displacement = Displacement::plus_minus,
                              double scale = 1.0, bool uniform_offset = true) {
  return Environment(Model{d, DiracField{displacement, scale, uniform_offset}}, seed);
}

inline Environment shift(const Environment& env, std::int64_t m, const Vec& y) { return env.shifted(m, y); }

/// D(omega): mean of the jump law at the origin.
inline Vec local_drift(const Environment& env) { return law_mean(env.query(0, Vec(env.dim()))); }

}  // namespace rwre

#endif  // RWRE_ENVIRONMENT_HPP
