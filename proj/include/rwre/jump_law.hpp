#ifndef RWRE_JUMP_LAW_HPP
#define RWRE_JUMP_LAW_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>

#include "rwre/stream.hpp"
#include "rwre/vec.hpp"

namespace rwre {

inline constexpr int kMaxAtoms = 8;  // 2^d coin atoms for d <= 3
inline constexpr double kWeightTolerance = 1e-12;

struct Atom {
  Vec point;
  double weight = 0.0;

  bool operator==(const Atom&) const = default;
};

/// Finitely supported jump law. Atom order is part of the value: inverse-CDF
/// sampling walks the atoms in list order.
class AtomicLaw {
 public:
  AtomicLaw() = default;

  /// Validates and renormalises. Throws std::invalid_argument on negative
  /// weights, mismatched dimensions, or a total weight further than
  /// kWeightTolerance from one.
  explicit AtomicLaw(std::span<const Atom> atoms) {
    if (atoms.empty()) throw std::invalid_argument("atomic law needs at least one atom");
    if (atoms.size() > static_cast<std::size_t>(kMaxAtoms)) {
      throw std::invalid_argument("atomic law supports at most " + std::to_string(kMaxAtoms) + " atoms");
    }
    const int d = atoms.front().point.dim();
    double total = 0.0;
    for (const Atom& a : atoms) {
      if (a.point.dim() != d) throw std::invalid_argument("atomic law atoms have mixed dimensions");
      if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) {
        throw std::invalid_argument("atomic law weight must be finite and nonnegative");
      }
      total += a.weight;
    }
    if (std::abs(total - 1.0) > kWeightTolerance) {
      throw std::invalid_argument("atomic law weights sum to " + std::to_string(total) + ", not 1");
    }
    count_ = static_cast<int>(atoms.size());
    for (int i = 0; i < count_; ++i) {
      atoms_[i] = atoms[i];
      if (total != 1.0) atoms_[i].weight /= total;
    }
  }
  AtomicLaw(std::initializer_list<Atom> atoms) : AtomicLaw(std::span<const Atom>(atoms.begin(), atoms.size())) {}

  int dim() const { return atoms_[0].point.dim(); }
  int size() const { return count_; }
  std::span<const Atom> atoms() const { return {atoms_.data(), static_cast<std::size_t>(count_)}; }

  bool operator==(const AtomicLaw& o) const {
    if (count_ != o.count_) return false;
    for (int i = 0; i < count_; ++i)
      if (!(atoms_[i] == o.atoms_[i])) return false;
    return true;
  }

 private:
  std::array<Atom, kMaxAtoms> atoms_{};
  int count_ = 0;
};

/// Gaussian jump law. The covariance must be symmetric positive semi-definite;
/// a lower-triangular factor is computed once at construction and drives sampling.
class GaussianLaw {
 public:
  GaussianLaw() = default;
  GaussianLaw(const Vec& mean, const Mat& cov) : mean_(mean), cov_(cov), factor_(cov.dim()) {
    const int d = mean.dim();
    if (cov.dim() != d) throw std::invalid_argument("gaussian law: covariance dimension mismatch");
    for (int i = 0; i < d; ++i) {
      if (!std::isfinite(mean[i])) throw std::invalid_argument("gaussian law: non-finite mean");
      for (int j = 0; j < d; ++j) {
        if (!std::isfinite(cov(i, j))) throw std::invalid_argument("gaussian law: non-finite covariance");
        if (std::abs(cov(i, j) - cov(j, i)) > kWeightTolerance * (1.0 + std::abs(cov(i, j)))) {
          throw std::invalid_argument("gaussian law: covariance is not symmetric");
        }
      }
    }
    // Cholesky tolerant of zero pivots (PSD, possibly singular).
    const double scale = std::max(1.0, cov.trace());
    const double tol = 1e-12 * scale;
    for (int j = 0; j < d; ++j) {
      double diag = cov(j, j);
      for (int k = 0; k < j; ++k) diag -= factor_(j, k) * factor_(j, k);
      if (diag < -tol) throw std::invalid_argument("gaussian law: covariance is not positive semi-definite");
      const double ljj = diag > tol ? std::sqrt(diag) : 0.0;
      factor_(j, j) = ljj;
      for (int i = j + 1; i < d; ++i) {
        double s = cov(i, j);
        for (int k = 0; k < j; ++k) s -= factor_(i, k) * factor_(j, k);
        if (ljj == 0.0) {
          if (std::abs(s) > std::sqrt(tol)) {
            throw std::invalid_argument("gaussian law: covariance is not positive semi-definite");
          }
          factor_(i, j) = 0.0;
        } else {
          factor_(i, j) = s / ljj;
        }
      }
    }
  }

  int dim() const { return mean_.dim(); }
  const Vec& mean() const { return mean_; }
  const Mat& covariance() const { return cov_; }
  const Mat& factor() const { return factor_; }

  bool operator==(const GaussianLaw&) const = default;

 private:
  Vec mean_;
  Mat cov_;
  Mat factor_;
};

struct DiracLaw {
  Vec point;

  int dim() const { return point.dim(); }
  bool operator==(const DiracLaw&) const = default;
};

/// The value omega_{n,x}: a probability measure on R^d.
class JumpLaw {
 public:
  using Variant = std::variant<AtomicLaw, GaussianLaw, DiracLaw>;

  JumpLaw() = default;
  JumpLaw(AtomicLaw law) : v_(std::move(law)) {}
  JumpLaw(GaussianLaw law) : v_(std::move(law)) {}
  JumpLaw(DiracLaw law) : v_(std::move(law)) {}

  const Variant& variant() const { return v_; }
  int dim() const {
    return std::visit([](const auto& l) { return l.dim(); }, v_);
  }
  bool is_dirac() const { return std::holds_alternative<DiracLaw>(v_); }
  bool is_atomic() const { return std::holds_alternative<AtomicLaw>(v_); }
  const AtomicLaw* atomic() const { return std::get_if<AtomicLaw>(&v_); }

  bool operator==(const JumpLaw&) const = default;

 private:
  Variant v_;
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

inline Vec law_mean(const JumpLaw& law) {
  return std::visit(Overloaded{
                        [](const AtomicLaw& a) {
                          Vec m(a.dim());
                          for (const Atom& at : a.atoms()) m += at.point * at.weight;
                          return m;
                        },
                        [](const GaussianLaw& g) { return g.mean(); },
                        [](const DiracLaw& d) { return d.point; },
                    },
                    law.variant());
}

/// Centered covariance of the law.
inline Mat law_cov(const JumpLaw& law) {
  return std::visit(Overloaded{
                        [](const AtomicLaw& a) {
                          const Vec m = law_mean(JumpLaw(a));
                          Mat c(a.dim());
                          for (const Atom& at : a.atoms()) {
                            const Vec dx = at.point - m;
                            c += Mat::outer(dx, dx) * at.weight;
                          }
                          return c;
                        },
                        [](const GaussianLaw& g) { return g.covariance(); },
                        [](const DiracLaw& d) { return Mat(d.dim()); },
                    },
                    law.variant());
}

/// E|X|^2 under the law.
inline double law_second_moment(const JumpLaw& law) {
  return std::visit(Overloaded{
                        [](const AtomicLaw& a) {
                          double s = 0.0;
                          for (const Atom& at : a.atoms()) s += at.weight * at.point.norm2();
                          return s;
                        },
                        [](const GaussianLaw& g) { return g.mean().norm2() + g.covariance().trace(); },
                        [](const DiracLaw& d) { return d.point.norm2(); },
                    },
                    law.variant());
}

/// One draw from the law.
///  - Atomic: one uniform, inverse CDF over the atom list order.
///  - Gaussian: Box-Muller on consecutive uniform pairs, z_{2i} = R cos(2 pi u'),
///    z_{2i+1} = R sin(2 pi u') with R = sqrt(-2 log u), u in (0, 1]; then mean + L z.
///  - Dirac: consumes nothing.
inline Vec law_sample(const JumpLaw& law, Stream& stream) {
  return std::visit(Overloaded{
                        [&](const AtomicLaw& a) {
                          const double u = stream.next();
                          double cum = 0.0;
                          const auto atoms = a.atoms();
                          std::size_t last_positive = 0;
                          for (std::size_t i = 0; i < atoms.size(); ++i) {
                            if (atoms[i].weight <= 0.0) continue;
                            last_positive = i;
                            cum += atoms[i].weight;
                            if (u < cum) return atoms[i].point;
                          }
                          return atoms[last_positive].point;
                        },
                        [&](const GaussianLaw& g) {
                          const int d = g.dim();
                          Vec z(d);
                          for (int i = 0; i < d; i += 2) {
                            const double radius = std::sqrt(-2.0 * std::log(stream.next_open()));
                            const double angle = 2.0 * std::numbers::pi * stream.next();
                            z[i] = radius * std::cos(angle);
                            if (i + 1 < d) z[i + 1] = radius * std::sin(angle);
                          }
                          return g.mean() + g.factor() * z;
                        },
                        [](const DiracLaw& dl) { return dl.point; },
                    },
                    law.variant());
}

}  // namespace rwre

#endif  // RWRE_JUMP_LAW_HPP
