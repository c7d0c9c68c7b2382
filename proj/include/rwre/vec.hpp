#ifndef RWRE_VEC_HPP
#define RWRE_VEC_HPP

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace rwre {

/// Largest spatial dimension supported by the fixed-capacity value types.
inline constexpr int kMaxDim = 3;

inline void check_dim(int d) {
  if (d < 1 || d > kMaxDim) {
    throw std::invalid_argument("spatial dimension must be in [1, " + std::to_string(kMaxDim) +
                                "], got " + std::to_string(d));
  }
}

/// Point of R^d with inline storage. Unused trailing slots are kept at zero so
/// that defaulted equality is exact equality of the d active coordinates.
class Vec {
 public:
  Vec() = default;
  explicit Vec(int dim) : dim_(dim) { check_dim(dim); }
  Vec(std::initializer_list<double> coords) : dim_(static_cast<int>(coords.size())) {
    check_dim(dim_);
    std::copy(coords.begin(), coords.end(), c_.begin());
  }

  static Vec filled(int dim, double value) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v.c_[i] = value;
    return v;
  }
  static Vec unit(int dim, int axis) {
    Vec v(dim);
    v.c_[axis] = 1.0;
    return v;
  }

  int dim() const { return dim_; }
  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator-(Vec a) { return a *= -1.0; }

  double dot(const Vec& o) const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * o.c_[i];
    return s;
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
  /// Sup norm; B_r = [-r, r]^d is the closed sup-norm ball.
  double max_abs() const {
    double m = 0.0;
    for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(c_[i]));
    return m;
  }

  bool operator==(const Vec&) const = default;

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

/// Dense d x d matrix, row-major, inline storage.
class Mat {
 public:
  Mat() = default;
  explicit Mat(int dim) : dim_(dim) { check_dim(dim); }

  static Mat identity(int dim) { return diagonal(Vec::filled(dim, 1.0)); }
  static Mat diagonal(const Vec& d) {
    Mat m(d.dim());
    for (int i = 0; i < d.dim(); ++i) m(i, i) = d[i];
    return m;
  }
  static Mat outer(const Vec& a, const Vec& b) {
    Mat m(a.dim());
    for (int i = 0; i < a.dim(); ++i)
      for (int j = 0; j < a.dim(); ++j) m(i, j) = a[i] * b[j];
    return m;
  }

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return a_[i * kMaxDim + j]; }
  double& operator()(int i, int j) { return a_[i * kMaxDim + j]; }

  Mat& operator+=(const Mat& o) {
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) (*this)(i, j) += o(i, j);
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) (*this)(i, j) -= o(i, j);
    return *this;
  }
  Mat& operator*=(double s) {
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) (*this)(i, j) *= s;
    return *this;
  }
  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(Mat a, double s) { return a *= s; }

  Vec operator*(const Vec& v) const {
    Vec r(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) r[i] += (*this)(i, j) * v[j];
    return r;
  }

  double trace() const {
    double t = 0.0;
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  bool operator==(const Mat&) const = default;

 private:
  std::array<double, kMaxDim * kMaxDim> a_{};
  int dim_ = 0;
};

}  // namespace rwre

#endif  // RWRE_VEC_HPP
