#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "graddiv/parallel.hpp"

namespace graddiv {

/// Uniform MAC staggered grid on the rectangle [0, nx*hx] x [0, ny*hy].
/// Cell (i, j) has its centroid at ((i+1/2)*hx, (j+1/2)*hy).
struct MacGrid {
  int nx = 0;
  int ny = 0;
  double hx = 0.0;
  double hy = 0.0;

  double lx() const { return nx * hx; }
  double ly() const { return ny * hy; }
  int cell_count() const { return nx * ny; }

  // Interior x-normal faces: i in [1, nx-1], j in [0, ny-1].
  int n_u1() const { return (nx - 1) * ny; }
  // Interior y-normal faces: i in [0, nx-1], j in [1, ny-1].
  int n_u2() const { return nx * (ny - 1); }
  int dof_count() const { return n_u1() + n_u2(); }

  double u1_x(int i) const { return i * hx; }
  double u1_y(int j) const { return (j + 0.5) * hy; }
  double u2_x(int i) const { return (i + 0.5) * hx; }
  double u2_y(int j) const { return j * hy; }
  double center_x(int i) const { return (i + 0.5) * hx; }
  double center_y(int j) const { return (j + 0.5) * hy; }

  bool operator==(const MacGrid&) const = default;
};

inline MacGrid make_grid(int nx, int ny, double lx, double ly) {
  if (nx < 2 || ny < 2)
    throw std::invalid_argument("make_grid: need at least 2 cells per direction");
  if (!(lx > 0.0) || !(ly > 0.0))
    throw std::invalid_argument("make_grid: domain lengths must be positive");
  return MacGrid{nx, ny, lx / nx, ly / ny};
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

/// Discrete vector unknown on interior normal faces. Boundary normal faces
/// are not stored: the no-penetration condition u.n = 0 holds by construction.
class StaggeredField {
 public:
  StaggeredField() = default;
  explicit StaggeredField(const MacGrid& g)
      : grid_(g),
        u1_(static_cast<std::size_t>(g.n_u1()), 0.0),
        u2_(static_cast<std::size_t>(g.n_u2()), 0.0) {}

  const MacGrid& grid() const { return grid_; }
  int size() const { return grid_.dof_count(); }

  // i in [1, nx-1], j in [0, ny-1]
  double& u1(int i, int j) { return u1_[idx1(i, j)]; }
  double u1(int i, int j) const { return u1_[idx1(i, j)]; }
  // i in [0, nx-1], j in [1, ny-1]
  double& u2(int i, int j) { return u2_[idx2(i, j)]; }
  double u2(int i, int j) const { return u2_[idx2(i, j)]; }

  std::vector<double>& comp1() { return u1_; }
  const std::vector<double>& comp1() const { return u1_; }
  std::vector<double>& comp2() { return u2_; }
  const std::vector<double>& comp2() const { return u2_; }

  std::size_t idx1(int i, int j) const {
    assert(i >= 1 && i <= grid_.nx - 1 && j >= 0 && j <= grid_.ny - 1);
    return static_cast<std::size_t>(j) * (grid_.nx - 1) + (i - 1);
  }
  std::size_t idx2(int i, int j) const {
    assert(i >= 0 && i <= grid_.nx - 1 && j >= 1 && j <= grid_.ny - 1);
    return static_cast<std::size_t>(j - 1) * grid_.nx + i;
  }

  // Flat DOF order: component 1 in storage order, then component 2.
  double dof(int f) const {
    const int n1 = grid_.n_u1();
    return f < n1 ? u1_[f] : u2_[f - n1];
  }
  double& dof(int f) {
    const int n1 = grid_.n_u1();
    return f < n1 ? u1_[f] : u2_[f - n1];
  }

  void fill(double value) {
    std::fill(u1_.begin(), u1_.end(), value);
    std::fill(u2_.begin(), u2_.end(), value);
  }

  void to_flat(std::vector<double>& out) const {
    out.resize(static_cast<std::size_t>(size()));
    std::copy(u1_.begin(), u1_.end(), out.begin());
    std::copy(u2_.begin(), u2_.end(), out.begin() + u1_.size());
  }

  static StaggeredField from_flat(const MacGrid& g, std::span<const double> flat) {
    StaggeredField v(g);
    if (flat.size() != static_cast<std::size_t>(g.dof_count()))
      throw std::invalid_argument("from_flat: size mismatch");
    std::copy(flat.begin(), flat.begin() + v.u1_.size(), v.u1_.begin());
    std::copy(flat.begin() + v.u1_.size(), flat.end(), v.u2_.begin());
    return v;
  }

 private:
  MacGrid grid_;
  std::vector<double> u1_;
  std::vector<double> u2_;
};

/// Per-cell values (scalar or 2-vector) at cell centroids.
template <class T>
class CenteredField {
 public:
  CenteredField() = default;
  explicit CenteredField(const MacGrid& g)
      : grid_(g), values_(static_cast<std::size_t>(g.cell_count()), T{}) {}
  CenteredField(const MacGrid& g, T value)
      : grid_(g), values_(static_cast<std::size_t>(g.cell_count()), value) {}

  const MacGrid& grid() const { return grid_; }
  int size() const { return grid_.cell_count(); }

  T& at(int i, int j) { return values_[index(i, j)]; }
  const T& at(int i, int j) const { return values_[index(i, j)]; }

  std::vector<T>& values() { return values_; }
  const std::vector<T>& values() const { return values_; }

  std::size_t index(int i, int j) const {
    assert(i >= 0 && i < grid_.nx && j >= 0 && j < grid_.ny);
    return static_cast<std::size_t>(j) * grid_.nx + i;
  }

 private:
  MacGrid grid_;
  std::vector<T> values_;
};

inline void require_same_grid(const MacGrid& a, const MacGrid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

/// (a, b) = sum over stored faces of a*b * hx*hy. Deterministic reduction.
inline double inner_product(const StaggeredField& a, const StaggeredField& b) {
  require_same_grid(a.grid(), b.grid(), "inner_product");
  const auto& a1 = a.comp1();
  const auto& b1 = b.comp1();
  const auto& a2 = a.comp2();
  const auto& b2 = b.comp2();
  const double s1 =
      par::chunked_sum(static_cast<std::int64_t>(a1.size()),
                       [&](std::int64_t f) { return a1[f] * b1[f]; });
  const double s2 =
      par::chunked_sum(static_cast<std::int64_t>(a2.size()),
                       [&](std::int64_t f) { return a2[f] * b2[f]; });
  return (s1 + s2) * (a.grid().hx * a.grid().hy);
}

inline double norm(const StaggeredField& a) { return std::sqrt(inner_product(a, a)); }

inline double centered_l2_norm(const CenteredField<double>& e) {
  const auto& v = e.values();
  const double s = par::chunked_sum(static_cast<std::int64_t>(v.size()),
                                    [&](std::int64_t c) { return v[c] * v[c]; });
  return std::sqrt(s * (e.grid().hx * e.grid().hy));
}

inline double centered_l2_norm(const CenteredField<Vec2>& e) {
  const auto& v = e.values();
  const double s = par::chunked_sum(
      static_cast<std::int64_t>(v.size()),
      [&](std::int64_t c) { return v[c].x * v[c].x + v[c].y * v[c].y; });
  return std::sqrt(s * (e.grid().hx * e.grid().hy));
}

/// Average each component's two bracketing faces onto the cell centroid;
/// boundary normal faces contribute zero.
inline CenteredField<Vec2> interpolate_to_centers(const StaggeredField& v) {
  const MacGrid& g = v.grid();
  CenteredField<Vec2> out(g);
  par::parallel_rows(g.ny, [&](int j) {
    for (int i = 0; i < g.nx; ++i) {
      const double left = (i >= 1) ? v.u1(i, j) : 0.0;
      const double right = (i + 1 <= g.nx - 1) ? v.u1(i + 1, j) : 0.0;
      const double bottom = (j >= 1) ? v.u2(i, j) : 0.0;
      const double top = (j + 1 <= g.ny - 1) ? v.u2(i, j + 1) : 0.0;
      out.at(i, j) = Vec2{0.5 * (left + right), 0.5 * (bottom + top)};
    }
  });
  return out;
}

// y += alpha * x
inline void add_scaled(StaggeredField& y, double alpha, const StaggeredField& x) {
  require_same_grid(y.grid(), x.grid(), "add_scaled");
  auto& y1 = y.comp1();
  auto& y2 = y.comp2();
  const auto& x1 = x.comp1();
  const auto& x2 = x.comp2();
  for (std::size_t f = 0; f < y1.size(); ++f) y1[f] += alpha * x1[f];
  for (std::size_t f = 0; f < y2.size(); ++f) y2[f] += alpha * x2[f];
}

inline double max_abs(const StaggeredField& v) {
  double m = 0.0;
  for (double x : v.comp1()) m = std::max(m, std::abs(x));
  for (double x : v.comp2()) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace graddiv
