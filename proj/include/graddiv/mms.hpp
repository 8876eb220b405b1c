#pragma once

#include <cmath>

#include "graddiv/graddiv_operator.hpp"
#include "graddiv/mac_grid.hpp"
#include "graddiv/time_schemes.hpp"

namespace graddiv {

inline constexpr double kPi = 3.14159265358979323846;

/// Benchmark problem on the unit square with constant coefficient k:
///   u1 = sin(t) sin(pi x) sin(pi y),  u2 = cos(t) sin(pi x) sin(pi y),
/// which satisfies u.n = 0 on the boundary exactly. The source term is the
/// residual of the evolution equation,  f = du/dt - k grad(div u).
class ManufacturedCase {
 public:
  explicit ManufacturedCase(double k = 1.0) : k_(k) {}

  double k_value() const { return k_; }

  static double exact_u1(double x, double y, double t) {
    return std::sin(t) * std::sin(kPi * x) * std::sin(kPi * y);
  }
  static double exact_u2(double x, double y, double t) {
    return std::cos(t) * std::sin(kPi * x) * std::sin(kPi * y);
  }

  // div u = pi (sin t cos(pi x) sin(pi y) + cos t sin(pi x) cos(pi y)), so
  //   (grad div u)_1 = pi^2 (cos t cos(pi x) cos(pi y) - sin t sin(pi x) sin(pi y))
  //   (grad div u)_2 = pi^2 (sin t cos(pi x) cos(pi y) - cos t sin(pi x) sin(pi y))
  Vec2 source_value(double x, double y, double t) const {
    const double s1 = std::sin(kPi * x), c1 = std::cos(kPi * x);
    const double s2 = std::sin(kPi * y), c2 = std::cos(kPi * y);
    const double st = std::sin(t), ct = std::cos(t);
    const double pi2 = kPi * kPi;
    const double f1 = ct * s1 * s2 - k_ * pi2 * (ct * c1 * c2 - st * s1 * s2);
    const double f2 = -st * s1 * s2 - k_ * pi2 * (st * c1 * c2 - ct * s1 * s2);
    return {f1, f2};
  }

  StaggeredField exact_on_faces(const MacGrid& g, double t) const {
    StaggeredField v(g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 1; i <= g.nx - 1; ++i)
        v.u1(i, j) = exact_u1(g.u1_x(i), g.u1_y(j), t);
    for (int j = 1; j <= g.ny - 1; ++j)
      for (int i = 0; i < g.nx; ++i)
        v.u2(i, j) = exact_u2(g.u2_x(i), g.u2_y(j), t);
    return v;
  }

  StaggeredField source_on_faces(const MacGrid& g, double t) const {
    StaggeredField f(g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 1; i <= g.nx - 1; ++i)
        f.u1(i, j) = source_value(g.u1_x(i), g.u1_y(j), t).x;
    for (int j = 1; j <= g.ny - 1; ++j)
      for (int i = 0; i < g.nx; ++i)
        f.u2(i, j) = source_value(g.u2_x(i), g.u2_y(j), t).y;
    return f;
  }

  StaggeredField initial_condition(const MacGrid& g) const { return exact_on_faces(g, 0.0); }

  CenteredField<double> coefficient_field(const MacGrid& g) const {
    return CenteredField<double>(g, k_);
  }

  GradDivOperator make_operator(const MacGrid& g) const {
    return GradDivOperator(g, coefficient_field(g));
  }

  SourceFn source_sampler(const MacGrid& g) const {
    return [g, *this](double t) { return source_on_faces(g, t); };
  }

  /// Discrete solution error: both the numerical solution and the exact
  /// solution sampled on the faces are interpolated to the cell centroids and
  /// the combined two-component centered L2 norm of the difference is
  /// returned. This measures the time-stepping error against the sampled
  /// truth and is the metric behind the benchmark tables.
  double measure_error(const StaggeredField& v, double t) const {
    const MacGrid& g = v.grid();
    StaggeredField diff = v;
    const StaggeredField exact = exact_on_faces(g, t);
    for (std::size_t f = 0; f < diff.comp1().size(); ++f) diff.comp1()[f] -= exact.comp1()[f];
    for (std::size_t f = 0; f < diff.comp2().size(); ++f) diff.comp2()[f] -= exact.comp2()[f];
    return centered_l2_norm(interpolate_to_centers(diff));
  }

  /// Total error against the analytic solution evaluated at the centroids;
  /// includes the O(h^2) interpolation error of the staggered representation.
  double measure_error_pointwise(const StaggeredField& v, double t) const {
    const MacGrid& g = v.grid();
    CenteredField<Vec2> centered = interpolate_to_centers(v);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double x = g.center_x(i), y = g.center_y(j);
        centered.at(i, j) =
            centered.at(i, j) - Vec2{exact_u1(x, y, t), exact_u2(x, y, t)};
      }
    return centered_l2_norm(centered);
  }

 private:
  double k_;
};

}  // namespace graddiv
