#pragma once

#include <stdexcept>
#include <vector>

#include "graddiv/mac_grid.hpp"

namespace graddiv {

/// Pieces of the discrete grad-div operator A = -grad(k div .) and of its
/// splittings. Component 1 is ordered before component 2, so the strictly
/// lower block is A21 and the strictly upper block is A12:
///   A = L + D + U,  L = {A21}, U = {A12}, D = diag(A11, A22),
///   A1 = L + D/2,   A2 = U + D/2,
///   R  = (I + tau*sigma*A)/2 + sigma^2 tau^2 A1 A2.
enum class OperatorPart { A, A11, A12, A21, A22, D, L, U, A1, A2, R };

struct DenseMatrix {
  int n = 0;
  std::vector<double> a;  // row-major

  DenseMatrix() = default;
  explicit DenseMatrix(int size) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}
  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * n + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * n + c]; }
};

/// Matrix-free application of the MAC discretization of -grad(k div u) with
/// u.n = 0, and of all its block decompositions. The coefficient k >= 0 is
/// sampled at cell centroids, which makes (A v, v) = sum k (div v)^2 hx hy
/// hold exactly and A = Div^T K Div symmetric positive semidefinite.
class GradDivOperator {
 public:
  GradDivOperator(const MacGrid& g, CenteredField<double> k)
      : grid_(g), k_(std::move(k)), inv_hx_(1.0 / g.hx), inv_hy_(1.0 / g.hy) {
    require_same_grid(grid_, k_.grid(), "GradDivOperator");
    for (double kv : k_.values())
      if (!(kv >= 0.0))
        throw std::invalid_argument("GradDivOperator: coefficient k must be nonnegative");
  }

  static GradDivOperator constant_k(const MacGrid& g, double k) {
    return GradDivOperator(g, CenteredField<double>(g, k));
  }

  const MacGrid& grid() const { return grid_; }
  const CenteredField<double>& k() const { return k_; }

  double k_max() const {
    double m = 0.0;
    for (double kv : k_.values()) m = std::max(m, kv);
    return m;
  }

  // Crude upper bound for ||A||, used to normalize rounding tolerances.
  double norm_bound() const {
    return 8.0 * k_max() * std::max(inv_hx_ * inv_hx_, inv_hy_ * inv_hy_);
  }

  /// Discrete divergence at cell centroids; boundary normal faces are zero.
  void divergence(const StaggeredField& v, CenteredField<double>& out) const {
    require_same_grid(grid_, v.grid(), "divergence");
    out = CenteredField<double>(grid_);
    par::parallel_rows(grid_.ny, [&](int j) {
      for (int i = 0; i < grid_.nx; ++i) {
        const double l = (i >= 1) ? v.u1(i, j) : 0.0;
        const double r = (i + 1 <= grid_.nx - 1) ? v.u1(i + 1, j) : 0.0;
        const double b = (j >= 1) ? v.u2(i, j) : 0.0;
        const double t = (j + 1 <= grid_.ny - 1) ? v.u2(i, j + 1) : 0.0;
        out.at(i, j) = (r - l) * inv_hx_ + (t - b) * inv_hy_;
      }
    });
  }

  CenteredField<double> divergence(const StaggeredField& v) const {
    CenteredField<double> out;
    divergence(v, out);
    return out;
  }

  /// out = P v for the requested part; sigma/tau are consulted only for R.
  void apply(OperatorPart part, const StaggeredField& v, StaggeredField& out,
             double sigma = 0.0, double tau = 0.0) const {
    require_same_grid(grid_, v.grid(), "apply");
    out = StaggeredField(grid_);
    switch (part) {
      case OperatorPart::A: {
        CenteredField<double> w1(grid_), w2(grid_);
        weighted_div(1, v, w1);
        weighted_div(2, v, w2);
        accumulate_gradient(1, 1.0, w1, out);
        accumulate_gradient(1, 1.0, w2, out);
        accumulate_gradient(2, 1.0, w1, out);
        accumulate_gradient(2, 1.0, w2, out);
        return;
      }
      case OperatorPart::A11: return block(1, 1, 1.0, v, out);
      case OperatorPart::A12: return block(1, 2, 1.0, v, out);
      case OperatorPart::A21: return block(2, 1, 1.0, v, out);
      case OperatorPart::A22: return block(2, 2, 1.0, v, out);
      case OperatorPart::D: {
        CenteredField<double> w(grid_);
        weighted_div(1, v, w);
        accumulate_gradient(1, 1.0, w, out);
        weighted_div(2, v, w);
        accumulate_gradient(2, 1.0, w, out);
        return;
      }
      case OperatorPart::L: return block(2, 1, 1.0, v, out);
      case OperatorPart::U: return block(1, 2, 1.0, v, out);
      case OperatorPart::A1: {
        // L + D/2: comp1 = A11 v1 / 2, comp2 = A21 v1 + A22 v2 / 2
        CenteredField<double> w1(grid_), w2(grid_);
        weighted_div(1, v, w1);
        weighted_div(2, v, w2);
        accumulate_gradient(1, 0.5, w1, out);
        accumulate_gradient(2, 1.0, w1, out);
        accumulate_gradient(2, 0.5, w2, out);
        return;
      }
      case OperatorPart::A2: {
        // U + D/2: comp1 = A12 v2 + A11 v1 / 2, comp2 = A22 v2 / 2
        CenteredField<double> w1(grid_), w2(grid_);
        weighted_div(1, v, w1);
        weighted_div(2, v, w2);
        accumulate_gradient(1, 1.0, w2, out);
        accumulate_gradient(1, 0.5, w1, out);
        accumulate_gradient(2, 0.5, w2, out);
        return;
      }
      case OperatorPart::R: {
        const double st = sigma * tau;
        StaggeredField a2v(grid_), a1a2v(grid_), av(grid_);
        apply(OperatorPart::A2, v, a2v);
        apply(OperatorPart::A1, a2v, a1a2v);
        apply(OperatorPart::A, v, av);
        auto& o1 = out.comp1();
        auto& o2 = out.comp2();
        const auto& v1 = v.comp1();
        const auto& v2 = v.comp2();
        for (std::size_t f = 0; f < o1.size(); ++f)
          o1[f] = 0.5 * v1[f] + 0.5 * st * av.comp1()[f] + st * st * a1a2v.comp1()[f];
        for (std::size_t f = 0; f < o2.size(); ++f)
          o2[f] = 0.5 * v2[f] + 0.5 * st * av.comp2()[f] + st * st * a1a2v.comp2()[f];
        return;
      }
    }
    throw std::logic_error("apply: unknown operator part");
  }

  StaggeredField apply(OperatorPart part, const StaggeredField& v, double sigma = 0.0,
                       double tau = 0.0) const {
    StaggeredField out;
    apply(part, v, out, sigma, tau);
    return out;
  }

  /// (P v, v) in the staggered inner product.
  double quadratic_form(OperatorPart part, const StaggeredField& v, double sigma = 0.0,
                        double tau = 0.0) const {
    return inner_product(apply(part, v, sigma, tau), v);
  }

  /// Column-by-column assembly of the matrix-free operator; oracle support
  /// for small grids only.
  DenseMatrix assemble_dense(OperatorPart part, double sigma = 0.0, double tau = 0.0,
                             int dof_cap = 2500) const {
    const int n = grid_.dof_count();
    if (n > dof_cap)
      throw std::invalid_argument("assemble_dense: DOF count exceeds cap");
    DenseMatrix m(n);
    StaggeredField e(grid_), col(grid_);
    for (int c = 0; c < n; ++c) {
      e.dof(c) = 1.0;
      apply(part, e, col, sigma, tau);
      for (int r = 0; r < n; ++r) m.at(r, c) = col.dof(r);
      e.dof(c) = 0.0;
    }
    return m;
  }

  // w = k * d v_comp / dx_comp at cell centroids.
  void weighted_div(int comp, const StaggeredField& v, CenteredField<double>& w) const {
    par::parallel_rows(grid_.ny, [&](int j) {
      if (comp == 1) {
        for (int i = 0; i < grid_.nx; ++i) {
          const double l = (i >= 1) ? v.u1(i, j) : 0.0;
          const double r = (i + 1 <= grid_.nx - 1) ? v.u1(i + 1, j) : 0.0;
          w.at(i, j) = k_.at(i, j) * ((r - l) * inv_hx_);
        }
      } else {
        for (int i = 0; i < grid_.nx; ++i) {
          const double b = (j >= 1) ? v.u2(i, j) : 0.0;
          const double t = (j + 1 <= grid_.ny - 1) ? v.u2(i, j + 1) : 0.0;
          w.at(i, j) = k_.at(i, j) * ((t - b) * inv_hy_);
        }
      }
    });
  }

  // out_comp += alpha * (-grad_comp w). All block applications funnel through
  // this kernel so that block-sum identities hold exactly in floating point.
  void accumulate_gradient(int comp, double alpha, const CenteredField<double>& w,
                           StaggeredField& out) const {
    if (comp == 1) {
      const double coef = alpha * inv_hx_;
      par::parallel_rows(grid_.ny, [&](int j) {
        for (int i = 1; i <= grid_.nx - 1; ++i)
          out.u1(i, j) += (w.at(i - 1, j) - w.at(i, j)) * coef;
      });
    } else {
      const double coef = alpha * inv_hy_;
      par::parallel_rows(grid_.ny - 1, [&](int r) {
        const int j = r + 1;
        for (int i = 0; i < grid_.nx; ++i)
          out.u2(i, j) += (w.at(i, j - 1) - w.at(i, j)) * coef;
      });
    }
  }

 private:
  void block(int bi, int bj, double alpha, const StaggeredField& v, StaggeredField& out) const {
    CenteredField<double> w(grid_);
    weighted_div(bj, v, w);
    accumulate_gradient(bi, alpha, w, out);
  }

  MacGrid grid_;
  CenteredField<double> k_;
  double inv_hx_;
  double inv_hy_;
};

}  // namespace graddiv
