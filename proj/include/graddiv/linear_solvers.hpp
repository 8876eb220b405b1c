#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "graddiv/graddiv_operator.hpp"
#include "graddiv/mac_grid.hpp"

namespace graddiv {

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, int iterations, double final_residual)
      : std::runtime_error(what), iterations(iterations), final_residual(final_residual) {}
  int iterations;
  double final_residual;
};

/// Per-thread tallies used by structural tests: LOD schemes must drive only
/// 1D line solves, never the coupled Krylov solver.
struct SolverCounters {
  long long line_solves = 0;
  long long krylov_solves = 0;
  long long krylov_iterations = 0;
  void reset() { *this = SolverCounters{}; }
};

inline SolverCounters& solver_counters() {
  thread_local SolverCounters counters;
  return counters;
}

struct TridiagonalSystem {
  std::vector<double> sub;   // length n-1
  std::vector<double> diag;  // length n
  std::vector<double> sup;   // length n-1
  std::vector<double> rhs;   // length n
};

inline constexpr double kPivotFloor = 1e-14;

/// Thomas elimination without pivoting; the shifted-block systems solved here
/// are strictly diagonally dominant.
inline std::vector<double> thomas_solve(const TridiagonalSystem& sys) {
  const std::size_t n = sys.diag.size();
  if (n == 0 || sys.rhs.size() != n || sys.sub.size() + 1 != n || sys.sup.size() + 1 != n)
    throw std::invalid_argument("thomas_solve: inconsistent sizes");
  std::vector<double> cp(n, 0.0), x(n, 0.0);
  double beta = sys.diag[0];
  if (std::abs(beta) < kPivotFloor) throw SingularSystemError("thomas_solve: zero pivot");
  if (n > 1) cp[0] = sys.sup[0] / beta;
  x[0] = sys.rhs[0] / beta;
  for (std::size_t i = 1; i < n; ++i) {
    beta = sys.diag[i] - sys.sub[i - 1] * cp[i - 1];
    if (std::abs(beta) < kPivotFloor) throw SingularSystemError("thomas_solve: zero pivot");
    if (i + 1 < n) cp[i] = sys.sup[i] / beta;
    x[i] = (sys.rhs[i] - sys.sub[i - 1] * x[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= cp[i] * x[i + 1];
  return x;
}

/// Solves (I + c * A_ii) w = rhs for one component as independent tridiagonal
/// line systems (x-lines for component 1, y-lines for component 2). Writes
/// only the selected component of `out`.
inline void solve_shifted_diag_block(const GradDivOperator& op, int component, double c,
                                     const StaggeredField& rhs, StaggeredField& out) {
  if (component != 1 && component != 2)
    throw std::invalid_argument("solve_shifted_diag_block: component must be 1 or 2");
  if (!(c >= 0.0)) throw std::invalid_argument("solve_shifted_diag_block: need c >= 0");
  const MacGrid& g = op.grid();
  require_same_grid(g, rhs.grid(), "solve_shifted_diag_block");
  require_same_grid(g, out.grid(), "solve_shifted_diag_block");
  const auto& k = op.k();

  if (component == 1) {
    const double s = c / (g.hx * g.hx);
    const int n = g.nx - 1;
    par::parallel_rows(g.ny, [&](int j) {
      thread_local std::vector<double> cp;
      cp.resize(static_cast<std::size_t>(n));
      // unknown u1(i, j), i in [1, nx-1]; neighbor cells (i-1, j) and (i, j)
      double kl = k.at(0, j), kr = k.at(1, j);
      double beta = 1.0 + s * (kl + kr);
      cp[0] = (n > 1) ? (-s * kr) / beta : 0.0;
      out.u1(1, j) = rhs.u1(1, j) / beta;
      for (int i = 2; i <= n; ++i) {
        kl = k.at(i - 1, j);
        kr = k.at(i, j);
        const double sub = -s * kl;
        beta = (1.0 + s * (kl + kr)) - sub * cp[i - 2];
        if (i < n) cp[i - 1] = (-s * kr) / beta;
        out.u1(i, j) = (rhs.u1(i, j) - sub * out.u1(i - 1, j)) / beta;
      }
      for (int i = n - 1; i >= 1; --i) out.u1(i, j) -= cp[i - 1] * out.u1(i + 1, j);
    });
    solver_counters().line_solves += g.ny;
  } else {
    const double s = c / (g.hy * g.hy);
    const int rows = g.ny - 1;  // unknowns u2(i, j), j in [1, ny-1]
    std::vector<double> cp(static_cast<std::size_t>(rows) * g.nx, 0.0);
    constexpr int kChunk = 64;
    const int nchunks = (g.nx + kChunk - 1) / kChunk;
    par::parallel_rows(nchunks, [&](int chunk) {
      const int i0 = chunk * kChunk;
      const int i1 = std::min(g.nx, i0 + kChunk);
      // forward sweep over j for all columns in this chunk
      for (int i = i0; i < i1; ++i) {
        const double kb = k.at(i, 0), kt = k.at(i, 1);
        const double beta = 1.0 + s * (kb + kt);
        cp[i] = (rows > 1) ? (-s * kt) / beta : 0.0;
        out.u2(i, 1) = rhs.u2(i, 1) / beta;
      }
      for (int r = 1; r < rows; ++r) {
        const int j = r + 1;
        for (int i = i0; i < i1; ++i) {
          const double kb = k.at(i, j - 1), kt = k.at(i, j);
          const double sub = -s * kb;
          const double beta = (1.0 + s * (kb + kt)) - sub * cp[(r - 1) * g.nx + i];
          if (r + 1 < rows) cp[r * g.nx + i] = (-s * kt) / beta;
          else cp[r * g.nx + i] = 0.0;
          out.u2(i, j) = (rhs.u2(i, j) - sub * out.u2(i, j - 1)) / beta;
        }
      }
      for (int r = rows - 2; r >= 0; --r) {
        const int j = r + 1;
        for (int i = i0; i < i1; ++i)
          out.u2(i, j) -= cp[r * g.nx + i] * out.u2(i, j + 1);
      }
    });
    solver_counters().line_solves += g.nx;
  }
}

struct KrylovResult {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

/// Conjugate-residual iteration for a symmetric positive (semi)definite
/// operator. Residual 2-norms are non-increasing by construction.
template <class ApplyOp>
KrylovResult conjugate_residual(const MacGrid& g, ApplyOp&& op, const StaggeredField& rhs,
                                double tol, int maxit, StaggeredField& x,
                                std::vector<double>* residual_history = nullptr) {
  if (!(tol > 0.0)) throw std::invalid_argument("conjugate_residual: need tol > 0");
  const double rhs_norm = norm(rhs);
  if (rhs_norm == 0.0) {
    x = StaggeredField(g);
    return {0, 0.0, true};
  }
  StaggeredField r(g), p(g), ar(g), ap(g);
  op(x, ar);
  r = rhs;
  add_scaled(r, -1.0, ar);
  double rnorm = norm(r);
  if (residual_history) residual_history->push_back(rnorm);
  if (rnorm <= tol * rhs_norm) return {0, rnorm / rhs_norm, true};

  p = r;
  op(r, ar);
  ap = ar;
  double rho = inner_product(r, ar);
  for (int it = 1; it <= maxit; ++it) {
    const double den = inner_product(ap, ap);
    if (den == 0.0) break;
    const double alpha = rho / den;
    add_scaled(x, alpha, p);
    add_scaled(r, -alpha, ap);
    rnorm = norm(r);
    if (residual_history) residual_history->push_back(rnorm);
    if (rnorm <= tol * rhs_norm) return {it, rnorm / rhs_norm, true};
    op(r, ar);
    const double rho_new = inner_product(r, ar);
    if (rho == 0.0) break;
    const double beta = rho_new / rho;
    rho = rho_new;
    auto& p1 = p.comp1();
    auto& p2 = p.comp2();
    auto& ap1 = ap.comp1();
    auto& ap2 = ap.comp2();
    const auto& r1 = r.comp1();
    const auto& r2 = r.comp2();
    const auto& ar1 = ar.comp1();
    const auto& ar2 = ar.comp2();
    par::parallel_elems(static_cast<std::int64_t>(p1.size()), [&](std::int64_t f) {
      p1[f] = r1[f] + beta * p1[f];
      ap1[f] = ar1[f] + beta * ap1[f];
    });
    par::parallel_elems(static_cast<std::int64_t>(p2.size()), [&](std::int64_t f) {
      p2[f] = r2[f] + beta * p2[f];
      ap2[f] = ar2[f] + beta * ap2[f];
    });
  }
  return {maxit, rnorm / rhs_norm, rnorm <= tol * rhs_norm};
}

namespace detail {

// out = v + c * A v, fused (one pass for the weighted divergence, one for the
// shifted gradient update). Used only inside the iterative solver.
inline void shifted_apply(const GradDivOperator& op, double c, const StaggeredField& v,
                          CenteredField<double>& w, StaggeredField& out) {
  const MacGrid& g = op.grid();
  const auto& k = op.k();
  const double ivx = 1.0 / g.hx, ivy = 1.0 / g.hy;
  par::parallel_rows(g.ny, [&](int j) {
    for (int i = 0; i < g.nx; ++i) {
      const double l = (i >= 1) ? v.u1(i, j) : 0.0;
      const double r = (i + 1 <= g.nx - 1) ? v.u1(i + 1, j) : 0.0;
      const double b = (j >= 1) ? v.u2(i, j) : 0.0;
      const double t = (j + 1 <= g.ny - 1) ? v.u2(i, j + 1) : 0.0;
      w.at(i, j) = c * k.at(i, j) * ((r - l) * ivx + (t - b) * ivy);
    }
  });
  par::parallel_rows(g.ny, [&](int j) {
    for (int i = 1; i <= g.nx - 1; ++i)
      out.u1(i, j) = v.u1(i, j) + (w.at(i - 1, j) - w.at(i, j)) * ivx;
  });
  par::parallel_rows(g.ny - 1, [&](int r) {
    const int j = r + 1;
    for (int i = 0; i < g.nx; ++i)
      out.u2(i, j) = v.u2(i, j) + (w.at(i, j - 1) - w.at(i, j)) * ivy;
  });
}

}  // namespace detail

/// Solves (I + c A) v = rhs with the conjugate-residual iteration; the shifted
/// operator is symmetric positive definite for c >= 0.
inline StaggeredField cg_solve_shifted(const GradDivOperator& op, double c,
                                       const StaggeredField& rhs, double tol, int maxit,
                                       const StaggeredField* initial_guess = nullptr,
                                       std::vector<double>* residual_history = nullptr) {
  if (!(c >= 0.0)) throw std::invalid_argument("cg_solve_shifted: need c >= 0");
  const MacGrid& g = op.grid();
  require_same_grid(g, rhs.grid(), "cg_solve_shifted");
  CenteredField<double> w(g);
  auto apply_op = [&](const StaggeredField& in, StaggeredField& out) {
    detail::shifted_apply(op, c, in, w, out);
  };
  StaggeredField x = initial_guess ? *initial_guess : StaggeredField(g);
  const KrylovResult res = conjugate_residual(g, apply_op, rhs, tol, maxit, x, residual_history);
  solver_counters().krylov_solves += 1;
  solver_counters().krylov_iterations += res.iterations;
  if (!res.converged)
    throw NonConvergenceError("cg_solve_shifted: no convergence after " +
                                  std::to_string(res.iterations) + " iterations (residual " +
                                  std::to_string(res.rel_residual) + ")",
                              res.iterations, res.rel_residual);
  return x;
}

}  // namespace graddiv
