#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "graddiv/graddiv_operator.hpp"
#include "graddiv/linear_solvers.hpp"
#include "graddiv/mac_grid.hpp"

namespace graddiv {

enum class Scheme { Theta, BlockJacobi, BlockGaussSeidel, AltTriangular, ThreeLevelAT };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Theta: return "theta";
    case Scheme::BlockJacobi: return "jacobi";
    case Scheme::BlockGaussSeidel: return "gauss_seidel";
    case Scheme::AltTriangular: return "alt_triangular";
    case Scheme::ThreeLevelAT: return "three_level";
  }
  return "?";
}

struct SchemeConfig {
  Scheme scheme = Scheme::Theta;
  double sigma = 0.5;
  double tau = 0.1;
  double horizon = 1.0;  // T; must be an integer multiple of tau
  bool monitor = false;
  double solver_tol = 1e-10;  // Theta only
  int solver_maxit = 500000;

  int num_steps() const {
    if (!(tau > 0.0)) throw std::invalid_argument("SchemeConfig: need tau > 0");
    if (!(horizon >= 0.0)) throw std::invalid_argument("SchemeConfig: need T >= 0");
    const auto n = static_cast<long long>(std::llround(horizon / tau));
    if (std::abs(n * tau - horizon) > 1e-12 * std::max(horizon, tau))
      throw std::invalid_argument("SchemeConfig: T must be an integer multiple of tau");
    return static_cast<int>(n);
  }

  // The stability thresholds are sufficient conditions, so running below
  // them is allowed and only warned about.
  std::vector<std::string> validate() const {
    (void)num_steps();
    if (!(solver_tol > 0.0)) throw std::invalid_argument("SchemeConfig: need solver_tol > 0");
    if (solver_maxit < 1) throw std::invalid_argument("SchemeConfig: need solver_maxit >= 1");
    std::vector<std::string> warnings;
    constexpr double slack = 1e-12;
    switch (scheme) {
      case Scheme::Theta:
      case Scheme::AltTriangular:
      case Scheme::ThreeLevelAT:
        if (sigma < 0.5 - slack)
          warnings.push_back(std::string(scheme_name(scheme)) +
                             ": sigma < 1/2, stability is not guaranteed");
        break;
      case Scheme::BlockJacobi:
        if (sigma < 1.0 - slack)
          warnings.push_back("jacobi: sigma < d/2 = 1, stability is not guaranteed");
        break;
      case Scheme::BlockGaussSeidel:
        break;  // no weight; unconditionally stable
    }
    return warnings;
  }
};

struct TimeState {
  int n = 0;
  double t = 0.0;
  StaggeredField v_curr;
  std::optional<StaggeredField> v_prev;  // present for ThreeLevelAT once bootstrapped
};

class StepFailure : public std::runtime_error {
 public:
  StepFailure(int step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step(step) {}
  int step;
};

namespace detail {

// (I + tau*sigma*A1) y = r: component 1 lines first, then component 2 with
// the fresh component-1 coupling moved to the right-hand side.
inline void solve_lower_triangular_factor(const GradDivOperator& op, double sigma_tau,
                                          const StaggeredField& r, StaggeredField& y) {
  const MacGrid& g = op.grid();
  solve_shifted_diag_block(op, 1, 0.5 * sigma_tau, r, y);
  StaggeredField coupling = op.apply(OperatorPart::L, y);  // reads y comp1 only
  StaggeredField rhs2(g);
  const auto& r2 = r.comp2();
  const auto& c2 = coupling.comp2();
  auto& b2 = rhs2.comp2();
  for (std::size_t f = 0; f < b2.size(); ++f) b2[f] = r2[f] - sigma_tau * c2[f];
  solve_shifted_diag_block(op, 2, 0.5 * sigma_tau, rhs2, y);
}

// (I + tau*sigma*A2) z = y: mirrored order.
inline void solve_upper_triangular_factor(const GradDivOperator& op, double sigma_tau,
                                          const StaggeredField& y, StaggeredField& z) {
  const MacGrid& g = op.grid();
  solve_shifted_diag_block(op, 2, 0.5 * sigma_tau, y, z);
  StaggeredField coupling = op.apply(OperatorPart::U, z);  // reads z comp2 only
  StaggeredField rhs1(g);
  const auto& y1 = y.comp1();
  const auto& c1 = coupling.comp1();
  auto& b1 = rhs1.comp1();
  for (std::size_t f = 0; f < b1.size(); ++f) b1[f] = y1[f] - sigma_tau * c1[f];
  solve_shifted_diag_block(op, 1, 0.5 * sigma_tau, rhs1, z);
}

// v_new = v + B^{-1} r with B = (I + tau*sigma*A1)(I + tau*sigma*A2).
inline StaggeredField triangular_update(const GradDivOperator& op, double sigma_tau,
                                        const StaggeredField& v, const StaggeredField& r) {
  const MacGrid& g = op.grid();
  StaggeredField y(g), z(g);
  solve_lower_triangular_factor(op, sigma_tau, r, y);
  solve_upper_triangular_factor(op, sigma_tau, y, z);
  StaggeredField out = v;
  add_scaled(out, 1.0, z);
  return out;
}

}  // namespace detail

/// (I + sigma*tau*A) v' = (I - (1-sigma)*tau*A) v + tau*psi, coupled solve.
inline StaggeredField step_theta(const GradDivOperator& op, const SchemeConfig& cfg,
                                 const StaggeredField& v, const StaggeredField& psi) {
  const MacGrid& g = op.grid();
  StaggeredField av = op.apply(OperatorPart::A, v);
  StaggeredField rhs(g);
  const double c_expl = (1.0 - cfg.sigma) * cfg.tau;
  for (int part = 1; part <= 2; ++part) {
    const auto& vv = part == 1 ? v.comp1() : v.comp2();
    const auto& pv = part == 1 ? psi.comp1() : psi.comp2();
    const auto& avv = part == 1 ? av.comp1() : av.comp2();
    auto& bb = part == 1 ? rhs.comp1() : rhs.comp2();
    for (std::size_t f = 0; f < bb.size(); ++f)
      bb[f] = vv[f] + cfg.tau * pv[f] - c_expl * avv[f];
  }
  return cg_solve_shifted(op, cfg.sigma * cfg.tau, rhs, cfg.solver_tol, cfg.solver_maxit, &v);
}

/// (I + sigma*tau*D) v' = (I + sigma*tau*D - tau*A) v + tau*psi; the two
/// component solves are independent line solves.
inline StaggeredField step_block_jacobi(const GradDivOperator& op, const SchemeConfig& cfg,
                                        const StaggeredField& v, const StaggeredField& psi) {
  const MacGrid& g = op.grid();
  StaggeredField dv = op.apply(OperatorPart::D, v);
  StaggeredField av = op.apply(OperatorPart::A, v);
  const double st = cfg.sigma * cfg.tau;
  StaggeredField rhs(g);
  for (int part = 1; part <= 2; ++part) {
    const auto& vv = part == 1 ? v.comp1() : v.comp2();
    const auto& pv = part == 1 ? psi.comp1() : psi.comp2();
    const auto& dvv = part == 1 ? dv.comp1() : dv.comp2();
    const auto& avv = part == 1 ? av.comp1() : av.comp2();
    auto& bb = part == 1 ? rhs.comp1() : rhs.comp2();
    for (std::size_t f = 0; f < bb.size(); ++f)
      bb[f] = vv[f] + st * dvv[f] - cfg.tau * avv[f] + cfg.tau * pv[f];
  }
  StaggeredField out(g);
  solve_shifted_diag_block(op, 1, st, rhs, out);
  solve_shifted_diag_block(op, 2, st, rhs, out);
  return out;
}

/// (I + tau*(L+D)) v' = (I - tau*U) v + tau*psi; component 1 solved first,
/// component 2 uses the freshly computed component 1.
inline StaggeredField step_block_gauss_seidel(const GradDivOperator& op, const SchemeConfig& cfg,
                                              const StaggeredField& v, const StaggeredField& psi) {
  const MacGrid& g = op.grid();
  StaggeredField uv = op.apply(OperatorPart::U, v);  // comp1 = A12 v2
  StaggeredField rhs(g);
  {
    const auto& vv = v.comp1();
    const auto& pv = psi.comp1();
    const auto& cv = uv.comp1();
    auto& bb = rhs.comp1();
    for (std::size_t f = 0; f < bb.size(); ++f)
      bb[f] = vv[f] - cfg.tau * cv[f] + cfg.tau * pv[f];
  }
  StaggeredField out(g);
  solve_shifted_diag_block(op, 1, cfg.tau, rhs, out);
  StaggeredField lv = op.apply(OperatorPart::L, out);  // comp2 = A21 v1'
  {
    const auto& vv = v.comp2();
    const auto& pv = psi.comp2();
    const auto& cv = lv.comp2();
    auto& bb = rhs.comp2();
    for (std::size_t f = 0; f < bb.size(); ++f)
      bb[f] = vv[f] - cfg.tau * cv[f] + cfg.tau * pv[f];
  }
  solve_shifted_diag_block(op, 2, cfg.tau, rhs, out);
  return out;
}

/// B (v' - v)/tau + A v = psi with B = (I + tau*sigma*A1)(I + tau*sigma*A2).
inline StaggeredField step_alt_triangular(const GradDivOperator& op, const SchemeConfig& cfg,
                                          const StaggeredField& v, const StaggeredField& psi) {
  const MacGrid& g = op.grid();
  StaggeredField av = op.apply(OperatorPart::A, v);
  StaggeredField r(g);
  for (int part = 1; part <= 2; ++part) {
    const auto& pv = part == 1 ? psi.comp1() : psi.comp2();
    const auto& avv = part == 1 ? av.comp1() : av.comp2();
    auto& rr = part == 1 ? r.comp1() : r.comp2();
    for (std::size_t f = 0; f < rr.size(); ++f) rr[f] = cfg.tau * (pv[f] - avv[f]);
  }
  return detail::triangular_update(op, cfg.sigma * cfg.tau, v, r);
}

/// Three-level variant: the factored update is corrected by the history term
/// sigma^2 tau^2 A1 A2 (v - v_prev).
inline StaggeredField step_three_level_at(const GradDivOperator& op, const SchemeConfig& cfg,
                                          const StaggeredField& v, const StaggeredField& v_prev,
                                          const StaggeredField& psi) {
  const MacGrid& g = op.grid();
  require_same_grid(g, v_prev.grid(), "step_three_level_at");
  StaggeredField diff = v;
  add_scaled(diff, -1.0, v_prev);
  StaggeredField a2d = op.apply(OperatorPart::A2, diff);
  StaggeredField corr = op.apply(OperatorPart::A1, a2d);
  StaggeredField av = op.apply(OperatorPart::A, v);
  const double st2 = (cfg.sigma * cfg.tau) * (cfg.sigma * cfg.tau);
  StaggeredField r(g);
  for (int part = 1; part <= 2; ++part) {
    const auto& pv = part == 1 ? psi.comp1() : psi.comp2();
    const auto& avv = part == 1 ? av.comp1() : av.comp2();
    const auto& cc = part == 1 ? corr.comp1() : corr.comp2();
    auto& rr = part == 1 ? r.comp1() : r.comp2();
    for (std::size_t f = 0; f < rr.size(); ++f)
      rr[f] = cfg.tau * pv[f] - cfg.tau * avv[f] + st2 * cc[f];
  }
  return detail::triangular_update(op, cfg.sigma * cfg.tau, v, r);
}

using SourceFn = std::function<StaggeredField(double)>;

/// Observer hook invoked after every accepted step.
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void on_step(int n, double t_new, const StaggeredField& v_old,
                       const StaggeredField& v_new, const StaggeredField* v_prev,
                       const StaggeredField& psi) = 0;
};

/// Runs n = 0..N-1 steps of the configured scheme. The source is sampled at
/// sigma*t^{n+1} + (1-sigma)*t^n, except for Gauss-Seidel which is sampled at
/// t^{n+1}. ThreeLevelAT bootstraps with one alternating-triangular step at
/// the same sigma and uses the three-level formula from n = 1 on.
inline StaggeredField run_time_loop(const GradDivOperator& op, const SchemeConfig& cfg,
                                    const SourceFn& source, const StaggeredField& v0,
                                    StepObserver* observer = nullptr) {
  cfg.validate();
  require_same_grid(op.grid(), v0.grid(), "run_time_loop");
  const int n_steps = cfg.num_steps();
  TimeState state;
  state.v_curr = v0;
  for (int n = 0; n < n_steps; ++n) {
    const double t_old = n * cfg.tau;
    const double t_new = (n + 1) * cfg.tau;
    const double sample_t = (cfg.scheme == Scheme::BlockGaussSeidel)
                                ? t_new
                                : cfg.sigma * t_new + (1.0 - cfg.sigma) * t_old;
    StaggeredField v_new;
    StaggeredField psi;
    try {
      psi = source(sample_t);
      switch (cfg.scheme) {
        case Scheme::Theta: v_new = step_theta(op, cfg, state.v_curr, psi); break;
        case Scheme::BlockJacobi: v_new = step_block_jacobi(op, cfg, state.v_curr, psi); break;
        case Scheme::BlockGaussSeidel:
          v_new = step_block_gauss_seidel(op, cfg, state.v_curr, psi);
          break;
        case Scheme::AltTriangular:
          v_new = step_alt_triangular(op, cfg, state.v_curr, psi);
          break;
        case Scheme::ThreeLevelAT:
          v_new = state.v_prev ? step_three_level_at(op, cfg, state.v_curr, *state.v_prev, psi)
                               : step_alt_triangular(op, cfg, state.v_curr, psi);
          break;
      }
    } catch (const std::exception& e) {
      throw StepFailure(n, e.what());
    }
    if (observer)
      observer->on_step(n, t_new, state.v_curr, v_new,
                        state.v_prev ? &*state.v_prev : nullptr, psi);
    if (cfg.scheme == Scheme::ThreeLevelAT) state.v_prev = std::move(state.v_curr);
    state.v_curr = std::move(v_new);
    state.n = n + 1;
    state.t = t_new;
  }
  return state.v_curr;
}

}  // namespace graddiv
