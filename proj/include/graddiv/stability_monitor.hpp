#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "graddiv/graddiv_operator.hpp"
#include "graddiv/linear_solvers.hpp"
#include "graddiv/mac_grid.hpp"
#include "graddiv/time_schemes.hpp"

namespace graddiv {

/// Uniform values in [-1, 1] per DOF; the engine output is standardized, so a
/// recorded seed reproduces the field on any platform.
inline double uniform_pm1(std::mt19937_64& rng) {
  return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
}

inline StaggeredField random_staggered_field(const MacGrid& g, std::mt19937_64& rng) {
  StaggeredField v(g);
  for (double& x : v.comp1()) x = uniform_pm1(rng);
  for (double& x : v.comp2()) x = uniform_pm1(rng);
  return v;
}

/// The stability operator C of each scheme, applied matrix-free:
///   Theta, ThreeLevelAT:  C = I + (sigma - 1/2) tau A
///   BlockJacobi:          C = I + sigma tau D - (tau/2) A
///   BlockGaussSeidel:     C = I + (tau/2) D
///   AltTriangular:        C = I + (sigma - 1/2) tau A + sigma^2 tau^2 A1 A2
inline StaggeredField apply_C(Scheme scheme, const GradDivOperator& op, double sigma, double tau,
                              const StaggeredField& v) {
  StaggeredField out = v;
  switch (scheme) {
    case Scheme::Theta:
    case Scheme::ThreeLevelAT: {
      StaggeredField av = op.apply(OperatorPart::A, v);
      add_scaled(out, (sigma - 0.5) * tau, av);
      return out;
    }
    case Scheme::BlockJacobi: {
      StaggeredField dv = op.apply(OperatorPart::D, v);
      StaggeredField av = op.apply(OperatorPart::A, v);
      add_scaled(out, sigma * tau, dv);
      add_scaled(out, -0.5 * tau, av);
      return out;
    }
    case Scheme::BlockGaussSeidel: {
      StaggeredField dv = op.apply(OperatorPart::D, v);
      add_scaled(out, 0.5 * tau, dv);
      return out;
    }
    case Scheme::AltTriangular: {
      StaggeredField av = op.apply(OperatorPart::A, v);
      add_scaled(out, (sigma - 0.5) * tau, av);
      StaggeredField a2v = op.apply(OperatorPart::A2, v);
      StaggeredField a1a2v = op.apply(OperatorPart::A1, a2v);
      add_scaled(out, (sigma * tau) * (sigma * tau), a1a2v);
      return out;
    }
  }
  throw std::logic_error("apply_C: unknown scheme");
}

/// R = (I + tau*sigma*A)/2 + sigma^2 tau^2 A1 A2 (three-level functional).
inline StaggeredField apply_R(const GradDivOperator& op, double sigma, double tau,
                              const StaggeredField& v) {
  return op.apply(OperatorPart::R, v, sigma, tau);
}

struct MonitorOptions {
  int dof_cap = 20000;       // above this the C^{-1} budget term is skipped
  double tol = 1e-9;         // pass threshold: lhs - rhs <= tol * (1 + rhs)
  double inner_tol = 1e-10;  // conjugate-residual tolerance for C x = psi
  int inner_maxit = 200000;
};

struct StepCheckResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // lhs - rhs
  bool conclusive = true;
  bool pass = true;
  // recorded pieces
  double a_new_sq = 0.0;
  double a_old_sq = 0.0;
  double c_norm_w_sq = 0.0;  // tau * ||w||_C^2
  double r_norm_w_sq = 0.0;  // tau * ||w||_R^2 (ThreeLevelAT only)
  double rhs_term = 0.0;     // tau * ||psi||_{C^{-1}}^2 (0 when skipped)
};

/// Per-step energy inequality: tau ||w||_C^2 + |v'|_A^2 - |v|_A^2 plus, for
/// the three-level scheme, the R-functional increment, checked against
/// tau ||psi||_{C^{-1}}^2. A three-level step without history (the bootstrap
/// step) is checked as an alternating-triangular step.
inline StepCheckResult check_step_inequality(Scheme scheme, const GradDivOperator& op,
                                             double sigma, double tau,
                                             const StaggeredField& v_old,
                                             const StaggeredField& v_new,
                                             const StaggeredField* v_prev,
                                             const StaggeredField& psi,
                                             const MonitorOptions& opt = {}) {
  const MacGrid& g = op.grid();
  StepCheckResult res;
  const bool three_level = (scheme == Scheme::ThreeLevelAT) && (v_prev != nullptr);
  const Scheme c_scheme =
      (scheme == Scheme::ThreeLevelAT && !three_level) ? Scheme::AltTriangular : scheme;

  StaggeredField w = v_new;
  add_scaled(w, -1.0, v_old);
  const double inv_tau = 1.0 / tau;
  for (double& x : w.comp1()) x *= inv_tau;
  for (double& x : w.comp2()) x *= inv_tau;

  res.a_new_sq = op.quadratic_form(OperatorPart::A, v_new);
  res.a_old_sq = op.quadratic_form(OperatorPart::A, v_old);
  res.c_norm_w_sq = tau * inner_product(apply_C(c_scheme, op, sigma, tau, w), w);
  res.lhs = res.c_norm_w_sq + res.a_new_sq - res.a_old_sq;

  if (scheme == Scheme::ThreeLevelAT) {
    res.r_norm_w_sq = tau * inner_product(apply_R(op, sigma, tau, w), w);
    if (three_level) {
      StaggeredField w_old = v_old;
      add_scaled(w_old, -1.0, *v_prev);
      for (double& x : w_old.comp1()) x *= inv_tau;
      for (double& x : w_old.comp2()) x *= inv_tau;
      const double r_old = tau * inner_product(apply_R(op, sigma, tau, w_old), w_old);
      res.lhs += res.r_norm_w_sq - r_old;
    }
  }

  const double psi_norm = norm(psi);
  if (psi_norm == 0.0) {
    res.rhs = 0.0;
  } else if (g.dof_count() > opt.dof_cap) {
    // budget term too costly; only the homogeneous decay is checkable
    res.conclusive = false;
  } else {
    StaggeredField x(g);
    auto apply_c = [&](const StaggeredField& in, StaggeredField& out) {
      out = apply_C(c_scheme, op, sigma, tau, in);
    };
    const KrylovResult kr =
        conjugate_residual(g, apply_c, psi, opt.inner_tol, opt.inner_maxit, x);
    if (!kr.converged) {
      res.conclusive = false;  // monitor-inconclusive, not a failure
    } else {
      res.rhs_term = tau * inner_product(x, psi);
      res.rhs = res.rhs_term;
    }
  }
  res.residual = res.lhs - res.rhs;
  res.pass = res.conclusive ? (res.residual <= opt.tol * (1.0 + res.rhs)) : true;
  return res;
}

struct LedgerRow {
  int n = 0;
  double t = 0.0;
  double a_seminorm_sq = 0.0;  // |v^n|_A^2
  double c_norm_w_sq = 0.0;    // tau ||w^n||_C^2
  double r_norm_w_sq = 0.0;    // tau ||w^n||_R^2, three-level runs only
  double rhs_budget = 0.0;     // cumulative sum of tau ||psi^k||_{C^{-1}}^2
  int pass = 1;
};

/// Records the discrete energy ledger of a run and checks the per-step
/// inequality behind the scheme's stability estimate.
class StabilityMonitor final : public StepObserver {
 public:
  StabilityMonitor(const GradDivOperator& op, Scheme scheme, double sigma, double tau,
                   MonitorOptions opt = {})
      : op_(&op), scheme_(scheme), sigma_(sigma), tau_(tau), opt_(opt) {}

  void on_step(int n, double t_new, const StaggeredField& v_old, const StaggeredField& v_new,
               const StaggeredField* v_prev, const StaggeredField& psi) override {
    if (rows_.empty()) {
      LedgerRow row0;
      row0.n = n;
      row0.t = t_new - tau_;
      row0.a_seminorm_sq = op_->quadratic_form(OperatorPart::A, v_old);
      rows_.push_back(row0);
      if (scheme_ == Scheme::Theta) {
        const double cn = inner_product(apply_C(scheme_, *op_, sigma_, tau_, v_old), v_old);
        c_norm_v0_sq_ = cn;
        a_v0_sq_ = row0.a_seminorm_sq;
      }
    }
    const StepCheckResult res =
        check_step_inequality(scheme_, *op_, sigma_, tau_, v_old, v_new, v_prev, psi, opt_);
    budget_ += res.rhs_term;
    if (!res.conclusive) ++inconclusive_;
    max_violation_ = std::max(max_violation_, res.residual - opt_.tol * (1.0 + res.rhs));
    LedgerRow row;
    row.n = n + 1;
    row.t = t_new;
    row.a_seminorm_sq = res.a_new_sq;
    row.c_norm_w_sq = res.c_norm_w_sq;
    row.r_norm_w_sq = res.r_norm_w_sq;
    row.rhs_budget = budget_;
    row.pass = res.pass ? 1 : 0;
    rows_.push_back(row);
    if (!res.pass) all_passed_ = false;

    // square-norm bound along Theta trajectories, checked when the budget is
    // fully accounted for
    if (scheme_ == Scheme::Theta && inconclusive_ == 0) {
      const double lhs = inner_product(apply_C(scheme_, *op_, sigma_, tau_, v_new), v_new);
      const double bound = 2.0 * c_norm_v0_sq_ + 2.0 * t_new * (a_v0_sq_ + budget_);
      if (lhs > bound + opt_.tol * (1.0 + bound)) ++square_norm_bound_violations_;
    }
  }

  const std::vector<LedgerRow>& rows() const { return rows_; }
  bool all_passed() const { return all_passed_; }
  double max_violation() const { return max_violation_; }
  int inconclusive_count() const { return inconclusive_; }
  int square_norm_bound_violations() const { return square_norm_bound_violations_; }

  void write_csv(std::ostream& os) const {
    os << "n,t,A_seminorm_sq,C_norm_w_sq,R_norm_w_sq,rhs_budget,pass\n";
    char buf[256];
    for (const LedgerRow& r : rows_) {
      std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.n, r.t,
                    r.a_seminorm_sq, r.c_norm_w_sq, r.r_norm_w_sq, r.rhs_budget, r.pass);
      os << buf;
    }
  }

  void write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("StabilityMonitor: cannot open " + path);
    write_csv(os);
  }

 private:
  const GradDivOperator* op_;
  Scheme scheme_;
  double sigma_;
  double tau_;
  MonitorOptions opt_;
  std::vector<LedgerRow> rows_;
  double budget_ = 0.0;
  double max_violation_ = -1e300;
  bool all_passed_ = true;
  int inconclusive_ = 0;
  int square_norm_bound_violations_ = 0;
  double c_norm_v0_sq_ = 0.0;
  double a_v0_sq_ = 0.0;
};

struct HypothesesReport {
  int trials = 0;
  std::uint64_t seed = 0;
  double max_symmetry_rel = 0.0;        // |(Av,w)-(v,Aw)| / (||v|| ||w|| ||A||_est)
  double min_quadratic_form_rel = 0.0;  // min (Av,v) / (||v||^2 ||A||_est)
  double max_block_bound_rel = 0.0;     // ((Av,v) - 2(Dv,v)) / (||v||^2 ||A||_est)
  double max_split_adjoint_rel = 0.0;   // |(A1 v,w)-(v,A2 w)| / (||v|| ||w|| ||A||_est)

  bool pass(double rel_tol = 1e-12) const {
    return max_symmetry_rel <= rel_tol && min_quadratic_form_rel >= -rel_tol &&
           max_block_bound_rel <= rel_tol && max_split_adjoint_rel <= rel_tol;
  }
};

/// Seeded random check of A = A* >= 0, A <= 2 D and A1* = A2.
inline HypothesesReport verify_operator_hypotheses(const GradDivOperator& op, int trials,
                                                   std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("verify_operator_hypotheses: need trials >= 1");
  const MacGrid& g = op.grid();
  std::mt19937_64 rng(seed);
  HypothesesReport rep;
  rep.trials = trials;
  rep.seed = seed;
  const double scale = std::max(op.norm_bound(), 1e-300);
  rep.min_quadratic_form_rel = 1e300;
  for (int t = 0; t < trials; ++t) {
    const StaggeredField v = random_staggered_field(g, rng);
    const StaggeredField w = random_staggered_field(g, rng);
    const double nv = norm(v), nw = norm(w);
    const StaggeredField av = op.apply(OperatorPart::A, v);
    const StaggeredField aw = op.apply(OperatorPart::A, w);
    rep.max_symmetry_rel =
        std::max(rep.max_symmetry_rel, std::abs(inner_product(av, w) - inner_product(v, aw)) /
                                           (nv * nw * scale));
    const double avv = inner_product(av, v);
    rep.min_quadratic_form_rel = std::min(rep.min_quadratic_form_rel, avv / (nv * nv * scale));
    const double dvv = op.quadratic_form(OperatorPart::D, v);
    rep.max_block_bound_rel =
        std::max(rep.max_block_bound_rel, (avv - 2.0 * dvv) / (nv * nv * scale));
    const double a1vw = inner_product(op.apply(OperatorPart::A1, v), w);
    const double va2w = inner_product(v, op.apply(OperatorPart::A2, w));
    rep.max_split_adjoint_rel =
        std::max(rep.max_split_adjoint_rel, std::abs(a1vw - va2w) / (nv * nw * scale));
  }
  return rep;
}

}  // namespace graddiv
