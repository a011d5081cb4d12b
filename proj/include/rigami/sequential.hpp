#pragma once

// Folding driven by controlled creases: each step prescribes the increments
// of a crease subset through Lagrange multipliers, then Newton iterations
// with zero increments restore loop closure. Stages chain steps into a
// folding sequence.

#include <rigami/core.hpp>
#include <rigami/kinematics.hpp>
#include <rigami/numerics.hpp>
#include <rigami/pattern.hpp>

#include <json.hpp>

#include <cstdio>
#include <limits>
#include <set>
#include <string>
#include <vector>

namespace rigami {

struct FoldDirective {
  std::vector<int> controlled;  ///< crease ids
  std::vector<double> f;        ///< increment per controlled crease (radians)
};

struct NewtonSettings {
  double tolerance = 1e-9;  ///< on ||r|| / (3 N_Vi)
  int max_iter = 50;
  SvdTolerance svd{};
  bool polish = true;  ///< continue past the tolerance while Newton steps shrink
  double refine = 1e-4;  ///< polish judges residuals down to refine * tolerance
  bool accelerate = true;  ///< double the step when Newton halves toward a double root
};

struct StepOutcome {
  FoldState rho;
  double residual = 0.0;
  int iterations = 0;
};

namespace detail {

inline void check_directive(const Mechanism& m, const FoldDirective& d) {
  if (d.controlled.size() != d.f.size()) {
    throw DomainError("directive lists " + std::to_string(d.controlled.size()) +
                      " controlled creases but " + std::to_string(d.f.size()) + " increments");
  }
  std::set<int> seen;
  for (std::size_t j = 0; j < d.controlled.size(); ++j) {
    const int c = d.controlled[j];
    if (c < 0 || c >= m.num_creases()) throw DomainError("controlled crease " + std::to_string(c) + " out of range");
    if (!seen.insert(c).second) throw DomainError("crease " + std::to_string(c) + " controlled twice");
    if (!std::isfinite(d.f[j])) throw DomainError("non-finite increment for crease " + std::to_string(c));
  }
}

// Solves [[C^T C, A], [A^T, 0]] {drho; lambda} = {-C^T r; f} in the
// minimum-norm sense and returns drho.
inline VecX bordered_increment(const GlobalConstraint& g, const std::vector<int>& controlled,
                               const VecX& f, SvdTolerance tol) {
  const Eigen::Index n = g.C.cols();
  const auto m = static_cast<Eigen::Index>(controlled.size());
  MatX K = MatX::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = g.C.transpose() * g.C;
  for (Eigen::Index j = 0; j < m; ++j) {
    K(controlled[static_cast<std::size_t>(j)], n + j) = 1.0;
    K(n + j, controlled[static_cast<std::size_t>(j)]) = 1.0;
  }
  VecX rhs(n + m);
  rhs.head(n) = -g.C.transpose() * g.r;
  rhs.tail(m) = f;
  return min_norm_solve(K, rhs, tol).head(n);
}

}  // namespace detail

namespace detail {

// Minimum-norm correction -C_free^+ r with the held columns removed. This is
// the f = 0 solution of the bordered system, computed without forming C^T C.
inline VecX held_correction(const GlobalConstraint& g, const std::vector<int>& held, SvdTolerance tol) {
  if (held.empty()) return -min_norm_solve(g.C, g.r, tol);
  MatX C = g.C;
  for (int h : held) C.col(h).setZero();
  return -min_norm_solve(C, g.r, tol);
}

inline StepOutcome iterate_corrections(const Mechanism& m, FoldState rho, const std::vector<int>& held,
                                       const NewtonSettings& s, const char* what) {
  m.check_size(rho);
  StepOutcome out;
  double res = m.residual_measure(rho);
  // Once converged the iteration continues (polish) and returns the best
  // state seen. Above `floor` Newton may still wander near bifurcations such
  // as the flat state, so steps are taken while the residual is judged. Below
  // it, near singular (flat-folded) configurations, the residual is quadratic
  // in the distance to the manifold and says little about the angles, so
  // steps are taken while they shrink. Newton halves its distance to a double
  // root; when consecutive steps show that ratio a doubled step lands on it.
  // A step that reverses a doubled one is rounding noise amplified by the
  // near-singular Jacobian at the root, so the loop ends there.
  const double floor = s.refine * s.tolerance;
  bool converged = res < s.tolerance;
  FoldState best = rho;
  double best_res = res;
  VecX prev, jumped;
  double last = std::numeric_limits<double>::infinity();
  for (;;) {
    if (converged && !s.polish) break;
    if (out.iterations >= s.max_iter) {
      if (converged) break;
      throw SolverError(std::string(what) + " did not converge in " + std::to_string(s.max_iter) +
                        " iterations (residual " + std::to_string(res) + ")");
    }
    const bool settled = converged && res <= floor;
    const VecX step = held_correction(m.assemble(rho), held, s.svd);
    const double size = step.cwiseAbs().maxCoeff();
    if (settled && (!(size < 0.75 * last) || size < 1e-15)) break;
    if (settled && jumped.size() == step.size() && step.dot(jumped) < 0.0) break;
    bool doubled = s.accelerate && prev.size() == step.size() && (step - 0.5 * prev).norm() < 0.1 * step.norm();
    FoldState trial = rho + step;
    double next = m.residual_measure(trial);
    if (doubled) {
      FoldState jump = rho + 2.0 * step;
      const double landed = m.residual_measure(jump);
      if (landed <= next) {
        trial = std::move(jump);
        next = landed;
      } else {
        doubled = false;
      }
    }
    if (!std::isfinite(next)) {
      if (converged) break;
      throw SolverError(std::string(what) + " diverged");
    }
    if (settled && !(next < s.tolerance)) break;
    prev = doubled ? VecX() : step;
    jumped = doubled ? step : VecX();
    rho = std::move(trial);
    res = next;
    last = size;
    ++out.iterations;
    converged = converged || res < s.tolerance;
    if (converged && (res <= floor || res < best_res)) {
      best = rho;
      best_res = res;
    }
  }
  if (converged) {
    rho = std::move(best);
    res = best_res;
  }
  out.rho = std::move(rho);
  out.residual = res;
  return out;
}

}  // namespace detail

/// Newton iterations with every controlled crease held fixed (f = 0) until
/// ||r|| / (3 N_Vi) < tolerance.
inline StepOutcome newton_correct(const Mechanism& m, FoldState rho, const std::vector<int>& held,
                                  const NewtonSettings& s = {}) {
  return detail::iterate_corrections(m, std::move(rho), held, s, "Newton correction");
}

/// Pure residual elimination drho = -C^+ r until ||r|| / (3 N_Vi) < tolerance.
inline StepOutcome project_to_manifold(const Mechanism& m, FoldState rho, const NewtonSettings& s = {}) {
  return detail::iterate_corrections(m, std::move(rho), {}, s, "residual elimination");
}

/// One folding step: controlled creases move by exactly f, the rest follow.
inline StepOutcome controlled_step(const Mechanism& m, const FoldState& rho, const FoldDirective& d,
                                   const NewtonSettings& s = {}) {
  m.check_size(rho);
  detail::check_directive(m, d);
  const VecX f = Eigen::Map<const VecX>(d.f.data(), static_cast<Eigen::Index>(d.f.size()));
  const GlobalConstraint g = m.assemble(rho);
  FoldState next = rho + detail::bordered_increment(g, d.controlled, f, s.svd);
  // The bordered solve meets A^T drho = f only to rounding; pin it.
  for (std::size_t j = 0; j < d.controlled.size(); ++j) {
    next[d.controlled[j]] = rho[d.controlled[j]] + d.f[j];
  }
  return newton_correct(m, std::move(next), d.controlled, s);
}

/// Baseline single-shot projection: drho = (I - C^+ C) drho0 - C^+ r.
inline FoldState tachi_projection_step(const Mechanism& m, const FoldState& rho, const VecX& drho0,
                                       SvdTolerance tol = {}) {
  m.check_size(rho);
  if (drho0.size() != rho.size()) throw DomainError("projection step: increment size mismatch");
  const GlobalConstraint g = m.assemble(rho);
  const MatX Cp = pseudoinverse(g.C, tol);
  return rho + drho0 - Cp * (g.C * drho0) - Cp * g.r;
}

/// +magnitude on valleys, -magnitude on mountains, 0 on unassigned creases,
/// then projected onto the constraint manifold. Plain Newton steps are used:
/// near flat the seed can sit by a double root at the flat state itself, and
/// an accelerated step would land there and lose the assignment.
inline FoldState flat_state_seed(const Mechanism& m, double magnitude, NewtonSettings s = {}) {
  s.accelerate = false;
  FoldState rho(m.num_creases());
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    rho[i] = assignment_sign(m.pattern().creases()[static_cast<std::size_t>(i)].assignment) * magnitude;
  }
  return project_to_manifold(m, std::move(rho), s).rho;
}

// ---------------------------------------------------------------------------
// Schedules

struct ControlledTarget {
  int crease = 0;
  double target = 0.0;
};

struct FoldStage {
  std::vector<ControlledTarget> controlled;
  std::vector<int> hold;
  int steps = 0;  ///< 0 selects increments of at most 5 degrees
};

struct FoldSchedule {
  std::vector<FoldStage> stages;
};

struct FoldTrajectory {
  std::vector<FoldState> states;     ///< seed first, then one per accepted step
  std::vector<double> residuals;     ///< ||r|| / (3 N_Vi) per state
  std::vector<int> iterations;       ///< Newton iterations per state (0 for the seed)
  std::vector<int> stage;            ///< stage index per state (-1 for the seed)
};

/// Ceil(|largest target change| / 5 deg), at least one step.
inline int default_steps(const FoldStage& st, const FoldState& start) {
  double span = 0.0;
  for (const auto& c : st.controlled) span = std::max(span, std::abs(c.target - start[c.crease]));
  return std::max(1, static_cast<int>(std::ceil(span / deg2rad(5.0) - 1e-9)));
}

inline FoldTrajectory run_schedule(const Mechanism& m, const FoldState& seed, const FoldSchedule& sched,
                                   const NewtonSettings& s = {}) {
  m.check_size(seed);
  FoldTrajectory traj;
  traj.states.push_back(seed);
  traj.residuals.push_back(m.residual_measure(seed));
  traj.iterations.push_back(0);
  traj.stage.push_back(-1);

  FoldState rho = seed;
  for (std::size_t si = 0; si < sched.stages.size(); ++si) {
    const FoldStage& st = sched.stages[si];
    const int steps = st.steps > 0 ? st.steps : default_steps(st, rho);
    FoldDirective d;
    std::vector<double> start, target;
    for (const auto& c : st.controlled) {
      if (!std::isfinite(c.target)) throw DomainError("stage " + std::to_string(si) + ": non-finite target");
      if (c.crease < 0 || c.crease >= m.num_creases()) {
        throw DomainError("stage " + std::to_string(si) + ": crease " + std::to_string(c.crease) + " out of range");
      }
      d.controlled.push_back(c.crease);
      start.push_back(rho[c.crease]);
      target.push_back(c.target);
    }
    for (int h : st.hold) d.controlled.push_back(h);
    d.f.assign(d.controlled.size(), 0.0);

    for (int step = 0; step < steps; ++step) {
      const double t = static_cast<double>(step + 1) / steps;
      for (std::size_t j = 0; j < start.size(); ++j) {
        const double goal = step + 1 == steps ? target[j] : start[j] + t * (target[j] - start[j]);
        d.f[j] = goal - rho[d.controlled[j]];
      }
      StepOutcome out;
      try {
        out = controlled_step(m, rho, d, s);
      } catch (const Error& e) {
        const std::string where = "stage " + std::to_string(si) + ", step " + std::to_string(step + 1) + ": ";
        if (e.kind() == ErrorKind::solver) throw SolverError(where + e.what());
        throw DomainError(where + e.what());
      }
      rho = out.rho;
      traj.states.push_back(rho);
      traj.residuals.push_back(out.residual);
      traj.iterations.push_back(out.iterations);
      traj.stage.push_back(static_cast<int>(si));
    }
    for (std::size_t j = 0; j < target.size(); ++j) {
      if (std::abs(rho[d.controlled[j]] - target[j]) > 1e-9) {
        throw SolverError("stage " + std::to_string(si) + " missed the target of crease " +
                          std::to_string(d.controlled[j]));
      }
    }
  }
  return traj;
}

// Schedule JSON:
//   { "stages": [ { "controlled": [ {"crease": id, "target": radians} ],
//                   "hold": [id, ...], "steps": n } ] }
// "steps" is optional; a missing or zero count means increments of at most
// 5 degrees, resolved against the angles the stage starts from.

inline FoldSchedule schedule_from_json(const nlohmann::json& doc, bool degrees = false) {
  try {
    FoldSchedule sched;
    for (const auto& js : detail::require(doc, "stages")) {
      FoldStage st;

      for (const auto& jc : detail::require(js, "controlled")) {
        double t = detail::require(jc, "target").get<double>();
        st.controlled.push_back({detail::as_index(detail::require(jc, "crease"), "schedule"),
                                 degrees ? deg2rad(t) : t});
      }
      if (js.contains("hold")) {
        for (const auto& h : js.at("hold")) st.hold.push_back(detail::as_index(h, "hold set"));
      }
      if (js.contains("steps") && !js.at("steps").is_null()) {
        st.steps = detail::as_index(js.at("steps"), "steps");
        if (st.steps < 1) throw DomainError("stage step count must be at least 1");
      }
      sched.stages.push_back(std::move(st));
    }
    return sched;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("invalid schedule document: ") + e.what());
  }
}

inline FoldSchedule parse_schedule(std::string_view text, bool degrees = false) {
  return schedule_from_json(detail::parse_json(text), degrees);
}

/// Replaces unspecified (zero) step counts using the targets of each stage and
/// the angles it starts from, assuming earlier stages reach their targets.
inline FoldSchedule resolve_steps(FoldSchedule sched, const FoldState& seed) {
  FoldState rho = seed;
  for (auto& st : sched.stages) {
    if (st.steps <= 0) st.steps = default_steps(st, rho);
    for (const auto& c : st.controlled) rho[c.crease] = c.target;
  }
  return sched;
}

inline nlohmann::json schedule_to_json(const FoldSchedule& sched) {
  nlohmann::json doc;
  doc["stages"] = nlohmann::json::array();
  for (const auto& st : sched.stages) {
    nlohmann::json js;
    js["controlled"] = nlohmann::json::array();
    for (const auto& c : st.controlled) js["controlled"].push_back({{"crease", c.crease}, {"target", c.target}});
    js["hold"] = st.hold;
    js["steps"] = st.steps;
    doc["stages"].push_back(std::move(js));
  }
  return doc;
}

}  // namespace rigami
