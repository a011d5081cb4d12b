#pragma once

// Relaxation of crease-mounted rotational springs on the rigid-origami
// constraint manifold.

#include <rigami/core.hpp>
#include <rigami/kinematics.hpp>
#include <rigami/numerics.hpp>
#include <rigami/pattern.hpp>
#include <rigami/sequential.hpp>

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rigami {

struct SpringConfig {
  VecX k;     ///< stiffness per crease (moment per radian)
  VecX rest;  ///< rest angle per crease (radians)

  /// k_i = k_per_length * L_i.
  static SpringConfig from_length(const CreasePattern& p, double k_per_length, VecX rest) {
    if (!(k_per_length > 0.0)) throw DomainError("stiffness per length must be positive");
    if (rest.size() != static_cast<Eigen::Index>(p.num_creases())) {
      throw DomainError("rest angle count does not match crease count");
    }
    SpringConfig cfg{VecX(rest.size()), std::move(rest)};
    for (Eigen::Index i = 0; i < cfg.k.size(); ++i) cfg.k[i] = k_per_length * p.crease_length(static_cast<int>(i));
    cfg.validate();
    return cfg;
  }

  void validate() const {
    if (k.size() != rest.size()) throw DomainError("stiffness and rest-angle vectors differ in size");
    for (Eigen::Index i = 0; i < k.size(); ++i) {
      if (!(k[i] > 0.0) || !std::isfinite(k[i])) throw DomainError("stiffness of crease " + std::to_string(i) + " must be positive");
      if (!std::isfinite(rest[i])) throw DomainError("non-finite rest angle for crease " + std::to_string(i));
    }
  }

  void check_size(const FoldState& rho) const {
    if (rho.size() != k.size()) throw DomainError("spring configuration does not match the fold state size");
  }
};

inline double spring_energy(const SpringConfig& cfg, const FoldState& rho) {
  cfg.check_size(rho);
  return 0.5 * (cfg.k.array() * (rho - cfg.rest).array().square()).sum();
}

/// d_i = k_i (rho_i - rest_i)
inline VecX spring_gradient(const SpringConfig& cfg, const FoldState& rho) {
  cfg.check_size(rho);
  return (cfg.k.array() * (rho - cfg.rest).array()).matrix();
}

enum class KktMethod {
  automatic,  ///< scaled null-space projection, valid for any rank of C
  bordered,   ///< pseudoinverse of [[H, C^T], [C, 0]]
  explicit_inverse,  ///< closed form through (C H^-1 C^T)^-1, needs full row rank
  projected,  ///< y = H^(1/2) drho minimizes 1/2|y|^2 + d^T H^(-1/2) y on B y = -r, B = C H^(-1/2)
};

/// Minimizer of 1/2 drho^T H drho + d^T drho subject to C drho + r = 0.
inline VecX kkt_step(const GlobalConstraint& g, const SpringConfig& cfg, KktMethod method = KktMethod::automatic,
                     SvdTolerance tol = {}) {
  const VecX d = spring_gradient(cfg, g.rho);
  const Eigen::Index n = g.C.cols();
  const Eigen::Index m = g.C.rows();
  if (method == KktMethod::automatic) method = KktMethod::projected;
  if (method == KktMethod::projected) {
    const VecX s = cfg.k.cwiseSqrt().cwiseInverse();
    const MatX B = g.C * s.asDiagonal();
    const MatX Bp = pseudoinverse(B, tol);
    const VecX sd = s.cwiseProduct(d);
    return -s.cwiseProduct(sd - Bp * (B * sd) + Bp * g.r);
  }
  if (method == KktMethod::explicit_inverse) {
    const VecX hinv = cfg.k.cwiseInverse();
    const MatX HiCt = hinv.asDiagonal() * g.C.transpose();
    const MatX S = g.C * HiCt;
    const MatX G = HiCt * S.ldlt().solve(MatX::Identity(m, m));
    const VecX hd = hinv.cwiseProduct(d);
    return -(hd - G * (g.C * hd)) - G * g.r;
  }
  MatX K = MatX::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = cfg.k.asDiagonal();
  K.topRightCorner(n, m) = g.C.transpose();
  K.bottomLeftCorner(m, n) = g.C;
  VecX rhs(n + m);
  rhs << d, g.r;
  return -min_norm_solve(K, rhs, tol).head(n);
}

/// Uniform stiffness k0: -(1/k0)(I - C^+ C) d - C^+ r.
inline VecX projection_step_uniform(const GlobalConstraint& g, double k0, const VecX& d, SvdTolerance tol = {}) {
  if (!(k0 > 0.0)) throw DomainError("uniform stiffness must be positive");
  const MatX Cp = pseudoinverse(g.C, tol);
  return -(d - Cp * (g.C * d)) / k0 - Cp * g.r;
}

/// ||(I - C^+ C) d||: gradient component tangent to the constraint manifold.
inline double projected_gradient_norm(const GlobalConstraint& g, const VecX& d, SvdTolerance tol = {}) {
  const MatX Cp = pseudoinverse(g.C, tol);
  return (d - Cp * (g.C * d)).norm();
}

struct RelaxSettings {
  double c0 = kPi / 36.0;
  double eps1 = 1e-6;  ///< stop once the step factor falls to this value
  double eps2 = 1e-9;  ///< residual tolerance of the Newton cleanup
  std::optional<int> characteristic;
  int max_steps = 20000;
  int newton_max_iter = 50;
  KktMethod method = KktMethod::automatic;
  SvdTolerance svd{};

  void validate() const {
    if (!(c0 > 0.0) || c0 > kPi / 36.0 + 1e-15) throw DomainError("step factor c0 must lie in (0, pi/36]");
    if (!(eps1 > 0.0) || !(eps2 > 0.0)) throw DomainError("tolerances must be positive");
    if (max_steps < 0) throw DomainError("max_steps must be non-negative");
  }
};

struct RelaxResult {
  std::vector<FoldState> states;     ///< compatible states, the start first
  std::vector<double> energies;      ///< energy of each state
  std::vector<double> step_factors;  ///< c used for each step
  std::vector<int> iterations;       ///< Newton cleanup iterations per step
  FoldState final_state;
  int characteristic = 0;
  bool converged = false;            ///< false when the step budget ran out
  double projected_gradient = 0.0;   ///< at the final state
  int halvings = 0;
};

/// Largest |d_i| at rho; ties go to the lowest index.
inline int default_characteristic(const SpringConfig& cfg, const FoldState& rho) {
  if (rho.size() == 0) return 0;
  Eigen::Index idx = 0;
  spring_gradient(cfg, rho).cwiseAbs().maxCoeff(&idx);
  return static_cast<int>(idx);
}

inline RelaxResult relax(const Mechanism& m, const SpringConfig& cfg, const RelaxSettings& st, const FoldState& rho0) {
  st.validate();
  cfg.validate();
  m.check_size(rho0);
  cfg.check_size(rho0);
  // Cleanup stops at eps2. Polishing further near the flat state moves the
  // iterate along nearly singular directions and changes the descent branch,
  // so only the recorded copy of each state is polished.
  const NewtonSettings ns{st.eps2, st.newton_max_iter, st.svd, true, 1.0};
  const NewtonSettings fine{st.eps2, st.newton_max_iter, st.svd};
  RelaxResult res;
  auto record = [&](const FoldState& rho) {
    FoldState kept = project_to_manifold(m, rho, fine).rho;
    res.energies.push_back(spring_energy(cfg, kept));
    res.states.push_back(std::move(kept));
  };

  FoldState rho = project_to_manifold(m, rho0, ns).rho;
  res.characteristic = st.characteristic.value_or(default_characteristic(cfg, rho));
  if (res.characteristic < 0 || res.characteristic >= rho.size()) throw DomainError("characteristic crease out of range");
  const int a = res.characteristic;
  record(rho);
  FoldState prev = rho;

  double c = st.c0;
  int i = 0;
  bool stationary = false;
  while (c > st.eps1 && i < st.max_steps) {
    ++i;
    const GlobalConstraint g = m.assemble(rho);
    const VecX step = kkt_step(g, cfg, st.method, st.svd);
    const double peak = step.cwiseAbs().maxCoeff();
    if (!std::isfinite(peak)) throw SolverError("relaxation step is not finite");
    if (peak < 1e-12) {
      stationary = true;
      break;
    }
    if (i > 2) {
      if (step[a] * (rho[a] - prev[a]) < 0.0) {
        c /= 2.0;
        ++res.halvings;
      }
    }
    FoldState next = rho + (c / peak) * step;
    StepOutcome out = project_to_manifold(m, std::move(next), ns);
    prev = std::move(rho);
    rho = std::move(out.rho);
    record(rho);
    res.step_factors.push_back(c);
    res.iterations.push_back(out.iterations);
  }
  res.converged = stationary || c <= st.eps1;
  res.final_state = res.states.back();
  res.projected_gradient =
      projected_gradient_norm(m.assemble(res.final_state), spring_gradient(cfg, res.final_state), st.svd);
  return res;
}

/// Symmetric waterbomb-base fold angles (mountain, valley) for the angle
/// theta between the symmetry axis and a mountain crease, 0 <= theta <= 3pi/4.
inline std::pair<double, double> waterbomb_symmetric_oracle(double theta) {
  if (!(theta >= 0.0 && theta <= 0.75 * kPi + 1e-12)) throw DomainError("theta must lie in [0, 3pi/4]");
  const double s2 = std::sqrt(2.0);
  auto acos_clamped = [](double x) { return std::acos(std::clamp(x, -1.0, 1.0)); };
  if (theta < kPi / 2) {
    return {2.0 * theta - kPi, 2.0 * acos_clamped(s2 * std::cos(theta) / (-2.0 - s2 * std::sin(theta))) - kPi};
  }
  return {kPi - 2.0 * theta, 2.0 * acos_clamped(s2 * std::cos(theta) / (2.0 - s2 * std::sin(theta))) - kPi};
}

// Springs JSON:
//   { "k_per_length": real | null,
//     "creases": [ {"crease": id, "k": real | null, "rest": radians} ] }
// Creases not listed keep rest angle 0 and stiffness k_per_length * L_i.

inline SpringConfig springs_from_json(const nlohmann::json& doc, const CreasePattern& p, bool degrees = false) {
  try {
    const auto n = static_cast<Eigen::Index>(p.num_creases());
    std::optional<double> kpl;
    if (doc.contains("k_per_length") && !doc.at("k_per_length").is_null()) kpl = doc.at("k_per_length").get<double>();
    SpringConfig cfg{VecX::Constant(n, -1.0), VecX::Zero(n)};
    if (kpl) {
      if (!(*kpl > 0.0)) throw DomainError("k_per_length must be positive");
      for (Eigen::Index i = 0; i < n; ++i) cfg.k[i] = *kpl * p.crease_length(static_cast<int>(i));
    }
    if (doc.contains("creases")) {
      for (const auto& jc : doc.at("creases")) {
        const int id = detail::as_index(detail::require(jc, "crease"), "springs");
        if (id < 0 || id >= n) throw DomainError("spring crease " + std::to_string(id) + " out of range");
        if (jc.contains("k") && !jc.at("k").is_null()) cfg.k[id] = jc.at("k").get<double>();
        if (jc.contains("rest")) {
          const double r = jc.at("rest").get<double>();
          cfg.rest[id] = degrees ? deg2rad(r) : r;
        }
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (cfg.k[i] < 0.0) throw DomainError("no stiffness for crease " + std::to_string(i) + " (set k or k_per_length)");
    }
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("invalid springs document: ") + e.what());
  }
}

inline nlohmann::json springs_to_json(const SpringConfig& cfg) {
  nlohmann::json doc;
  doc["k_per_length"] = nlohmann::json();
  doc["creases"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < cfg.k.size(); ++i) {
    doc["creases"].push_back({{"crease", i}, {"k", cfg.k[i]}, {"rest", cfg.rest[i]}});
  }
  return doc;
}

inline RelaxSettings relax_settings_from_json(const nlohmann::json& doc) {
  try {
    RelaxSettings st;
    if (doc.contains("c0")) st.c0 = doc.at("c0").get<double>();
    if (doc.contains("eps1")) st.eps1 = doc.at("eps1").get<double>();
    if (doc.contains("eps2")) st.eps2 = doc.at("eps2").get<double>();
    if (doc.contains("characteristic") && !doc.at("characteristic").is_null()) {
      st.characteristic = doc.at("characteristic").get<int>();
    }
    if (doc.contains("max_steps")) st.max_steps = doc.at("max_steps").get<int>();
    if (doc.contains("newton_max_iter")) st.newton_max_iter = doc.at("newton_max_iter").get<int>();
    if (doc.contains("svd_cutoff")) st.svd.cutoff = doc.at("svd_cutoff").get<double>();
    if (doc.contains("method")) {
      const auto s = doc.at("method").get<std::string>();
      if (s == "auto") st.method = KktMethod::automatic;
      else if (s == "bordered") st.method = KktMethod::bordered;
      else if (s == "explicit") st.method = KktMethod::explicit_inverse;
      else if (s == "projected") st.method = KktMethod::projected;
      else throw DomainError("unknown KKT method \"" + s + "\"");
    }
    st.validate();
    return st;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("invalid settings document: ") + e.what());
  }
}

inline nlohmann::json relax_settings_to_json(const RelaxSettings& st) {
  nlohmann::json doc;
  doc["c0"] = st.c0;
  doc["eps1"] = st.eps1;
  doc["eps2"] = st.eps2;
  doc["characteristic"] = st.characteristic ? nlohmann::json(*st.characteristic) : nlohmann::json();
  doc["max_steps"] = st.max_steps;
  doc["newton_max_iter"] = st.newton_max_iter;
  doc["svd_cutoff"] = st.svd.cutoff;
  doc["method"] = st.method == KktMethod::automatic ? "auto"
                  : st.method == KktMethod::bordered ? "bordered"
                  : st.method == KktMethod::projected ? "projected"
                                                      : "explicit";
  return doc;
}

}  // namespace rigami
