#pragma once

// Wavefront OBJ export, CSV tables and fold-state documents.

#include <rigami/core.hpp>
#include <rigami/embedding.hpp>
#include <rigami/kinematics.hpp>
#include <rigami/pattern.hpp>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <string>
#include <vector>

namespace rigami {

/// Shortest round-trip decimal for a double (17 significant digits).
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Splits a facet into fan triangles from the first corner that yields no
/// zero-area triangle (facets may carry straight corners).
inline std::vector<std::array<int, 3>> triangulate_facet(const std::vector<Vec2>& X, const std::vector<int>& f) {
  const std::size_t n = f.size();
  for (std::size_t apex = 0; apex < n; ++apex) {
    std::vector<std::array<int, 3>> tris;
    bool ok = true;
    for (std::size_t k = 1; k + 1 < n && ok; ++k) {
      const int a = f[apex], b = f[(apex + k) % n], c = f[(apex + k + 1) % n];
      const double area = detail::cross2(X[static_cast<std::size_t>(b)] - X[static_cast<std::size_t>(a)],
                                         X[static_cast<std::size_t>(c)] - X[static_cast<std::size_t>(a)]);
      ok = area > 1e-12;
      tris.push_back({a, b, c});
    }
    if (ok) return tris;
  }
  throw DomainError("facet cannot be fan-triangulated");
}

inline std::string export_obj(const CreasePattern& p, const Embedding3D& e) {
  std::string out;
  for (const Vec3& v : e.x) {
    out += "v " + format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z()) + "\n";
  }
  for (const auto& f : p.facets()) {
    for (const auto& t : triangulate_facet(p.vertices(), f)) {
      out += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " + std::to_string(t[2] + 1) + "\n";
    }
  }
  return out;
}

inline std::string csv_row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line + "\n";
}

inline nlohmann::json state_to_json(const FoldState& rho) {
  return {{"rho", std::vector<double>(rho.data(), rho.data() + rho.size())}};
}

inline FoldState state_from_json(const nlohmann::json& doc, bool degrees = false) {
  try {
    const auto v = detail::require(doc, "rho").get<std::vector<double>>();
    FoldState rho = Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size()));
    if (degrees) rho *= kPi / 180.0;
    return rho;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("invalid fold-state document: ") + e.what());
  }
}

}  // namespace rigami
