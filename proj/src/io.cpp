#include "contourlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "contourlab/error.hpp"

namespace contourlab::io {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx cplx_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw ContourError(ErrorCode::InvalidArgument, "expected a number or [re, im], got " + j.dump());
}

json to_json(const Poly& p) {
  json terms = json::array();
  for (const auto& t : p.terms()) terms.push_back({t.deg_x, t.deg_y, t.coeff.real(), t.coeff.imag()});
  return {{"terms", terms}};
}

Poly poly_from_json(const json& j) {
  if (j.is_number()) return Poly::constant(j.get<double>());
  if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array())
    throw ContourError(ErrorCode::InvalidArgument, "polynomial must be {\"terms\": [[i, j, re, im], ...]}");
  std::vector<Term> terms;
  for (const auto& t : j["terms"]) {
    if (!t.is_array() || t.size() < 3 || t.size() > 4)
      throw ContourError(ErrorCode::InvalidArgument, "bad polynomial term " + t.dump());
    const int i = t[0].get<int>(), k = t[1].get<int>();
    if (i < 0 || k < 0) throw ContourError(ErrorCode::InvalidArgument, "negative degree in " + t.dump());
    terms.push_back({i, k, cplx(t[2].get<double>(), t.size() == 4 ? t[3].get<double>() : 0.0)});
  }
  return Poly(std::move(terms));
}

json to_json(const FiberLoop& loop) {
  json pts = json::array();
  for (const auto& p : loop.points()) pts.push_back({p.x.real(), p.x.imag(), p.y.real(), p.y.imag()});
  return {{"h", to_json(loop.h())}, {"points", pts}};
}

FiberLoop loop_from_json(const json& j) {
  std::vector<Point2> pts;
  for (const auto& p : j.at("points")) {
    if (p.size() != 4) throw ContourError(ErrorCode::InvalidArgument, "loop point must be [xr, xi, yr, yi]");
    pts.push_back({cplx(p[0].get<double>(), p[1].get<double>()), cplx(p[2].get<double>(), p[3].get<double>())});
  }
  return FiberLoop(cplx_from_json(j.at("h")), std::move(pts));
}

json to_json(const BasePath& path) {
  json s = json::array();
  for (cplx h : path.samples) s.push_back(to_json(h));
  return {{"samples", s}, {"closed", path.closed}};
}

BasePath path_from_json(const json& j) {
  BasePath p;
  for (const auto& s : j.at("samples")) p.samples.push_back(cplx_from_json(s));
  p.closed = j.value("closed", false);
  return p;
}

json to_json(const TriMatrix& w) {
  return {{"I", to_json(w.I)}, {"a", to_json(w.a)}, {"b", to_json(w.b)}, {"c", to_json(w.c)}};
}

TriMatrix tri_from_json(const json& j) {
  return {cplx_from_json(j.at("I")), cplx_from_json(j.at("a")), cplx_from_json(j.at("b")),
          cplx_from_json(j.at("c"))};
}

json to_json(const LoopFunctionals& f) {
  return {{"T", to_json(f.T)},
          {"I", to_json(f.I)},
          {"theta_plus", to_json(f.theta_plus)},
          {"theta_minus", to_json(f.theta_minus)},
          {"phi", to_json(f.phi)},
          {"psi", to_json(f.psi)},
          {"near_resonant", f.near_resonant}};
}

json to_json(const CriticalData& c) {
  json pts = json::array(), vals = json::array();
  for (std::size_t i = 0; i < c.points.size(); ++i)
    pts.push_back({{"x", to_json(c.points[i].x)}, {"y", to_json(c.points[i].y)}, {"value", c.value_of_point[i]}});
  // Values whose imaginary part is round-off are written as plain numbers.
  for (cplx v : c.values)
    vals.push_back(std::abs(v.imag()) <= 1e-12 * std::max(1.0, std::abs(v)) ? json(v.real()) : to_json(v));
  return {{"values", vals}, {"points", pts}, {"failed_seeds", c.failed_seeds}};
}

json to_json(const MonodromyReport& r) {
  json res = json::object();
  for (const auto& [k, v] : r.residuals) res[k] = v;
  return {{"crit_value", to_json(r.crit_value)},
          {"radius", r.radius},
          {"base_drift", r.base_drift},
          {"rotated", r.rotated},
          {"rho_before", to_json(r.rho_before)},
          {"rho_after", to_json(r.rho_after)},
          {"residuals", res}};
}

json to_json(const MelnikovExpansion& e) {
  json coeffs = json::array();
  for (const auto& c : e.coefficients) coeffs.push_back(c);
  return {{"k", e.k}, {"h", e.h}, {"Mk", e.Mk}, {"residual", e.residual},
          {"coefficients", coeffs}, {"noise_floor", e.noise_floor}};
}

json to_json(const System3D& s) {
  return {{"H", to_json(s.H)}, {"R", to_json(s.R)}, {"S", to_json(s.S)}, {"A", to_json(s.A)},
          {"b", to_json(s.b)}, {"P", to_json(s.P)}, {"Q", to_json(s.Q)}, {"eps", s.eps},
          {"hyp_margin", s.hyp_margin}};
}

void write_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << cells[i];
  }
  os << '\n';
}

}  // namespace contourlab::io
