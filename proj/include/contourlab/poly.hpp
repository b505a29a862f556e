#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace contourlab {

using cplx = std::complex<double>;

/// A point of C^2.
struct Point2 {
  cplx x;
  cplx y;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(cplx s, Point2 a) { return {s * a.x, s * a.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }

/// Hermitian norm on C^2.
inline double norm(Point2 a) { return std::sqrt(std::norm(a.x) + std::norm(a.y)); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

struct Term {
  int deg_x = 0;
  int deg_y = 0;
  cplx coeff;
};

/// Polynomial in two complex variables. Terms are kept sorted by
/// (deg_x, deg_y) with zero coefficients dropped, which fixes the
/// accumulation order of evaluation.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<Term> terms);

  static Poly constant(cplx c);
  static Poly monomial(int deg_x, int deg_y, cplx c = 1.0);
  static Poly x() { return monomial(1, 0); }
  static Poly y() { return monomial(0, 1); }

  cplx operator()(Point2 pt) const { return eval(pt); }
  cplx eval(Point2 pt) const;

  Poly partial_x() const;
  Poly partial_y() const;

  const std::vector<Term>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_constant() const noexcept;
  bool is_real(double tol = 0.0) const noexcept;
  /// Total degree; -1 for the zero polynomial.
  int degree() const noexcept;
  int max_deg_x() const noexcept { return max_x_; }
  int max_deg_y() const noexcept { return max_y_; }

  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(cplx s, const Poly& a);
  Poly operator-() const;

  friend bool operator==(const Poly& a, const Poly& b);

 private:
  void normalize();

  std::vector<Term> terms_;
  int max_x_ = 0;
  int max_y_ = 0;
};

/// H together with its first and second partial derivatives, evaluated
/// together wherever a fiber computation needs a gradient or Hessian.
class Fibration {
 public:
  Fibration() = default;
  explicit Fibration(Poly h);

  const Poly& H() const noexcept { return h_; }
  const Poly& Hx() const noexcept { return hx_; }
  const Poly& Hy() const noexcept { return hy_; }

  cplx value(Point2 p) const { return h_.eval(p); }
  /// (H_x, H_y) at p.
  Point2 gradient(Point2 p) const { return {hx_.eval(p), hy_.eval(p)}; }
  /// Hessian entries (H_xx, H_xy, H_yy).
  void hessian(Point2 p, cplx& hxx, cplx& hxy, cplx& hyy) const;
  bool is_real() const noexcept { return h_.is_real(); }

 private:
  Poly h_, hx_, hy_, hxx_, hxy_, hyy_;
};

/// Box + lattice used to seed the multistart Newton search for critical points.
struct CriticalSearch {
  double box_lo = -5.0;
  double box_hi = 5.0;
  int resolution = 21;
  int phases = 4;
  double tol_newton = 1e-12;
  double tol_dedup = 1e-8;
  int max_iter = 60;
};

struct CriticalData {
  std::vector<Point2> points;
  std::vector<cplx> values;
  /// value_of_point[i] indexes `values` for points[i].
  std::vector<std::size_t> value_of_point;
  /// Seeds whose Newton iteration did not converge (not fatal).
  std::size_t failed_seeds = 0;
};

/// All critical points of H reachable from the seed lattice, with the
/// deduplicated set of critical values. Throws NonIsolatedCritical when
/// converged points with singular Hessian spread along a curve.
CriticalData critical_data(const Poly& H, const CriticalSearch& search = {});

}  // namespace contourlab
