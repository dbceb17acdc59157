// The (x, lambda) phase space of rotational profiles: regions, the boundary
// curve Gamma (|lambda tan x| = 1), the monotonicity curve Upsilon
// (f(lambda) = lambda (1 + tan^2 x)) and the slope field dlambda/dx.
#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "weingarten/errors.hpp"
#include "weingarten/relation.hpp"
#include "weingarten/roots.hpp"

namespace weingarten {

struct PhasePoint {
  double x = 0.0;       ///< colatitude in (0, pi)
  double lambda = 0.0;  ///< principal curvature t' cot x
};

enum class Region { R0, R0star, GammaBoundary, Outside };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::R0: return "R0";
    case Region::R0star: return "R0*";
    case Region::GammaBoundary: return "Gamma";
    case Region::Outside: return "outside";
  }
  return "?";
}

/// Points with ||lambda tan x| - 1| <= this are on Gamma.
inline constexpr double kGammaBand = 1e-12;

inline Region classify_point(PhasePoint p, double b = kNegInf) {
  constexpr double pi = std::numbers::pi;
  if (!(p.x > 0.0 && p.x < pi) || !(p.lambda > b)) return Region::Outside;
  const double c = std::cos(p.x);
  if (c == 0.0 || p.x == pi / 2) return Region::Outside;
  const double q = std::abs(p.lambda) * std::sin(p.x) / std::abs(c);
  if (std::abs(q - 1.0) <= kGammaBand) return Region::GammaBoundary;
  if (q > 1.0) return Region::Outside;
  return p.x < pi / 2 ? Region::R0 : Region::R0star;
}

/// f(lambda) cos^2 x - lambda: positive strictly below Upsilon, negative above.
inline double upsilon_residual(const FoldedRelation& f, PhasePoint p) {
  const double c = std::cos(p.x);
  return f(p.lambda) * c * c - p.lambda;
}

/// Height h(x) of Upsilon, the unique root of f(lambda) cos^2 x = lambda
/// between max(0, b) and alpha. Returns the limit max(0, b) at x = pi/2.
inline double upsilon_height(const FoldedRelation& f, double x) {
  constexpr double pi = std::numbers::pi;
  if (!(x > 0.0 && x < pi)) throw DomainError("upsilon_height: x outside (0, pi)");
  const double alpha = f.alpha();
  if (alpha == 0.0) return 0.0;
  const double c = std::cos(x);
  const double c2 = c * c;
  const double floor_b = std::max(0.0, f.b());
  if (c2 == 0.0) return floor_b;

  auto phi = [&](double lam) {
    const Dual fv = f.eval(lam);
    return Dual{fv.value * c2 - lam, fv.deriv * c2 - 1.0};
  };
  const double tol = 1e-15 * std::max(1.0, std::abs(alpha));
  double lo, hi;
  if (alpha > 0.0) {
    hi = alpha;
    if (f.b() < 0.0) {
      lo = 0.0;
    } else {
      // f blows up as lambda -> b+, so phi > 0 close enough to b.
      double frac = 0.5;
      lo = f.b() + (alpha - f.b()) * frac;
      while (phi(lo).value <= 0.0) {
        frac *= 0.5;
        lo = f.b() + (alpha - f.b()) * frac;
        if (frac < 1e-300 || lo <= f.b()) return floor_b;
      }
    }
  } else {
    lo = alpha;
    hi = 0.0;
  }
  const double plo = phi(lo).value, phi_hi = phi(hi).value;
  if (std::abs(plo) <= tol) return lo;
  if (std::abs(phi_hi) <= tol) return hi;
  if ((plo > 0.0) == (phi_hi > 0.0)) return std::abs(plo) < std::abs(phi_hi) ? lo : hi;
  return solve_bracketed(phi, lo, hi, tol);
}

/// dlambda/dx = cot x (f(lambda) - lambda (1 + tan^2 x)), evaluated as
/// cot x f(lambda) - lambda / (sin x cos x).
inline double slope_field(const FoldedRelation& f, PhasePoint p) {
  constexpr double pi = std::numbers::pi;
  const double s = std::sin(p.x), c = std::cos(p.x);
  if (!(p.x > 0.0 && p.x < pi) || c == 0.0 || s == 0.0 || std::abs(p.x - pi / 2) < 1e-15) {
    throw DomainError("slope_field: x at a singular line");
  }
  if (!(p.lambda > f.b())) throw DomainError("slope_field: lambda <= b");
  return (c / s) * f(p.lambda) - p.lambda / (s * c);
}

/// Upsilon with an on-demand cache of heights. Concurrent queries are safe
/// and return identical values.
class UpsilonCurve {
 public:
  explicit UpsilonCurve(FoldedRelation f) : f_(std::move(f)) {}

  const FoldedRelation& relation() const { return f_; }

  double height(double x) const {
    {
      std::lock_guard lock(mu_);
      const auto it = cache_.find(x);
      if (it != cache_.end()) return it->second;
    }
    const double h = upsilon_height(f_, x);
    std::lock_guard lock(mu_);
    cache_.emplace(x, h);
    return h;
  }

  /// (x, h(x)) on a uniform grid of n interior points of (0, pi).
  std::vector<std::pair<double, double>> sample(int n) const {
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
      const double x = std::numbers::pi * i / (n + 1);
      out.emplace_back(x, height(x));
    }
    return out;
  }

  /// Number of connected pieces of Upsilon inside the phase space, measured
  /// on a grid of n points. The equator separates R0 from R0*, so a piece
  /// never continues across it.
  int components(int n = 2000) const {
    int count = 0;
    bool inside_prev = false;
    double x_prev = 0.0;
    for (const auto& [x, h] : sample(n)) {
      const Region r = classify_point({x, h}, f_.b());
      const bool inside = r == Region::R0 || r == Region::R0star;
      if (x_prev < std::numbers::pi / 2 && x >= std::numbers::pi / 2) inside_prev = false;
      if (inside && !inside_prev) ++count;
      inside_prev = inside;
      x_prev = x;
    }
    return count;
  }

 private:
  FoldedRelation f_;
  mutable std::mutex mu_;
  mutable std::map<double, double> cache_;
};

}  // namespace weingarten
