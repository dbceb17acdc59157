// Elliptic Weingarten relations k2 = g(k1) and their folded form f.
//
// A relation is normalized so that g is defined on I_g = [alpha, inf) with
// g(alpha) = alpha and g' < 0; b = g(inf) is either finite or -inf. The
// folded relation f lives on I_f = (b, inf), equals g on [alpha, inf) and
// g^{-1} on (b, alpha], and is a decreasing involution.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "weingarten/dual.hpp"
#include "weingarten/errors.hpp"
#include "weingarten/expr.hpp"
#include "weingarten/roots.hpp"

namespace weingarten {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Fixed-point and inversion tolerance (absolute, scaled by max(1, |y|)).
inline constexpr double kRootTol = 1e-12;

enum class DomainCase {
  HalfLine,   ///< I_g = [alpha, inf), J_g = (b, alpha]
  FiniteCut,  ///< I_g = [alpha, cut), g -> -inf at cut, J_g = (-inf, alpha]
};

/// Uniform slope bounds lower <= g' <= upper < 0.
struct SlopeBounds {
  double lower;
  double upper;
};

class WeingartenRelation {
 public:
  using Function = std::function<Dual(Dual)>;
  using Inverse = std::function<double(double)>;

  struct Parts {
    Function g;
    double alpha = 0.0;
    DomainCase domain_case = DomainCase::HalfLine;
    /// HalfLine: g(inf) (possibly -inf). FiniteCut: the cut point.
    double b = kNegInf;
    std::optional<SlopeBounds> ellipticity;
    /// Approximate or exact inverse used to seed inversion; optional.
    Inverse inverse_hint;
    std::string description;
  };

  WeingartenRelation() = default;
  explicit WeingartenRelation(Parts p) : p_(std::move(p)) {}

  double alpha() const { return p_.alpha; }
  DomainCase domain_case() const { return p_.domain_case; }
  /// g(inf) for HalfLine relations; the cut point for FiniteCut relations.
  double b() const { return p_.b; }
  bool finite_b() const { return std::isfinite(p_.b); }
  const std::optional<SlopeBounds>& ellipticity() const { return p_.ellipticity; }
  bool uniformly_elliptic() const { return p_.ellipticity.has_value(); }
  const std::string& description() const { return p_.description; }
  const Function& function() const { return p_.g; }
  const Inverse& inverse_hint() const { return p_.inverse_hint; }
  const Parts& parts() const { return p_; }

  /// (g(x), g'(x)) for x in I_g.
  Dual eval(double x) const {
    if (x < p_.alpha - 1e-9 * (1.0 + std::abs(p_.alpha)) ||
        (p_.domain_case == DomainCase::FiniteCut && x >= p_.b)) {
      throw OutOfRange("g evaluated outside I_g at " + std::to_string(x));
    }
    return p_.g(Dual::variable(x));
  }
  double operator()(double x) const { return eval(x).value; }

 private:
  Parts p_;
};

/// Unique fixed point g(alpha) = alpha inside `bracket`, to 1e-12.
inline double find_umbilical_constant(const WeingartenRelation::Function& g, double lo, double hi) {
  auto residual = [&](double x) {
    const Dual v = g(Dual::variable(x));
    return Dual{v.value - x, v.deriv - 1.0};
  };
  return solve_bracketed(residual, lo, hi, kRootTol);
}

/// Inverse of g on J_g: the x in I_g with g(x) = y.
inline double invert_g(const WeingartenRelation& rel, double y) {
  const double alpha = rel.alpha();
  const double tol = kRootTol * std::max(1.0, std::abs(y));
  if (y > alpha + tol) throw OutOfRange("invert_g: y > alpha");
  if (rel.domain_case() == DomainCase::HalfLine && y <= rel.b()) {
    throw OutOfRange("invert_g: y <= b");
  }
  if (y >= alpha) return alpha;

  auto residual = [&](double x) {
    const Dual v = rel.function()(Dual::variable(x));
    return Dual{v.value - y, v.deriv};
  };
  const double cut = rel.domain_case() == DomainCase::FiniteCut ? rel.b()
                                                                : std::numeric_limits<double>::infinity();

  // Unbracketed Newton from the best available guess; falls through to the
  // bracketed solver whenever an iterate misbehaves.
  double x = rel.inverse_hint() ? rel.inverse_hint()(y) : std::numeric_limits<double>::quiet_NaN();
  if (!std::isfinite(x) || x < alpha || x >= cut) {
    const double slope = rel.function()(Dual::variable(alpha)).deriv;
    x = alpha + (y - alpha) / slope;
  }
  for (int i = 0; i < 12 && std::isfinite(x) && x >= alpha && x < cut; ++i) {
    const Dual r = residual(x);
    if (!std::isfinite(r.value) || !(r.deriv < 0.0)) break;
    if (std::abs(r.value) <= tol) return x;
    x -= r.value / r.deriv;
  }

  double hi;
  if (rel.domain_case() == DomainCase::HalfLine) {
    double d = 1.0;
    for (;;) {
      hi = alpha + d;
      const double gv = rel.function()(Dual::variable(hi)).value;
      if (gv <= y) break;
      d *= 2.0;
      if (!std::isfinite(d) || d > 1e300) throw OutOfRange("invert_g: no preimage (y at or below b)");
    }
  } else {
    double frac = 0.5;
    for (;;) {
      hi = cut - (cut - alpha) * frac;
      const double gv = rel.function()(Dual::variable(hi)).value;
      if (gv <= y || hi <= alpha) break;
      frac *= 0.5;
      if (frac < 1e-300) throw OutOfRange("invert_g: no preimage before the cut");
    }
  }
  return solve_bracketed(residual, alpha, hi, tol);
}

/// The involution f on I_f = (b, inf).
class FoldedRelation {
 public:
  FoldedRelation() = default;
  explicit FoldedRelation(WeingartenRelation rel) : rel_(std::move(rel)) {
    if (rel_.domain_case() != DomainCase::HalfLine) {
      throw OutOfRange("fold requires a relation normalized to I_g = [alpha, inf)");
    }
  }

  double alpha() const { return rel_.alpha(); }
  double b() const { return rel_.b(); }
  const WeingartenRelation& relation() const { return rel_; }

  /// (f(lambda), f'(lambda)). On (b, alpha) the derivative is 1/g'(f(lambda)).
  Dual eval(double lambda) const {
    if (lambda >= rel_.alpha()) return rel_.function()(Dual::variable(lambda));
    if (!(lambda > rel_.b())) throw OutOfRange("f evaluated at lambda <= b");
    const double x = invert_g(rel_, lambda);
    const double slope = rel_.function()(Dual::variable(x)).deriv;
    return {x, 1.0 / slope};
  }
  double operator()(double lambda) const { return eval(lambda).value; }

 private:
  WeingartenRelation rel_;
};

inline FoldedRelation fold(const WeingartenRelation& rel) { return FoldedRelation(rel); }

/// Relation of the orientation-reversed surface: g~(x) = -g^{-1}(-x),
/// alpha~ = -alpha. A HalfLine relation with finite b becomes a FiniteCut
/// relation with cut -b and vice versa.
inline WeingartenRelation orientation_flip(const WeingartenRelation& rel) {
  WeingartenRelation::Parts p;
  p.alpha = -rel.alpha();
  if (rel.domain_case() == DomainCase::HalfLine) {
    if (rel.finite_b()) {
      p.domain_case = DomainCase::FiniteCut;
      p.b = -rel.b();
    } else {
      p.domain_case = DomainCase::HalfLine;
      p.b = kNegInf;
    }
  } else {
    p.domain_case = DomainCase::HalfLine;
    p.b = -rel.b();
  }
  if (rel.ellipticity()) {
    p.ellipticity = SlopeBounds{1.0 / rel.ellipticity()->upper, 1.0 / rel.ellipticity()->lower};
  }
  p.g = [rel](Dual x) {
    const double pre = invert_g(rel, -x.value);
    const double slope = rel.function()(Dual::variable(pre)).deriv;
    return Dual{-pre, x.deriv / slope};
  };
  const auto g = rel.function();
  p.inverse_hint = [g](double y) { return -g(Dual::constant(-y)).value; };
  p.description = "flip(" + rel.description() + ")";
  return WeingartenRelation(std::move(p));
}

struct EllipticityReport {
  double lambda1 = 0.0;  ///< min g' on the grid
  double lambda2 = 0.0;  ///< max g' on the grid
  bool stabilized = false;
  bool uniform = false;
};

namespace detail {

/// Grid on I_g: alpha plus geometric offsets in [1e-6, extent] (HalfLine) or
/// geometric approach to the cut (FiniteCut).
inline std::vector<double> ig_grid(const WeingartenRelation& rel, int n, double extent) {
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(n) + 1);
  const double a = rel.alpha();
  xs.push_back(a);
  if (rel.domain_case() == DomainCase::HalfLine) {
    const double lo = std::log(1e-6), hi = std::log(extent);
    for (int i = 0; i < n; ++i) xs.push_back(a + std::exp(lo + (hi - lo) * i / (n - 1)));
  } else {
    const double width = rel.b() - a;
    for (int i = 0; i < n; ++i) {
      const double frac = std::exp(std::log(1e-9) * (i + 1.0) / n);  // 1 - frac -> 1
      xs.push_back(a + width * (1.0 - frac));
    }
  }
  return xs;
}

inline std::pair<double, double> slope_range(const WeingartenRelation& rel, int n, double extent) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : ig_grid(rel, n, extent)) {
    const double d = rel.function()(Dual::variable(x)).deriv;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return {lo, hi};
}

/// Strict ellipticity on a sample of I_g. A derivative that underflows to
/// zero and stays zero for the rest of the grid is accepted as asymptotic
/// flattening; an interior zero or any positive slope is rejected.
inline void check_strictly_elliptic(const WeingartenRelation& rel, int n) {
  const auto xs = ig_grid(rel, n, 1e6);
  std::vector<double> d(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d[i] = rel.function()(Dual::variable(xs[i])).deriv;
    if (!std::isfinite(d[i])) throw NotElliptic("g' is not finite at " + std::to_string(xs[i]));
    if (d[i] > 0.0) throw NotElliptic("g' > 0 at " + std::to_string(xs[i]));
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (d[i] == 0.0) {
      const bool tail = std::all_of(d.begin() + static_cast<std::ptrdiff_t>(i), d.end(),
                                    [](double v) { return v == 0.0; });
      if (!tail || i == 0) throw NotElliptic("g' vanishes at " + std::to_string(xs[i]));
      break;
    }
  }
}

}  // namespace detail

/// Estimates (Lambda1, Lambda2) = (min g', max g') over a geometric grid on
/// [alpha, alpha + 1e6]. Uniform iff Lambda2 < 0 and both bounds agree with
/// the values from a refined grid and from a grid truncated at alpha + 1e3.
inline EllipticityReport validate_uniform_ellipticity(const WeingartenRelation& rel, int grid_size = 2000) {
  detail::check_strictly_elliptic(rel, grid_size);
  const auto [l1, l2] = detail::slope_range(rel, grid_size, 1e6);
  const auto [r1, r2] = detail::slope_range(rel, 2 * grid_size, 1e6);
  const auto [s1, s2] = detail::slope_range(rel, grid_size, 1e3);
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-3 * std::max(std::abs(a), std::abs(b)); };
  EllipticityReport rep;
  rep.lambda1 = std::min(l1, r1);
  rep.lambda2 = std::max(l2, r2);
  rep.stabilized = close(l1, r1) && close(l2, r2) && close(l1, s1) && close(l2, s2);
  rep.uniform = rep.stabilized && rep.lambda2 < 0.0 && std::isfinite(rep.lambda1) &&
                rel.domain_case() == DomainCase::HalfLine;
  return rep;
}

/// b = lim g(x) as x -> inf; -inf if g is unbounded below.
///
/// Probes g on a doubling grid alpha + 2^k up to probe_max. Finite b is
/// declared when g' at the last probe is above -1e-8 and the last two probe
/// values agree within 1e-8; -inf when the increments stop shrinking.
inline double estimate_b(const WeingartenRelation& rel, double probe_max = 1e12) {
  if (rel.ellipticity() && rel.ellipticity()->upper < 0.0) return kNegInf;
  const double a = rel.alpha();
  std::vector<double> vals;
  double last_slope = 0.0;
  for (double d = 1.0; a + d <= a + probe_max; d *= 2.0) {
    const Dual v = rel.function()(Dual::variable(a + d));
    if (!std::isfinite(v.value) && v.value < 0.0) return kNegInf;
    vals.push_back(v.value);
    last_slope = v.deriv;
  }
  const std::size_t n = vals.size();
  if (n < 4) throw Inconclusive("estimate_b: probe range too short");
  const double d1 = vals[n - 1] - vals[n - 2];
  const double d2 = vals[n - 2] - vals[n - 3];
  if (last_slope > -1e-8 && std::abs(d1) < 1e-8) {
    return std::min(vals[n - 1], std::nextafter(a, kNegInf));
  }
  if (std::abs(d1) >= 0.9 * std::abs(d2)) return kNegInf;
  throw Inconclusive("estimate_b: neither convergence nor divergence detected");
}

/// Options for building a validated relation.
struct RelationOptions {
  double bracket_lo = -10.0;
  double bracket_hi = 10.0;
  std::optional<double> alpha;  ///< declared umbilical constant (verified)
  std::optional<double> b;      ///< declared asymptote (HalfLine) or cut (FiniteCut)
  DomainCase domain_case = DomainCase::HalfLine;
  WeingartenRelation::Inverse inverse_hint;
  std::string description = "g";
  int grid_size = 2000;
};

/// Builds a validated relation normalized to I_g = [alpha, inf). FiniteCut
/// input is converted through orientation_flip.
inline WeingartenRelation make_relation(WeingartenRelation::Function g, const RelationOptions& opt) {
  WeingartenRelation::Parts p;
  p.g = std::move(g);
  p.domain_case = opt.domain_case;
  p.inverse_hint = opt.inverse_hint;
  p.description = opt.description;
  if (opt.alpha) {
    const double gv = p.g(Dual::variable(*opt.alpha)).value;
    if (std::abs(gv - *opt.alpha) > 1e-9 * (1.0 + std::abs(*opt.alpha))) {
      throw NoSignChange("declared alpha is not a fixed point of g");
    }
    p.alpha = *opt.alpha;
  } else {
    p.alpha = find_umbilical_constant(p.g, opt.bracket_lo, opt.bracket_hi);
  }
  if (p.domain_case == DomainCase::FiniteCut) {
    if (!opt.b || !(*opt.b > p.alpha)) throw OutOfRange("FiniteCut relation needs a cut above alpha");
    p.b = *opt.b;
    WeingartenRelation cut(std::move(p));
    detail::check_strictly_elliptic(cut, opt.grid_size);
    return orientation_flip(cut);
  }

  WeingartenRelation tmp(p);
  const EllipticityReport rep = validate_uniform_ellipticity(tmp, opt.grid_size);
  if (rep.uniform) p.ellipticity = SlopeBounds{rep.lambda1, rep.lambda2};
  if (opt.b) {
    if (!(*opt.b < p.alpha)) throw OutOfRange("declared b must lie below alpha");
    p.b = *opt.b;
  } else {
    p.b = estimate_b(WeingartenRelation(p));
  }
  return WeingartenRelation(std::move(p));
}

// --- Built-in parametric families ------------------------------------------

/// g(x) = alpha + slope (x - alpha); slope = -1 is the constant mean
/// curvature relation g(x) = 2H - x with H = alpha.
inline WeingartenRelation affine_relation(double alpha, double slope) {
  if (!(slope < 0.0)) throw NotElliptic("affine relation needs a negative slope");
  WeingartenRelation::Parts p;
  p.g = [alpha, slope](Dual x) { return Dual::constant(alpha) + Dual::constant(slope) * (x - Dual::constant(alpha)); };
  p.alpha = alpha;
  p.b = kNegInf;
  p.ellipticity = SlopeBounds{slope, slope};
  p.inverse_hint = [alpha, slope](double y) { return alpha + (y - alpha) / slope; };
  p.description = "affine(alpha=" + expr::detail::format_number(alpha) +
                  ", slope=" + expr::detail::format_number(slope) + ")";
  return WeingartenRelation(std::move(p));
}

/// g(x) = b0 + (alpha - b0) exp(-(x - alpha) / (alpha - b0)): g'(alpha) = -1,
/// horizontal asymptote b = b0.
inline WeingartenRelation expasymptote_relation(double alpha, double b0) {
  if (!(b0 < alpha)) throw OutOfRange("expasymptote relation needs b0 < alpha");
  const double w = alpha - b0;
  RelationOptions opt;
  opt.alpha = alpha;
  opt.b = b0;
  opt.inverse_hint = [alpha, b0, w](double y) { return alpha - w * std::log((y - b0) / w); };
  opt.description = "expasymptote(alpha=" + expr::detail::format_number(alpha) +
                    ", b=" + expr::detail::format_number(b0) + ")";
  return make_relation(
      [alpha, b0, w](Dual x) { return Dual::constant(b0) + Dual::constant(w) * exp((Dual::constant(alpha) - x) / Dual::constant(w)); },
      opt);
}

/// g(x) = alpha - (x - alpha)(c + d tanh(x - alpha)). For d >= 0 the slope
/// stays within [-c - 1.2 d, -c].
inline WeingartenRelation tanh_relation(double alpha, double c, double d) {
  RelationOptions opt;
  opt.alpha = alpha;
  opt.inverse_hint = [alpha, c, d](double y) { return alpha + (alpha - y) / (c + d); };
  opt.description = "tanh(alpha=" + expr::detail::format_number(alpha) + ", c=" + expr::detail::format_number(c) +
                    ", d=" + expr::detail::format_number(d) + ")";
  WeingartenRelation rel = make_relation(
      [alpha, c, d](Dual x) {
        const Dual u = x - Dual::constant(alpha);
        return Dual::constant(alpha) - u * (Dual::constant(c) + Dual::constant(d) * tanh(u));
      },
      opt);
  if (c > 0.0 && d >= 0.0) {
    // tanh u + u sech^2 u peaks at u = 1/tanh u (value about 1.1997).
    WeingartenRelation::Parts p = rel.parts();
    p.ellipticity = SlopeBounds{-c - 1.2 * d, -c};
    rel = WeingartenRelation(std::move(p));
  }
  return rel;
}

/// Relation from a DSL expression in the variable k.
inline WeingartenRelation dsl_relation(const std::string& source, const expr::Params& params,
                                       RelationOptions opt = {}) {
  const expr::Expr e = expr::parse(source);
  opt.description = "dsl(" + expr::print(e) + ")";
  return make_relation(expr::compile(e, params), opt);
}

}  // namespace weingarten
