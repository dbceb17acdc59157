// Relation samples shared by the classification tests and the acceptance run.
#pragma once

#include <string>
#include <vector>

#include "weingarten/relation.hpp"

namespace fixture {

/// Ten tanh-modulated relations with c in [1.2, 3] and d in [0.2, 1.5].
inline std::vector<weingarten::WeingartenRelation> tanh_sample() {
  const double table[10][3] = {{0.7, 1.5, 1.0},  {0.3, 1.2, 0.5}, {1.0, 2.0, 0.8},  {1.5, 1.3, 1.5}, {2.0, 3.0, 0.2},
                               {-0.4, 1.5, 1.0}, {-1.0, 2.5, 0.6}, {0.1, 1.8, 1.2}, {0.5, 1.1, 0.3}, {-0.2, 1.4, 0.9}};
  std::vector<weingarten::WeingartenRelation> out;
  for (const auto& r : table) out.push_back(weingarten::tanh_relation(r[0], r[1], r[2]));
  return out;
}

/// Twenty uniformly elliptic relations: the tanh sample, five affine ones
/// and five given as expressions.
inline std::vector<weingarten::WeingartenRelation> elliptic_sample() {
  using namespace weingarten;
  std::vector<WeingartenRelation> out = tanh_sample();
  out.push_back(affine_relation(0.5, -1.0));
  out.push_back(affine_relation(1.0, -0.5));
  out.push_back(affine_relation(2.0, -2.0));
  out.push_back(affine_relation(-0.8, -3.0));
  out.push_back(affine_relation(0.25, -1.5));
  const std::string algebraic = "a - c * (k - a) - d * (k - a) / sqrt(1 + (k - a)^2)";
  const double table[5][3] = {{0.6, 1.0, 0.5}, {1.2, 1.5, 1.0}, {-0.5, 2.0, 0.5}, {0.9, 0.8, 0.4}, {0.0, 1.0, 1.0}};
  for (const auto& r : table) {
    RelationOptions opt;
    opt.alpha = r[0];
    out.push_back(dsl_relation(algebraic, {{"a", r[0]}, {"c", r[1]}, {"d", r[2]}}, opt));
  }
  return out;
}

/// g(x) = 1/x: elliptic but not uniformly, with b = 0.
inline weingarten::WeingartenRelation inverse_relation() {
  weingarten::RelationOptions opt;
  opt.alpha = 1.0;
  opt.b = 0.0;
  return weingarten::dsl_relation("1/k", {}, opt);
}

/// Finite-b relation whose canonical example runs into lambda = b.
inline weingarten::WeingartenRelation singular_relation() { return weingarten::expasymptote_relation(0.3, -0.2); }

}  // namespace fixture
