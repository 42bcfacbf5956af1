#pragma once

#include <cmath>

#include "ctmc.hpp"

namespace cavitylb::detail {

// Index map for {(0,m),(0,m+1)} ∪ {(q,e,j) : e ∈ {m,m+1}, 1 ≤ q ≤ e}.
struct EstimateSpace {
  int m;
  int phases;

  int size() const { return 2 + (2 * m + 1) * phases; }
  int empty(int e) const { return e == m ? 0 : 1; }
  int busy(int q, int e, int j) const {
    if (e == m) return 2 + (q - 1) * phases + j;
    return 2 + m * phases + (q - 1) * phases + j;
  }
  // Index of (q, e) with phase j; q may be 0, in which case j is ignored.
  int at(int q, int e, int j) const { return q == 0 ? empty(e) : busy(q, e, j); }

  GeneratorBuilder make_builder() const {
    GeneratorBuilder b;
    b.add_state({0, m, -1});
    b.add_state({0, m + 1, -1});
    for (int e : {m, m + 1})
      for (int q = 1; q <= e; ++q)
        for (int j = 0; j < phases; ++j) b.add_state({q, e, j});
    return b;
  }
};

// Index map for the ν = 0 reduction {0} ∪ {(q,j) : 1 ≤ q ≤ top}; every state
// carries estimate `m`.
struct LevelSpace {
  int top;
  int phases;
  int estimate;

  int size() const { return 1 + top * phases; }
  int at(int q, int j) const { return q == 0 ? 0 : 1 + (q - 1) * phases + j; }

  GeneratorBuilder make_builder() const {
    GeneratorBuilder b;
    b.add_state({0, estimate, -1});
    for (int q = 1; q <= top; ++q)
      for (int j = 0; j < phases; ++j) b.add_state({q, estimate, j});
    return b;
  }
};

// x rounded to the nearest integer when within 1e−12·max(1,|x|).
inline double snap_integer(double x) {
  const double r = std::round(x);
  return std::abs(x - r) <= 1e-12 * std::max(1.0, std::abs(x)) ? r : x;
}

inline bool is_integer(double x) { return std::round(x) == x; }

}  // namespace cavitylb::detail
