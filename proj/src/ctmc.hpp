#pragma once

#include <functional>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace cavitylb {

// State descriptor shared by every cavity chain. `level` is the actual queue
// length; `estimate` and `phase` are −1 where a chain does not track them
// (e.g. empty states carry no service phase).
struct StateLabel {
  int level = 0;
  int estimate = -1;
  int phase = -1;

  friend bool operator==(const StateLabel&, const StateLabel&) = default;
};

std::string to_string(const StateLabel& s);

// Dense CTMC rate matrix with one label per state.
class Generator {
 public:
  // Throws DomainError if off-diagonal entries are negative or a row sum
  // deviates from 0 by more than 1e−10 (relative to the row's largest rate).
  Generator(Matrix q, std::vector<StateLabel> labels);

  const Matrix& Q() const { return q_; }
  const std::vector<StateLabel>& labels() const { return labels_; }
  int size() const { return static_cast<int>(labels_.size()); }

 private:
  Matrix q_;
  std::vector<StateLabel> labels_;
};

// Accumulates off-diagonal rates; the diagonal is set to minus the row sum on
// build(), so self-transitions are simply dropped.
class GeneratorBuilder {
 public:
  int add_state(const StateLabel& label);
  void add_rate(int from, int to, double rate);
  int size() const { return static_cast<int>(labels_.size()); }
  Generator build() const;

 private:
  struct Entry {
    int from;
    int to;
    double rate;
  };
  std::vector<StateLabel> labels_;
  std::vector<Entry> entries_;
};

struct StationaryDist {
  RowVector pi;
  std::vector<StateLabel> labels;
};

// Stationary law via GTH elimination restricted to the unique closed
// communicating class; transient states get probability 0. Throws
// SolverError when the chain has more than one closed class.
StationaryDist stationary(const Generator& gen);

// ‖πQ‖∞
double stationary_residual(const Generator& gen, const StationaryDist& dist);

// Sums π over classes key(label) ∈ [0, buckets). Labels mapped outside the
// range are rejected.
std::vector<double> marginal(const StationaryDist& dist,
                             const std::function<int(const StateLabel&)>& key, int buckets);

// Root of a monotone f on [lo, hi]: returns x with |f(x) − target| ≤ tol or
// once the bracket is narrower than 1e−12·max(1, |hi|). Throws SolverError
// when target is not between f(lo) and f(hi).
double bisect_monotone(const std::function<double(double)>& f, double target, double lo,
                       double hi, double tol = 1e-10);

// Upper end of a bracket for a monotone rate parameter: starting at 1 the
// bound is doubled until f crosses target; gives up past 1e12.
double find_upper_bracket(const std::function<double(double)>& f, double target,
                          double start = 1.0, double cap = 1e12);

}  // namespace cavitylb
