// Published simulation settings for the four policies, one table each.
#pragma once

#include <string>
#include <vector>

#include "simulator.hpp"

namespace cavitylb {

struct TableRow {
  int table = 0;  // 1 push, 2 waterfill, 3 pull, 4 pooling
  Policy policy = Policy::Push;
  int setting = 0;  // 0..3, the job-size setting within the table
  std::string ph_spec;
  PhaseType ph = make_exponential();
  double lambda = 0.0;
  double rate = 0.0;  // δ for push/waterfill/pull, p for pooling
  double C = 0.0;     // waterfill only
  int N = 0;
  // reference columns as published
  double sim = 0.0;
  double conf = 0.0;
  double limit = 0.0;
  double rel_err_pct = 0.0;

  // Pull rows are read with δ₁ = 0, i.e. only idle servers send updates.
  PolicyParams params() const;
};

// Rows of table n ∈ {1,2,3,4}: four settings × N ∈ {10², 10³, 10⁴, 10⁵}.
std::vector<TableRow> table_rows(int n);

}  // namespace cavitylb
