#include "ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"

namespace cavitylb {

std::string to_string(const StateLabel& s) {
  std::ostringstream os;
  os << '(' << s.level;
  if (s.estimate >= 0) os << ',' << s.estimate;
  if (s.phase >= 0) os << ",j=" << s.phase;
  os << ')';
  return os.str();
}

Generator::Generator(Matrix q, std::vector<StateLabel> labels)
    : q_(std::move(q)), labels_(std::move(labels)) {
  const Eigen::Index n = static_cast<Eigen::Index>(labels_.size());
  if (q_.rows() != n || q_.cols() != n) throw DomainError("generator: matrix/label size mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    double scale = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && q_(i, j) < 0.0)
        throw DomainError("generator: negative off-diagonal rate in row " + to_string(labels_[i]));
      scale = std::max(scale, std::abs(q_(i, j)));
    }
    if (std::abs(q_.row(i).sum()) > 1e-10 * scale)
      throw DomainError("generator: row " + to_string(labels_[i]) + " does not sum to zero");
  }
}

int GeneratorBuilder::add_state(const StateLabel& label) {
  labels_.push_back(label);
  return static_cast<int>(labels_.size()) - 1;
}

void GeneratorBuilder::add_rate(int from, int to, double rate) {
  if (rate < 0.0 || !std::isfinite(rate)) throw DomainError("generator: invalid rate");
  if (from == to || rate == 0.0) return;
  entries_.push_back({from, to, rate});
}

Generator GeneratorBuilder::build() const {
  const int n = size();
  Matrix q = Matrix::Zero(n, n);
  for (const Entry& e : entries_) q(e.from, e.to) += e.rate;
  for (int i = 0; i < n; ++i) {
    double out = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) out += q(i, j);
    q(i, i) = -out;
  }
  return Generator(std::move(q), labels_);
}

namespace {

// Iterative Tarjan; returns the component id of every state.
std::vector<int> strongly_connected(const std::vector<std::vector<int>>& adj, int& count) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<char> on_stack(n, 0);
  int next = 0;
  count = 0;
  struct Frame {
    int v;
    std::size_t edge;
  };
  std::vector<Frame> call;
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < adj[f.v].size()) {
        const int w = adj[f.v][f.edge++];
        if (index[w] < 0) {
          index[w] = low[w] = next++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const int v = f.v;
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
    }
  }
  return comp;
}

// GTH elimination on an irreducible generator given row-major in `a`.
std::vector<double> gth(std::vector<double> a, int n) {
  auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  for (int k = n - 1; k > 0; --k) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += at(k, j);
    if (!(s > 0.0)) throw SolverError("GTH elimination: state cannot reach the rest of its class");
    for (int i = 0; i < k; ++i) {
      const double f = at(i, k) / s;
      at(i, k) = f;
      if (f == 0.0) continue;
      const double* rk = &at(k, 0);
      double* ri = &at(i, 0);
      for (int j = 0; j < k; ++j) ri[j] += f * rk[j];
    }
  }
  std::vector<double> x(n, 0.0);
  x[0] = 1.0;
  for (int j = 1; j < n; ++j) {
    double acc = 0.0;
    for (int i = 0; i < j; ++i) acc += x[i] * at(i, j);
    x[j] = acc;
  }
  double total = 0.0;
  for (double v : x) total += v;
  for (double& v : x) v /= total;
  return x;
}

}  // namespace

StationaryDist stationary(const Generator& gen) {
  const int n = gen.size();
  const Matrix& q = gen.Q();
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && q(i, j) > 0.0) adj[i].push_back(j);

  int count = 0;
  const std::vector<int> comp = strongly_connected(adj, count);
  std::vector<char> closed(count, 1);
  for (int i = 0; i < n; ++i)
    for (int j : adj[i])
      if (comp[j] != comp[i]) closed[comp[i]] = 0;

  std::vector<int> closed_ids;
  for (int c = 0; c < count; ++c)
    if (closed[c]) closed_ids.push_back(c);
  if (closed_ids.size() != 1) {
    std::ostringstream os;
    os << "chain has " << closed_ids.size() << " closed classes; states:";
    for (int c : closed_ids) {
      os << " {";
      int shown = 0;
      for (int i = 0; i < n && shown < 4; ++i)
        if (comp[i] == c) {
          os << (shown++ ? " " : "") << to_string(gen.labels()[i]);
        }
      os << "}";
    }
    throw SolverError(os.str());
  }

  std::vector<int> members;
  for (int i = 0; i < n; ++i)
    if (comp[i] == closed_ids.front()) members.push_back(i);
  const int r = static_cast<int>(members.size());
  std::vector<double> a(static_cast<std::size_t>(r) * r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) a[static_cast<std::size_t>(i) * r + j] = q(members[i], members[j]);
  const std::vector<double> x = gth(std::move(a), r);

  StationaryDist out;
  out.pi = RowVector::Zero(n);
  for (int i = 0; i < r; ++i) out.pi(members[i]) = x[i];
  out.labels = gen.labels();
  return out;
}

double stationary_residual(const Generator& gen, const StationaryDist& dist) {
  return (dist.pi * gen.Q()).cwiseAbs().maxCoeff();
}

std::vector<double> marginal(const StationaryDist& dist,
                             const std::function<int(const StateLabel&)>& key, int buckets) {
  std::vector<double> out(buckets, 0.0);
  for (std::size_t i = 0; i < dist.labels.size(); ++i) {
    const int b = key(dist.labels[i]);
    if (b < 0 || b >= buckets) throw DomainError("marginal: projection out of range");
    out[b] += dist.pi(static_cast<Eigen::Index>(i));
  }
  return out;
}

double bisect_monotone(const std::function<double(double)>& f, double target, double lo,
                       double hi, double tol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (std::abs(flo - target) <= tol) return lo;
  if (std::abs(fhi - target) <= tol) return hi;
  const bool increasing = fhi > flo;
  if ((target - flo) * (target - fhi) > 0.0) {
    std::ostringstream os;
    os.precision(10);
    os << "bisection: target " << target << " outside [" << std::min(flo, fhi) << ", "
       << std::max(flo, fhi) << "]";
    throw SolverError(os.str());
  }
  const double width = 1e-12 * std::max(1.0, std::abs(hi));
  double mid = 0.5 * (lo + hi);
  while (hi - lo > width) {
    mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm - target) <= tol) return mid;
    if ((fm < target) == increasing) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double find_upper_bracket(const std::function<double(double)>& f, double target, double start,
                          double cap) {
  const double f0 = f(0.0);
  double hi = start;
  while (hi <= cap) {
    const double fh = f(hi);
    if ((f0 - target) * (fh - target) <= 0.0) return hi;
    hi *= 2.0;
  }
  throw SolverError("no bracket for the rate parameter below 1e12");
}

}  // namespace cavitylb
