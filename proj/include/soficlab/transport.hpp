#pragma once

// Kantorovich distance between window distributions under the weighted-sup
// ground metric cost(s,t) = max_{i<=m} (1/i) [s_i != t_i].
//
// The solver is an exact dense transportation network simplex: north-west
// corner start on the sorted supports, Dantzig pricing with a Bland fallback
// for anti-cycling, deterministic tie-breaks throughout. Window values are
// always reported together with the truncation sandwich
// [l_m, l_m + 1/(m+1)] for the untruncated shift metric.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "soficlab/distribution.hpp"

namespace soficlab {

/// Weighted-sup ground metric on length-m patterns; coordinate i (1-based)
/// contributes 1/i when the symbols differ.
inline double ground_distance(const Pattern& s, const Pattern& t) {
  if (s.size() != t.size()) throw std::invalid_argument("ground_distance: length mismatch");
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] != t[i]) return 1.0 / static_cast<double>(i + 1);  // earliest difference dominates
  return 0.0;
}

struct Coupling {
  struct Entry {
    Pattern left;
    Pattern right;
    double mass;
  };
  std::vector<Entry> entries;
};

struct DistanceCertificate {
  std::size_t m = 0;
  double value = 0.0;  // exact optimum of the window-m problem
  double lower = 0.0;  // = value
  double upper = 0.0;  // = value + 1/(m+1), sound for the untruncated metric
  Coupling coupling;
};

/// Sandwich for the untruncated metric: coordinates beyond m contribute at
/// most 1/(m+1) to the sup and projection is 1-Lipschitz.
inline std::pair<double, double> metric_sandwich(double l_m, std::size_t m) {
  if (l_m < 0.0) throw std::invalid_argument("metric_sandwich: negative window value");
  return {l_m, l_m + 1.0 / static_cast<double>(m + 1)};
}

inline constexpr double kFitSlack = 1e-9;

/// Closed epsilon-closeness predicate on the window value.
inline bool fit_passes(const DistanceCertificate& cert, double eps) {
  return cert.value <= eps + kFitSlack;
}

namespace detail {

// Dense transportation problem: R supplies, C demands, all arcs present.
class TransportationSimplex {
 public:
  TransportationSimplex(std::vector<double> supply, std::vector<double> demand,
                        std::vector<double> cost)
      : a_(std::move(supply)), b_(std::move(demand)), cost_(std::move(cost)),
        R_(a_.size()), C_(b_.size()) {
    if (cost_.size() != R_ * C_) throw std::invalid_argument("simplex: bad cost matrix");
  }

  void solve() {
    northwest_start();
    const std::size_t nodes = R_ + C_;
    const std::uint64_t dantzig_limit = 64 * static_cast<std::uint64_t>(nodes) + 1024;
    const std::uint64_t hard_cap = 2'000'000 + 4096 * static_cast<std::uint64_t>(nodes);
    std::uint64_t pivots = 0;
    for (;;) {
      compute_duals();
      const bool bland = pivots > dantzig_limit;
      std::size_t er = 0, ec = 0;
      if (!find_entering(bland, er, ec)) break;
      pivot(er, ec);
      if (++pivots > hard_cap) throw std::runtime_error("simplex: pivot cap exceeded");
    }
  }

  double objective() const {
    // fixed (r, c) order + Neumaier summation: deterministic value
    double sum = 0.0, comp = 0.0;
    for (const auto& cell : sorted_cells()) {
      const double term = cell.flow * cost_[cell.r * C_ + cell.c];
      const double t = sum + term;
      comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
      sum = t;
    }
    return std::max(0.0, sum + comp);
  }

  struct Cell {
    std::size_t r, c;
    double flow;
  };

  std::vector<Cell> sorted_cells() const {
    std::vector<Cell> out;
    out.reserve(basic_.size());
    for (const auto& cell : basic_)
      if (cell.flow > 1e-15) out.push_back(cell);
    std::sort(out.begin(), out.end(), [](const Cell& x, const Cell& y) {
      return x.r != y.r ? x.r < y.r : x.c < y.c;
    });
    return out;
  }

 private:
  static constexpr double kReducedEps = 1e-12;

  void northwest_start() {
    basic_.clear();
    std::size_t r = 0, c = 0;
    double ra = a_[0], cb = b_[0];
    for (;;) {
      const double f = std::min(ra, cb);
      basic_.push_back({r, c, f});
      ra -= f;
      cb -= f;
      const bool last_r = (r + 1 == R_), last_c = (c + 1 == C_);
      if (last_r && last_c) break;
      if ((ra <= cb && !last_r) || last_c) {
        ++r;
        ra = a_[r];
      } else {
        ++c;
        cb = b_[c];
      }
    }
  }

  void compute_duals() {
    u_.assign(R_, 0.0);
    v_.assign(C_, 0.0);
    std::vector<std::vector<std::size_t>> adj(R_ + C_);
    for (std::size_t i = 0; i < basic_.size(); ++i) {
      adj[basic_[i].r].push_back(i);
      adj[R_ + basic_[i].c].push_back(i);
    }
    std::vector<char> seen(R_ + C_, 0);
    std::vector<std::size_t> stack{0};  // row 0 root, u[0] = 0
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t ci : adj[node]) {
        const auto& cell = basic_[ci];
        const std::size_t other = (node < R_) ? R_ + cell.c : cell.r;
        if (seen[other]) continue;
        seen[other] = 1;
        if (node < R_)
          v_[cell.c] = cost_[cell.r * C_ + cell.c] - u_[cell.r];
        else
          u_[cell.r] = cost_[cell.r * C_ + cell.c] - v_[cell.c];
        stack.push_back(other);
      }
    }
  }

  bool find_entering(bool bland, std::size_t& er, std::size_t& ec) const {
    double best = -kReducedEps;
    bool found = false;
    for (std::size_t r = 0; r < R_; ++r) {
      for (std::size_t c = 0; c < C_; ++c) {
        const double reduced = cost_[r * C_ + c] - u_[r] - v_[c];
        if (reduced < (bland ? -kReducedEps : best)) {
          er = r;
          ec = c;
          best = reduced;
          found = true;
          if (bland) return true;  // first eligible arc in scan order
        }
      }
    }
    return found;
  }

  void pivot(std::size_t er, std::size_t ec) {
    // path from col ec back to row er through the basis tree
    const std::size_t nodes = R_ + C_;
    std::vector<std::vector<std::size_t>> adj(nodes);
    for (std::size_t i = 0; i < basic_.size(); ++i) {
      adj[basic_[i].r].push_back(i);
      adj[R_ + basic_[i].c].push_back(i);
    }
    std::vector<std::ptrdiff_t> via(nodes, -1);  // basic cell used to reach node
    std::vector<std::ptrdiff_t> prev(nodes, -1);
    std::vector<char> seen(nodes, 0);
    std::vector<std::size_t> queue{R_ + ec};
    seen[R_ + ec] = 1;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const std::size_t node = queue[qi];
      if (node == er) break;
      for (std::size_t ci : adj[node]) {
        const auto& cell = basic_[ci];
        const std::size_t other = (node < R_) ? R_ + cell.c : cell.r;
        if (seen[other]) continue;
        seen[other] = 1;
        via[other] = static_cast<std::ptrdiff_t>(ci);
        prev[other] = static_cast<std::ptrdiff_t>(node);
        queue.push_back(other);
      }
    }
    if (!seen[er]) throw std::logic_error("simplex: basis not spanning");

    // collect path cells from er back to ec; alternate -,+ starting with -
    std::vector<std::size_t> path;
    for (std::size_t node = er; node != R_ + ec;
         node = static_cast<std::size_t>(prev[node]))
      path.push_back(static_cast<std::size_t>(via[node]));
    // path[0] is incident to row er; walking from the entering arc around the
    // cycle, odd-distance arcs (path.back(), path[path.size()-3], ...) lose
    // flow. Arcs at even index from the ec end carry -theta.
    std::vector<int> sign(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
      const std::size_t from_ec = path.size() - 1 - i;  // 0 = adjacent to col ec
      sign[i] = (from_ec % 2 == 0) ? -1 : +1;
    }
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leaving = path.size();
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (sign[i] < 0 && basic_[path[i]].flow < theta) {
        theta = basic_[path[i]].flow;
        leaving = i;
      }
    }
    if (leaving == path.size()) throw std::logic_error("simplex: no leaving arc");
    for (std::size_t i = 0; i < path.size(); ++i)
      basic_[path[i]].flow += sign[i] * theta;
    basic_[path[leaving]] = {er, ec, theta};
  }

  std::vector<double> a_, b_, cost_;
  std::size_t R_, C_;
  std::vector<Cell> basic_;
  std::vector<double> u_, v_;
};

// canonical orientation so that kantorovich(a, b) and kantorovich(b, a)
// run the identical solve and agree bitwise
inline int compare_distributions(const WindowDistribution& a, const WindowDistribution& b) {
  auto ia = a.mass().begin();
  auto ib = b.mass().begin();
  while (ia != a.mass().end() && ib != b.mass().end()) {
    if (ia->first != ib->first) return ia->first < ib->first ? -1 : 1;
    if (ia->second != ib->second) return ia->second < ib->second ? -1 : 1;
    ++ia;
    ++ib;
  }
  if (ia != a.mass().end()) return 1;
  if (ib != b.mass().end()) return -1;
  return 0;
}

}  // namespace detail

/// Exact optimal transport between two window distributions; returns the
/// optimum, the truncation sandwich, and an optimal coupling. Symmetric by
/// construction: the solve is canonically oriented.
inline DistanceCertificate kantorovich(const WindowDistribution& d1,
                                       const WindowDistribution& d2) {
  require_comparable(d1, d2, "kantorovich");
  if (detail::compare_distributions(d2, d1) < 0) {
    DistanceCertificate cert = kantorovich(d2, d1);
    for (auto& entry : cert.coupling.entries) std::swap(entry.left, entry.right);
    std::sort(cert.coupling.entries.begin(), cert.coupling.entries.end(),
              [](const Coupling::Entry& x, const Coupling::Entry& y) {
                return x.left != y.left ? x.left < y.left : x.right < y.right;
              });
    return cert;
  }
  std::vector<const Pattern*> rows, cols;
  std::vector<double> a, b;
  for (const auto& [pattern, p] : d1.mass()) {
    rows.push_back(&pattern);
    a.push_back(p);
  }
  for (const auto& [pattern, p] : d2.mass()) {
    cols.push_back(&pattern);
    b.push_back(p);
  }
  const std::size_t R = rows.size(), C = cols.size();
  if (R * C > (1u << 24)) throw std::invalid_argument("kantorovich: support too large");

  double sum_a = 0.0, sum_b = 0.0;
  for (double x : a) sum_a += x;
  for (double x : b) sum_b += x;
  const double scale = sum_a / sum_b;  // both within 1e-9 of 1 by construction
  for (double& x : b) x *= scale;

  std::vector<double> cost(R * C);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) cost[r * C + c] = ground_distance(*rows[r], *cols[c]);

  detail::TransportationSimplex simplex(std::move(a), std::move(b), std::move(cost));
  simplex.solve();

  DistanceCertificate cert;
  cert.m = d1.m();
  cert.value = simplex.objective();
  auto [lo, hi] = metric_sandwich(cert.value, d1.m());
  cert.lower = lo;
  cert.upper = hi;
  for (const auto& cell : simplex.sorted_cells())
    cert.coupling.entries.push_back({*rows[cell.r], *cols[cell.c], cell.flow});
  return cert;
}

}  // namespace soficlab
