#pragma once

// Shift-invariant measures on A^G represented through exact marginal queries:
// the distribution of (x(p_1), ..., x(p_k)) at arbitrary group positions.
// Window marginals are joints at the first m enumerated elements.
//
// Kinds: bernoulli (product measure), markov (stationary chain on the
// integers), block_code (sliding-block factor of a parent oracle), product
// (independent pairing of two oracles over the same group).

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "soficlab/alphabet.hpp"
#include "soficlab/distribution.hpp"
#include "soficlab/group.hpp"

namespace soficlab {

enum class OracleKind { bernoulli, markov, block_code, product };

/// Sliding-block code: a total map B^{W_w} -> A, stored densely by the
/// mixed-radix rank of the input pattern (coordinate 1 most significant).
struct BlockCode {
  Alphabet in;
  Alphabet out;
  std::size_t window;
  std::vector<Symbol> table;

  BlockCode(Alphabet in_a, Alphabet out_a, std::size_t w, std::vector<Symbol> entries)
      : in(std::move(in_a)), out(std::move(out_a)), window(w), table(std::move(entries)) {
    if (window < 1) throw std::invalid_argument("BlockCode: window must be >= 1");
    std::size_t expected = 1;
    for (std::size_t i = 0; i < window; ++i) {
      if (expected > (1u << 22) / in.size())
        throw std::invalid_argument("BlockCode: input window too large");
      expected *= in.size();
    }
    if (table.size() != expected)
      throw std::invalid_argument("BlockCode: code must be total on the input window");
    for (Symbol s : table)
      if (s >= out.size()) throw std::invalid_argument("BlockCode: symbol outside output alphabet");
  }

  std::size_t rank(const Pattern& p) const {
    std::size_t r = 0;
    for (Symbol s : p) r = r * in.size() + s;
    return r;
  }

  Symbol apply(const Pattern& p) const {
    if (p.size() != window) throw std::invalid_argument("BlockCode: wrong pattern length");
    return table[rank(p)];
  }
};

class CylinderOracle {
 public:
  static CylinderOracle bernoulli(Group group, Alphabet alphabet, std::vector<double> base);
  static CylinderOracle markov(Group group, Alphabet alphabet,
                               std::vector<std::vector<double>> transition,
                               std::optional<std::vector<double>> stationary = std::nullopt);
  static CylinderOracle block_code(CylinderOracle parent, BlockCode code);
  static CylinderOracle product(CylinderOracle left, CylinderOracle right);

  const Group& group() const { return impl_->group; }
  const Alphabet& alphabet() const { return impl_->alphabet; }
  OracleKind kind() const { return impl_->kind; }
  const std::vector<double>& base() const { return impl_->base; }
  const std::vector<std::vector<double>>& transition() const { return impl_->transition; }
  const std::vector<double>& stationary() const { return impl_->stationary; }

  /// Joint distribution at explicit positions (window m = positions count).
  WindowDistribution joint(const std::vector<GroupElement>& positions) const;
  /// Distribution of (x(gamma_1), ..., x(gamma_m)); memoized per m.
  WindowDistribution marginal(std::size_t m) const;

 private:
  struct Impl {
    OracleKind kind = OracleKind::bernoulli;
    Group group;
    Alphabet alphabet;
    std::vector<double> base;                       // bernoulli
    std::vector<std::vector<double>> transition;    // markov
    std::vector<double> stationary;                 // markov
    std::shared_ptr<const Impl> parent;             // block_code
    std::optional<BlockCode> code;                  // block_code
    std::shared_ptr<const Impl> left, right;        // product

    mutable std::mutex memo_mu;
    mutable std::map<std::size_t, WindowDistribution> marginal_memo;

    Impl(Group g, Alphabet a) : group(std::move(g)), alphabet(std::move(a)) {}
  };

  explicit CylinderOracle(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

namespace detail {

inline void check_distribution_vector(const std::vector<double>& p, const char* who) {
  double total = 0.0;
  for (double x : p) {
    if (x < -kMassTolerance) throw std::invalid_argument(std::string(who) + ": negative mass");
    total += x;
  }
  if (std::abs(total - 1.0) > kMassTolerance)
    throw std::invalid_argument(std::string(who) + ": masses sum to " + std::to_string(total));
}

inline std::vector<std::vector<double>> mat_mul(const std::vector<std::vector<double>>& a,
                                                const std::vector<std::vector<double>>& b) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline std::vector<std::vector<double>> mat_pow(std::vector<std::vector<double>> p,
                                                std::uint64_t e) {
  const std::size_t n = p.size();
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) out[i][i] = 1.0;
  while (e > 0) {
    if (e & 1u) out = mat_mul(out, p);
    p = mat_mul(p, p);
    e >>= 1u;
  }
  return out;
}

/// Solve pi P = pi, sum pi = 1 by Gaussian elimination.
inline std::vector<double> stationary_of(const std::vector<std::vector<double>>& p) {
  const std::size_t n = p.size();
  // rows of M: (P^T - I) x = 0, last row replaced by the normalization
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i][j] = p[j][i] - (i == j ? 1.0 : 0.0);
  for (std::size_t j = 0; j < n; ++j) m[n - 1][j] = 1.0;
  m[n - 1][n] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) < 1e-12)
      throw std::invalid_argument("markov: stationary distribution is not unique");
    std::swap(m[col], m[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (std::size_t j = col; j <= n; ++j) m[r][j] -= f * m[col][j];
    }
  }
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = m[i][n] / m[i][i];
  return pi;
}

}  // namespace detail

inline CylinderOracle CylinderOracle::bernoulli(Group group, Alphabet alphabet,
                                                std::vector<double> base) {
  if (base.size() != alphabet.size())
    throw std::invalid_argument("bernoulli: base size does not match alphabet");
  detail::check_distribution_vector(base, "bernoulli");
  auto impl = std::make_shared<Impl>(std::move(group), std::move(alphabet));
  impl->kind = OracleKind::bernoulli;
  impl->base = std::move(base);
  return CylinderOracle(std::move(impl));
}

inline CylinderOracle CylinderOracle::markov(Group group, Alphabet alphabet,
                                             std::vector<std::vector<double>> transition,
                                             std::optional<std::vector<double>> stationary) {
  if (group.family() != GroupFamily::integers)
    throw std::invalid_argument("markov: unsupported group (integers only)");
  const std::size_t n = alphabet.size();
  if (transition.size() != n)
    throw std::invalid_argument("markov: transition matrix size does not match alphabet");
  for (const auto& row : transition) {
    if (row.size() != n) throw std::invalid_argument("markov: transition matrix not square");
    detail::check_distribution_vector(row, "markov transition row");
  }
  std::vector<double> pi = stationary ? *stationary : detail::stationary_of(transition);
  if (pi.size() != n) throw std::invalid_argument("markov: stationary vector size mismatch");
  detail::check_distribution_vector(pi, "markov stationary");
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += pi[i] * transition[i][j];
    if (std::abs(acc - pi[j]) > 1e-7)
      throw std::invalid_argument("markov: vector is not stationary for the transition matrix");
  }
  auto impl = std::make_shared<Impl>(std::move(group), std::move(alphabet));
  impl->kind = OracleKind::markov;
  impl->transition = std::move(transition);
  impl->stationary = std::move(pi);
  return CylinderOracle(std::move(impl));
}

inline CylinderOracle CylinderOracle::block_code(CylinderOracle parent, BlockCode code) {
  if (code.in != parent.alphabet())
    throw std::invalid_argument("block_code: code input alphabet differs from parent");
  auto impl = std::make_shared<Impl>(parent.group(), code.out);
  impl->kind = OracleKind::block_code;
  impl->parent = parent.impl_;
  impl->code = std::move(code);
  return CylinderOracle(std::move(impl));
}

inline CylinderOracle CylinderOracle::product(CylinderOracle left, CylinderOracle right) {
  if (left.group() != right.group())
    throw std::invalid_argument("product oracle: groups differ");
  auto impl = std::make_shared<Impl>(left.group(), pair_alphabet(left.alphabet(), right.alphabet()));
  impl->kind = OracleKind::product;
  impl->left = left.impl_;
  impl->right = right.impl_;
  return CylinderOracle(std::move(impl));
}

inline CylinderOracle product_oracle(const CylinderOracle& left, const CylinderOracle& right) {
  return CylinderOracle::product(left, right);
}

inline WindowDistribution CylinderOracle::joint(const std::vector<GroupElement>& positions) const {
  const std::size_t m = positions.size();
  if (m == 0) throw std::invalid_argument("joint: empty position list");
  for (const auto& p : positions)
    if (p.group() != group()) throw std::invalid_argument("joint: position of a different group");
  const std::size_t asize = alphabet().size();

  switch (impl_->kind) {
    case OracleKind::bernoulli:
    case OracleKind::markov: {
      // deduplicate positions; coordinates sharing a position share a symbol
      std::vector<GroupElement> distinct;
      std::vector<std::size_t> slot(m);
      for (std::size_t i = 0; i < m; ++i) {
        std::size_t found = distinct.size();
        for (std::size_t k = 0; k < distinct.size(); ++k)
          if (distinct[k] == positions[i]) {
            found = k;
            break;
          }
        if (found == distinct.size()) distinct.push_back(positions[i]);
        slot[i] = found;
      }
      const std::size_t u = distinct.size();
      double states = 1.0;
      for (std::size_t i = 0; i < u; ++i) states *= static_cast<double>(asize);
      if (states > static_cast<double>(1u << 22))
        throw std::invalid_argument("joint: window too large to enumerate");

      // markov: order the distinct positions ascending and precompute the
      // gap transition powers between neighbours
      std::vector<std::size_t> order(u);
      for (std::size_t i = 0; i < u; ++i) order[i] = i;
      std::vector<std::vector<std::vector<double>>> gap_pow;
      if (impl_->kind == OracleKind::markov) {
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
          return std::get<std::int64_t>(distinct[x].form()) <
                 std::get<std::int64_t>(distinct[y].form());
        });
        for (std::size_t k = 0; k + 1 < u; ++k) {
          const auto lo = std::get<std::int64_t>(distinct[order[k]].form());
          const auto hi = std::get<std::int64_t>(distinct[order[k + 1]].form());
          gap_pow.push_back(detail::mat_pow(impl_->transition, static_cast<std::uint64_t>(hi - lo)));
        }
      }

      std::map<Pattern, double> out;
      Pattern assign(u, 0);  // symbol per distinct position, in `order` ordering
      for (;;) {
        double p;
        if (impl_->kind == OracleKind::bernoulli) {
          p = 1.0;
          for (std::size_t k = 0; k < u; ++k) p *= impl_->base[assign[k]];
        } else {
          p = impl_->stationary[assign[0]];
          for (std::size_t k = 0; k + 1 < u; ++k) p *= gap_pow[k][assign[k]][assign[k + 1]];
        }
        if (p > 0.0) {
          Pattern pattern(m);
          std::vector<Symbol> by_slot(u);
          for (std::size_t k = 0; k < u; ++k) by_slot[order[k]] = assign[k];
          for (std::size_t i = 0; i < m; ++i) pattern[i] = by_slot[slot[i]];
          out[pattern] += p;
        }
        std::size_t k = u;
        while (k > 0) {
          if (static_cast<std::size_t>(++assign[k - 1]) < asize) break;
          assign[k - 1] = 0;
          --k;
        }
        if (k == 0) break;
      }
      return WindowDistribution(m, alphabet(), std::move(out));
    }

    case OracleKind::block_code: {
      const BlockCode& code = *impl_->code;
      const std::size_t w = code.window;
      const auto offsets = group().enumerate(w);
      std::vector<GroupElement> needed;
      std::vector<std::vector<std::size_t>> idx(m, std::vector<std::size_t>(w));
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
          const GroupElement q = multiply(positions[i], offsets[j]);
          std::size_t found = needed.size();
          for (std::size_t k = 0; k < needed.size(); ++k)
            if (needed[k] == q) {
              found = k;
              break;
            }
          if (found == needed.size()) needed.push_back(q);
          idx[i][j] = found;
        }
      }
      const CylinderOracle parent(impl_->parent);
      const WindowDistribution parent_joint = parent.joint(needed);
      std::map<Pattern, double> out;
      Pattern input(w);
      for (const auto& [z, p] : parent_joint.mass()) {
        Pattern pattern(m);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < w; ++j) input[j] = z[idx[i][j]];
          pattern[i] = code.apply(input);
        }
        out[pattern] += p;
      }
      return WindowDistribution(m, alphabet(), std::move(out));
    }

    case OracleKind::product: {
      const CylinderOracle left(impl_->left), right(impl_->right);
      return tensor(left.joint(positions), right.joint(positions));
    }
  }
  throw std::logic_error("unreachable");
}

inline WindowDistribution CylinderOracle::marginal(std::size_t m) const {
  if (m == 0) throw std::invalid_argument("marginal: m must be >= 1");
  {
    std::lock_guard<std::mutex> lock(impl_->memo_mu);
    auto it = impl_->marginal_memo.find(m);
    if (it != impl_->marginal_memo.end()) return it->second;
  }
  WindowDistribution d = joint(group().enumerate(m));
  std::lock_guard<std::mutex> lock(impl_->memo_mu);
  return impl_->marginal_memo.emplace(m, std::move(d)).first->second;
}

}  // namespace soficlab
