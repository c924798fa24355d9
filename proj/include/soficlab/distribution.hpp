#pragma once

// Sparse probability distributions over windows A^{W_m}: the computable
// truncation of a shift-space measure. Masses must be nonnegative and sum to
// one within 1e-9.

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "soficlab/alphabet.hpp"

namespace soficlab {

inline constexpr double kMassTolerance = 1e-9;

class WindowDistribution {
 public:
  WindowDistribution(std::size_t m, Alphabet alphabet, std::map<Pattern, double> mass)
      : m_(m), alphabet_(std::move(alphabet)), mass_(std::move(mass)) {
    double total = 0.0;
    for (auto it = mass_.begin(); it != mass_.end();) {
      const auto& [pattern, p] = *it;
      if (pattern.size() != m_)
        throw std::invalid_argument("WindowDistribution: pattern length != m");
      for (Symbol s : pattern)
        if (s >= alphabet_.size())
          throw std::invalid_argument("WindowDistribution: symbol outside alphabet");
      if (p < -kMassTolerance)
        throw std::invalid_argument("WindowDistribution: negative mass");
      total += p;
      if (p <= 0.0) {
        it = mass_.erase(it);  // keep the support sparse and positive
      } else {
        ++it;
      }
    }
    if (std::abs(total - 1.0) > kMassTolerance)
      throw std::invalid_argument("WindowDistribution: masses sum to " + std::to_string(total));
  }

  std::size_t m() const { return m_; }
  const Alphabet& alphabet() const { return alphabet_; }
  const std::map<Pattern, double>& mass() const { return mass_; }
  double prob(const Pattern& p) const {
    auto it = mass_.find(p);
    return it == mass_.end() ? 0.0 : it->second;
  }

 private:
  std::size_t m_;
  Alphabet alphabet_;
  std::map<Pattern, double> mass_;
};

inline void require_comparable(const WindowDistribution& a, const WindowDistribution& b,
                               const char* who) {
  if (a.m() != b.m()) throw std::invalid_argument(std::string(who) + ": window size mismatch");
  if (a.alphabet() != b.alphabet())
    throw std::invalid_argument(std::string(who) + ": alphabet mismatch");
}

/// (1/2) sum |p - q| over the union support.
inline double total_variation(const WindowDistribution& a, const WindowDistribution& b) {
  require_comparable(a, b, "total_variation");
  double acc = 0.0;
  auto ia = a.mass().begin();
  auto ib = b.mass().begin();
  while (ia != a.mass().end() || ib != b.mass().end()) {
    if (ib == b.mass().end() || (ia != a.mass().end() && ia->first < ib->first)) {
      acc += ia->second;
      ++ia;
    } else if (ia == a.mass().end() || ib->first < ia->first) {
      acc += ib->second;
      ++ib;
    } else {
      acc += std::abs(ia->second - ib->second);
      ++ia;
      ++ib;
    }
  }
  return acc / 2.0;
}

/// Pushforward along a symbol map applied coordinate-wise.
inline WindowDistribution pushforward(const WindowDistribution& d, const SymbolMap& pi) {
  if (pi.in != d.alphabet()) throw std::invalid_argument("pushforward: alphabet mismatch");
  std::map<Pattern, double> out;
  for (const auto& [pattern, p] : d.mass()) out[pi.apply(pattern)] += p;
  return WindowDistribution(d.m(), pi.out, std::move(out));
}

/// Marginal onto the first m2 window coordinates.
inline WindowDistribution restrict_window(const WindowDistribution& d, std::size_t m2) {
  if (m2 > d.m()) throw std::invalid_argument("restrict_window: m2 > m");
  std::map<Pattern, double> out;
  for (const auto& [pattern, p] : d.mass())
    out[Pattern(pattern.begin(), pattern.begin() + static_cast<std::ptrdiff_t>(m2))] += p;
  return WindowDistribution(m2, d.alphabet(), std::move(out));
}

/// Exact tensor after pairing coordinates: mass(zip(s,t)) = p(s) * q(t).
inline WindowDistribution tensor(const WindowDistribution& a, const WindowDistribution& b) {
  if (a.m() != b.m()) throw std::invalid_argument("tensor: window size mismatch");
  const Alphabet paired = pair_alphabet(a.alphabet(), b.alphabet());
  std::map<Pattern, double> out;
  for (const auto& [s, p] : a.mass())
    for (const auto& [t, q] : b.mass()) out[zip_patterns(s, t, b.alphabet())] += p * q;
  return WindowDistribution(a.m(), paired, std::move(out));
}

}  // namespace soficlab
