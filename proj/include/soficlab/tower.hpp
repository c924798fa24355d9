#pragma once

// Towers of observables: refining alphabets A_1, A_2, ... linked by
// projections pi_{i,j}: A_i -> A_j for i > j obeying the composition law.
// Towers are inputs; only the composition law is verified (sufficiency is
// a modelling assumption).

#include <map>
#include <stdexcept>
#include <vector>

#include "soficlab/alphabet.hpp"
#include "soficlab/distribution.hpp"

namespace soficlab {

class ObservableTower {
 public:
  /// Build from consecutive downward maps: down[i] maps level i+1 to level i
  /// (0-based levels). All other projections are their compositions, so the
  /// composition law holds by construction.
  static ObservableTower from_consecutive(std::vector<Alphabet> levels,
                                          std::vector<SymbolMap> down) {
    if (levels.empty()) throw std::invalid_argument("tower: no levels");
    if (down.size() + 1 != levels.size())
      throw std::invalid_argument("tower: need one downward map per consecutive pair");
    ObservableTower t;
    t.levels_ = std::move(levels);
    for (std::size_t i = 0; i + 1 < t.levels_.size(); ++i) {
      const SymbolMap& step = down[i];
      if (step.in != t.levels_[i + 1] || step.out != t.levels_[i])
        throw std::invalid_argument("tower: downward map " + std::to_string(i) +
                                    " has wrong alphabets");
      t.proj_.emplace(std::make_pair(i + 1, i), step);
      for (std::size_t j = 0; j < i; ++j)
        t.proj_.emplace(std::make_pair(i + 1, j),
                        compose(t.projection(i, j), step));
    }
    return t;
  }

  /// Build from explicit pairwise projections; verifies the composition law
  /// exhaustively on symbols.
  static ObservableTower from_pairs(std::vector<Alphabet> levels,
                                    std::map<std::pair<std::size_t, std::size_t>, SymbolMap> proj) {
    if (levels.empty()) throw std::invalid_argument("tower: no levels");
    ObservableTower t;
    t.levels_ = std::move(levels);
    t.proj_ = std::move(proj);
    for (std::size_t i = 1; i < t.levels_.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const SymbolMap& p = t.projection(i, j);
        if (p.in != t.levels_[i] || p.out != t.levels_[j])
          throw std::invalid_argument("tower: projection has wrong alphabets");
      }
    }
    for (std::size_t k = 2; k < t.levels_.size(); ++k)
      for (std::size_t j = 1; j < k; ++j)
        for (std::size_t i = 0; i < j; ++i) {
          const SymbolMap composed = compose(t.projection(j, i), t.projection(k, j));
          if (composed.map != t.projection(k, i).map)
            throw std::invalid_argument("tower: composition law violated at (" +
                                        std::to_string(k) + "," + std::to_string(j) + "," +
                                        std::to_string(i) + ")");
        }
    return t;
  }

  std::size_t depth() const { return levels_.size(); }
  const Alphabet& level(std::size_t i) const { return levels_.at(i); }

  /// pi_{from,to} for from > to (0-based levels).
  const SymbolMap& projection(std::size_t from, std::size_t to) const {
    if (from <= to) throw std::invalid_argument("tower: projection requires from > to");
    auto it = proj_.find({from, to});
    if (it == proj_.end()) throw std::invalid_argument("tower: missing projection");
    return it->second;
  }

 private:
  ObservableTower() = default;
  std::vector<Alphabet> levels_;
  std::map<std::pair<std::size_t, std::size_t>, SymbolMap> proj_;
};

inline Pattern tower_project(const ObservableTower& t, std::size_t from, std::size_t to,
                             const Pattern& p) {
  return t.projection(from, to).apply(p);
}

inline WindowDistribution tower_project(const ObservableTower& t, std::size_t from, std::size_t to,
                                        const WindowDistribution& d) {
  return pushforward(d, t.projection(from, to));
}

/// Level-wise pairing: level i alphabet A'_i x A''_i, projections componentwise.
inline ObservableTower product_tower(const ObservableTower& a, const ObservableTower& b) {
  if (a.depth() != b.depth()) throw std::invalid_argument("product_tower: depth mismatch");
  std::vector<Alphabet> levels;
  for (std::size_t i = 0; i < a.depth(); ++i)
    levels.push_back(pair_alphabet(a.level(i), b.level(i)));
  std::map<std::pair<std::size_t, std::size_t>, SymbolMap> proj;
  for (std::size_t i = 1; i < a.depth(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const SymbolMap& pa = a.projection(i, j);
      const SymbolMap& pb = b.projection(i, j);
      std::vector<Symbol> table(levels[i].size());
      for (std::size_t s = 0; s < levels[i].size(); ++s) {
        auto [sa, sb] = unpair_symbol(static_cast<Symbol>(s), b.level(i));
        table[s] = pair_symbol(pa(sa), pb(sb), b.level(j));
      }
      proj.emplace(std::make_pair(i, j), SymbolMap(levels[i], levels[j], std::move(table)));
    }
  }
  return ObservableTower::from_pairs(std::move(levels), std::move(proj));
}

}  // namespace soficlab
