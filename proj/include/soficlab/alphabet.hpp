#pragma once

// Finite alphabets, patterns (windows of symbols), and symbol maps.
// Patterns are stored as alphabet indices; their JSON/string form
// concatenates labels when every label is a single character and joins with
// '|' otherwise (product alphabets use "(x,y)" labels).

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace soficlab {

using Symbol = std::uint16_t;
using Pattern = std::vector<Symbol>;

class Alphabet {
 public:
  explicit Alphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw std::invalid_argument("Alphabet: empty");
    single_char_ = true;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i].empty()) throw std::invalid_argument("Alphabet: empty label");
      if (labels_[i].size() != 1) single_char_ = false;
      for (std::size_t j = 0; j < i; ++j)
        if (labels_[i] == labels_[j])
          throw std::invalid_argument("Alphabet: duplicate label \"" + labels_[i] + "\"");
    }
    if (labels_.size() > 60000) throw std::invalid_argument("Alphabet: too many symbols");
  }

  std::size_t size() const { return labels_.size(); }
  const std::string& label(Symbol s) const { return labels_.at(s); }
  const std::vector<std::string>& labels() const { return labels_; }
  bool single_char() const { return single_char_; }

  std::optional<Symbol> find(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == label) return static_cast<Symbol>(i);
    return std::nullopt;
  }

  Symbol at(const std::string& label) const {
    auto s = find(label);
    if (!s) throw std::invalid_argument("Alphabet: unknown label \"" + label + "\"");
    return *s;
  }

  friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.labels_ == b.labels_; }
  friend bool operator!=(const Alphabet& a, const Alphabet& b) { return !(a == b); }

 private:
  std::vector<std::string> labels_;
  bool single_char_ = true;
};

/// A x B with labels "(x,y)" and row-major symbol index i * |B| + j.
inline Alphabet pair_alphabet(const Alphabet& a, const Alphabet& b) {
  std::vector<std::string> labels;
  labels.reserve(a.size() * b.size());
  for (const auto& la : a.labels())
    for (const auto& lb : b.labels()) labels.push_back("(" + la + "," + lb + ")");
  return Alphabet(std::move(labels));
}

inline Symbol pair_symbol(Symbol sa, Symbol sb, const Alphabet& b) {
  return static_cast<Symbol>(sa * b.size() + sb);
}
inline std::pair<Symbol, Symbol> unpair_symbol(Symbol s, const Alphabet& b) {
  return {static_cast<Symbol>(s / b.size()), static_cast<Symbol>(s % b.size())};
}

inline Pattern zip_patterns(const Pattern& s, const Pattern& t, const Alphabet& b) {
  if (s.size() != t.size()) throw std::invalid_argument("zip_patterns: length mismatch");
  Pattern out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = pair_symbol(s[i], t[i], b);
  return out;
}
inline std::pair<Pattern, Pattern> unzip_pattern(const Pattern& p, const Alphabet& b) {
  Pattern s(p.size()), t(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto [x, y] = unpair_symbol(p[i], b);
    s[i] = x;
    t[i] = y;
  }
  return {std::move(s), std::move(t)};
}

inline std::string pattern_key(const Alphabet& a, const Pattern& p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i && !a.single_char()) out += '|';
    out += a.label(p[i]);
  }
  return out;
}

inline Pattern parse_pattern(const Alphabet& a, const std::string& key) {
  Pattern out;
  if (a.single_char()) {
    for (char c : key) out.push_back(a.at(std::string(1, c)));
    return out;
  }
  std::size_t start = 0;
  while (start <= key.size()) {
    std::size_t end = key.find('|', start);
    if (end == std::string::npos) end = key.size();
    out.push_back(a.at(key.substr(start, end - start)));
    if (end == key.size()) break;
    start = end + 1;
  }
  return out;
}

/// A map between alphabets applied symbol-wise (tower projections, codes).
struct SymbolMap {
  Alphabet in;
  Alphabet out;
  std::vector<Symbol> map;  // indexed by input symbol

  SymbolMap(Alphabet in_a, Alphabet out_a, std::vector<Symbol> m)
      : in(std::move(in_a)), out(std::move(out_a)), map(std::move(m)) {
    if (map.size() != in.size()) throw std::invalid_argument("SymbolMap: wrong table size");
    for (Symbol s : map)
      if (s >= out.size()) throw std::invalid_argument("SymbolMap: image out of range");
  }

  static SymbolMap identity(const Alphabet& a) {
    std::vector<Symbol> m(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) m[i] = static_cast<Symbol>(i);
    return SymbolMap(a, a, std::move(m));
  }

  Symbol operator()(Symbol s) const { return map.at(s); }

  Pattern apply(const Pattern& p) const {
    Pattern out_p(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out_p[i] = map.at(p[i]);
    return out_p;
  }
};

/// Componentwise composition g after f (f: A->B, g: B->C).
inline SymbolMap compose(const SymbolMap& g, const SymbolMap& f) {
  if (f.out != g.in) throw std::invalid_argument("compose(SymbolMap): alphabet mismatch");
  std::vector<Symbol> m(f.in.size());
  for (std::size_t s = 0; s < f.in.size(); ++s) m[s] = g(f(static_cast<Symbol>(s)));
  return SymbolMap(f.in, g.out, std::move(m));
}

}  // namespace soficlab
