#pragma once

// Countable groups with a fixed, documented element enumeration and exact
// arithmetic on canonical forms. Every downstream metric depends on the
// enumeration order, so it is part of each family's contract:
//
//   integers     0, 1, -1, 2, -2, ...
//   lattice(d)   shells of max-norm 0, 1, 2, ...; lexicographic inside a shell
//   free(r)      by word length, then lexicographic with a < a^-1 < b < b^-1 < ...
//   cyclic(q)    residues 0, 1, ..., q-1 (errors past the group order)
//   product      Cantor diagonal over factor indices (i+j ascending, then i),
//                skipping exhausted indices of finite factors
//
// The first enumerated element is always the identity.

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace soficlab {

struct GroupImpl;
class GroupElement;

enum class GroupFamily { integers, lattice, free_group, cyclic, product };

class Group {
 public:
  static Group integers();
  static Group lattice(int dim);
  static Group free_group(int rank);
  static Group cyclic(std::uint64_t order);
  static Group product(const Group& left, const Group& right);

  GroupFamily family() const;
  int lattice_dim() const;
  int free_rank() const;
  std::uint64_t cyclic_order() const;
  const Group& left_factor() const;
  const Group& right_factor() const;
  /// Group order; empty for infinite families.
  std::optional<std::uint64_t> order() const;

  GroupElement identity() const;
  /// First k enumerated elements, gamma_1..gamma_k (gamma_1 = identity).
  std::vector<GroupElement> enumerate(std::size_t k) const;
  GroupElement element_at(std::size_t index_1based) const;
  /// 1-based position of g in the enumeration.
  std::size_t element_index(const GroupElement& g) const;
  GroupElement parse(const std::string& text) const;

  friend bool operator==(const Group& a, const Group& b);
  friend bool operator!=(const Group& a, const Group& b) { return !(a == b); }

 private:
  explicit Group(std::shared_ptr<const GroupImpl> impl) : impl_(std::move(impl)) {}
  const GroupImpl& impl() const { return *impl_; }
  std::shared_ptr<const GroupImpl> impl_;
  friend struct GroupImpl;
};

class GroupElement {
 public:
  // Reduced word over free generators; letter 2g is generator g, 2g+1 its inverse.
  using Word = std::vector<std::uint8_t>;
  struct PairBody;
  using Form = std::variant<std::int64_t,                      // integers
                            std::vector<std::int64_t>,         // lattice vector
                            Word,                              // free reduced word
                            std::uint64_t,                     // cyclic residue
                            std::shared_ptr<const PairBody>>;  // product pair

  GroupElement(Group group, Form form) : group_(std::move(group)), form_(std::move(form)) {}

  const Group& group() const { return group_; }
  const Form& form() const { return form_; }

 private:
  Group group_;
  Form form_;
};

struct GroupElement::PairBody {
  GroupElement left;
  GroupElement right;
};

GroupElement multiply(const GroupElement& g, const GroupElement& h);
GroupElement inverse(const GroupElement& g);
int compare(const GroupElement& a, const GroupElement& b);
std::string to_string(const GroupElement& g);

inline bool operator==(const GroupElement& a, const GroupElement& b) { return compare(a, b) == 0; }
inline bool operator!=(const GroupElement& a, const GroupElement& b) { return compare(a, b) != 0; }
inline bool operator<(const GroupElement& a, const GroupElement& b) { return compare(a, b) < 0; }

struct GroupImpl {
  GroupFamily family;
  int dim = 0;
  int rank = 0;
  std::uint64_t cyclic_q = 0;
  std::optional<Group> left;
  std::optional<Group> right;

  // enumeration cache: a pure cache, guarded by mu
  mutable std::mutex mu;
  mutable std::vector<GroupElement> cache;
  mutable std::map<std::string, std::size_t> index_by_key;  // 1-based
  mutable std::uint64_t cantor_s = 2;                       // product diagonal cursor
  mutable std::uint64_t cantor_i = 0;

  static Group make(GroupImpl impl) {
    return Group(std::make_shared<const GroupImpl>(std::move(impl)));
  }

  GroupImpl() = default;
  GroupImpl(GroupImpl&& other) noexcept
      : family(other.family), dim(other.dim), rank(other.rank), cyclic_q(other.cyclic_q),
        left(std::move(other.left)), right(std::move(other.right)) {}
};

// --- structural helpers ----------------------------------------------------

inline bool operator==(const Group& a, const Group& b) {
  if (a.impl_ == b.impl_) return true;
  const GroupImpl& x = *a.impl_;
  const GroupImpl& y = *b.impl_;
  if (x.family != y.family) return false;
  switch (x.family) {
    case GroupFamily::integers: return true;
    case GroupFamily::lattice: return x.dim == y.dim;
    case GroupFamily::free_group: return x.rank == y.rank;
    case GroupFamily::cyclic: return x.cyclic_q == y.cyclic_q;
    case GroupFamily::product: return *x.left == *y.left && *x.right == *y.right;
  }
  return false;
}

inline Group Group::integers() {
  GroupImpl impl;
  impl.family = GroupFamily::integers;
  return GroupImpl::make(std::move(impl));
}

inline Group Group::lattice(int dim) {
  if (dim < 1) throw std::invalid_argument("Group::lattice: dim must be >= 1");
  GroupImpl impl;
  impl.family = GroupFamily::lattice;
  impl.dim = dim;
  return GroupImpl::make(std::move(impl));
}

inline Group Group::free_group(int rank) {
  if (rank < 1 || rank > 26)
    throw std::invalid_argument("Group::free_group: rank must be in [1, 26]");
  GroupImpl impl;
  impl.family = GroupFamily::free_group;
  impl.rank = rank;
  return GroupImpl::make(std::move(impl));
}

inline Group Group::cyclic(std::uint64_t order) {
  if (order == 0) throw std::invalid_argument("Group::cyclic: order must be positive");
  GroupImpl impl;
  impl.family = GroupFamily::cyclic;
  impl.cyclic_q = order;
  return GroupImpl::make(std::move(impl));
}

inline Group Group::product(const Group& left, const Group& right) {
  GroupImpl impl;
  impl.family = GroupFamily::product;
  impl.left = left;
  impl.right = right;
  return GroupImpl::make(std::move(impl));
}

inline GroupFamily Group::family() const { return impl().family; }
inline int Group::lattice_dim() const { return impl().dim; }
inline int Group::free_rank() const { return impl().rank; }
inline std::uint64_t Group::cyclic_order() const { return impl().cyclic_q; }
inline const Group& Group::left_factor() const {
  if (impl().family != GroupFamily::product)
    throw std::invalid_argument("Group::left_factor: not a product group");
  return *impl().left;
}
inline const Group& Group::right_factor() const {
  if (impl().family != GroupFamily::product)
    throw std::invalid_argument("Group::right_factor: not a product group");
  return *impl().right;
}

inline std::optional<std::uint64_t> Group::order() const {
  switch (impl().family) {
    case GroupFamily::cyclic: return impl().cyclic_q;
    case GroupFamily::product: {
      auto a = impl().left->order();
      auto b = impl().right->order();
      if (!a || !b) return std::nullopt;
      if (*a != 0 && *b > std::numeric_limits<std::uint64_t>::max() / *a)
        throw std::overflow_error("Group::order: product order overflows");
      return *a * *b;
    }
    default: return std::nullopt;
  }
}

inline GroupElement Group::identity() const {
  switch (impl().family) {
    case GroupFamily::integers: return GroupElement(*this, std::int64_t{0});
    case GroupFamily::lattice:
      return GroupElement(*this, std::vector<std::int64_t>(impl().dim, 0));
    case GroupFamily::free_group: return GroupElement(*this, GroupElement::Word{});
    case GroupFamily::cyclic: return GroupElement(*this, std::uint64_t{0});
    case GroupFamily::product: {
      auto body = std::make_shared<const GroupElement::PairBody>(
          GroupElement::PairBody{impl().left->identity(), impl().right->identity()});
      return GroupElement(*this, body);
    }
  }
  throw std::logic_error("unreachable");
}

// --- element arithmetic ----------------------------------------------------

namespace detail {

inline GroupElement::Word reduce_word(const GroupElement::Word& a, const GroupElement::Word& b) {
  GroupElement::Word out = a;
  for (std::uint8_t letter : b) {
    if (!out.empty() && (out.back() ^ 1u) == letter) {
      out.pop_back();
    } else {
      out.push_back(letter);
    }
  }
  return out;
}

}  // namespace detail

inline GroupElement multiply(const GroupElement& g, const GroupElement& h) {
  if (g.group() != h.group())
    throw std::invalid_argument("multiply: elements belong to different groups");
  const Group& grp = g.group();
  switch (grp.family()) {
    case GroupFamily::integers:
      return GroupElement(grp, std::get<std::int64_t>(g.form()) + std::get<std::int64_t>(h.form()));
    case GroupFamily::lattice: {
      auto v = std::get<std::vector<std::int64_t>>(g.form());
      const auto& w = std::get<std::vector<std::int64_t>>(h.form());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[i];
      return GroupElement(grp, std::move(v));
    }
    case GroupFamily::free_group:
      return GroupElement(grp, detail::reduce_word(std::get<GroupElement::Word>(g.form()),
                                                   std::get<GroupElement::Word>(h.form())));
    case GroupFamily::cyclic: {
      const std::uint64_t q = grp.cyclic_order();
      const auto a = std::get<std::uint64_t>(g.form());
      const auto b = std::get<std::uint64_t>(h.form());
      return GroupElement(grp, (a + b) % q);
    }
    case GroupFamily::product: {
      const auto& x = std::get<std::shared_ptr<const GroupElement::PairBody>>(g.form());
      const auto& y = std::get<std::shared_ptr<const GroupElement::PairBody>>(h.form());
      auto body = std::make_shared<const GroupElement::PairBody>(GroupElement::PairBody{
          multiply(x->left, y->left), multiply(x->right, y->right)});
      return GroupElement(grp, body);
    }
  }
  throw std::logic_error("unreachable");
}

inline GroupElement inverse(const GroupElement& g) {
  const Group& grp = g.group();
  switch (grp.family()) {
    case GroupFamily::integers:
      return GroupElement(grp, -std::get<std::int64_t>(g.form()));
    case GroupFamily::lattice: {
      auto v = std::get<std::vector<std::int64_t>>(g.form());
      for (auto& c : v) c = -c;
      return GroupElement(grp, std::move(v));
    }
    case GroupFamily::free_group: {
      const auto& w = std::get<GroupElement::Word>(g.form());
      GroupElement::Word out(w.rbegin(), w.rend());
      for (auto& letter : out) letter ^= 1u;
      return GroupElement(grp, std::move(out));
    }
    case GroupFamily::cyclic: {
      const std::uint64_t q = grp.cyclic_order();
      const auto r = std::get<std::uint64_t>(g.form());
      return GroupElement(grp, r == 0 ? 0 : q - r);
    }
    case GroupFamily::product: {
      const auto& x = std::get<std::shared_ptr<const GroupElement::PairBody>>(g.form());
      auto body = std::make_shared<const GroupElement::PairBody>(
          GroupElement::PairBody{inverse(x->left), inverse(x->right)});
      return GroupElement(grp, body);
    }
  }
  throw std::logic_error("unreachable");
}

inline int compare(const GroupElement& a, const GroupElement& b) {
  if (a.form().index() != b.form().index())
    return a.form().index() < b.form().index() ? -1 : 1;
  switch (a.form().index()) {
    case 0: {
      auto x = std::get<std::int64_t>(a.form());
      auto y = std::get<std::int64_t>(b.form());
      return x < y ? -1 : (x == y ? 0 : 1);
    }
    case 1: {
      const auto& x = std::get<std::vector<std::int64_t>>(a.form());
      const auto& y = std::get<std::vector<std::int64_t>>(b.form());
      return x < y ? -1 : (x == y ? 0 : 1);
    }
    case 2: {
      const auto& x = std::get<GroupElement::Word>(a.form());
      const auto& y = std::get<GroupElement::Word>(b.form());
      return x < y ? -1 : (x == y ? 0 : 1);
    }
    case 3: {
      auto x = std::get<std::uint64_t>(a.form());
      auto y = std::get<std::uint64_t>(b.form());
      return x < y ? -1 : (x == y ? 0 : 1);
    }
    default: {
      const auto& x = std::get<std::shared_ptr<const GroupElement::PairBody>>(a.form());
      const auto& y = std::get<std::shared_ptr<const GroupElement::PairBody>>(b.form());
      int c = compare(x->left, y->left);
      if (c != 0) return c;
      return compare(x->right, y->right);
    }
  }
}

// --- serialization ----------------------------------------------------------
// integers/cyclic: decimal. lattice: "(1,-2)". free words: "aBa" with the
// capital letter denoting the inverse generator, "e" for the identity.
// product pairs: "(left|right)".

inline std::string to_string(const GroupElement& g) {
  switch (g.group().family()) {
    case GroupFamily::integers: return std::to_string(std::get<std::int64_t>(g.form()));
    case GroupFamily::cyclic: return std::to_string(std::get<std::uint64_t>(g.form()));
    case GroupFamily::lattice: {
      const auto& v = std::get<std::vector<std::int64_t>>(g.form());
      std::string out = "(";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
      }
      out += ')';
      return out;
    }
    case GroupFamily::free_group: {
      const auto& w = std::get<GroupElement::Word>(g.form());
      if (w.empty()) return "e";
      std::string out;
      for (std::uint8_t letter : w)
        out += static_cast<char>((letter & 1u ? 'A' : 'a') + (letter >> 1));
      return out;
    }
    case GroupFamily::product: {
      const auto& p = std::get<std::shared_ptr<const GroupElement::PairBody>>(g.form());
      return "(" + to_string(p->left) + "|" + to_string(p->right) + ")";
    }
  }
  throw std::logic_error("unreachable");
}

inline GroupElement Group::parse(const std::string& text) const {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("Group::parse: " + why + " in \"" + text + "\"");
  };
  switch (family()) {
    case GroupFamily::integers: {
      std::size_t pos = 0;
      std::int64_t v = 0;
      try {
        v = std::stoll(text, &pos);
      } catch (const std::exception&) {
        fail("not an integer");
      }
      if (pos != text.size()) fail("trailing characters");
      return GroupElement(*this, v);
    }
    case GroupFamily::cyclic: {
      std::size_t pos = 0;
      std::uint64_t v = 0;
      try {
        v = std::stoull(text, &pos);
      } catch (const std::exception&) {
        fail("not a residue");
      }
      if (pos != text.size()) fail("trailing characters");
      if (v >= cyclic_order()) fail("residue out of range");
      return GroupElement(*this, v);
    }
    case GroupFamily::lattice: {
      if (text.size() < 2 || text.front() != '(' || text.back() != ')') fail("expected (a,b,...)");
      std::vector<std::int64_t> v;
      std::stringstream ss(text.substr(1, text.size() - 2));
      std::string part;
      while (std::getline(ss, part, ',')) {
        try {
          std::size_t pos = 0;
          v.push_back(std::stoll(part, &pos));
          if (pos != part.size()) fail("bad coordinate");
        } catch (const std::exception&) {
          fail("bad coordinate");
        }
      }
      if (static_cast<int>(v.size()) != lattice_dim()) fail("wrong dimension");
      return GroupElement(*this, std::move(v));
    }
    case GroupFamily::free_group: {
      if (text == "e") return identity();
      GroupElement::Word raw;
      for (char c : text) {
        std::uint8_t letter;
        if (c >= 'a' && c < 'a' + free_rank()) {
          letter = static_cast<std::uint8_t>(2 * (c - 'a'));
        } else if (c >= 'A' && c < 'A' + free_rank()) {
          letter = static_cast<std::uint8_t>(2 * (c - 'A') + 1);
        } else {
          fail("letter outside generator range");
          return identity();  // unreachable
        }
        raw.push_back(letter);
      }
      // canonicalize: parsing accepts unreduced words
      return GroupElement(*this, detail::reduce_word({}, raw));
    }
    case GroupFamily::product: {
      if (text.size() < 2 || text.front() != '(' || text.back() != ')') fail("expected (l|r)");
      int depth = 0;
      std::size_t split = std::string::npos;
      for (std::size_t i = 1; i + 1 < text.size(); ++i) {
        if (text[i] == '(') ++depth;
        if (text[i] == ')') --depth;
        if (text[i] == '|' && depth == 0) {
          split = i;
          break;
        }
      }
      if (split == std::string::npos) fail("missing | separator");
      auto body = std::make_shared<const GroupElement::PairBody>(GroupElement::PairBody{
          left_factor().parse(text.substr(1, split - 1)),
          right_factor().parse(text.substr(split + 1, text.size() - split - 2))});
      return GroupElement(*this, body);
    }
  }
  throw std::logic_error("unreachable");
}

// --- enumeration -------------------------------------------------------------

namespace detail {

// next lexicographic point of max-norm exactly `shell` in dimension dim, or false
inline bool next_shell_point(std::vector<std::int64_t>& v, std::int64_t shell) {
  const auto on_shell = [&](const std::vector<std::int64_t>& p) {
    std::int64_t mx = 0;
    for (auto c : p) mx = std::max(mx, c < 0 ? -c : c);
    return mx == shell;
  };
  do {
    int i = static_cast<int>(v.size()) - 1;
    while (i >= 0 && v[i] == shell) {
      v[i] = -shell;
      --i;
    }
    if (i < 0) return false;
    ++v[i];
  } while (!on_shell(v));
  return true;
}

}  // namespace detail

inline std::vector<GroupElement> Group::enumerate(std::size_t k) const {
  if (k == 0) throw std::invalid_argument("Group::enumerate: k must be >= 1");
  const GroupImpl& im = impl();
  std::lock_guard<std::mutex> lock(im.mu);
  auto& cache = im.cache;
  auto push = [&](GroupElement el) {
    im.index_by_key.emplace(to_string(el), cache.size() + 1);
    cache.push_back(std::move(el));
  };
  while (cache.size() < k) {
    switch (im.family) {
      case GroupFamily::integers: {
        const std::size_t i = cache.size() + 1;  // 1-based position to fill
        const std::int64_t v = (i == 1) ? 0
                               : (i % 2 == 0) ? static_cast<std::int64_t>(i / 2)
                                              : -static_cast<std::int64_t>(i / 2);
        push(GroupElement(*this, v));
        break;
      }
      case GroupFamily::cyclic: {
        if (cache.size() >= im.cyclic_q)
          throw std::invalid_argument("Group::enumerate: finite group of order " +
                                      std::to_string(im.cyclic_q) + " exhausted");
        push(GroupElement(*this, static_cast<std::uint64_t>(cache.size())));
        break;
      }
      case GroupFamily::lattice: {
        if (cache.empty()) {
          push(identity());
          break;
        }
        // resume from the last cached point's shell
        const auto& last = std::get<std::vector<std::int64_t>>(cache.back().form());
        std::int64_t shell = 0;
        for (auto c : last) shell = std::max(shell, c < 0 ? -c : c);
        auto v = last;
        if (!detail::next_shell_point(v, shell)) {
          ++shell;
          v.assign(im.dim, -shell);  // lexicographically least point of the next shell
        }
        push(GroupElement(*this, std::move(v)));
        break;
      }
      case GroupFamily::free_group: {
        if (cache.empty()) {
          push(identity());
          break;
        }
        // words of length L+1 are the non-cancelling extensions of length-L
        // words, generated in stored (lexicographic) order
        const std::size_t letters = static_cast<std::size_t>(2 * im.rank);
        const auto& lastw = std::get<GroupElement::Word>(cache.back().form());
        // try successor of lastw among its parent's children, else first child of next parent
        GroupElement::Word next;
        bool found = false;
        if (!lastw.empty()) {
          // same parent, next letter
          GroupElement::Word parent(lastw.begin(), lastw.end() - 1);
          for (std::uint8_t l = static_cast<std::uint8_t>(lastw.back() + 1); l < letters; ++l) {
            if (!parent.empty() && (parent.back() ^ 1u) == l) continue;
            next = parent;
            next.push_back(l);
            found = true;
            break;
          }
          if (!found) {
            // advance parent within the cache ordering, take its first valid child
            std::size_t pidx = im.index_by_key.at(to_string(GroupElement(*this, parent))) - 1;
            for (std::size_t cand = pidx + 1; cand < cache.size() && !found; ++cand) {
              const auto& pw = std::get<GroupElement::Word>(cache[cand].form());
              if (pw.size() != parent.size()) break;
              for (std::uint8_t l = 0; l < letters; ++l) {
                if (!pw.empty() && (pw.back() ^ 1u) == l) continue;
                next = pw;
                next.push_back(l);
                found = true;
                break;
              }
            }
          }
        }
        if (!found) {
          // first word of the next length: children of the first word of current length
          const std::size_t wl = lastw.size();
          for (std::size_t i = 0; i < cache.size() && !found; ++i) {
            const auto& pw = std::get<GroupElement::Word>(cache[i].form());
            if (pw.size() != wl) continue;
            for (std::uint8_t l = 0; l < letters; ++l) {
              if (!pw.empty() && (pw.back() ^ 1u) == l) continue;
              next = pw;
              next.push_back(l);
              found = true;
              break;
            }
          }
        }
        if (!found) throw std::logic_error("free group enumeration stalled");
        push(GroupElement(*this, std::move(next)));
        break;
      }
      case GroupFamily::product: {
        // Cantor diagonal with finite-factor skipping; regenerate pair indices
        const auto lo = im.left->order();
        const auto ro = im.right->order();
        if (lo && ro && cache.size() >= static_cast<std::size_t>(*lo * *ro))
          throw std::invalid_argument("Group::enumerate: finite product group exhausted");
        // walk (s, i) from the last cached position
        std::uint64_t s = 2, i = 0;  // i = left index; j = s - i
        if (!cache.empty()) {
          s = im.cantor_s;
          i = im.cantor_i;
        }
        for (;;) {
          ++i;
          if (i >= s) {
            ++s;
            i = 0;
            continue;
          }
          const std::uint64_t j = s - i;
          if (lo && i > *lo) {
            s++;  // i only grows within s; if i exceeds |G1| no later i in this s works
            i = 0;
            continue;
          }
          if (ro && j > *ro) continue;  // j shrinks as i grows; try next i
          auto le = im.left->element_at(static_cast<std::size_t>(i));
          auto re = im.right->element_at(static_cast<std::size_t>(j));
          auto body = std::make_shared<const GroupElement::PairBody>(
              GroupElement::PairBody{std::move(le), std::move(re)});
          im.cantor_s = s;
          im.cantor_i = i;
          push(GroupElement(*this, body));
          break;
        }
        break;
      }
    }
  }
  return std::vector<GroupElement>(cache.begin(), cache.begin() + static_cast<std::ptrdiff_t>(k));
}

inline GroupElement Group::element_at(std::size_t index_1based) const {
  return enumerate(index_1based)[index_1based - 1];
}

inline std::size_t Group::element_index(const GroupElement& g) const {
  if (g.group() != *this)
    throw std::invalid_argument("Group::element_index: element of a different group");
  switch (family()) {
    case GroupFamily::integers: {
      const auto v = std::get<std::int64_t>(g.form());
      if (v == 0) return 1;
      return v > 0 ? static_cast<std::size_t>(2 * v)
                   : static_cast<std::size_t>(-2 * v + 1);
    }
    case GroupFamily::cyclic:
      return static_cast<std::size_t>(std::get<std::uint64_t>(g.form())) + 1;
    default: {
      const std::string key = to_string(g);
      constexpr std::size_t kScanCap = 2'000'000;
      {
        std::lock_guard<std::mutex> lock(impl().mu);
        auto it = impl().index_by_key.find(key);
        if (it != impl().index_by_key.end()) return it->second;
      }
      std::size_t upto = 64;
      for (;;) {
        enumerate(upto);
        {
          std::lock_guard<std::mutex> lock(impl().mu);
          auto it = impl().index_by_key.find(key);
          if (it != impl().index_by_key.end()) return it->second;
        }
        if (upto >= kScanCap)
          throw std::runtime_error("Group::element_index: element beyond enumeration scan cap");
        upto *= 2;
      }
    }
  }
}

inline bool is_identity(const GroupElement& g) { return g == g.group().identity(); }

}  // namespace soficlab
