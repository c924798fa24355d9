#pragma once

// Finite permutation models sigma: G -> Sym(V) and their quality reports.
//
// Built-in kinds are exact homomorphisms onto finite quotients (cyclic,
// lattice) or of the free group itself (free_random), so their goodness
// defect is exactly zero. Explicit tables may violate everything; unlisted
// elements of a table act as the identity.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "soficlab/group.hpp"
#include "soficlab/permutation.hpp"
#include "soficlab/rng.hpp"

namespace soficlab {

enum class ModelKind { cyclic, lattice, free_random, product, table };

class FiniteModel {
 public:
  /// Rotations of Z/n, as a model of the integers.
  static FiniteModel cyclic_model(std::uint64_t n);
  /// Coordinate rotations of a d-dimensional torus grid of the given side.
  static FiniteModel lattice_model(int dim, std::uint64_t side);
  /// Seeded uniform generator permutations extended as an exact homomorphism
  /// of the free group of the given rank.
  static FiniteModel free_random_model(int rank, std::size_t n, std::uint64_t seed);
  /// Componentwise action on V' x V'' with row-major index v' * |V''| + v''.
  static FiniteModel product_model(const FiniteModel& left, const FiniteModel& right);
  /// Explicit table keyed by canonical element strings; unlisted elements act
  /// as the identity.
  static FiniteModel table_model(Group group, std::size_t n,
                                 std::map<std::string, Permutation> perms);

  const Group& group() const { return impl_->group; }
  std::size_t size() const { return impl_->n; }
  ModelKind kind() const { return impl_->kind; }
  std::uint64_t seed() const { return impl_->seed; }

  /// sigma^g, memoized per canonical form. References stay valid for the
  /// model's lifetime.
  const Permutation& eval(const GroupElement& g) const;

 private:
  struct Impl {
    ModelKind kind;
    Group group;
    std::size_t n = 0;
    // free_random
    std::uint64_t seed = 0;
    std::vector<Permutation> generator_images;
    std::vector<Permutation> generator_inverses;
    // lattice
    int dim = 0;
    std::uint64_t side = 0;
    // product
    std::shared_ptr<const Impl> left, right;
    // table
    std::map<std::string, Permutation> table;

    mutable std::mutex memo_mu;
    mutable std::map<std::string, Permutation> memo;

    explicit Impl(Group g) : kind(ModelKind::table), group(std::move(g)) {}
    Permutation compute(const GroupElement& g) const;
  };

  explicit FiniteModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

inline FiniteModel FiniteModel::cyclic_model(std::uint64_t n) {
  if (n < 1) throw std::invalid_argument("cyclic_model: n must be >= 1");
  auto impl = std::make_shared<Impl>(Group::integers());
  impl->kind = ModelKind::cyclic;
  impl->n = static_cast<std::size_t>(n);
  return FiniteModel(std::move(impl));
}

inline FiniteModel FiniteModel::lattice_model(int dim, std::uint64_t side) {
  if (dim < 1 || side < 1) throw std::invalid_argument("lattice_model: dim and side must be >= 1");
  double cells = 1.0;
  for (int i = 0; i < dim; ++i) cells *= static_cast<double>(side);
  if (cells > 1e8) throw std::invalid_argument("lattice_model: grid too large");
  auto impl = std::make_shared<Impl>(Group::lattice(dim));
  impl->kind = ModelKind::lattice;
  impl->dim = dim;
  impl->side = side;
  std::size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(side);
  impl->n = n;
  return FiniteModel(std::move(impl));
}

inline FiniteModel FiniteModel::free_random_model(int rank, std::size_t n, std::uint64_t seed) {
  if (rank < 1) throw std::invalid_argument("free_random_model: rank must be >= 1");
  if (n < 1) throw std::invalid_argument("free_random_model: n must be >= 1");
  auto impl = std::make_shared<Impl>(Group::free_group(rank));
  impl->kind = ModelKind::free_random;
  impl->n = n;
  impl->seed = seed;
  impl->generator_images.reserve(static_cast<std::size_t>(rank));
  for (int g = 0; g < rank; ++g) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(g)));
    impl->generator_images.push_back(random_permutation(n, rng));
    impl->generator_inverses.push_back(impl->generator_images.back().inverse());
  }
  return FiniteModel(std::move(impl));
}

inline FiniteModel FiniteModel::product_model(const FiniteModel& left, const FiniteModel& right) {
  if (left.group() != right.group())
    throw std::invalid_argument("product_model: factors have different groups");
  auto impl = std::make_shared<Impl>(left.group());
  impl->kind = ModelKind::product;
  impl->left = left.impl_;
  impl->right = right.impl_;
  impl->n = left.size() * right.size();
  return FiniteModel(std::move(impl));
}

inline FiniteModel FiniteModel::table_model(Group group, std::size_t n,
                                            std::map<std::string, Permutation> perms) {
  if (n < 1) throw std::invalid_argument("table_model: n must be >= 1");
  for (const auto& [key, p] : perms) {
    if (p.size() != n)
      throw std::invalid_argument("table_model: permutation for \"" + key + "\" has wrong size");
    group.parse(key);  // validates the key names a group element
  }
  auto impl = std::make_shared<Impl>(std::move(group));
  impl->kind = ModelKind::table;
  impl->n = n;
  impl->table = std::move(perms);
  return FiniteModel(std::move(impl));
}

inline Permutation FiniteModel::Impl::compute(const GroupElement& g) const {
  switch (kind) {
    case ModelKind::cyclic: {
      const auto shift = std::get<std::int64_t>(g.form());
      const auto nn = static_cast<std::int64_t>(n);
      const std::int64_t r = ((shift % nn) + nn) % nn;
      std::vector<std::uint32_t> img(n);
      for (std::size_t v = 0; v < n; ++v)
        img[v] = static_cast<std::uint32_t>((static_cast<std::int64_t>(v) + r) % nn);
      return Permutation(std::move(img));
    }
    case ModelKind::lattice: {
      const auto& shift = std::get<std::vector<std::int64_t>>(g.form());
      const auto s = static_cast<std::int64_t>(side);
      std::vector<std::int64_t> r(shift.size());
      for (std::size_t i = 0; i < shift.size(); ++i) r[i] = ((shift[i] % s) + s) % s;
      std::vector<std::uint32_t> img(n);
      std::vector<std::int64_t> coord(static_cast<std::size_t>(dim), 0);
      for (std::size_t v = 0; v < n; ++v) {
        // v in row-major order, first coordinate major
        std::size_t idx = 0;
        for (int i = 0; i < dim; ++i)
          idx = idx * static_cast<std::size_t>(side) +
                static_cast<std::size_t>((coord[static_cast<std::size_t>(i)] +
                                          r[static_cast<std::size_t>(i)]) % s);
        img[v] = static_cast<std::uint32_t>(idx);
        for (int i = dim - 1; i >= 0; --i) {
          auto& c = coord[static_cast<std::size_t>(i)];
          if (++c < s) break;
          c = 0;
        }
      }
      return Permutation(std::move(img));
    }
    case ModelKind::free_random: {
      const auto& word = std::get<GroupElement::Word>(g.form());
      Permutation acc = Permutation::identity(n);
      // sigma^(l1 l2 ... lk) = sigma^(l1) o sigma^(l2) o ... o sigma^(lk)
      for (auto it = word.rbegin(); it != word.rend(); ++it) {
        const auto letter = *it;
        const auto& p = (letter & 1u) ? generator_inverses[letter >> 1]
                                      : generator_images[letter >> 1];
        acc = compose(p, acc);
      }
      return acc;
    }
    case ModelKind::product: {
      const Permutation& pl = FiniteModel(std::shared_ptr<const Impl>(left)).eval(g);
      const Permutation& pr = FiniteModel(std::shared_ptr<const Impl>(right)).eval(g);
      const std::size_t nr = right->n;
      std::vector<std::uint32_t> img(n);
      for (std::size_t vl = 0; vl < left->n; ++vl)
        for (std::size_t vr = 0; vr < nr; ++vr)
          img[vl * nr + vr] = static_cast<std::uint32_t>(
              static_cast<std::size_t>(pl(static_cast<std::uint32_t>(vl))) * nr +
              pr(static_cast<std::uint32_t>(vr)));
      return Permutation(std::move(img));
    }
    case ModelKind::table: {
      auto it = table.find(to_string(g));
      if (it != table.end()) return it->second;
      return Permutation::identity(n);
    }
  }
  throw std::logic_error("unreachable");
}

inline const Permutation& FiniteModel::eval(const GroupElement& g) const {
  if (g.group() != group())
    throw std::invalid_argument("FiniteModel::eval: element of a different group");
  const std::string key = to_string(g);
  {
    std::lock_guard<std::mutex> lock(impl_->memo_mu);
    auto it = impl_->memo.find(key);
    if (it != impl_->memo.end()) return it->second;
  }
  Permutation p = impl_->compute(g);  // may recurse; no lock held
  std::lock_guard<std::mutex> lock(impl_->memo_mu);
  auto [it, inserted] = impl_->memo.emplace(key, std::move(p));
  return it->second;
}

// --- goodness ----------------------------------------------------------------

struct GoodnessReport {
  int k = 0;
  bool pass = false;
  double separation_min = 1.0;  // min over i<j<=k of d_H(sigma^gi, sigma^gj); 1 when k = 1
  double defect_max = 0.0;      // max over i,j<=k of d_H(sigma^gi o sigma^gj, sigma^gigj)
};

/// k-goodness: separation > 1 - 1/k on distinct pairs and defect < 1/k on all
/// products, both over the first k enumerated elements.
inline GoodnessReport goodness(const FiniteModel& model, int k) {
  if (k < 1) throw std::invalid_argument("goodness: k must be >= 1");
  const auto elems = model.group().enumerate(static_cast<std::size_t>(k));
  GoodnessReport report;
  report.k = k;
  report.separation_min = 1.0;
  report.defect_max = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const double d = hamming(model.eval(elems[static_cast<std::size_t>(i)]),
                               model.eval(elems[static_cast<std::size_t>(j)]));
      report.separation_min = std::min(report.separation_min, d);
    }
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const auto& gi = elems[static_cast<std::size_t>(i)];
      const auto& gj = elems[static_cast<std::size_t>(j)];
      const double d = hamming(compose(model.eval(gi), model.eval(gj)),
                               model.eval(multiply(gi, gj)));
      report.defect_max = std::max(report.defect_max, d);
    }
  }
  const double inv_k = 1.0 / static_cast<double>(k);
  report.pass = report.separation_min > 1.0 - inv_k && report.defect_max < inv_k;
  return report;
}

struct SoficApproximationSeq {
  std::vector<FiniteModel> models;

  explicit SoficApproximationSeq(std::vector<FiniteModel> ms) : models(std::move(ms)) {
    if (models.empty()) throw std::invalid_argument("SoficApproximationSeq: empty sequence");
    for (std::size_t i = 1; i < models.size(); ++i) {
      if (models[i].group() != models[0].group())
        throw std::invalid_argument("SoficApproximationSeq: models of different groups");
      if (models[i].size() < models[i - 1].size())
        throw std::invalid_argument("SoficApproximationSeq: sizes must be nondecreasing");
    }
  }
};

struct SequenceGoodnessRow {
  int k = 0;
  bool attained = false;
  std::size_t tail_start = 0;  // 1-based index of the first all-passing tail; 0 = never
  std::vector<bool> pass;      // per-model verdicts
};

/// For each k <= k_max, the least 1-based index after which every model in the
/// sequence passes goodness(., k); attained = the final model passes.
inline std::vector<SequenceGoodnessRow> sequence_goodness(const SoficApproximationSeq& seq,
                                                          int k_max) {
  std::vector<SequenceGoodnessRow> rows;
  for (int k = 1; k <= k_max; ++k) {
    SequenceGoodnessRow row;
    row.k = k;
    row.pass.reserve(seq.models.size());
    for (const auto& model : seq.models) row.pass.push_back(goodness(model, k).pass);
    std::size_t last_fail = 0;
    for (std::size_t i = 0; i < row.pass.size(); ++i)
      if (!row.pass[i]) last_fail = i + 1;
    row.attained = row.pass.back();
    row.tail_start = row.attained ? last_fail + 1 : 0;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace soficlab
