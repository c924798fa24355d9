#pragma once

// Permutations of V = {0, ..., n-1} and the normalised Hamming distance on
// Sym(V).

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "soficlab/rng.hpp"

namespace soficlab {

class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<std::uint32_t> image) : img_(std::move(image)) {
    if (!is_bijection(img_)) throw std::invalid_argument("Permutation: image is not a bijection");
  }

  static Permutation identity(std::size_t n) {
    std::vector<std::uint32_t> img(n);
    for (std::size_t v = 0; v < n; ++v) img[v] = static_cast<std::uint32_t>(v);
    Permutation p;
    p.img_ = std::move(img);
    return p;
  }

  std::size_t size() const { return img_.size(); }
  std::uint32_t operator()(std::uint32_t v) const { return img_[v]; }
  const std::vector<std::uint32_t>& image() const { return img_; }

  Permutation inverse() const {
    std::vector<std::uint32_t> inv(img_.size());
    for (std::uint32_t v = 0; v < img_.size(); ++v) inv[img_[v]] = v;
    Permutation p;
    p.img_ = std::move(inv);
    return p;
  }

  friend bool operator==(const Permutation& a, const Permutation& b) { return a.img_ == b.img_; }
  friend bool operator!=(const Permutation& a, const Permutation& b) { return !(a == b); }

  static bool is_bijection(const std::vector<std::uint32_t>& img) {
    std::vector<bool> seen(img.size(), false);
    for (auto v : img) {
      if (v >= img.size() || seen[v]) return false;
      seen[v] = true;
    }
    return true;
  }

 private:
  std::vector<std::uint32_t> img_;
};

/// (p o q)(v) = p(q(v))
inline Permutation compose(const Permutation& p, const Permutation& q) {
  if (p.size() != q.size()) throw std::invalid_argument("compose: size mismatch");
  std::vector<std::uint32_t> img(p.size());
  for (std::uint32_t v = 0; v < p.size(); ++v) img[v] = p(q(v));
  return Permutation(std::move(img));
}

/// Normalised Hamming distance |{v : p(v) != q(v)}| / |V|.
inline double hamming(const Permutation& p, const Permutation& q) {
  if (p.size() != q.size()) throw std::invalid_argument("hamming: size mismatch");
  if (p.size() == 0) return 0.0;
  std::size_t diff = 0;
  for (std::uint32_t v = 0; v < p.size(); ++v)
    if (p(v) != q(v)) ++diff;
  return static_cast<double>(diff) / static_cast<double>(p.size());
}

/// Uniform random permutation (Fisher-Yates over the deterministic Rng).
inline Permutation random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::uint32_t> img(n);
  for (std::size_t v = 0; v < n; ++v) img[v] = static_cast<std::uint32_t>(v);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(img[i - 1], img[j]);
  }
  return Permutation(std::move(img));
}

}  // namespace soficlab
