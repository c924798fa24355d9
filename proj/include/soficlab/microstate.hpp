#pragma once

// Microstates tau: V -> A on finite models, their pulled-back window patterns
// theta_{v,sigma}(tau) and empirical distributions Theta(delta_tau), fit
// against oracle targets, tensoring along product models, and symbol-wise
// projection. Empirical masses are exact rationals count/|V|; the exact-count
// view backs the zero-tolerance identities.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "soficlab/alphabet.hpp"
#include "soficlab/distribution.hpp"
#include "soficlab/model.hpp"
#include "soficlab/oracle.hpp"
#include "soficlab/transport.hpp"

namespace soficlab {

struct Microstate {
  Alphabet alphabet;
  std::vector<Symbol> labels;

  Microstate(Alphabet a, std::vector<Symbol> l) : alphabet(std::move(a)), labels(std::move(l)) {
    for (Symbol s : labels)
      if (s >= alphabet.size()) throw std::invalid_argument("Microstate: symbol outside alphabet");
  }

  std::size_t size() const { return labels.size(); }

  static Microstate constant(const Alphabet& a, Symbol s, std::size_t n) {
    return Microstate(a, std::vector<Symbol>(n, s));
  }

  static Microstate from_labels(const Alphabet& a, const std::vector<std::string>& labels) {
    std::vector<Symbol> syms;
    syms.reserve(labels.size());
    for (const auto& l : labels) syms.push_back(a.at(l));
    return Microstate(a, std::move(syms));
  }
};

inline void require_fits_model(const FiniteModel& model, const Microstate& tau, const char* who) {
  if (tau.size() != model.size())
    throw std::invalid_argument(std::string(who) + ": microstate size != model size");
}

/// theta_{v,sigma}(tau) truncated to the window: (tau(sigma^{gamma_1}(v)), ...,
/// tau(sigma^{gamma_m}(v))).
inline Pattern theta(const FiniteModel& model, const Microstate& tau, std::uint32_t v,
                     std::size_t m) {
  require_fits_model(model, tau, "theta");
  const auto window = model.group().enumerate(m);
  Pattern out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = tau.labels[model.eval(window[i])(v)];
  return out;
}

/// Exact pattern counts of the empirical distribution over all vertices.
inline std::map<Pattern, std::uint64_t> empirical_counts(const FiniteModel& model,
                                                         const Microstate& tau, std::size_t m) {
  require_fits_model(model, tau, "empirical");
  std::vector<const Permutation*> perms;
  perms.reserve(m);
  for (const auto& g : model.group().enumerate(m)) perms.push_back(&model.eval(g));
  std::map<Pattern, std::uint64_t> counts;
  Pattern pattern(m);
  for (std::uint32_t v = 0; v < model.size(); ++v) {
    for (std::size_t i = 0; i < m; ++i) pattern[i] = tau.labels[(*perms[i])(v)];
    ++counts[pattern];
  }
  return counts;
}

/// Theta(delta_tau) on the window: uniform average over vertices of the
/// Dirac at theta(tau, v). All masses are integer multiples of 1/|V|.
inline WindowDistribution empirical(const FiniteModel& model, const Microstate& tau,
                                    std::size_t m) {
  const auto counts = empirical_counts(model, tau, m);
  const double n = static_cast<double>(model.size());
  std::map<Pattern, double> mass;
  for (const auto& [pattern, count] : counts) mass[pattern] = static_cast<double>(count) / n;
  return WindowDistribution(m, tau.alphabet, std::move(mass));
}

/// Kantorovich fit of the microstate's empirical distribution against the
/// oracle's window marginal.
inline DistanceCertificate fit(const FiniteModel& model, const Microstate& tau,
                               const CylinderOracle& oracle, std::size_t m) {
  if (tau.alphabet != oracle.alphabet())
    throw std::invalid_argument("fit: microstate and oracle alphabets differ");
  return kantorovich(empirical(model, tau, m), oracle.marginal(m));
}

/// (tau' (x) tau'')(v', v'') = (tau'(v'), tau''(v'')) in row-major vertex order.
inline Microstate tensor_microstate(const Microstate& left, const Microstate& right) {
  const Alphabet paired = pair_alphabet(left.alphabet, right.alphabet);
  std::vector<Symbol> labels;
  labels.reserve(left.size() * right.size());
  for (Symbol sl : left.labels)
    for (Symbol sr : right.labels) labels.push_back(pair_symbol(sl, sr, right.alphabet));
  return Microstate(paired, std::move(labels));
}

/// Symbol-wise application of pi to the labelling.
inline Microstate project_microstate(const Microstate& tau, const SymbolMap& pi) {
  if (pi.in != tau.alphabet)
    throw std::invalid_argument("project_microstate: symbol map domain mismatch");
  std::vector<Symbol> labels(tau.labels.size());
  for (std::size_t v = 0; v < tau.labels.size(); ++v) labels[v] = pi(tau.labels[v]);
  return Microstate(pi.out, std::move(labels));
}

/// Exact tensor identity at the heart of the product construction: the
/// empirical distribution of tau' (x) tau'' on the product model equals, after
/// unpairing, the tensor of the factor empiricals. Rational-count equality,
/// no tolerance.
inline bool product_identity_check(const FiniteModel& left, const FiniteModel& right,
                                   const Microstate& tau_left, const Microstate& tau_right,
                                   std::size_t m) {
  if (left.group() != right.group())
    throw std::invalid_argument("product_identity_check: groups differ");
  require_fits_model(left, tau_left, "product_identity_check");
  require_fits_model(right, tau_right, "product_identity_check");

  const FiniteModel prod = FiniteModel::product_model(left, right);
  const Microstate paired = tensor_microstate(tau_left, tau_right);
  const auto prod_counts = empirical_counts(prod, paired, m);
  const auto left_counts = empirical_counts(left, tau_left, m);
  const auto right_counts = empirical_counts(right, tau_right, m);

  // counts over |V'||V''| vertices must factor exactly
  std::uint64_t checked_total = 0;
  for (const auto& [ls, lc] : left_counts) {
    for (const auto& [rs, rc] : right_counts) {
      const Pattern zipped = zip_patterns(ls, rs, tau_right.alphabet);
      auto it = prod_counts.find(zipped);
      const std::uint64_t have = it == prod_counts.end() ? 0 : it->second;
      if (have != lc * rc) return false;
      checked_total += have;
    }
  }
  // no mass outside the tensor support
  std::uint64_t prod_total = 0;
  for (const auto& [pattern, count] : prod_counts) prod_total += count;
  return checked_total == prod_total;
}

}  // namespace soficlab
