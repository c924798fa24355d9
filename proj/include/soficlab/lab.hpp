#pragma once

// Microstate experiments: greedy microstate search, microstate counting
// (finite-scale sofic entropy), doubly-quenched tests, approximability
// traces over model sequences, diagonal tower verification, and
// weak-containment witness search.
//
// Every operation is deterministic given its seed. Parallel loops derive
// per-task sub-seeds and reduce order-insensitively (integer counts), so
// the job count never changes a result.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "soficlab/microstate.hpp"
#include "soficlab/parallel.hpp"
#include "soficlab/rng.hpp"
#include "soficlab/tower.hpp"

namespace soficlab {

// --- microstate search --------------------------------------------------------

struct SearchResult {
  Microstate best;
  DistanceCertificate fit;
  std::uint64_t evaluations = 0;
  std::uint64_t sweeps = 0;
  bool reached_target = false;
};

namespace detail {

inline WindowDistribution counts_to_distribution(const std::map<Pattern, std::uint64_t>& counts,
                                                 std::uint64_t total, std::size_t m,
                                                 const Alphabet& alphabet) {
  std::map<Pattern, double> mass;
  const double n = static_cast<double>(total);
  for (const auto& [pattern, count] : counts)
    if (count > 0) mass[pattern] = static_cast<double>(count) / n;
  return WindowDistribution(m, alphabet, std::move(mass));
}

}  // namespace detail

/// Seeded i.i.d. start from the oracle's 1-window marginal, then greedy
/// single-site relabelling accepting strict decreases of the window fit.
/// Stops when the fit passes eps, the budget of fit evaluations runs out, or
/// a full sweep makes no progress.
inline SearchResult search_microstate(const FiniteModel& model, const CylinderOracle& oracle,
                                      std::size_t m, double eps, std::uint64_t budget,
                                      std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("search_microstate: budget must be >= 1");
  const Alphabet& alphabet = oracle.alphabet();
  const std::size_t n = model.size();
  const std::size_t asize = alphabet.size();

  // initial labelling from the 1-window marginal
  const WindowDistribution marg1 = oracle.marginal(1);
  std::vector<double> base(asize, 0.0);
  for (std::size_t s = 0; s < asize; ++s) base[s] = marg1.prob({static_cast<Symbol>(s)});
  Rng rng(seed);
  std::vector<Symbol> labels(n);
  for (std::size_t v = 0; v < n; ++v) labels[v] = static_cast<Symbol>(rng.discrete(base));
  Microstate tau(alphabet, std::move(labels));

  const WindowDistribution target = oracle.marginal(m);
  const auto window = model.group().enumerate(m);
  std::vector<const Permutation*> perms;
  std::vector<Permutation> inv_perms;
  for (const auto& g : window) {
    perms.push_back(&model.eval(g));
    inv_perms.push_back(model.eval(g).inverse());
  }

  auto counts = empirical_counts(model, tau, m);
  std::uint64_t evaluations = 0;
  auto evaluate = [&]() {
    ++evaluations;
    return kantorovich(detail::counts_to_distribution(counts, n, m, alphabet), target);
  };

  DistanceCertificate current = evaluate();
  SearchResult result{tau, current, evaluations, 0, fit_passes(current, eps)};
  if (result.reached_target) return result;

  // pattern of vertex u with the current labels
  Pattern scratch(m);
  auto pattern_of = [&](std::uint32_t u) {
    for (std::size_t i = 0; i < m; ++i) scratch[i] = tau.labels[(*perms[i])(u)];
    return scratch;
  };

  bool out_of_budget = false;
  for (std::uint64_t sweep = 0; !out_of_budget; ++sweep) {
    bool improved = false;
    for (std::uint32_t v = 0; v < n && !out_of_budget; ++v) {
      // vertices whose window pattern reads site v
      std::set<std::uint32_t> affected;
      for (std::size_t i = 0; i < m; ++i) affected.insert(inv_perms[i](v));
      const Symbol old_symbol = tau.labels[v];

      double best_value = current.value;
      Symbol best_symbol = old_symbol;
      DistanceCertificate best_cert = current;
      for (std::size_t s = 0; s < asize; ++s) {
        if (static_cast<Symbol>(s) == old_symbol) continue;
        if (evaluations >= budget) {
          out_of_budget = true;
          break;
        }
        // apply the relabel to the counts, evaluate, revert
        std::vector<std::pair<Pattern, Pattern>> swaps;
        for (std::uint32_t u : affected) swaps.emplace_back(pattern_of(u), Pattern{});
        tau.labels[v] = static_cast<Symbol>(s);
        {
          std::size_t k = 0;
          for (std::uint32_t u : affected) swaps[k++].second = pattern_of(u);
        }
        for (const auto& [before, after] : swaps) {
          --counts[before];
          ++counts[after];
        }
        const DistanceCertificate cand = evaluate();
        for (const auto& [before, after] : swaps) {
          ++counts[before];
          --counts[after];
        }
        tau.labels[v] = old_symbol;
        if (cand.value < best_value) {
          best_value = cand.value;
          best_symbol = static_cast<Symbol>(s);
          best_cert = cand;
        }
      }
      if (best_symbol != old_symbol) {
        // re-apply the winning move permanently
        std::vector<std::pair<Pattern, Pattern>> swaps;
        for (std::uint32_t u : affected) swaps.emplace_back(pattern_of(u), Pattern{});
        tau.labels[v] = best_symbol;
        {
          std::size_t k = 0;
          for (std::uint32_t u : affected) swaps[k++].second = pattern_of(u);
        }
        for (const auto& [before, after] : swaps) {
          auto it = counts.find(before);
          if (--(it->second) == 0) counts.erase(it);
          ++counts[after];
        }
        current = best_cert;
        improved = true;
        if (fit_passes(current, eps)) {
          result = {tau, current, evaluations, sweep + 1, true};
          return result;
        }
      }
    }
    result.sweeps = sweep + 1;
    if (!improved) break;
  }
  result.best = tau;
  result.fit = current;
  result.evaluations = evaluations;
  result.reached_target = fit_passes(current, eps);
  return result;
}

// --- entropy ------------------------------------------------------------------

struct EntropyEstimate {
  std::size_t n = 0;
  std::size_t m = 0;
  double eps = 0.0;
  bool exact = true;
  std::uint64_t count = 0;    // exact mode: number of good microstates
  double fraction = 0.0;      // montecarlo: estimated good fraction
  std::uint64_t samples = 0;  // montecarlo
  std::uint64_t seed = 0;     // montecarlo
  bool value_defined = false;
  double value = 0.0;      // (1/n) log2(count), or (1/n)(log2 fraction + n log2 |A|)
  double std_error = 0.0;  // montecarlo, delta method on the value
};

namespace detail {

inline std::uint64_t pow_checked(std::uint64_t base, std::size_t exp, std::uint64_t cap) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (out > cap / base) throw std::invalid_argument("entropy: state space exceeds exact-mode cap");
    out *= base;
  }
  return out;
}

}  // namespace detail

/// Exhaustive count of microstates whose window-m fit passes eps.
inline EntropyEstimate entropy_exact(const FiniteModel& model, const CylinderOracle& oracle,
                                     std::size_t m, double eps, int jobs = 1) {
  const Alphabet& alphabet = oracle.alphabet();
  const std::size_t n = model.size();
  const std::uint64_t total = detail::pow_checked(alphabet.size(), n, 1u << 24);
  const WindowDistribution target = oracle.marginal(m);
  for (const auto& g : model.group().enumerate(m)) model.eval(g);  // warm the memo

  const std::uint64_t good = parallel_reduce(
      total, jobs, std::uint64_t{0},
      [&](std::uint64_t& acc, std::uint64_t idx) {
        std::vector<Symbol> labels(n);
        std::uint64_t x = idx;
        for (std::size_t v = 0; v < n; ++v) {
          labels[v] = static_cast<Symbol>(x % alphabet.size());
          x /= alphabet.size();
        }
        const Microstate tau(alphabet, std::move(labels));
        const auto cert = kantorovich(empirical(model, tau, m), target);
        if (fit_passes(cert, eps)) ++acc;
      },
      [](std::uint64_t& acc, std::uint64_t other) { acc += other; });

  EntropyEstimate est;
  est.n = n;
  est.m = m;
  est.eps = eps;
  est.exact = true;
  est.count = good;
  est.value_defined = good > 0;
  if (est.value_defined)
    est.value = std::log2(static_cast<double>(good)) / static_cast<double>(n);
  return est;
}

/// Monte-Carlo estimate of the good fraction under uniform sampling of A^V,
/// so fraction * |A|^n estimates the count unbiasedly.
inline EntropyEstimate entropy_montecarlo(const FiniteModel& model, const CylinderOracle& oracle,
                                          std::size_t m, double eps, std::uint64_t samples,
                                          std::uint64_t seed, int jobs = 1) {
  if (samples < 1) throw std::invalid_argument("entropy: samples must be >= 1");
  const Alphabet& alphabet = oracle.alphabet();
  const std::size_t n = model.size();
  const WindowDistribution target = oracle.marginal(m);
  for (const auto& g : model.group().enumerate(m)) model.eval(g);

  const std::uint64_t good = parallel_reduce(
      samples, jobs, std::uint64_t{0},
      [&](std::uint64_t& acc, std::uint64_t idx) {
        Rng rng(derive_seed(seed, idx));
        std::vector<Symbol> labels(n);
        for (std::size_t v = 0; v < n; ++v)
          labels[v] = static_cast<Symbol>(rng.below(alphabet.size()));
        const Microstate tau(alphabet, std::move(labels));
        const auto cert = kantorovich(empirical(model, tau, m), target);
        if (fit_passes(cert, eps)) ++acc;
      },
      [](std::uint64_t& acc, std::uint64_t other) { acc += other; });

  EntropyEstimate est;
  est.n = n;
  est.m = m;
  est.eps = eps;
  est.exact = false;
  est.samples = samples;
  est.seed = seed;
  est.fraction = static_cast<double>(good) / static_cast<double>(samples);
  est.value_defined = good > 0;
  if (est.value_defined) {
    est.value = (std::log2(est.fraction) +
                 static_cast<double>(n) * std::log2(static_cast<double>(alphabet.size()))) /
                static_cast<double>(n);
    const double se_f =
        std::sqrt(est.fraction * (1.0 - est.fraction) / static_cast<double>(samples));
    est.std_error = se_f / (est.fraction * std::log(2.0) * static_cast<double>(n));
  }
  return est;
}

// --- microstate samplers --------------------------------------------------------

/// eta in Me(A^V): i.i.d. site labels from a base distribution, or an explicit
/// weighted list of microstates.
class MicrostateSampler {
 public:
  static MicrostateSampler iid(Alphabet alphabet, std::vector<double> base) {
    if (base.size() != alphabet.size())
      throw std::invalid_argument("sampler: base size does not match alphabet");
    detail::check_distribution_vector(base, "sampler base");
    MicrostateSampler s(std::move(alphabet));
    s.base_ = std::move(base);
    return s;
  }

  static MicrostateSampler explicit_list(std::vector<std::pair<Microstate, double>> items) {
    if (items.empty()) throw std::invalid_argument("sampler: empty explicit list");
    std::vector<double> weights;
    for (const auto& [tau, w] : items) {
      if (tau.alphabet != items.front().first.alphabet)
        throw std::invalid_argument("sampler: mixed alphabets");
      weights.push_back(w);
    }
    detail::check_distribution_vector(weights, "sampler weights");
    MicrostateSampler s(items.front().first.alphabet);
    s.items_ = std::move(items);
    return s;
  }

  const Alphabet& alphabet() const { return alphabet_; }

  Microstate draw(std::size_t n, std::uint64_t seed) const {
    Rng rng(seed);
    if (!items_.empty()) {
      std::vector<double> weights;
      weights.reserve(items_.size());
      for (const auto& [tau, w] : items_) weights.push_back(w);
      const Microstate& tau = items_[rng.discrete(weights)].first;
      if (tau.size() != n)
        throw std::invalid_argument("sampler: explicit microstate size != model size");
      return tau;
    }
    std::vector<Symbol> labels(n);
    for (std::size_t v = 0; v < n; ++v) labels[v] = static_cast<Symbol>(rng.discrete(base_));
    return Microstate(alphabet_, std::move(labels));
  }

 private:
  explicit MicrostateSampler(Alphabet a) : alphabet_(std::move(a)) {}
  Alphabet alphabet_;
  std::vector<double> base_;
  std::vector<std::pair<Microstate, double>> items_;
};

// --- doubly-quenched test -------------------------------------------------------

struct DQReport {
  std::size_t m = 0;
  double eps = 0.0;
  std::uint64_t pairs = 0;
  std::uint64_t seed = 0;
  std::uint64_t good_pairs = 0;
  double w_mass = 0.0;  // estimate of (eta x eta)(W_eps)
  double pooled_value = 0.0;
  double pooled_lower = 0.0;
  double pooled_upper = 0.0;  // Theta(eta x eta) convergence estimate
};

/// Draws independent microstate pairs from the sampler, forms the paired
/// labelling xi(v) = (tau1(v), tau2(v)), and fits it against the product
/// target. Reports the good-pair fraction and the fit of the pooled
/// empirical average.
inline DQReport dq_test(const FiniteModel& model, const MicrostateSampler& sampler,
                        const CylinderOracle& oracle, std::size_t m, double eps,
                        std::uint64_t pairs, std::uint64_t seed, int jobs = 1) {
  if (pairs < 1) throw std::invalid_argument("dq_test: pairs must be >= 1");
  if (sampler.alphabet() != oracle.alphabet())
    throw std::invalid_argument("dq_test: sampler and oracle alphabets differ");
  const std::size_t n = model.size();
  const CylinderOracle paired_target = product_oracle(oracle, oracle);
  const Alphabet paired = paired_target.alphabet();
  const WindowDistribution target = paired_target.marginal(m);
  for (const auto& g : model.group().enumerate(m)) model.eval(g);

  struct Acc {
    std::uint64_t good = 0;
    std::map<Pattern, std::uint64_t> pooled;
  };
  const Acc acc = parallel_reduce(
      pairs, jobs, Acc{},
      [&](Acc& a, std::uint64_t p) {
        const Microstate tau1 = sampler.draw(n, derive_seed(seed, 2 * p));
        const Microstate tau2 = sampler.draw(n, derive_seed(seed, 2 * p + 1));
        std::vector<Symbol> labels(n);
        for (std::size_t v = 0; v < n; ++v)
          labels[v] = pair_symbol(tau1.labels[v], tau2.labels[v], oracle.alphabet());
        const Microstate xi(paired, std::move(labels));
        const auto counts = empirical_counts(model, xi, m);
        const auto cert =
            kantorovich(detail::counts_to_distribution(counts, n, m, paired), target);
        if (fit_passes(cert, eps)) ++a.good;
        for (const auto& [pattern, count] : counts) a.pooled[pattern] += count;
      },
      [](Acc& a, Acc&& b) {
        a.good += b.good;
        for (const auto& [pattern, count] : b.pooled) a.pooled[pattern] += count;
      });

  DQReport report;
  report.m = m;
  report.eps = eps;
  report.pairs = pairs;
  report.seed = seed;
  report.good_pairs = acc.good;
  report.w_mass = static_cast<double>(acc.good) / static_cast<double>(pairs);
  const auto pooled_cert = kantorovich(
      detail::counts_to_distribution(acc.pooled, pairs * static_cast<std::uint64_t>(n), m, paired),
      target);
  report.pooled_value = pooled_cert.value;
  report.pooled_lower = pooled_cert.lower;
  report.pooled_upper = pooled_cert.upper;
  return report;
}

// --- approximability trace ------------------------------------------------------

struct TraceRow {
  std::size_t index = 0;  // 1-based position in the sequence
  std::size_t n = 0;
  double fit_value = 0.0;
  double fit_lower = 0.0;
  double fit_upper = 0.0;
  bool pass = false;
  std::uint64_t evaluations = 0;
};

struct ApproximabilityTrace {
  std::vector<TraceRow> rows;
  // finite proxies for the paper's limit statements over this sequence
  bool eventually_all = false;   // the final model passes
  std::size_t tail_start = 0;    // 1-based start of the all-passing tail; 0 if none
  bool on_subsequence = false;   // at least one model passes
  std::size_t pass_count = 0;
};

inline ApproximabilityTrace approximability_trace(const SoficApproximationSeq& seq,
                                                  const CylinderOracle& oracle, std::size_t m,
                                                  double eps, std::uint64_t budget,
                                                  std::uint64_t seed) {
  ApproximabilityTrace trace;
  for (std::size_t i = 0; i < seq.models.size(); ++i) {
    const SearchResult sr =
        search_microstate(seq.models[i], oracle, m, eps, budget, derive_seed(seed, i));
    TraceRow row;
    row.index = i + 1;
    row.n = seq.models[i].size();
    row.fit_value = sr.fit.value;
    row.fit_lower = sr.fit.lower;
    row.fit_upper = sr.fit.upper;
    row.pass = fit_passes(sr.fit, eps);
    row.evaluations = sr.evaluations;
    trace.rows.push_back(row);
  }
  std::size_t last_fail = 0;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    if (trace.rows[i].pass)
      ++trace.pass_count;
    else
      last_fail = i + 1;
  }
  trace.eventually_all = trace.rows.back().pass;
  trace.tail_start = trace.eventually_all ? last_fail + 1 : 0;
  trace.on_subsequence = trace.pass_count > 0;
  return trace;
}

// --- diagonal tower verification --------------------------------------------------

struct DiagonalLevel {
  FiniteModel model;
  Microstate tau;
  CylinderOracle oracle;
};

struct DiagonalCell {
  std::size_t from_level = 0;  // 0-based
  std::size_t to_level = 0;
  double projected_value = 0.0;
  double bound = 0.0;  // eps_i + level-i fit
  bool pass = false;
};

struct DiagonalReport {
  std::vector<double> level_fit;
  std::vector<DiagonalCell> cells;
  bool pass = true;
};

/// For every pair of levels j < i verifies that the projected microstate
/// pi_{i,j}(tau_i) fits the level-j target within eps_i plus the level-i fit
/// (the triangle inequality through the exact projection commutation).
inline DiagonalReport diagonal_sequence(const ObservableTower& tower,
                                        const std::vector<DiagonalLevel>& levels, std::size_t m,
                                        const std::vector<double>& eps_schedule) {
  if (levels.empty()) throw std::invalid_argument("diagonal_sequence: no levels");
  if (levels.size() > tower.depth())
    throw std::invalid_argument("diagonal_sequence: more levels than the tower has");
  if (eps_schedule.size() != levels.size())
    throw std::invalid_argument("diagonal_sequence: eps schedule size mismatch");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].tau.alphabet != tower.level(i))
      throw std::invalid_argument("diagonal_sequence: level " + std::to_string(i) +
                                  " alphabet differs from the tower");
    if (levels[i].oracle.alphabet() != tower.level(i))
      throw std::invalid_argument("diagonal_sequence: level " + std::to_string(i) +
                                  " oracle alphabet differs from the tower");
  }
  DiagonalReport report;
  for (const auto& level : levels)
    report.level_fit.push_back(fit(level.model, level.tau, level.oracle, m).value);
  for (std::size_t i = 1; i < levels.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const Microstate projected = project_microstate(levels[i].tau, tower.projection(i, j));
      const auto cert = kantorovich(empirical(levels[i].model, projected, m),
                                    levels[j].oracle.marginal(m));
      DiagonalCell cell;
      cell.from_level = i;
      cell.to_level = j;
      cell.projected_value = cert.value;
      cell.bound = eps_schedule[i] + report.level_fit[i];
      cell.pass = cert.value <= cell.bound + kFitSlack;
      report.pass = report.pass && cell.pass;
      report.cells.push_back(cell);
    }
  }
  return report;
}

// --- weak containment witness ------------------------------------------------------

struct WitnessResult {
  std::optional<BlockCode> code;
  double best_value = 1.0;
  std::uint64_t evaluations = 0;
  bool found = false;  // absence of a witness is NOT a disproof
};

/// Searches for a sliding-block code c over `source` whose factor matches the
/// window-m marginal of `target` within eps. Exhaustive when the code space
/// fits in the budget, otherwise seeded greedy hill-climbing with restarts.
inline WitnessResult weak_containment_witness(const CylinderOracle& target,
                                              const CylinderOracle& source, std::size_t m,
                                              double eps, std::size_t code_window,
                                              std::uint64_t budget, std::uint64_t seed) {
  if (code_window < 1) throw std::invalid_argument("witness: code window must be >= 1");
  if (budget < 1) throw std::invalid_argument("witness: budget must be >= 1");
  if (target.group() != source.group())
    throw std::invalid_argument("witness: oracles have different groups");
  const Alphabet& out = target.alphabet();
  const Alphabet& in = source.alphabet();
  std::size_t entries = 1;
  for (std::size_t i = 0; i < code_window; ++i) {
    if (entries > (1u << 20) / in.size())
      throw std::invalid_argument("witness: code window too large");
    entries *= in.size();
  }
  const WindowDistribution target_marginal = target.marginal(m);

  WitnessResult result;
  std::vector<Symbol> best_table;
  auto objective = [&](const std::vector<Symbol>& table) {
    ++result.evaluations;
    const CylinderOracle factor =
        CylinderOracle::block_code(source, BlockCode(in, out, code_window, table));
    return kantorovich(factor.marginal(m), target_marginal).value;
  };
  auto consider = [&](const std::vector<Symbol>& table, double value) {
    if (value < result.best_value || best_table.empty()) {
      result.best_value = value;
      best_table = table;
    }
  };

  // total code count, saturating
  double total_codes = 1.0;
  for (std::size_t e = 0; e < entries && total_codes <= 1e18; ++e)
    total_codes *= static_cast<double>(out.size());

  if (total_codes <= static_cast<double>(budget)) {
    std::vector<Symbol> table(entries, 0);
    for (;;) {
      const double value = objective(table);
      consider(table, value);
      if (value <= eps + kFitSlack) break;  // lexicographically first witness
      std::size_t e = entries;
      while (e > 0) {
        if (static_cast<std::size_t>(++table[e - 1]) < out.size()) break;
        table[e - 1] = 0;
        --e;
      }
      if (e == 0) break;
    }
  } else {
    for (std::uint64_t restart = 0; result.evaluations < budget; ++restart) {
      Rng rng(derive_seed(seed, restart));
      std::vector<Symbol> table(entries);
      for (auto& s : table) s = static_cast<Symbol>(rng.below(out.size()));
      double value = objective(table);
      consider(table, value);
      bool improved = true;
      while (improved && result.evaluations < budget && value > eps + kFitSlack) {
        improved = false;
        for (std::size_t e = 0; e < entries && result.evaluations < budget; ++e) {
          const Symbol old = table[e];
          Symbol best_sym = old;
          double best_val = value;
          for (std::size_t s = 0; s < out.size(); ++s) {
            if (static_cast<Symbol>(s) == old) continue;
            if (result.evaluations >= budget) break;
            table[e] = static_cast<Symbol>(s);
            const double cand = objective(table);
            if (cand < best_val) {
              best_val = cand;
              best_sym = static_cast<Symbol>(s);
            }
          }
          table[e] = best_sym;
          if (best_sym != old) {
            value = best_val;
            consider(table, value);
            improved = true;
          }
        }
      }
      if (value <= eps + kFitSlack) break;
    }
  }

  result.found = !best_table.empty() && result.best_value <= eps + kFitSlack;
  if (!best_table.empty())
    result.code = BlockCode(in, out, code_window, std::move(best_table));
  return result;
}

}  // namespace soficlab
