#pragma once

// Experiment dispatch: validate a config, run its operation, and assemble the
// machine-readable report. Reports are deterministic for a fixed config and
// seed; the wall_time_ms field is the only exception.

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "soficlab/config.hpp"
#include "soficlab/version.hpp"

namespace soficlab {

struct PreparedExperiment {
  std::string op;
  std::vector<std::string> warnings;
  std::function<json(int jobs)> run;
};

namespace detail {

inline void warn_unattainable(std::vector<std::string>& warnings, double eps, std::size_t m) {
  if (eps <= 1.0 / static_cast<double>(m + 1)) {
    std::ostringstream os;
    os << "epsilon " << eps << " <= 1/(m+1) = " << 1.0 / static_cast<double>(m + 1)
       << ": window-" << m
       << " closeness cannot certify the untruncated metric; pick m >= ceil(1/epsilon)";
    warnings.push_back(os.str());
  }
}

inline json certificate_payload(const DistanceCertificate& cert) {
  return json{{"m", cert.m},
              {"value", cert.value},
              {"lower", cert.lower},
              {"upper", cert.upper},
              {"coupling_nnz", cert.coupling.entries.size()}};
}

inline std::uint64_t resolve_seed(const json& cfg, const std::optional<std::uint64_t>& fallback,
                                  const std::string& op) {
  if (cfg.contains("seed")) return cfg::require_uint(cfg, "seed", "config");
  if (fallback) return *fallback;
  throw ConfigError("config.seed: required for randomized op \"" + op +
                    "\" (or set SOFICLAB_SEED)");
}

inline std::string microstate_key(const Microstate& tau) {
  return pattern_key(tau.alphabet, Pattern(tau.labels.begin(), tau.labels.end()));
}

}  // namespace detail

/// Builds every object the config references and returns a ready-to-run
/// closure; throws ConfigError on any schema or semantic violation.
inline PreparedExperiment prepare_experiment(const json& cfg,
                                             std::optional<std::uint64_t> default_seed) {
  PreparedExperiment prep;
  prep.op = cfg::require_string(cfg, "op", "config");
  const std::string& op = prep.op;

  if (op == "goodness") {
    if (cfg.contains("models")) {
      const json& mj = cfg.at("models");
      if (!mj.is_array() || mj.empty())
        throw ConfigError("config.models: expected a nonempty array");
      std::vector<FiniteModel> models;
      for (std::size_t i = 0; i < mj.size(); ++i)
        models.push_back(build_model(mj[i], "config.models[" + std::to_string(i) + "]"));
      const int k_max = static_cast<int>(cfg::require_uint(cfg, "k_max", "config"));
      if (k_max < 1) throw ConfigError("config.k_max: must be >= 1");
      SoficApproximationSeq seq(std::move(models));
      prep.run = [seq = std::move(seq), k_max](int) {
        json rows = json::array();
        for (const auto& row : sequence_goodness(seq, k_max)) {
          rows.push_back(json{{"k", row.k},
                              {"attained", row.attained},
                              {"tail_start", row.tail_start},
                              {"pass", row.pass}});
        }
        return json{{"k_max", k_max}, {"rows", rows}};
      };
      return prep;
    }
    FiniteModel model = build_model(cfg::require(cfg, "model", "config"), "config.model");
    const int k = static_cast<int>(cfg::require_uint(cfg, "k", "config"));
    if (k < 1) throw ConfigError("config.k: must be >= 1");
    prep.run = [model = std::move(model), k](int) {
      const GoodnessReport r = goodness(model, k);
      return json{{"k", r.k},
                  {"pass", r.pass},
                  {"separation_min", r.separation_min},
                  {"defect_max", r.defect_max}};
    };
    return prep;
  }

  if (op == "distance") {
    CylinderOracle left = build_oracle(cfg::require(cfg, "left", "config"), "config.left");
    CylinderOracle right = build_oracle(cfg::require(cfg, "right", "config"), "config.right");
    const auto m = static_cast<std::size_t>(cfg::require_uint(cfg, "m", "config"));
    if (m < 1) throw ConfigError("config.m: must be >= 1");
    if (left.alphabet() != right.alphabet())
      throw ConfigError("config.right: oracle alphabet differs from config.left");
    prep.run = [left = std::move(left), right = std::move(right), m](int) {
      return detail::certificate_payload(kantorovich(left.marginal(m), right.marginal(m)));
    };
    return prep;
  }

  if (op == "fit") {
    FiniteModel model = build_model(cfg::require(cfg, "model", "config"), "config.model");
    CylinderOracle oracle = build_oracle(cfg::require(cfg, "oracle", "config"), "config.oracle");
    const auto m = static_cast<std::size_t>(cfg::require_uint(cfg, "m", "config"));
    if (m < 1) throw ConfigError("config.m: must be >= 1");
    Microstate tau = [&] {
      if (cfg.contains("tau"))
        return build_microstate(cfg.at("tau"), oracle.alphabet(), "config.tau");
      // seeded i.i.d. draw from the oracle's 1-window marginal
      const std::uint64_t seed = detail::resolve_seed(cfg, default_seed, "fit (random tau)");
      const WindowDistribution marg1 = oracle.marginal(1);
      std::vector<double> base(oracle.alphabet().size(), 0.0);
      for (std::size_t s = 0; s < base.size(); ++s)
        base[s] = marg1.prob({static_cast<Symbol>(s)});
      Rng rng(seed);
      std::vector<Symbol> labels(model.size());
      for (auto& l : labels) l = static_cast<Symbol>(rng.discrete(base));
      return Microstate(oracle.alphabet(), std::move(labels));
    }();
    if (tau.size() != model.size())
      throw ConfigError("config.tau: length " + std::to_string(tau.size()) +
                        " does not match model size " + std::to_string(model.size()));
    prep.run = [model = std::move(model), oracle = std::move(oracle), tau = std::move(tau),
                m](int) {
      json payload = detail::certificate_payload(fit(model, tau, oracle, m));
      payload["n"] = model.size();
      return payload;
    };
    return prep;
  }

  if (op == "search") {
    FiniteModel model = build_model(cfg::require(cfg, "model", "config"), "config.model");
    CylinderOracle oracle = build_oracle(cfg::require(cfg, "oracle", "config"), "config.oracle");
    const auto m = static_cast<std::size_t>(cfg::require_uint(cfg, "m", "config"));
    const double eps = cfg::require_number(cfg, "epsilon", "config");
    if (m < 1) throw ConfigError("config.m: must be >= 1");
    if (eps <= 0.0) throw ConfigError("config.epsilon: must be positive");
    const std::uint64_t budget = cfg::optional_uint(cfg, "budget", "config").value_or(100000);
    if (budget < 1) throw ConfigError("config.budget: must be >= 1");
    const std::uint64_t seed = detail::resolve_seed(cfg, default_seed, op);
    detail::warn_unattainable(prep.warnings, eps, m);
    prep.run = [model = std::move(model), oracle = std::move(oracle), m, eps, budget, seed](int) {
      const SearchResult r = search_microstate(model, oracle, m, eps, budget, seed);
      json payload = detail::certificate_payload(r.fit);
      payload["epsilon"] = eps;
      payload["budget"] = budget;
      payload["seed"] = seed;
      payload["evaluations"] = r.evaluations;
      payload["sweeps"] = r.sweeps;
      payload["pass"] = r.reached_target;
      payload["tau"] = detail::microstate_key(r.best);
      return payload;
    };
    return prep;
  }

  if (op == "entropy") {
    FiniteModel model = build_model(cfg::require(cfg, "model", "config"), "config.model");
    CylinderOracle oracle = build_oracle(cfg::require(cfg, "oracle", "config"), "config.oracle");
    const auto m = static_cast<std::size_t>(cfg::require_uint(cfg, "m", "config"));
    const double eps = cfg::require_number(cfg, "epsilon", "config");
    if (m < 1) throw ConfigError("config.m: must be >= 1");
    if (eps <= 0.0) throw ConfigError("config.epsilon: must be positive");
    const std::string mode = cfg::require_string(cfg, "mode", "config");
    detail::warn_unattainable(prep.warnings, eps, m);
    if (mode == "exact") {
      double states = 1.0;
      for (std::size_t v = 0; v < model.size(); ++v)
        states *= static_cast<double>(oracle.alphabet().size());
      if (states > static_cast<double>(1u << 24))
        throw ConfigError("config.mode: exact mode needs |A|^n <= 2^24");
      prep.run = [model = std::move(model), oracle = std::move(oracle), m, eps](int jobs) {
        const EntropyEstimate est = entropy_exact(model, oracle, m, eps, jobs);
        return json{{"n", est.n},       {"m", est.m},
                    {"epsilon", est.eps}, {"mode", "exact"},
                    {"count", est.count}, {"value_defined", est.value_defined},
                    {"value", est.value_defined ? json(est.value) : json(nullptr)}};
      };
      return prep;
    }
    if (mode == "montecarlo") {
      const std::uint64_t samples = cfg::require_uint(cfg, "samples", "config");
      if (samples < 1) throw ConfigError("config.samples: must be >= 1");
      const std::uint64_t seed = detail::resolve_seed(cfg, default_seed, "entropy (montecarlo)");
      // uniform sampling makes fraction * |A|^n an unbiased count estimate but
      // is high-variance when the target is far from uniform
      const WindowDistribution marg1 = oracle.marginal(1);
      double max_base = 0.0;
      for (const auto& [p, mass] : marg1.mass()) max_base = std::max(max_base, mass);
      const bool biased = max_base >= 0.75;
      if (biased)
        prep.warnings.push_back(
            "montecarlo counting samples uniformly; the estimate is high-variance for this "
            "strongly biased target");
      prep.run = [model = std::move(model), oracle = std::move(oracle), m, eps, samples, seed,
                  biased](int jobs) {
        const EntropyEstimate est = entropy_montecarlo(model, oracle, m, eps, samples, seed, jobs);
        json payload{{"n", est.n},           {"m", est.m},
                     {"epsilon", est.eps},   {"mode", "montecarlo"},
                     {"samples", est.samples}, {"seed", est.seed},
                     {"fraction", est.fraction}, {"value_defined", est.value_defined},
                     {"value", est.value_defined ? json(est.value) : json(nullptr)},
                     {"std_error", est.value_defined ? json(est.std_error) : json(nullptr)}};
        if (biased) payload["note"] = "high variance: uniform sampling of a biased target";
        return payload;
      };
      return prep;
    }
    throw ConfigError("config.mode: expected \"exact\" or \"montecarlo\"");
  }

  if (op == "trace") {
    const json& mj = cfg::require(cfg, "models", "config");
    if (!mj.is_array() || mj.empty()) throw ConfigError("config.models: expected a nonempty array");
    std::vector<FiniteModel> models;
    for (std::size_t i = 0; i < mj.size(); ++i)
      models.push_back(build_model(mj[i], "config.models[" + std::to_string(i) + "]"));
    SoficApproximationSeq seq(std::move(models));
    CylinderOracle oracle = build_oracle(cfg::require(cfg, "oracle", "config"), "config.oracle");
    const auto m = static_cast<std::size_t>(cfg::require_uint(cfg, "m", "config"));
    const double eps = cfg::require_number(cfg, "epsilon", "config");
    if (m < 1) throw ConfigError("config.m: must be >= 1");
    if (eps <= 0.0) throw ConfigError("config.epsilon: must be positive");
    const std::uint64_t budget = cfg::optional_uint(cfg, "budget", "config").value_or(100000);
    const std::uint64_t seed = detail::resolve_seed(cfg, default_seed, op);
    detail::warn_unattainable(prep.warnings, eps, m);
    prep.run = [seq = std::move(seq), oracle = std::move(oracle), m, eps, budget, seed](int) {
      const ApproximabilityTrace trace = approximability_trace(seq, oracle, m, eps, budget, seed);
      json rows = json::array();
      for (const auto& row : trace.rows)
        rows.push_back(json{{"index", row.index},
                            {"n", row.n},
                            {"fit_value", row.fit_value},
                            {"fit_lower", row.fit_lower},
                            {"fit_upper", row.fit_upper},
                            {"pass", row.pass},
                            {"evaluations", row.evaluations}});
      return json{{"m", m},
                  {"epsilon", eps},
                  {"budget", budget},
                  {"seed", seed},
                  {"rows", rows},
                  {"eventually_all", trace.eventually_all},
                  {"tail_start", trace.tail_start},
                  {"on_subsequence", trace.on_subsequence},
                  {"pass_count", trace.pass_count}};
    };
    return prep;
  }

  if (op == "dq") {
    FiniteModel model = build_model(cfg::require(cfg, "model", "config"), "config.model");
    CylinderOracle oracle = build_oracle(cfg::require(cfg, "oracle", "config"), "config.oracle");
    MicrostateSampler sampler =
        build_sampler(cfg::require(cfg, "sampler", "config"), oracle.alphabet(), "config.sampler");
    const auto m = static_cast<std::size_t>(cfg::require_uint(cfg, "m", "config"));
    const double eps = cfg::require_number(cfg, "epsilon", "config");
    if (m < 1) throw ConfigError("config.m: must be >= 1");
    if (eps <= 0.0) throw ConfigError("config.epsilon: must be positive");
    const std::uint64_t pairs = cfg::require_uint(cfg, "pairs", "config");
    if (pairs < 1) throw ConfigError("config.pairs: must be >= 1");
    const std::uint64_t seed = detail::resolve_seed(cfg, default_seed, op);
    detail::warn_unattainable(prep.warnings, eps, m);
    prep.run = [model = std::move(model), oracle = std::move(oracle), sampler = std::move(sampler),
                m, eps, pairs, seed](int jobs) {
      const DQReport r = dq_test(model, sampler, oracle, m, eps, pairs, seed, jobs);
      return json{{"m", r.m},
                  {"epsilon", r.eps},
                  {"pairs", r.pairs},
                  {"seed", r.seed},
                  {"good_pairs", r.good_pairs},
                  {"w_mass", r.w_mass},
                  {"pooled_value", r.pooled_value},
                  {"pooled_lower", r.pooled_lower},
                  {"pooled_upper", r.pooled_upper}};
    };
    return prep;
  }

  if (op == "product_check") {
    FiniteModel left = build_model(cfg::require(cfg, "left_model", "config"), "config.left_model");
    FiniteModel right =
        build_model(cfg::require(cfg, "right_model", "config"), "config.right_model");
    const Alphabet alpha_left =
        build_alphabet(cfg::require(cfg, "alphabet_left", "config"), "config.alphabet_left");
    const Alphabet alpha_right =
        build_alphabet(cfg::require(cfg, "alphabet_right", "config"), "config.alphabet_right");
    Microstate tau_left =
        build_microstate(cfg::require(cfg, "tau_left", "config"), alpha_left, "config.tau_left");
    Microstate tau_right = build_microstate(cfg::require(cfg, "tau_right", "config"), alpha_right,
                                            "config.tau_right");
    const auto m = static_cast<std::size_t>(cfg::require_uint(cfg, "m", "config"));
    if (m < 1) throw ConfigError("config.m: must be >= 1");
    if (left.group() != right.group())
      throw ConfigError("config.right_model: group differs from config.left_model");
    if (tau_left.size() != left.size())
      throw ConfigError("config.tau_left: length does not match model size");
    if (tau_right.size() != right.size())
      throw ConfigError("config.tau_right: length does not match model size");
    prep.run = [left = std::move(left), right = std::move(right), tau_left = std::move(tau_left),
                tau_right = std::move(tau_right), m](int) {
      const bool equal = product_identity_check(left, right, tau_left, tau_right, m);
      return json{{"m", m},
                  {"equal", equal},
                  {"n_left", left.size()},
                  {"n_right", right.size()}};
    };
    return prep;
  }

  throw ConfigError("config.op: unknown op \"" + op + "\"");
}

// --- reports -------------------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_digest(const std::string& raw_bytes) {
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << fnv1a64(raw_bytes);
  return os.str();
}

inline json make_report(const json& cfg, const std::string& raw_bytes, const std::string& op,
                        json payload, double wall_time_ms) {
  return json{{"config", cfg},
              {"config_digest", config_digest(raw_bytes)},
              {"op", op},
              {"payload", std::move(payload)},
              {"soficlab_version", kVersion},
              {"wall_time_ms", wall_time_ms}};
}

// --- trace CSV -------------------------------------------------------------------

inline std::string format_double(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

/// Stable column order, LF line endings; booleans as true/false.
inline std::string trace_to_csv(const json& trace_payload) {
  if (!trace_payload.contains("rows"))
    throw std::invalid_argument("trace_to_csv: payload has no rows");
  std::string out = "index,n,fit_lower,fit_upper,pass\n";
  for (const auto& row : trace_payload.at("rows")) {
    out += std::to_string(row.at("index").get<std::uint64_t>());
    out += ',';
    out += std::to_string(row.at("n").get<std::uint64_t>());
    out += ',';
    out += format_double(row.at("fit_lower").get<double>());
    out += ',';
    out += format_double(row.at("fit_upper").get<double>());
    out += ',';
    out += row.at("pass").get<bool>() ? "true" : "false";
    out += '\n';
  }
  return out;
}

/// Inverse of trace_to_csv for the shipped column set.
inline json csv_to_trace_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "index,n,fit_lower,fit_upper,pass")
    throw std::invalid_argument("csv_to_trace_rows: bad header");
  json rows = json::array();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    json row;
    std::getline(ls, field, ',');
    row["index"] = std::stoull(field);
    std::getline(ls, field, ',');
    row["n"] = std::stoull(field);
    std::getline(ls, field, ',');
    row["fit_lower"] = std::stod(field);
    std::getline(ls, field, ',');
    row["fit_upper"] = std::stod(field);
    std::getline(ls, field, ',');
    row["pass"] = (field == "true");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace soficlab
