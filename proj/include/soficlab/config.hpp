#pragma once

// JSON schemas for groups, models, oracles, and samplers. Builders throw
// ConfigError with the offending field's path so the CLI can print a usable
// diagnostic and exit with the validation status.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "soficlab/group.hpp"
#include "soficlab/lab.hpp"
#include "soficlab/model.hpp"
#include "soficlab/oracle.hpp"

namespace soficlab {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace cfg {

inline const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key + ": missing required field");
  return *it;
}

inline std::string require_string(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline std::uint64_t require_uint(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ConfigError(path + "." + key + ": expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

inline double require_number(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::optional<std::uint64_t> optional_uint(const json& j, const std::string& key,
                                                  const std::string& path) {
  if (!j.is_object() || !j.contains(key)) return std::nullopt;
  return require_uint(j, key, path);
}

}  // namespace cfg

inline Group build_group(const json& spec, const std::string& path) {
  const std::string family = cfg::require_string(spec, "family", path);
  try {
    if (family == "integers") return Group::integers();
    if (family == "int_lattice")
      return Group::lattice(static_cast<int>(cfg::require_uint(spec, "dim", path)));
    if (family == "free")
      return Group::free_group(static_cast<int>(cfg::require_uint(spec, "rank", path)));
    if (family == "cyclic") return Group::cyclic(cfg::require_uint(spec, "order", path));
    if (family == "product")
      return Group::product(build_group(cfg::require(spec, "left", path), path + ".left"),
                            build_group(cfg::require(spec, "right", path), path + ".right"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  throw ConfigError(path + ".family: unknown family \"" + family + "\"");
}

inline FiniteModel build_model(const json& spec, const std::string& path) {
  const std::string kind = cfg::require_string(spec, "kind", path);
  try {
    if (kind == "cyclic") return FiniteModel::cyclic_model(cfg::require_uint(spec, "n", path));
    if (kind == "lattice")
      return FiniteModel::lattice_model(static_cast<int>(cfg::require_uint(spec, "dim", path)),
                                        cfg::require_uint(spec, "side", path));
    if (kind == "free_random")
      return FiniteModel::free_random_model(
          static_cast<int>(cfg::require_uint(spec, "rank", path)),
          static_cast<std::size_t>(cfg::require_uint(spec, "n", path)),
          cfg::require_uint(spec, "seed", path));
    if (kind == "product")
      return FiniteModel::product_model(
          build_model(cfg::require(spec, "left", path), path + ".left"),
          build_model(cfg::require(spec, "right", path), path + ".right"));
    if (kind == "table") {
      const Group group = build_group(cfg::require(spec, "group", path), path + ".group");
      const std::size_t n = static_cast<std::size_t>(cfg::require_uint(spec, "n", path));
      const json& perms = cfg::require(spec, "perms", path);
      if (!perms.is_object()) throw ConfigError(path + ".perms: expected an object");
      std::map<std::string, Permutation> table;
      for (const auto& [key, arr] : perms.items()) {
        if (!arr.is_array()) throw ConfigError(path + ".perms." + key + ": expected an array");
        std::vector<std::uint32_t> img;
        for (const auto& x : arr) {
          if (!x.is_number_unsigned())
            throw ConfigError(path + ".perms." + key + ": expected vertex indices");
          img.push_back(x.get<std::uint32_t>());
        }
        if (!Permutation::is_bijection(img) || img.size() != n)
          throw ConfigError(path + ".perms." + key + ": not a permutation of 0.." +
                            std::to_string(n - 1));
        table.emplace(key, Permutation(std::move(img)));
      }
      return FiniteModel::table_model(group, n, std::move(table));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  throw ConfigError(path + ".kind: unknown model kind \"" + kind + "\"");
}

inline Alphabet build_alphabet(const json& labels, const std::string& path) {
  if (!labels.is_array() || labels.empty())
    throw ConfigError(path + ": expected a nonempty array of labels");
  std::vector<std::string> out;
  for (const auto& l : labels) {
    if (!l.is_string()) throw ConfigError(path + ": labels must be strings");
    out.push_back(l.get<std::string>());
  }
  try {
    return Alphabet(std::move(out));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline CylinderOracle build_oracle(const json& spec, const std::string& path) {
  const std::string kind = cfg::require_string(spec, "kind", path);
  Group group = spec.contains("group")
                    ? build_group(spec.at("group"), path + ".group")
                    : Group::integers();
  try {
    if (kind == "bernoulli") {
      const json& base = cfg::require(spec, "base", path);
      if (!base.is_object() || base.empty())
        throw ConfigError(path + ".base: expected an object of label masses");
      std::vector<std::string> labels;
      std::vector<double> masses;
      for (const auto& [label, mass] : base.items()) {  // nlohmann orders keys
        if (!mass.is_number()) throw ConfigError(path + ".base." + label + ": expected a number");
        labels.push_back(label);
        masses.push_back(mass.get<double>());
      }
      return CylinderOracle::bernoulli(group, Alphabet(std::move(labels)), std::move(masses));
    }
    if (kind == "markov") {
      const Alphabet alphabet = build_alphabet(cfg::require(spec, "alphabet", path),
                                               path + ".alphabet");
      const json& tj = cfg::require(spec, "transition", path);
      if (!tj.is_array()) throw ConfigError(path + ".transition: expected a matrix");
      std::vector<std::vector<double>> transition;
      for (const auto& row : tj) {
        if (!row.is_array()) throw ConfigError(path + ".transition: expected a matrix");
        transition.push_back(row.get<std::vector<double>>());
      }
      std::optional<std::vector<double>> stationary;
      if (spec.contains("stationary")) stationary = spec.at("stationary").get<std::vector<double>>();
      return CylinderOracle::markov(group, alphabet, std::move(transition), std::move(stationary));
    }
    if (kind == "block_code") {
      CylinderOracle parent = build_oracle(cfg::require(spec, "parent", path), path + ".parent");
      const std::size_t window =
          static_cast<std::size_t>(cfg::require_uint(spec, "window", path));
      const json& code = cfg::require(spec, "code", path);
      if (!code.is_object() || code.empty())
        throw ConfigError(path + ".code: expected an object mapping input patterns to labels");
      // output alphabet: explicit, or the sorted distinct code values
      Alphabet out = spec.contains("out_alphabet")
                         ? build_alphabet(spec.at("out_alphabet"), path + ".out_alphabet")
                         : [&] {
                             std::vector<std::string> labels;
                             for (const auto& [k, v] : code.items()) {
                               (void)k;
                               if (!v.is_string())
                                 throw ConfigError(path + ".code: values must be labels");
                               const auto s = v.get<std::string>();
                               if (std::find(labels.begin(), labels.end(), s) == labels.end())
                                 labels.push_back(s);
                             }
                             std::sort(labels.begin(), labels.end());
                             return Alphabet(std::move(labels));
                           }();
      const Alphabet& in = parent.alphabet();
      std::size_t entries = 1;
      for (std::size_t i = 0; i < window; ++i) entries *= in.size();
      std::vector<Symbol> table(entries, 0);
      std::vector<bool> seen(entries, false);
      for (const auto& [key, v] : code.items()) {
        Pattern p;
        try {
          p = parse_pattern(in, key);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(path + ".code." + key + ": " + e.what());
        }
        if (p.size() != window)
          throw ConfigError(path + ".code." + key + ": pattern length != window");
        std::size_t rank = 0;
        for (Symbol s : p) rank = rank * in.size() + s;
        auto sym = out.find(v.get<std::string>());
        if (!sym)
          throw ConfigError(path + ".code." + key + ": value outside the output alphabet");
        table[rank] = *sym;
        seen[rank] = true;
      }
      for (std::size_t r = 0; r < entries; ++r)
        if (!seen[r])
          throw ConfigError(path + ".code: not total on the input window (" +
                            std::to_string(entries) + " patterns expected)");
      return CylinderOracle::block_code(std::move(parent),
                                        BlockCode(in, out, window, std::move(table)));
    }
    if (kind == "product")
      return CylinderOracle::product(
          build_oracle(cfg::require(spec, "left", path), path + ".left"),
          build_oracle(cfg::require(spec, "right", path), path + ".right"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  throw ConfigError(path + ".kind: unknown oracle kind \"" + kind + "\"");
}

inline MicrostateSampler build_sampler(const json& spec, const Alphabet& alphabet,
                                       const std::string& path) {
  const std::string kind = cfg::require_string(spec, "kind", path);
  try {
    if (kind == "iid") {
      const json& base = cfg::require(spec, "base", path);
      if (!base.is_object()) throw ConfigError(path + ".base: expected an object");
      std::vector<double> masses(alphabet.size(), 0.0);
      for (const auto& [label, mass] : base.items()) {
        auto s = alphabet.find(label);
        if (!s) throw ConfigError(path + ".base." + label + ": label outside oracle alphabet");
        masses[*s] = mass.get<double>();
      }
      return MicrostateSampler::iid(alphabet, std::move(masses));
    }
    if (kind == "explicit") {
      const json& items = cfg::require(spec, "items", path);
      if (!items.is_array() || items.empty())
        throw ConfigError(path + ".items: expected a nonempty array");
      std::vector<std::pair<Microstate, double>> list;
      for (const auto& item : items) {
        const std::string tau = cfg::require_string(item, "tau", path + ".items[]");
        const double weight = cfg::require_number(item, "weight", path + ".items[]");
        Pattern p;
        try {
          p = parse_pattern(alphabet, tau);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(path + ".items[].tau: " + std::string(e.what()));
        }
        list.emplace_back(Microstate(alphabet, std::vector<Symbol>(p.begin(), p.end())), weight);
      }
      return MicrostateSampler::explicit_list(std::move(list));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  throw ConfigError(path + ".kind: unknown sampler kind \"" + kind + "\"");
}

inline Microstate build_microstate(const json& spec, const Alphabet& alphabet,
                                   const std::string& path) {
  if (!spec.is_string()) throw ConfigError(path + ": expected a pattern string");
  try {
    const Pattern p = parse_pattern(alphabet, spec.get<std::string>());
    return Microstate(alphabet, std::vector<Symbol>(p.begin(), p.end()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace soficlab
