#pragma once

// JSON model and policy files.

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "rabin/error.hpp"
#include "rabin/mdp.hpp"

namespace rabin {

namespace detail {

using nlohmann::json;

inline const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError("schema: " + path + " must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("schema: missing field " + path + "." + key);
  return *it;
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ParseError("schema: " + path + " must be a string");
  return v.get<std::string>();
}

inline std::size_t as_index(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ParseError("schema: " + path + " must be a nonnegative integer");
  return v.get<std::size_t>();
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError("schema: " + path + " must be a number");
  return v.get<double>();
}

inline const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError("schema: " + path + " must be an array");
  return v;
}

inline json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), e.byte == 0 ? 0 : e.byte - 1);
  }
}

}  // namespace detail

inline std::string serialize_mdp(const LabeledMdp& m) {
  using nlohmann::json;
  json j;
  j["atoms"] = m.atoms;
  j["actions"] = m.actions;
  json states = json::array();
  for (StateId s = 0; s < m.num_states(); ++s) {
    json labels = json::array();
    for (std::size_t i = 0; i < m.atoms.size(); ++i)
      if (m.holds(s, i)) labels.push_back(m.atoms[i]);
    json enabled = json::array();
    for (auto a : m.enabled[s]) enabled.push_back(m.actions[a]);
    states.push_back({{"labels", labels}, {"enabled", enabled}});
  }
  j["states"] = std::move(states);
  j["initial"] = m.initial;
  json transitions = json::array();
  for (StateId s = 0; s < m.num_states(); ++s)
    for (auto a : m.enabled[s])
      for (const auto& t : m.row(s, a))
        transitions.push_back({{"from", s}, {"action", m.actions[a]}, {"to", t.to}, {"p", t.p}});
  j["transitions"] = std::move(transitions);
  return j.dump(1);
}

/// Parses a model file. Schema problems raise ParseError naming the field;
/// the returned model is checked with require_valid.
inline LabeledMdp deserialize_mdp(const std::string& text) {
  using namespace detail;
  json j = parse_json(text);
  const std::string root = "$";

  std::vector<std::string> atoms, actions;
  const auto& ja = as_array(field(j, "atoms", root), "$.atoms");
  for (std::size_t i = 0; i < ja.size(); ++i) atoms.push_back(as_string(ja[i], "$.atoms[" + std::to_string(i) + "]"));
  const auto& jac = as_array(field(j, "actions", root), "$.actions");
  for (std::size_t i = 0; i < jac.size(); ++i)
    actions.push_back(as_string(jac[i], "$.actions[" + std::to_string(i) + "]"));
  if (atoms.size() > kMaxMdpAtoms) throw ValidationError("too many atoms");

  const auto& js = as_array(field(j, "states", root), "$.states");
  LabeledMdp m(atoms, actions, js.size());
  for (std::size_t s = 0; s < js.size(); ++s) {
    const std::string path = "$.states[" + std::to_string(s) + "]";
    const auto& labels = as_array(field(js[s], "labels", path), path + ".labels");
    for (std::size_t k = 0; k < labels.size(); ++k) {
      auto name = as_string(labels[k], path + ".labels[" + std::to_string(k) + "]");
      auto id = m.atom_id(name);
      if (!id) throw ValidationError(path + ": label '" + name + "' is not a declared atom");
      m.labels[s] |= Letter{1} << *id;
    }
    const auto& en = as_array(field(js[s], "enabled", path), path + ".enabled");
    for (std::size_t k = 0; k < en.size(); ++k) {
      auto name = as_string(en[k], path + ".enabled[" + std::to_string(k) + "]");
      auto id = m.action_id(name);
      if (!id) throw ValidationError(path + ": enabled action '" + name + "' is not declared");
      m.enabled[s].push_back(*id);
    }
    std::sort(m.enabled[s].begin(), m.enabled[s].end());
  }
  m.initial = as_index(field(j, "initial", root), "$.initial");

  const auto& jt = as_array(field(j, "transitions", root), "$.transitions");
  for (std::size_t k = 0; k < jt.size(); ++k) {
    const std::string path = "$.transitions[" + std::to_string(k) + "]";
    auto from = as_index(field(jt[k], "from", path), path + ".from");
    auto name = as_string(field(jt[k], "action", path), path + ".action");
    auto to = as_index(field(jt[k], "to", path), path + ".to");
    auto p = as_number(field(jt[k], "p", path), path + ".p");
    auto a = m.action_id(name);
    if (!a) throw ValidationError(path + ": action '" + name + "' is not declared");
    if (from >= m.num_states()) throw ValidationError(path + ": source state out of range");
    m.row(from, *a).push_back({to, p});
  }
  require_valid(m);
  return m;
}

/// Policy file contents. `choices` holds action names per (product) state.
struct PolicyFile {
  std::vector<std::string> choices;
  std::size_t mdp_states = 0;
  std::size_t dra_states = 0;
  std::vector<double> utilities;  // optional, may be empty
};

inline std::string serialize_policy(const PolicyFile& p) {
  nlohmann::json j;
  j["choices"] = p.choices;
  j["product_meta"] = {{"mdp_states", p.mdp_states}, {"dra_states", p.dra_states}};
  if (!p.utilities.empty()) j["utilities"] = p.utilities;
  return j.dump(1);
}

inline PolicyFile deserialize_policy(const std::string& text) {
  using namespace detail;
  json j = parse_json(text);
  PolicyFile p;
  const auto& jc = as_array(field(j, "choices", "$"), "$.choices");
  for (std::size_t i = 0; i < jc.size(); ++i) p.choices.push_back(as_string(jc[i], "$.choices[" + std::to_string(i) + "]"));
  const auto& meta = field(j, "product_meta", "$");
  p.mdp_states = as_index(field(meta, "mdp_states", "$.product_meta"), "$.product_meta.mdp_states");
  p.dra_states = as_index(field(meta, "dra_states", "$.product_meta"), "$.product_meta.dra_states");
  if (p.mdp_states * p.dra_states != p.choices.size())
    throw ValidationError("policy has " + std::to_string(p.choices.size()) + " choices but product_meta implies " +
                          std::to_string(p.mdp_states * p.dra_states));
  if (auto it = j.find("utilities"); it != j.end()) {
    const auto& ju = as_array(*it, "$.utilities");
    for (std::size_t i = 0; i < ju.size(); ++i) p.utilities.push_back(as_number(ju[i], "$.utilities[" + std::to_string(i) + "]"));
    if (!p.utilities.empty() && p.utilities.size() != p.choices.size())
      throw ValidationError("utilities length does not match choices");
  }
  return p;
}

}  // namespace rabin
