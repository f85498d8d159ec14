#pragma once

// Labeled MDPs and stationary policies.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rabin/dra.hpp"
#include "rabin/error.hpp"

namespace rabin {

using StateId = std::size_t;
using ActionId = std::size_t;

struct Transition {
  StateId to;
  double p;
  friend bool operator==(const Transition&, const Transition&) = default;
};

inline constexpr std::size_t kMaxMdpAtoms = 32;
inline constexpr double kStochasticTol = 1e-9;

/// States carry a label bitset over `atoms` (bit i set iff atoms[i] holds).
/// Transition rows are stored for every (state, action) pair; rows of
/// disabled actions stay empty.
struct LabeledMdp {
  std::vector<std::string> atoms;
  std::vector<std::string> actions;
  std::vector<std::vector<ActionId>> enabled;  // ascending action ids
  std::vector<Letter> labels;
  std::vector<std::vector<Transition>> rows;   // rows[s * actions.size() + a]
  StateId initial = 0;

  LabeledMdp() = default;
  LabeledMdp(std::vector<std::string> atoms_, std::vector<std::string> actions_, std::size_t num_states)
      : atoms(std::move(atoms_)),
        actions(std::move(actions_)),
        enabled(num_states),
        labels(num_states, 0),
        rows(num_states * actions.size()) {}

  std::size_t num_states() const { return enabled.size(); }
  std::size_t num_actions() const { return actions.size(); }

  const std::vector<Transition>& row(StateId s, ActionId a) const { return rows.at(s * actions.size() + a); }
  std::vector<Transition>& row(StateId s, ActionId a) { return rows.at(s * actions.size() + a); }

  bool is_enabled(StateId s, ActionId a) const {
    for (auto b : enabled.at(s))
      if (b == a) return true;
    return false;
  }

  std::optional<ActionId> action_id(const std::string& name) const {
    for (std::size_t a = 0; a < actions.size(); ++a)
      if (actions[a] == name) return a;
    return std::nullopt;
  }
  std::optional<std::size_t> atom_id(const std::string& name) const {
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (atoms[i] == name) return i;
    return std::nullopt;
  }

  bool holds(StateId s, std::size_t atom) const { return (labels.at(s) >> atom) & 1U; }

  friend bool operator==(const LabeledMdp&, const LabeledMdp&) = default;
};

/// A memoryless choice of action per state of whatever model it targets.
struct StationaryPolicy {
  std::vector<ActionId> choice;

  std::size_t size() const { return choice.size(); }
  ActionId operator()(std::size_t s) const { return choice.at(s); }
  friend bool operator==(const StationaryPolicy&, const StationaryPolicy&) = default;
};

struct MdpIssue {
  std::optional<StateId> state;
  std::optional<ActionId> action;
  std::string message;

  std::string describe() const {
    std::string out;
    if (state) out += "state " + std::to_string(*state);
    if (action) out += (out.empty() ? "" : ", ") + std::string("action ") + std::to_string(*action);
    return out.empty() ? message : out + ": " + message;
  }
};

/// Checks every structural invariant and returns all problems found.
inline std::vector<MdpIssue> validate_mdp(const LabeledMdp& m) {
  std::vector<MdpIssue> issues;
  const std::size_t n = m.num_states();
  if (n == 0) issues.push_back({{}, {}, "model has no states"});
  if (m.actions.empty()) issues.push_back({{}, {}, "model has no actions"});
  if (m.atoms.size() > kMaxMdpAtoms) issues.push_back({{}, {}, "too many atoms"});
  if (n > 0 && m.initial >= n) issues.push_back({{}, {}, "initial state out of range"});
  if (m.labels.size() != n) issues.push_back({{}, {}, "label table does not match state count"});
  if (m.rows.size() != n * m.actions.size()) {
    issues.push_back({{}, {}, "transition table does not match state and action counts"});
    return issues;
  }
  const Letter atom_mask = m.atoms.size() >= 32 ? ~Letter{0} : ((Letter{1} << m.atoms.size()) - 1);
  for (StateId s = 0; s < n; ++s) {
    if (s < m.labels.size() && (m.labels[s] & ~atom_mask))
      issues.push_back({s, {}, "label references an undeclared atom"});
    const auto& en = m.enabled[s];
    if (en.empty()) issues.push_back({s, {}, "no enabled action"});
    for (std::size_t j = 0; j < en.size(); ++j) {
      if (en[j] >= m.actions.size()) issues.push_back({s, {}, "enabled action out of range"});
      else if (j > 0 && en[j] <= en[j - 1]) issues.push_back({s, en[j], "enabled actions not strictly ascending"});
    }
    for (ActionId a = 0; a < m.actions.size(); ++a) {
      const auto& row = m.row(s, a);
      bool on = m.is_enabled(s, a);
      if (!on) {
        if (!row.empty()) issues.push_back({s, a, "transitions given for a disabled action"});
        continue;
      }
      double sum = 0.0;
      for (const auto& t : row) {
        if (t.to >= n) issues.push_back({s, a, "successor out of range"});
        if (!(t.p >= 0.0 && t.p <= 1.0)) issues.push_back({s, a, "probability outside [0, 1]"});
        sum += t.p;
      }
      if (std::abs(sum - 1.0) > kStochasticTol)
        issues.push_back({s, a, "probabilities sum to " + std::to_string(sum) + ", not 1"});
    }
  }
  return issues;
}

/// Throws ValidationError listing the first few issues, if any.
inline void require_valid(const LabeledMdp& m) {
  auto issues = validate_mdp(m);
  if (issues.empty()) return;
  std::string msg = "invalid model: " + issues.front().describe();
  if (issues.size() > 1) msg += " (and " + std::to_string(issues.size() - 1) + " more)";
  throw ValidationError(msg);
}

}  // namespace rabin
