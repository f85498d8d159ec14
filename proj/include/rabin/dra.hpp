#pragma once

// Deterministic Rabin automata with state-based acceptance over the alphabet
// 2^atoms. Letters are bitsets: bit i is set iff atoms()[i] holds.

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rabin/error.hpp"

namespace rabin {

using Letter = std::uint32_t;
using DraState = std::uint32_t;

inline constexpr std::size_t kMaxDraAtoms = 20;

/// One acceptance pair: a run is accepted by the pair if it visits `good`
/// infinitely often and `bad` only finitely often. Both are membership masks
/// indexed by automaton state.
struct RabinPair {
  std::vector<bool> good;
  std::vector<bool> bad;
};

class Dra {
 public:
  /// `delta` is row-major: delta[q * num_letters + letter].
  Dra(std::vector<std::string> atoms, std::size_t num_states, std::vector<DraState> delta, DraState initial,
      std::vector<RabinPair> pairs)
      : atoms_(std::move(atoms)),
        num_states_(num_states),
        delta_(std::move(delta)),
        initial_(initial),
        pairs_(std::move(pairs)) {
    validate();
  }

  const std::vector<std::string>& atoms() const { return atoms_; }
  std::size_t num_states() const { return num_states_; }
  std::size_t num_letters() const { return std::size_t{1} << atoms_.size(); }
  DraState initial() const { return initial_; }
  const std::vector<RabinPair>& pairs() const { return pairs_; }
  const RabinPair& pair(std::size_t i) const { return pairs_.at(i); }

  DraState step(DraState q, Letter letter) const { return delta_[q * num_letters() + letter]; }

  /// Pairs whose good and bad sets intersect. Permitted, but the reward
  /// assignment then has to pick a side.
  std::vector<std::size_t> overlapping_pairs() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      for (std::size_t q = 0; q < num_states_; ++q) {
        if (pairs_[i].good[q] && pairs_[i].bad[q]) {
          out.push_back(i);
          break;
        }
      }
    }
    return out;
  }

  friend bool operator==(const Dra&, const Dra&) = default;

 private:
  void validate() const {
    if (atoms_.size() > kMaxDraAtoms)
      throw ValidationError("automaton alphabet has " + std::to_string(atoms_.size()) + " atoms, at most " +
                            std::to_string(kMaxDraAtoms) + " supported");
    if (num_states_ == 0) throw ValidationError("automaton has no states");
    if (initial_ >= num_states_) throw ValidationError("initial automaton state out of range");
    if (delta_.size() != num_states_ * num_letters())
      throw ValidationError("transition table is not total: expected " + std::to_string(num_states_ * num_letters()) +
                            " entries, got " + std::to_string(delta_.size()));
    for (auto t : delta_)
      if (t >= num_states_) throw ValidationError("transition target out of range");
    if (pairs_.empty()) throw ValidationError("automaton has no acceptance pair");
    for (const auto& p : pairs_)
      if (p.good.size() != num_states_ || p.bad.size() != num_states_)
        throw ValidationError("acceptance pair does not cover every state");
  }

  std::vector<std::string> atoms_;
  std::size_t num_states_;
  std::vector<DraState> delta_;
  DraState initial_;
  std::vector<RabinPair> pairs_;
};

/// Runs the automaton on prefix . cycle^omega and applies the Rabin condition
/// to the states seen on the eventual loop.
inline bool accepts_lasso(const Dra& d, std::span<const Letter> prefix, std::span<const Letter> cycle) {
  if (cycle.empty()) throw ValidationError("lasso cycle must be nonempty");
  DraState q = d.initial();
  for (auto l : prefix) q = d.step(q, l);

  // (state at cycle position 0) repeats after at most |Q| rounds.
  std::map<DraState, std::size_t> seen;
  std::vector<DraState> round_starts;
  while (!seen.contains(q)) {
    seen.emplace(q, round_starts.size());
    round_starts.push_back(q);
    for (auto l : cycle) q = d.step(q, l);
  }
  std::vector<bool> inf(d.num_states(), false);
  DraState r = q;
  for (std::size_t k = seen.at(q); k < round_starts.size(); ++k) {
    for (auto l : cycle) {
      inf[r] = true;
      r = d.step(r, l);
    }
  }
  for (const auto& p : d.pairs()) {
    bool hits_good = false;
    bool hits_bad = false;
    for (std::size_t s = 0; s < d.num_states(); ++s) {
      if (!inf[s]) continue;
      hits_good = hits_good || p.good[s];
      hits_bad = hits_bad || p.bad[s];
    }
    if (hits_good && !hits_bad) return true;
  }
  return false;
}

/// States from which some state of pair.good is reachable in the automaton
/// graph (over any letters).
inline std::vector<bool> can_reach_good(const Dra& d, std::size_t pair_index) {
  const auto& good = d.pair(pair_index).good;
  std::vector<std::vector<DraState>> preds(d.num_states());
  for (DraState q = 0; q < d.num_states(); ++q)
    for (Letter l = 0; l < d.num_letters(); ++l) preds[d.step(q, l)].push_back(q);
  std::vector<bool> mark(good.begin(), good.end());
  std::vector<DraState> stack;
  for (DraState q = 0; q < d.num_states(); ++q)
    if (mark[q]) stack.push_back(q);
  while (!stack.empty()) {
    DraState q = stack.back();
    stack.pop_back();
    for (auto p : preds[q]) {
      if (!mark[p]) {
        mark[p] = true;
        stack.push_back(p);
      }
    }
  }
  return mark;
}

/// Serializes to HOA v1 with state-based Rabin acceptance: pair i uses
/// Fin(2i) for its bad set and Inf(2i+1) for its good set.
inline std::string write_hoa(const Dra& d, const std::string& name = {}) {
  std::ostringstream out;
  const std::size_t k = d.pairs().size();
  out << "HOA: v1\n";
  if (!name.empty()) out << "name: \"" << name << "\"\n";
  out << "States: " << d.num_states() << "\n";
  out << "Start: " << d.initial() << "\n";
  out << "AP: " << d.atoms().size();
  for (const auto& a : d.atoms()) out << " \"" << a << "\"";
  out << "\nacc-name: Rabin " << k << "\n";
  out << "Acceptance: " << 2 * k;
  for (std::size_t i = 0; i < k; ++i) out << (i ? " | " : " ") << "(Fin(" << 2 * i << ") & Inf(" << 2 * i + 1 << "))";
  out << "\nproperties: trans-labels explicit-labels state-acc deterministic complete\n--BODY--\n";

  auto minterm = [&](Letter l) {
    if (d.atoms().empty()) return std::string("t");
    std::string s;
    for (std::size_t b = 0; b < d.atoms().size(); ++b) {
      if (b) s += '&';
      if (!((l >> b) & 1U)) s += '!';
      s += std::to_string(b);
    }
    return s;
  };

  for (DraState q = 0; q < d.num_states(); ++q) {
    out << "State: " << q;
    std::vector<std::size_t> sets;
    for (std::size_t i = 0; i < k; ++i) {
      if (d.pair(i).bad[q]) sets.push_back(2 * i);
      if (d.pair(i).good[q]) sets.push_back(2 * i + 1);
    }
    if (!sets.empty()) {
      out << " {";
      for (std::size_t j = 0; j < sets.size(); ++j) out << (j ? " " : "") << sets[j];
      out << "}";
    }
    out << "\n";
    std::map<DraState, std::vector<Letter>> by_target;
    for (Letter l = 0; l < d.num_letters(); ++l) by_target[d.step(q, l)].push_back(l);
    for (const auto& [target, letters] : by_target) {
      out << "[";
      if (letters.size() == d.num_letters()) {
        out << "t";
      } else {
        for (std::size_t j = 0; j < letters.size(); ++j) out << (j ? " | " : "") << minterm(letters[j]);
      }
      out << "] " << target << "\n";
    }
  }
  out << "--END--\n";
  return out.str();
}

}  // namespace rabin
