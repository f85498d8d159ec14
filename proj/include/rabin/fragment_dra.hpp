#pragma once

// Direct DRA construction for conjunctions of GF p, FG p and G safe.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "rabin/dra.hpp"
#include "rabin/error.hpp"
#include "rabin/ltl.hpp"

namespace rabin {

namespace detail {

// Evaluates a formula built from propositional operators and X on a finite
// window of letters. atom_bit maps atom names to bit positions in a letter.
inline bool eval_window(const ltl::Formula& f, const std::map<std::string, std::size_t>& atom_bit,
                        const std::vector<Letter>& window, std::size_t pos) {
  using ltl::Op;
  switch (f.op()) {
    case Op::truth: return true;
    case Op::falsity: return false;
    case Op::atom: return (window.at(pos) >> atom_bit.at(f.name())) & 1U;
    case Op::negation: return !eval_window(f.child(0), atom_bit, window, pos);
    case Op::conjunction:
      for (const auto& c : f.children())
        if (!eval_window(c, atom_bit, window, pos)) return false;
      return true;
    case Op::disjunction:
      for (const auto& c : f.children())
        if (eval_window(c, atom_bit, window, pos)) return true;
      return false;
    case Op::implies:
      return !eval_window(f.child(0), atom_bit, window, pos) || eval_window(f.child(1), atom_bit, window, pos);
    case Op::next: return eval_window(f.child(0), atom_bit, window, pos + 1);
    default: throw UnsupportedError("temporal operator inside a bounded formula: " + ltl::to_string(f));
  }
}

inline constexpr std::size_t kMaxSafetyWindowBits = 20;

// Monitor for G safe. A monitor state is the truth table of the obligations
// still pending on the next `depth` letters (projected onto the safety atoms).
class SafetyMonitor {
 public:
  SafetyMonitor(const std::optional<ltl::Formula>& safety, const std::vector<std::string>& atom_order) {
    if (!safety) return;
    auto atoms = ltl::atoms(*safety);
    depth_ = static_cast<std::size_t>(ltl::next_depth(*safety).value_or(ltl::kMaxSafetyNextDepth + 1));
    if (depth_ > static_cast<std::size_t>(ltl::kMaxSafetyNextDepth))
      throw ValidationError("safety formula exceeds the supported next-depth");
    k_ = atoms.size();
    if (k_ * (depth_ + 1) > kMaxSafetyWindowBits) throw UnsupportedError("safety formula window too large");
    std::map<std::string, std::size_t> local;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      local[atoms[i]] = i;
      auto it = std::find(atom_order.begin(), atom_order.end(), atoms[i]);
      if (it == atom_order.end()) throw ValidationError("atom '" + atoms[i] + "' not in the alphabet");
      positions_.push_back(static_cast<std::size_t>(it - atom_order.begin()));
    }
    // phi_[w] for a window w = (sigma, w_1, .., w_depth) packed k bits each.
    phi_.resize(std::size_t{1} << (k_ * (depth_ + 1)));
    std::vector<Letter> window(depth_ + 1);
    for (std::size_t w = 0; w < phi_.size(); ++w) {
      for (std::size_t i = 0; i <= depth_; ++i) window[i] = static_cast<Letter>((w >> (k_ * i)) & mask());
      phi_[w] = eval_window(*safety, local, window, 0);
    }
    active_ = true;
  }

  using Table = std::vector<bool>;

  Table initial() const { return Table(std::size_t{1} << (k_ * depth_), true); }

  // Returns nullopt when no continuation can satisfy the obligations.
  std::optional<Table> step(const Table& f, Letter letter) const {
    if (!active_) return f;
    Letter sigma = project(letter);
    Table next(f.size(), false);
    bool any = false;
    const std::size_t rest_mask = f.size() - 1;
    for (std::size_t rest = 0; rest < next.size(); ++rest) {
      std::size_t window = sigma | (rest << k_);
      // f ranges over (sigma, w_1..w_{depth-1}); drop the last letter of rest.
      std::size_t old_index = depth_ == 0 ? 0 : ((sigma | (rest << k_)) & rest_mask);
      bool v = f[old_index] && phi_[window];
      next[rest] = v;
      any = any || v;
    }
    if (!any) return std::nullopt;
    return next;
  }

 private:
  std::size_t mask() const { return (std::size_t{1} << k_) - 1; }
  Letter project(Letter letter) const {
    Letter out = 0;
    for (std::size_t i = 0; i < positions_.size(); ++i)
      if ((letter >> positions_[i]) & 1U) out |= Letter{1} << i;
    return out;
  }

  bool active_ = false;
  std::size_t depth_ = 0;
  std::size_t k_ = 0;
  std::vector<std::size_t> positions_;
  std::vector<bool> phi_;
};

}  // namespace detail

/// Builds a one-pair DRA for the conjunction described by `spec`. Runs that
/// break the safety formula fall into an absorbing bad sink; steps where the
/// stability conjunction fails are marked bad; the good states are those that
/// finish a round through every recurrence goal.
inline Dra translate_fragment(const ltl::FragmentSpec& spec, const std::vector<std::string>& atom_order) {
  if (spec.empty()) throw ValidationError("fragment has no conjuncts");
  if (atom_order.size() > kMaxDraAtoms) throw ValidationError("alphabet too large");
  std::map<std::string, std::size_t> atom_bit;
  for (std::size_t i = 0; i < atom_order.size(); ++i) atom_bit[atom_order[i]] = i;
  auto check_prop = [&](const ltl::Formula& p) {
    if (!ltl::is_propositional(p)) throw ValidationError("goal is not propositional: " + ltl::to_string(p));
    for (const auto& a : ltl::atoms(p))
      if (!atom_bit.contains(a)) throw ValidationError("atom '" + a + "' not in the alphabet");
  };
  for (const auto& g : spec.recurrence) check_prop(g);
  for (const auto& g : spec.stability) check_prop(g);

  detail::SafetyMonitor monitor(spec.safety, atom_order);
  const std::size_t m = spec.recurrence.size();
  const std::size_t num_letters = std::size_t{1} << atom_order.size();

  // Per-letter truth of each recurrence goal and of the stability conjunction.
  std::vector<std::vector<bool>> goal_holds(m, std::vector<bool>(num_letters));
  std::vector<bool> stable(num_letters, true);
  std::vector<Letter> window(1);
  for (Letter l = 0; l < num_letters; ++l) {
    window[0] = l;
    for (std::size_t i = 0; i < m; ++i) goal_holds[i][l] = detail::eval_window(spec.recurrence[i], atom_bit, window, 0);
    for (const auto& g : spec.stability) stable[l] = stable[l] && detail::eval_window(g, atom_bit, window, 0);
  }

  // Counter value m means "round complete".
  using Key = std::tuple<std::vector<bool>, std::size_t, bool>;
  std::map<Key, DraState> index;
  std::optional<DraState> sink;
  std::vector<std::vector<DraState>> rows;

  // Ids are assigned in discovery order, sink included.
  std::vector<std::optional<Key>> by_id;
  auto id_of = [&](const Key& key) {
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    auto id = static_cast<DraState>(by_id.size());
    index.emplace(key, id);
    by_id.push_back(key);
    return id;
  };
  auto sink_id = [&]() {
    if (!sink) {
      sink = static_cast<DraState>(by_id.size());
      by_id.push_back(std::nullopt);
    }
    return *sink;
  };

  id_of(Key{monitor.initial(), 0, false});
  for (std::size_t q = 0; q < by_id.size(); ++q) {
    rows.emplace_back(num_letters);
    if (!by_id[q]) {
      std::fill(rows[q].begin(), rows[q].end(), static_cast<DraState>(q));
      continue;
    }
    const Key key = *by_id[q];
    for (Letter l = 0; l < num_letters; ++l) {
      auto f = monitor.step(std::get<0>(key), l);
      if (!f) {
        rows[q][l] = sink_id();
        continue;
      }
      std::size_t c = std::get<1>(key) == m ? 0 : std::get<1>(key);
      while (c < m && goal_holds[c][l]) ++c;
      rows[q][l] = id_of(Key{std::move(*f), c, !stable[l]});
    }
  }

  const std::size_t n = by_id.size();
  std::vector<DraState> delta;
  delta.reserve(n * num_letters);
  for (const auto& row : rows) delta.insert(delta.end(), row.begin(), row.end());

  RabinPair pair{std::vector<bool>(n, false), std::vector<bool>(n, false)};
  for (std::size_t q = 0; q < n; ++q) {
    if (!by_id[q]) {
      pair.bad[q] = true;
      continue;
    }
    const auto& [f, c, violated] = *by_id[q];
    pair.bad[q] = violated;
    pair.good[q] = !violated && c == m;
  }
  return Dra(atom_order, n, std::move(delta), 0, {std::move(pair)});
}

}  // namespace rabin
