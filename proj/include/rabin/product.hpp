#pragma once

// Rabin-weighted product of a labeled MDP and a DRA. Product state (s, q)
// has flat index q * |S| + s. The automaton reads the label of the state
// being left: (s, q) -a-> (s', delta(q, L(s))).

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rabin/dra.hpp"
#include "rabin/error.hpp"
#include "rabin/mdp.hpp"

namespace rabin {

using ProductState = std::size_t;

class ProductMdp {
 public:
  ProductMdp(LabeledMdp mdp, Dra dra) : mdp_(std::move(mdp)), dra_(std::move(dra)) {
    require_valid(mdp_);
    align_letters();
    materialize();
    lift_pairs();
  }

  const LabeledMdp& mdp() const { return mdp_; }
  const Dra& dra() const { return dra_; }

  std::size_t num_states() const { return mdp_.num_states() * dra_.num_states(); }
  std::size_t num_actions() const { return mdp_.num_actions(); }
  std::size_t num_pairs() const { return good_.size(); }

  ProductState index(StateId s, DraState q) const { return static_cast<std::size_t>(q) * mdp_.num_states() + s; }
  StateId mdp_state(ProductState sp) const { return sp % mdp_.num_states(); }
  DraState dra_state(ProductState sp) const { return static_cast<DraState>(sp / mdp_.num_states()); }
  ProductState initial() const { return index(mdp_.initial, dra_.initial()); }

  const std::vector<ActionId>& enabled(ProductState sp) const { return mdp_.enabled[mdp_state(sp)]; }
  std::span<const Transition> row(ProductState sp, ActionId a) const {
    const std::size_t k = sp * num_actions() + a;
    return {targets_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
  }

  /// DRA letter of MDP state s (its label restricted to the automaton atoms).
  Letter letter(StateId s) const { return letters_[s]; }
  /// Automaton successor when leaving product state sp.
  DraState next_dra(ProductState sp) const { return dra_.step(dra_state(sp), letters_[mdp_state(sp)]); }

  /// Lifted acceptance sets S x G_i and S x B_i.
  const std::vector<bool>& good(std::size_t pair) const { return good_.at(pair); }
  const std::vector<bool>& bad(std::size_t pair) const { return bad_.at(pair); }

  /// All product states sharing an MDP state form one class.
  std::size_t equivalence_class(ProductState sp) const { return mdp_state(sp); }
  std::size_t num_classes() const { return mdp_.num_states(); }

 private:
  void align_letters() {
    std::vector<std::size_t> bit_of;
    for (const auto& a : dra_.atoms()) {
      auto id = mdp_.atom_id(a);
      if (!id) throw ValidationError("automaton atom '" + a + "' is not an atom of the model");
      bit_of.push_back(*id);
    }
    letters_.resize(mdp_.num_states());
    for (StateId s = 0; s < mdp_.num_states(); ++s) {
      Letter l = 0;
      for (std::size_t i = 0; i < bit_of.size(); ++i)
        if (mdp_.holds(s, bit_of[i])) l |= Letter{1} << i;
      letters_[s] = l;
    }
  }

  void materialize() {
    const std::size_t n = num_states();
    const std::size_t na = num_actions();
    const std::size_t ns = mdp_.num_states();
    offsets_.assign(n * na + 1, 0);
    std::size_t total = 0;
    for (ProductState sp = 0; sp < n; ++sp)
      for (ActionId a = 0; a < na; ++a) total += mdp_.row(mdp_state(sp), a).size();
    targets_.reserve(total);
    for (ProductState sp = 0; sp < n; ++sp) {
      const StateId s = mdp_state(sp);
      const std::size_t q_next = next_dra(sp);
      for (ActionId a = 0; a < na; ++a) {
        offsets_[sp * na + a] = targets_.size();
        for (const auto& t : mdp_.row(s, a)) targets_.push_back({q_next * ns + t.to, t.p});
      }
    }
    offsets_[n * na] = targets_.size();
  }

  void lift_pairs() {
    const std::size_t ns = mdp_.num_states();
    for (const auto& pair : dra_.pairs()) {
      std::vector<bool> g(num_states()), b(num_states());
      for (ProductState sp = 0; sp < num_states(); ++sp) {
        g[sp] = pair.good[sp / ns];
        b[sp] = pair.bad[sp / ns];
      }
      good_.push_back(std::move(g));
      bad_.push_back(std::move(b));
    }
  }

  LabeledMdp mdp_;
  Dra dra_;
  std::vector<Letter> letters_;
  std::vector<std::size_t> offsets_;
  std::vector<Transition> targets_;
  std::vector<std::vector<bool>> good_, bad_;
};

inline ProductMdp build_product(LabeledMdp m, Dra d) { return ProductMdp(std::move(m), std::move(d)); }

/// Rewards for acceptance pair `pair` (0-based): w_good on the lifted good
/// set, w_bad on the lifted bad set, zero elsewhere.
struct RewardScheme {
  std::size_t pair = 0;
  double w_good = 1.0;
  double w_bad = -1.0;
};

inline void validate_scheme(const ProductMdp& p, const RewardScheme& r) {
  if (r.pair >= p.num_pairs()) throw ValidationError("acceptance pair index out of range");
  if (!(r.w_good > 0.0)) throw ValidationError("w_G must be positive");
  if (!(r.w_bad < 0.0)) throw ValidationError("w_B must be negative");
}

/// True if some state is in both sets of the pair; the bad reward wins there.
inline bool reward_overlap(const ProductMdp& p, std::size_t pair) {
  const auto& ov = p.dra().overlapping_pairs();
  return std::find(ov.begin(), ov.end(), pair) != ov.end();
}

inline std::vector<double> reward_vector(const ProductMdp& p, const RewardScheme& r) {
  validate_scheme(p, r);
  std::vector<double> w(p.num_states(), 0.0);
  const auto& g = p.good(r.pair);
  const auto& b = p.bad(r.pair);
  for (ProductState sp = 0; sp < w.size(); ++sp) {
    if (b[sp]) w[sp] = r.w_bad;
    else if (g[sp]) w[sp] = r.w_good;
  }
  return w;
}

/// The product as a plain model: state (s, q) keeps the label of s.
inline LabeledMdp export_product_model(const ProductMdp& p) {
  const auto& m = p.mdp();
  LabeledMdp out(m.atoms, m.actions, p.num_states());
  for (ProductState sp = 0; sp < p.num_states(); ++sp) {
    out.labels[sp] = m.labels[p.mdp_state(sp)];
    out.enabled[sp] = p.enabled(sp);
    for (auto a : p.enabled(sp)) {
      auto r = p.row(sp, a);
      auto& row = out.row(sp, a);
      row.assign(r.begin(), r.end());
      std::sort(row.begin(), row.end(), [](const Transition& l, const Transition& x) { return l.to < x.to; });
    }
  }
  out.initial = p.initial();
  return out;
}

/// Acceptance sidecar for export_product_model: lifted index sets per pair.
inline std::string export_acceptance(const ProductMdp& p) {
  nlohmann::json j;
  j["mdp_states"] = p.mdp().num_states();
  j["dra_states"] = p.dra().num_states();
  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t i = 0; i < p.num_pairs(); ++i) {
    std::vector<std::size_t> g, b;
    for (ProductState sp = 0; sp < p.num_states(); ++sp) {
      if (p.good(i)[sp]) g.push_back(sp);
      if (p.bad(i)[sp]) b.push_back(sp);
    }
    pairs.push_back({{"good", g}, {"bad", b}});
  }
  j["pairs"] = std::move(pairs);
  return j.dump(1);
}

}  // namespace rabin
