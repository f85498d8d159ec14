#pragma once

// Oracles and random generators shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "rabin/rabin.hpp"

namespace testing_support {

using namespace rabin;

/// LTL semantics on the lasso prefix . cycle^w, position by position.
/// Letters are bitmasks over `atoms`.
class LassoSemantics {
 public:
  LassoSemantics(const std::vector<std::string>& atoms, std::vector<Letter> prefix, std::vector<Letter> cycle)
      : atoms_(atoms), word_(std::move(prefix)), loop_(word_.size()) {
    word_.insert(word_.end(), cycle.begin(), cycle.end());
  }

  bool holds(const ltl::Formula& f) const { return eval(f)[0]; }

 private:
  std::size_t succ(std::size_t i) const { return i + 1 < word_.size() ? i + 1 : loop_; }

  std::vector<bool> eval(const ltl::Formula& f) const {
    using ltl::Op;
    const std::size_t n = word_.size();
    std::vector<bool> out(n, false);
    switch (f.op()) {
      case Op::truth: out.assign(n, true); break;
      case Op::falsity: break;
      case Op::atom: {
        auto it = std::find(atoms_.begin(), atoms_.end(), f.name());
        std::size_t bit = static_cast<std::size_t>(it - atoms_.begin());
        for (std::size_t i = 0; i < n; ++i) out[i] = it != atoms_.end() && ((word_[i] >> bit) & 1U);
        break;
      }
      case Op::negation: {
        auto a = eval(f.child(0));
        for (std::size_t i = 0; i < n; ++i) out[i] = !a[i];
        break;
      }
      case Op::conjunction:
      case Op::disjunction: {
        bool conj = f.op() == Op::conjunction;
        out.assign(n, conj);
        for (const auto& k : f.children()) {
          auto a = eval(k);
          for (std::size_t i = 0; i < n; ++i) out[i] = conj ? (out[i] && a[i]) : (out[i] || a[i]);
        }
        break;
      }
      case Op::implies: {
        auto a = eval(f.child(0));
        auto b = eval(f.child(1));
        for (std::size_t i = 0; i < n; ++i) out[i] = !a[i] || b[i];
        break;
      }
      case Op::next: {
        auto a = eval(f.child(0));
        for (std::size_t i = 0; i < n; ++i) out[i] = a[succ(i)];
        break;
      }
      case Op::until:
      case Op::eventually: {
        std::vector<bool> lhs(n, true);
        if (f.op() == Op::until) lhs = eval(f.child(0));
        auto rhs = eval(f.op() == Op::until ? f.child(1) : f.child(0));
        out = rhs;
        for (std::size_t round = 0; round <= n; ++round)
          for (std::size_t i = n; i-- > 0;) out[i] = rhs[i] || (lhs[i] && out[succ(i)]);
        break;
      }
      case Op::always: {
        auto a = eval(f.child(0));
        out = a;
        for (std::size_t round = 0; round <= n; ++round)
          for (std::size_t i = n; i-- > 0;) out[i] = a[i] && out[succ(i)];
        break;
      }
    }
    return out;
  }

  std::vector<std::string> atoms_;
  std::vector<Letter> word_;
  std::size_t loop_;
};

/// Calls `fn(prefix, cycle)` for every lasso with |prefix| <= max_prefix and
/// 1 <= |cycle| <= max_cycle over `letters` letters.
inline void for_each_lasso(std::size_t letters, std::size_t max_prefix, std::size_t max_cycle,
                           const std::function<void(const std::vector<Letter>&, const std::vector<Letter>&)>& fn) {
  std::function<void(std::vector<Letter>&, std::size_t, const std::function<void()>&)> words;
  words = [&](std::vector<Letter>& w, std::size_t pos, const std::function<void()>& leaf) {
    if (pos == w.size()) {
      leaf();
      return;
    }
    for (Letter l = 0; l < letters; ++l) {
      w[pos] = l;
      words(w, pos + 1, leaf);
    }
  };
  for (std::size_t p = 0; p <= max_prefix; ++p) {
    for (std::size_t c = 1; c <= max_cycle; ++c) {
      std::vector<Letter> prefix(p), cycle(c);
      words(prefix, 0, [&] { words(cycle, 0, [&] { fn(prefix, cycle); }); });
    }
  }
}

/// Random row over `n` targets with `support` distinct successors.
inline std::vector<Transition> random_row(std::mt19937_64& rng, std::size_t n, std::size_t support) {
  std::vector<std::size_t> targets(n);
  for (std::size_t i = 0; i < n; ++i) targets[i] = i;
  std::shuffle(targets.begin(), targets.end(), rng);
  targets.resize(std::min(support, n));
  std::sort(targets.begin(), targets.end());
  std::vector<double> weight(targets.size());
  std::uniform_real_distribution<double> u(0.05, 1.0);
  double total = 0.0;
  for (auto& w : weight) total += (w = u(rng));
  std::vector<Transition> row;
  double acc = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    double p = i + 1 == targets.size() ? 1.0 - acc : weight[i] / total;
    acc += p;
    row.push_back({static_cast<StateId>(targets[i]), p});
  }
  return row;
}

inline LabeledMdp random_mdp(std::mt19937_64& rng, std::size_t n, std::size_t na, std::size_t natoms,
                             std::size_t max_support = 3) {
  std::vector<std::string> atoms, actions;
  for (std::size_t i = 0; i < natoms; ++i) atoms.push_back("p" + std::to_string(i));
  for (std::size_t a = 0; a < na; ++a) actions.push_back("a" + std::to_string(a));
  LabeledMdp m(atoms, actions, n);
  std::uniform_int_distribution<std::size_t> sup(1, max_support);
  for (std::size_t s = 0; s < n; ++s) {
    m.labels[s] = natoms == 0 ? 0 : static_cast<Letter>(rng() & ((Letter{1} << natoms) - 1));
    for (ActionId a = 0; a < na; ++a) {
      if (a > 0 && rng() % 3 == 0) continue;
      m.enabled[s].push_back(a);
      m.row(s, a) = random_row(rng, n, sup(rng));
    }
  }
  m.initial = static_cast<StateId>(rng() % n);
  return m;
}

/// Random complete DRA. Each state is in G or B of each pair with the given
/// probabilities (independently, so overlaps are possible unless disjoint).
inline Dra random_dra(std::mt19937_64& rng, const std::vector<std::string>& atoms, std::size_t nq, std::size_t pairs,
                      bool disjoint = true) {
  const std::size_t letters = std::size_t{1} << atoms.size();
  std::vector<DraState> delta(nq * letters);
  for (auto& d : delta) d = static_cast<DraState>(rng() % nq);
  std::vector<RabinPair> ps(pairs);
  for (auto& p : ps) {
    p.good.assign(nq, false);
    p.bad.assign(nq, false);
    for (std::size_t q = 0; q < nq; ++q) {
      auto r = rng() % 4;
      if (r == 0) p.good[q] = true;
      else if (r == 1) p.bad[q] = true;
      else if (r == 2 && !disjoint) p.good[q] = p.bad[q] = true;
    }
  }
  return Dra(atoms, nq, std::move(delta), static_cast<DraState>(rng() % nq), std::move(ps));
}

inline ProductMdp random_product(std::mt19937_64& rng, std::size_t max_s, std::size_t max_a, std::size_t max_q,
                                 std::size_t pairs = 1) {
  std::size_t n = 1 + rng() % max_s;
  std::size_t na = 1 + rng() % max_a;
  std::size_t nq = 1 + rng() % max_q;
  auto m = random_mdp(rng, n, na, 2);
  auto d = random_dra(rng, m.atoms, nq, pairs);
  return ProductMdp(std::move(m), std::move(d));
}

/// Communicating classes by transitive closure; recurrent = closed classes.
struct ClosureClasses {
  std::vector<std::vector<std::size_t>> recurrent;
  std::vector<std::size_t> transient;
};

inline ClosureClasses closure_classes(const MarkovChain& c) {
  const std::size_t n = c.states.size();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    r[i][i] = true;
    for (const auto& [j, p] : c.succ[i])
      if (p > 0.0) r[i][j] = true;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (r[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (r[k][j]) r[i][j] = true;
  ClosureClasses out;
  std::vector<bool> done(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (done[i]) continue;
    std::vector<std::size_t> cls;
    for (std::size_t j = 0; j < n; ++j)
      if (r[i][j] && r[j][i]) cls.push_back(j);
    bool closed = true;
    for (auto a : cls)
      for (std::size_t j = 0; j < n; ++j)
        if (r[a][j] && !r[j][a]) closed = false;
    for (auto a : cls) done[a] = true;
    if (closed) {
      std::vector<std::size_t> global;
      for (auto a : cls) global.push_back(c.states[a]);
      out.recurrent.push_back(global);
    } else {
      for (auto a : cls) out.transient.push_back(c.states[a]);
    }
  }
  std::sort(out.transient.begin(), out.transient.end());
  std::sort(out.recurrent.begin(), out.recurrent.end());
  return out;
}

/// Exact value of a policy by Gaussian elimination (no Eigen), for
/// cross-checking the library's evaluators.
inline std::vector<double> solve_policy_gauss(const ProductMdp& p, const StationaryPolicy& pi,
                                              const std::vector<double>& w, double gamma) {
  const std::size_t n = p.num_states();
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = 1.0;
    for (const auto& t : p.row(i, pi(i))) a[i][t.to] -= gamma * t.p;
    a[i][n] = w[i];
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k <= n; ++k) a[r][k] -= f * a[col][k];
    }
  }
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = a[i][n] / a[i][i];
  return u;
}

/// Independent check of the parameter system: w_G = 1 normalization.
inline bool parameter_system_holds(const ParameterBoundEstimate& e, double gamma, double w_bad) {
  const double recurrent_gain = 1.0 + w_bad * e.p_bar;
  const double lhs1 = -w_bad * e.n1 * (1.0 - std::pow(gamma, static_cast<double>(e.n_bar)));
  const double lhs2 = -w_bad * e.n2 * (1.0 - gamma);
  return recurrent_gain < -e.epsilon && lhs1 < e.epsilon && lhs2 < e.epsilon;
}

/// Labels seen along a trace, by atom name.
inline bool trace_has(const std::vector<TraceStep>& trace, const LabeledMdp& m, const std::string& atom) {
  auto id = m.atom_id(atom);
  if (!id) return false;
  return std::any_of(trace.begin(), trace.end(), [&](const TraceStep& t) { return (t.labels >> *id) & 1U; });
}

}  // namespace testing_support
