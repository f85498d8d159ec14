#pragma once

// Probability-one checks for stationary product policies, an exhaustive
// optimal-policy oracle, and trace simulation.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rabin/error.hpp"
#include "rabin/product.hpp"
#include "rabin/solver.hpp"

namespace rabin {

/// The Markov chain a policy induces, restricted to states reachable from
/// the initial product state. succ[i] lists (local index, probability).
struct MarkovChain {
  std::vector<ProductState> states;  // ascending product indices
  std::vector<std::vector<std::pair<std::size_t, double>>> succ;
  std::size_t initial = 0;           // local index of the initial state

  std::size_t local(ProductState sp) const {
    auto it = std::lower_bound(states.begin(), states.end(), sp);
    if (it == states.end() || *it != sp) throw ValidationError("state not in chain");
    return static_cast<std::size_t>(it - states.begin());
  }
};

inline MarkovChain induced_chain(const ProductMdp& p, const StationaryPolicy& pi) {
  require_policy(p, pi);
  std::vector<bool> seen(p.num_states(), false);
  std::vector<ProductState> stack{p.initial()};
  seen[p.initial()] = true;
  while (!stack.empty()) {
    ProductState sp = stack.back();
    stack.pop_back();
    for (const auto& t : p.row(sp, pi(sp))) {
      if (t.p > 0.0 && !seen[t.to]) {
        seen[t.to] = true;
        stack.push_back(t.to);
      }
    }
  }
  MarkovChain c;
  for (ProductState sp = 0; sp < p.num_states(); ++sp)
    if (seen[sp]) c.states.push_back(sp);
  c.succ.resize(c.states.size());
  for (std::size_t i = 0; i < c.states.size(); ++i)
    for (const auto& t : p.row(c.states[i], pi(c.states[i])))
      if (t.p > 0.0) c.succ[i].emplace_back(c.local(t.to), t.p);
  c.initial = c.local(p.initial());
  return c;
}

/// Transient states and recurrent classes, all as product indices.
struct ChainDecomposition {
  std::vector<ProductState> transient;
  std::vector<std::vector<ProductState>> recurrent;
};

/// Strongly connected components of the chain (Tarjan, iterative), in
/// reverse topological order. Each component lists local indices.
inline std::vector<std::vector<std::size_t>> strongly_connected(const MarkovChain& c) {
  const std::size_t n = c.states.size();
  constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, unvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> comps;
  std::size_t counter = 0;
  struct Frame {
    std::size_t v;
    std::size_t next_edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unvisited) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next_edge < c.succ[f.v].size()) {
        std::size_t w = c.succ[f.v][f.next_edge++].first;
        if (index[w] == unvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      std::size_t v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
    }
  }
  return comps;
}

/// Bottom SCCs are the recurrent classes; every other state is transient.
inline ChainDecomposition decompose(const MarkovChain& c) {
  auto comps = strongly_connected(c);
  std::vector<std::size_t> comp_of(c.states.size());
  for (std::size_t k = 0; k < comps.size(); ++k)
    for (auto v : comps[k]) comp_of[v] = k;
  ChainDecomposition d;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    bool closed = true;
    for (auto v : comps[k])
      for (const auto& [w, pr] : c.succ[v])
        if (comp_of[w] != k) closed = false;
    std::vector<ProductState> members;
    for (auto v : comps[k]) members.push_back(c.states[v]);
    if (closed) d.recurrent.push_back(std::move(members));
    else d.transient.insert(d.transient.end(), members.begin(), members.end());
  }
  std::sort(d.transient.begin(), d.transient.end());
  std::sort(d.recurrent.begin(), d.recurrent.end());
  return d;
}

struct VerificationResult {
  bool prob_one = false;
  std::optional<std::size_t> witness_pair;  // 0-based
  std::optional<int> violated_case;         // 1: a class misses G, 2: a recurrent state is in B
  std::size_t recurrent_classes = 0;
  std::size_t transient = 0;
  std::string explanation;
};

/// Probability-one satisfaction from the initial state: some pair whose bad
/// set holds only transient states and whose good set meets every
/// recurrent class. On failure the case reported is the one for pair 0.
inline VerificationResult satisfies_prob_one(const ProductMdp& p, const StationaryPolicy& pi) {
  const auto chain = induced_chain(p, pi);
  const auto d = decompose(chain);
  VerificationResult res;
  res.recurrent_classes = d.recurrent.size();
  res.transient = d.transient.size();
  std::optional<int> first_case;
  std::string first_reason;
  for (std::size_t i = 0; i < p.num_pairs(); ++i) {
    std::optional<int> bad_case;
    std::string reason;
    for (std::size_t k = 0; k < d.recurrent.size() && !bad_case; ++k) {
      for (auto sp : d.recurrent[k]) {
        if (p.bad(i)[sp]) {
          bad_case = 2;
          reason = "recurrent state " + std::to_string(sp) + " lies in B_" + std::to_string(i + 1);
          break;
        }
      }
    }
    for (std::size_t k = 0; k < d.recurrent.size() && !bad_case; ++k) {
      bool meets = std::any_of(d.recurrent[k].begin(), d.recurrent[k].end(), [&](auto sp) { return p.good(i)[sp]; });
      if (!meets) {
        bad_case = 1;
        reason = "recurrent class containing state " + std::to_string(d.recurrent[k].front()) + " avoids G_" +
                 std::to_string(i + 1);
      }
    }
    if (!bad_case) {
      res.prob_one = true;
      res.witness_pair = i;
      res.explanation = "pair " + std::to_string(i + 1) + " is satisfied with probability one";
      return res;
    }
    if (!first_case) {
      first_case = bad_case;
      first_reason = reason;
    }
  }
  res.violated_case = first_case;
  res.explanation = first_reason;
  return res;
}

inline std::size_t policy_count(const ProductMdp& p, std::size_t cap) {
  std::size_t total = 1;
  for (ProductState sp = 0; sp < p.num_states(); ++sp) {
    total *= p.enabled(sp).size();
    if (total > cap) return cap + 1;
  }
  return total;
}

inline constexpr std::size_t kBruteForceLimit = 1'000'000;

/// Exact U_pi = (I - gamma P_pi)^-1 W by LU factorization.
inline std::vector<double> exact_policy_utilities(const ProductMdp& p, const StationaryPolicy& pi,
                                                  const std::vector<double>& w, double gamma) {
  const auto n = static_cast<Eigen::Index>(p.num_states());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    b[i] = w[static_cast<std::size_t>(i)];
    for (const auto& t : p.row(static_cast<ProductState>(i), pi(static_cast<std::size_t>(i))))
      a(i, static_cast<Eigen::Index>(t.to)) -= gamma * t.p;
  }
  Eigen::VectorXd u = a.partialPivLu().solve(b);
  return {u.data(), u.data() + n};
}

/// Exhaustive oracle: evaluates every stationary policy exactly, takes the
/// pointwise best utilities, and picks in each state the lowest-index action
/// that attains them (ties judged as in value_iteration).
inline StationaryPolicy brute_force_best(const ProductMdp& p, const std::vector<double>& w, double gamma) {
  if (policy_count(p, kBruteForceLimit) > kBruteForceLimit) throw ValidationError("too many policies to enumerate");
  const std::size_t n = p.num_states();
  std::vector<std::size_t> digit(n, 0);
  StationaryPolicy pi;
  pi.choice.resize(n);
  std::vector<double> best(n, -std::numeric_limits<double>::infinity());
  while (true) {
    for (std::size_t s = 0; s < n; ++s) pi.choice[s] = p.enabled(s)[digit[s]];
    auto u = exact_policy_utilities(p, pi, w, gamma);
    for (std::size_t s = 0; s < n; ++s) best[s] = std::max(best[s], u[s]);
    std::size_t k = 0;
    while (k < n && ++digit[k] == p.enabled(k).size()) digit[k++] = 0;
    if (k == n) break;
  }
  SolverConfig cfg;
  cfg.gamma = gamma;
  const double tie = tie_tolerance(cfg, w);
  StationaryPolicy out;
  out.choice.resize(n);
  for (std::size_t s = 0; s < n; ++s) out.choice[s] = greedy_action(p, s, best, tie);
  return out;
}

inline StationaryPolicy brute_force_best(const ProductMdp& p, const RewardScheme& r, double gamma) {
  return brute_force_best(p, reward_vector(p, r), gamma);
}

/// Searches for a stationary policy that satisfies the acceptance condition
/// with probability one. Only states reachable under the partial policy are
/// branched on, so the search covers all distinct reachable behaviours.
/// Returns nullopt if none exists; throws if more than `limit` leaves.
inline std::optional<StationaryPolicy> find_prob_one_policy(const ProductMdp& p, std::size_t limit = kBruteForceLimit) {
  const std::size_t n = p.num_states();
  StationaryPolicy pi;
  pi.choice.assign(n, 0);
  for (std::size_t s = 0; s < n; ++s) pi.choice[s] = p.enabled(s).front();
  std::vector<bool> assigned(n, false);
  std::size_t leaves = 0;
  std::optional<StationaryPolicy> found;

  // frontier: reached states still lacking a choice.
  std::function<void(std::vector<ProductState>)> search = [&](std::vector<ProductState> frontier) {
    if (found) return;
    while (!frontier.empty() && assigned[frontier.back()]) frontier.pop_back();
    if (frontier.empty()) {
      if (++leaves > limit) throw ValidationError("too many policies to enumerate");
      if (satisfies_prob_one(p, pi).prob_one) found = pi;
      return;
    }
    ProductState sp = frontier.back();
    frontier.pop_back();
    assigned[sp] = true;
    for (auto a : p.enabled(sp)) {
      pi.choice[sp] = a;
      auto next = frontier;
      for (const auto& t : p.row(sp, a))
        if (t.p > 0.0 && !assigned[t.to]) next.push_back(t.to);
      search(std::move(next));
      if (found) return;
    }
    assigned[sp] = false;
    pi.choice[sp] = p.enabled(sp).front();
  };
  search({p.initial()});
  return found;
}

struct TraceStep {
  std::size_t step;
  StateId mdp_state;
  DraState dra_state;
  ActionId action;
  double reward;
  Letter labels;  // bits over the model atoms
};

using Controller = std::function<ActionId(ProductState, std::size_t step)>;

inline ProductState sample_successor(const ProductMdp& p, ProductState sp, ActionId a, std::mt19937_64& rng) {
  auto row = p.row(sp, a);
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (const auto& t : row) {
    acc += t.p;
    if (u < acc) return t.to;
  }
  return row.back().to;
}

/// Runs `steps` transitions from the initial product state and records the
/// steps + 1 visited states with the action chosen in each.
inline std::vector<TraceStep> simulate(const ProductMdp& p, const Controller& ctrl, std::size_t steps,
                                       std::uint64_t seed, const std::vector<double>& w = {}) {
  std::mt19937_64 rng(seed);
  std::vector<TraceStep> trace;
  trace.reserve(steps + 1);
  ProductState sp = p.initial();
  for (std::size_t k = 0; k <= steps; ++k) {
    ActionId a = ctrl(sp, k);
    const auto& en = p.enabled(sp);
    if (std::find(en.begin(), en.end(), a) == en.end()) throw ValidationError("controller chose a disabled action");
    trace.push_back({k, p.mdp_state(sp), p.dra_state(sp), a, w.empty() ? 0.0 : w[sp], p.mdp().labels[p.mdp_state(sp)]});
    if (k < steps) sp = sample_successor(p, sp, a, rng);
  }
  return trace;
}

inline std::vector<TraceStep> simulate(const ProductMdp& p, const StationaryPolicy& pi, std::size_t steps,
                                       std::uint64_t seed, const std::vector<double>& w = {}) {
  require_policy(p, pi);
  return simulate(p, [&](ProductState sp, std::size_t) { return pi(sp); }, steps, seed, w);
}

/// Finite-horizon stand-in for probability-one satisfaction: the fraction of
/// traces that, after `burn_in`, never touch B_pair and touch G_pair at least
/// once in every full window of `window` steps (default horizon / 4).
inline double estimate_satisfaction(const ProductMdp& p, const StationaryPolicy& pi, std::size_t pair,
                                    std::size_t n_traces, std::size_t horizon, std::size_t burn_in, std::uint64_t seed,
                                    std::size_t window = 0) {
  if (horizon <= burn_in) throw ValidationError("horizon must exceed burn-in");
  if (pair >= p.num_pairs()) throw ValidationError("acceptance pair index out of range");
  if (window == 0) window = std::max<std::size_t>(1, horizon / 4);
  if (n_traces == 0) return 0.0;
  std::size_t ok = 0;
  std::mt19937_64 seeder(seed);
  for (std::size_t k = 0; k < n_traces; ++k) {
    auto trace = simulate(p, pi, horizon, seeder());
    bool good = true;
    std::size_t since_good = 0;
    for (std::size_t t = burn_in; t <= horizon && good; ++t) {
      ProductState sp = p.index(trace[t].mdp_state, trace[t].dra_state);
      if (p.bad(pair)[sp]) good = false;
      if (p.good(pair)[sp]) since_good = 0;
      else if (++since_good >= window) good = false;
    }
    if (good) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(n_traces);
}

}  // namespace rabin
