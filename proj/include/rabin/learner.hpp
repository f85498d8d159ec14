#pragma once

// Online temporal-difference learning on the product. Transition estimates
// are kept per equivalence class (MDP state), so what is observed at (s, q)
// is reused at every (s, q').

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rabin/error.hpp"
#include "rabin/product.hpp"
#include "rabin/verifier.hpp"

namespace rabin {

struct Exploration {
  enum class Kind { uniform, epsilon_greedy, optimistic };
  Kind kind = Kind::uniform;
  double epsilon = 0.2;
  double decay = 1.0;        // epsilon is multiplied by this after every choice
  double min_epsilon = 0.0;
  double visit_threshold = 5;  // N_e
  std::optional<double> optimistic_value;  // R+, defaults to w_G / (1 - gamma)

  /// "uniform", "eps:<epsilon>[:<decay>]" or "opt:<N_e>[:<R+>]".
  static Exploration parse(const std::string& text) {
    Exploration e;
    auto fields = [&](const std::string& rest) {
      std::vector<double> out;
      std::size_t pos = 0;
      while (pos <= rest.size()) {
        auto colon = rest.find(':', pos);
        std::string part = rest.substr(pos, colon == std::string::npos ? std::string::npos : colon - pos);
        try {
          std::size_t used = 0;
          out.push_back(std::stod(part, &used));
          if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
          throw ParseError("bad exploration parameter '" + part + "'");
        }
        if (colon == std::string::npos) break;
        pos = colon + 1;
      }
      return out;
    };
    if (text == "uniform") return e;
    if (text.starts_with("eps:")) {
      auto v = fields(text.substr(4));
      if (v.size() > 2) throw ParseError("too many exploration parameters in '" + text + "'");
      e.kind = Kind::epsilon_greedy;
      e.epsilon = v[0];
      if (v.size() > 1) e.decay = v[1];
      if (e.epsilon < 0.0 || e.epsilon > 1.0) throw ValidationError("epsilon must lie in [0, 1]");
      if (e.decay <= 0.0 || e.decay > 1.0) throw ValidationError("epsilon decay must lie in (0, 1]");
      return e;
    }
    if (text.starts_with("opt:")) {
      auto v = fields(text.substr(4));
      if (v.size() > 2) throw ParseError("too many exploration parameters in '" + text + "'");
      e.kind = Kind::optimistic;
      e.visit_threshold = v[0];
      if (v.size() > 1) e.optimistic_value = v[1];
      if (e.visit_threshold < 1.0) throw ValidationError("visit threshold must be at least 1");
      return e;
    }
    throw ParseError("unknown exploration strategy '" + text + "'");
  }
};

struct LearnerConfig {
  double alpha = 0.9;  // weight kept by the old utility in each update
  double gamma = 0.98;
  RewardScheme reward{0, 500.0, -500.0};
  std::size_t reset_interval = 200;
  Exploration explore;
};

struct TdStepResult {
  ProductState state;  // the state the agent is in after any reset
  ActionId action;
  bool reset;
};

struct TrialRecord {
  std::size_t trial;
  std::size_t steps;
  std::size_t good_visits;
  std::size_t bad_visits;
  std::size_t resets;
};

class Learner {
 public:
  Learner(const ProductMdp& p, LearnerConfig cfg) : p_(&p), cfg_(std::move(cfg)) {
    if (!(cfg_.alpha > 0.0 && cfg_.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    if (!(cfg_.gamma > 0.0 && cfg_.gamma < 1.0)) throw ValidationError("discount must lie in (0, 1)");
    if (cfg_.reset_interval == 0) throw ValidationError("reset interval must be positive");
    w_ = reward_vector(p, cfg_.reward);
    const auto live = can_reach_good(p.dra(), cfg_.reward.pair);
    live_.assign(live.begin(), live.end());
    utility_.assign(p.num_states(), 0.0);
    known_.assign(p.num_states(), false);
    const std::size_t na = p.num_actions();
    n_sa_.assign(p.num_classes() * na, 0.0);
    n_next_.resize(p.num_classes() * na);
    policy_.choice.resize(p.num_states());
    for (ProductState sp = 0; sp < p.num_states(); ++sp) policy_.choice[sp] = p.enabled(sp).front();
    epsilon_ = cfg_.explore.epsilon;
  }

  const LearnerConfig& config() const { return cfg_; }
  const ProductMdp& product() const { return *p_; }
  const std::vector<double>& rewards() const { return w_; }

  bool known(ProductState sp) const { return known_[sp]; }
  std::optional<double> utility(ProductState sp) const {
    if (!known_[sp]) return std::nullopt;
    return utility_[sp];
  }
  /// Utilities with never-visited states filled in by their reward.
  std::vector<double> utilities() const {
    std::vector<double> u(utility_.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = known_[i] ? utility_[i] : w_[i];
    return u;
  }
  const StationaryPolicy& policy() const { return policy_; }
  std::size_t steps_since_reset() const { return since_reset_; }
  double epsilon() const { return epsilon_; }

  double visits(std::size_t cls, ActionId a) const { return n_sa_[cls * p_->num_actions() + a]; }
  double visits(std::size_t cls, ActionId a, std::size_t next_cls) const {
    for (const auto& [t, c] : n_next_[cls * p_->num_actions() + a])
      if (t == next_cls) return c;
    return 0.0;
  }
  /// Successor classes of (cls, a) with their observed frequencies.
  const std::vector<std::pair<std::size_t, double>>& successor_counts(std::size_t cls, ActionId a) const {
    return n_next_[cls * p_->num_actions() + a];
  }
  /// Estimated class-level transition row; empty if never tried.
  std::vector<std::pair<std::size_t, double>> estimate(std::size_t cls, ActionId a) const {
    std::vector<std::pair<std::size_t, double>> row;
    const double n = visits(cls, a);
    if (n <= 0.0) return row;
    for (const auto& [t, c] : successor_counts(cls, a)) row.emplace_back(t, c / n);
    return row;
  }

  bool reset_condition(ProductState sp) const {
    return !live_[p_->dra_state(sp)] || since_reset_ >= cfg_.reset_interval;
  }
  ProductState reset_rabin_state(ProductState sp) const { return p_->index(p_->mdp_state(sp), p_->dra().initial()); }

  /// Sum over estimated successor classes t of P(t) * U((t, delta(q, L(s)))).
  double lookahead(ProductState sp, ActionId a) {
    const double n = visits(p_->equivalence_class(sp), a);
    if (n <= 0.0) return 0.0;
    const DraState q_next = p_->next_dra(sp);
    double acc = 0.0;
    for (const auto& [t, c] : successor_counts(p_->equivalence_class(sp), a))
      acc += (c / n) * touch(p_->index(t, q_next));
    return acc;
  }

  /// Best tried action (lowest index among ties); nullopt if none tried.
  std::optional<std::pair<ActionId, double>> best_tried(ProductState sp) {
    std::optional<std::pair<ActionId, double>> best;
    for (auto a : p_->enabled(sp)) {
      if (visits(p_->equivalence_class(sp), a) <= 0.0) continue;
      double v = lookahead(sp, a);
      if (!best || v > best->second) best = std::pair{a, v};
    }
    return best;
  }

  ActionId explore_action(ProductState sp, std::mt19937_64& rng) {
    const auto& en = p_->enabled(sp);
    auto uniform = [&] { return en[std::uniform_int_distribution<std::size_t>(0, en.size() - 1)(rng)]; };
    switch (cfg_.explore.kind) {
      case Exploration::Kind::uniform: return uniform();
      case Exploration::Kind::epsilon_greedy: {
        double eps = epsilon_;
        epsilon_ = std::max(cfg_.explore.min_epsilon, epsilon_ * cfg_.explore.decay);
        if (eps > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < eps) return uniform();
        auto best = best_tried(sp);
        return best ? best->first : policy_(sp);
      }
      case Exploration::Kind::optimistic: {
        const double r_plus = cfg_.explore.optimistic_value.value_or(cfg_.reward.w_good / (1.0 - cfg_.gamma));
        const std::size_t cls = p_->equivalence_class(sp);
        std::optional<std::pair<ActionId, double>> best;
        for (auto a : en) {
          double v = visits(cls, a) < cfg_.explore.visit_threshold ? r_plus : lookahead(sp, a);
          if (!best || v > best->second) best = std::pair{a, v};
        }
        return best->first;
      }
    }
    return uniform();
  }

  /// One step of the learning loop for the observed state. With
  /// `force_reset` the automaton component is reset regardless of the usual
  /// condition (used between trials).
  TdStepResult td_step(ProductState observed, std::mt19937_64& rng, bool force_reset = false) {
    ProductState cur = observed;
    touch(cur);
    bool reset = force_reset || reset_condition(cur);
    if (reset) {
      cur = reset_rabin_state(cur);
      touch(cur);
      since_reset_ = 0;
    } else if (previous_) {
      auto [sp, a] = *previous_;
      observe(p_->equivalence_class(sp), a, p_->equivalence_class(cur));
      update(sp);
    }
    ActionId next = explore_action(cur, rng);
    previous_ = std::pair{cur, next};
    ++since_reset_;
    return {cur, next, reset};
  }

  /// Forgets the pending (state, action) pair, e.g. when the agent is moved.
  void clear_previous() { previous_.reset(); }

  /// Records `weight` pseudo-observations distributed as `row` for (cls, a).
  void add_prior(std::size_t cls, ActionId a, const std::vector<std::pair<std::size_t, double>>& row, double weight) {
    if (weight <= 0.0) return;
    for (const auto& [t, pr] : row) add_count(cls, a, t, weight * pr);
    n_sa_[cls * p_->num_actions() + a] = 0.0;
    for (const auto& [t, c] : n_next_[cls * p_->num_actions() + a]) n_sa_[cls * p_->num_actions() + a] += c;
  }

  /// Starts from known utilities and a policy, e.g. computed on an
  /// approximate model.
  void warm_start(const std::vector<double>& u, const StationaryPolicy& pi) {
    if (u.size() != p_->num_states()) throw ValidationError("warm-start utilities do not match the product");
    require_policy(*p_, pi);
    utility_ = u;
    known_.assign(u.size(), true);
    policy_ = pi;
  }

 private:
  double touch(ProductState sp) {
    if (!known_[sp]) {
      known_[sp] = true;
      utility_[sp] = w_[sp];
    }
    return utility_[sp];
  }

  void add_count(std::size_t cls, ActionId a, std::size_t t, double c) {
    auto& row = n_next_[cls * p_->num_actions() + a];
    auto it = std::lower_bound(row.begin(), row.end(), t, [](const auto& e, std::size_t x) { return e.first < x; });
    if (it != row.end() && it->first == t) it->second += c;
    else row.insert(it, {t, c});
  }

  void observe(std::size_t cls, ActionId a, std::size_t next_cls) {
    add_count(cls, a, next_cls, 1.0);
    n_sa_[cls * p_->num_actions() + a] += 1.0;
  }

  void update(ProductState sp) {
    auto best = best_tried(sp);
    if (!best) return;
    utility_[sp] = cfg_.alpha * utility_[sp] + (1.0 - cfg_.alpha) * (w_[sp] + cfg_.gamma * best->second);
    policy_.choice[sp] = best->first;
  }

  const ProductMdp* p_;
  LearnerConfig cfg_;
  std::vector<double> w_;
  std::vector<char> live_;
  std::vector<double> utility_;
  std::vector<bool> known_;
  std::vector<double> n_sa_;
  std::vector<std::vector<std::pair<std::size_t, double>>> n_next_;
  StationaryPolicy policy_;
  std::optional<std::pair<ProductState, ActionId>> previous_;
  std::size_t since_reset_ = 0;
  double epsilon_ = 0.0;
};

/// Seeds a learner from a solution on an approximate model of the same
/// shape: its utilities and policy, plus `prior_weight` pseudo-observations
/// per (class, action) distributed as the approximate transitions.
inline void warm_start_from_model(Learner& learner, const std::vector<double>& utilities, const StationaryPolicy& pi,
                                  const LabeledMdp& approx, double prior_weight) {
  const ProductMdp& p = learner.product();
  if (approx.num_states() != p.num_classes() || approx.num_actions() != p.num_actions())
    throw ValidationError("approximate model does not match the learner's model");
  learner.warm_start(utilities, pi);
  for (std::size_t c = 0; c < approx.num_states(); ++c) {
    for (auto a : approx.enabled[c]) {
      std::vector<std::pair<std::size_t, double>> row;
      for (const auto& t : approx.row(c, a)) row.emplace_back(t.to, t.p);
      learner.add_prior(c, a, row, prior_weight);
    }
  }
}

/// Runs `trials` trials of `steps` steps against the true product dynamics.
/// The learner only sees sampled successors. Each trial starts with a
/// forced automaton reset; the MDP state carries over between trials.
inline std::vector<TrialRecord> run_trials(Learner& learner, std::size_t trials, std::size_t steps, std::uint64_t seed) {
  const ProductMdp& p = learner.product();
  const std::size_t pair = learner.config().reward.pair;
  std::mt19937_64 rng(seed);
  std::vector<TrialRecord> log;
  ProductState sp = p.initial();
  for (std::size_t trial = 0; trial < trials; ++trial) {
    TrialRecord rec{trial + 1, steps, 0, 0, 0};
    for (std::size_t k = 0; k < steps; ++k) {
      if (p.bad(pair)[sp]) ++rec.bad_visits;
      else if (p.good(pair)[sp]) ++rec.good_visits;
      auto r = learner.td_step(sp, rng, k == 0);
      if (r.reset) ++rec.resets;
      sp = sample_successor(p, r.state, r.action, rng);
    }
    log.push_back(rec);
  }
  return log;
}

}  // namespace rabin
