#pragma once

// Discounted utilities on the product: U = W + gamma * max_a P_a U.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rabin/error.hpp"
#include "rabin/mdp.hpp"
#include "rabin/product.hpp"

namespace rabin {

struct SolverConfig {
  double gamma = 0.98;
  double tolerance = 1e-8;  // sup-norm change between sweeps
  std::size_t max_iterations = 1'000'000;
};

struct SolveResult {
  std::vector<double> utilities;
  StationaryPolicy policy;
  std::size_t iterations = 0;
  double residual = 0.0;  // sup-norm Bellman residual of `utilities`
};

inline void validate_solver(const SolverConfig& cfg) {
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ValidationError("discount must lie in (0, 1)");
  if (!(cfg.tolerance > 0.0)) throw ValidationError("tolerance must be positive");
  if (cfg.max_iterations == 0) throw ValidationError("iteration cap must be positive");
}

namespace detail {

inline double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Below a few ulps of the utilities' magnitude, sweeps only shuffle rounding
// error, so the requested tolerance is floored there.
inline double effective_tolerance(const SolverConfig& cfg, const std::vector<double>& w) {
  double scale = sup_norm(w) / (1.0 - cfg.gamma);
  return std::max(cfg.tolerance, 16.0 * std::numeric_limits<double>::epsilon() * scale);
}

inline double expected(const ProductMdp& p, ProductState sp, ActionId a, const std::vector<double>& u) {
  double acc = 0.0;
  for (const auto& t : p.row(sp, a)) acc += t.p * u[t.to];
  return acc;
}

}  // namespace detail

/// Two actions whose values differ by less than this are treated as tied;
/// the lower action index wins a tie.
inline double tie_tolerance(const SolverConfig& cfg, const std::vector<double>& w) {
  double scale = detail::sup_norm(w) / (1.0 - cfg.gamma);
  return std::max(1e-9 * scale, 4.0 * detail::effective_tolerance(cfg, w) * cfg.gamma / (1.0 - cfg.gamma));
}

/// Lowest-index action whose one-step lookahead is within `tie` of the best.
inline ActionId greedy_action(const ProductMdp& p, ProductState sp, const std::vector<double>& u, double tie) {
  const auto& en = p.enabled(sp);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> q(en.size());
  for (std::size_t j = 0; j < en.size(); ++j) {
    q[j] = detail::expected(p, sp, en[j], u);
    best = std::max(best, q[j]);
  }
  for (std::size_t j = 0; j < en.size(); ++j)
    if (q[j] >= best - tie) return en[j];
  return en.front();
}

inline double bellman_residual(const ProductMdp& p, const std::vector<double>& w, double gamma,
                               const std::vector<double>& u) {
  double r = 0.0;
  for (ProductState sp = 0; sp < p.num_states(); ++sp) {
    double best = -std::numeric_limits<double>::infinity();
    for (auto a : p.enabled(sp)) best = std::max(best, detail::expected(p, sp, a, u));
    r = std::max(r, std::abs(w[sp] + gamma * best - u[sp]));
  }
  return r;
}

/// Jacobi value iteration from U = W. Throws ConvergenceError at the cap.
inline SolveResult value_iteration(const ProductMdp& p, const std::vector<double>& w, const SolverConfig& cfg) {
  validate_solver(cfg);
  if (w.size() != p.num_states()) throw ValidationError("reward vector size does not match the product");
  const double tol = detail::effective_tolerance(cfg, w);
  std::vector<double> u = w, next(w.size());
  SolveResult res;
  double delta = std::numeric_limits<double>::infinity();
  for (res.iterations = 0; res.iterations < cfg.max_iterations && !(delta <= tol); ++res.iterations) {
    delta = 0.0;
    for (ProductState sp = 0; sp < p.num_states(); ++sp) {
      double best = -std::numeric_limits<double>::infinity();
      for (auto a : p.enabled(sp)) best = std::max(best, detail::expected(p, sp, a, u));
      next[sp] = w[sp] + cfg.gamma * best;
      delta = std::max(delta, std::abs(next[sp] - u[sp]));
    }
    u.swap(next);
  }
  if (!(delta <= tol)) throw ConvergenceError("value iteration did not converge", delta);
  res.residual = bellman_residual(p, w, cfg.gamma, u);
  const double tie = tie_tolerance(cfg, w);
  res.policy.choice.resize(p.num_states());
  for (ProductState sp = 0; sp < p.num_states(); ++sp) res.policy.choice[sp] = greedy_action(p, sp, u, tie);
  res.utilities = std::move(u);
  return res;
}

inline SolveResult value_iteration(const ProductMdp& p, const RewardScheme& r, const SolverConfig& cfg) {
  return value_iteration(p, reward_vector(p, r), cfg);
}

inline void require_policy(const ProductMdp& p, const StationaryPolicy& pi) {
  if (pi.size() != p.num_states()) throw ValidationError("policy size does not match the product");
  for (ProductState sp = 0; sp < p.num_states(); ++sp) {
    const auto& en = p.enabled(sp);
    if (std::find(en.begin(), en.end(), pi(sp)) == en.end())
      throw ValidationError("policy picks a disabled action at product state " + std::to_string(sp));
  }
}

struct EvaluationResult {
  std::vector<double> utilities;
  std::size_t iterations = 0;
  double residual = 0.0;  // sup-norm of W + gamma P_pi U - U
};

/// Iterative evaluation of U = W + gamma P_pi U.
inline EvaluationResult policy_evaluation(const ProductMdp& p, const StationaryPolicy& pi, const std::vector<double>& w,
                                          const SolverConfig& cfg) {
  validate_solver(cfg);
  require_policy(p, pi);
  if (w.size() != p.num_states()) throw ValidationError("reward vector size does not match the product");
  const double tol = detail::effective_tolerance(cfg, w);
  std::vector<double> u = w, next(w.size());
  EvaluationResult res;
  double delta = std::numeric_limits<double>::infinity();
  for (; res.iterations < cfg.max_iterations && !(delta <= tol); ++res.iterations) {
    delta = 0.0;
    for (ProductState sp = 0; sp < p.num_states(); ++sp) {
      next[sp] = w[sp] + cfg.gamma * detail::expected(p, sp, pi(sp), u);
      delta = std::max(delta, std::abs(next[sp] - u[sp]));
    }
    u.swap(next);
  }
  if (!(delta <= tol)) throw ConvergenceError("policy evaluation did not converge", delta);
  for (ProductState sp = 0; sp < p.num_states(); ++sp)
    res.residual = std::max(res.residual, std::abs(w[sp] + cfg.gamma * detail::expected(p, sp, pi(sp), u) - u[sp]));
  res.utilities = std::move(u);
  return res;
}

inline EvaluationResult policy_evaluation(const ProductMdp& p, const StationaryPolicy& pi, const RewardScheme& r,
                                          const SolverConfig& cfg) {
  return policy_evaluation(p, pi, reward_vector(p, r), cfg);
}

/// Estimated bounds on the chain induced by a prob-1 policy, with w_G = 1.
struct ParameterBoundEstimate {
  std::size_t n_bar = 1;    // return period of a good state
  double p_bar = 1.0;       // lower bound on that return probability
  double m_bar = 1.0;       // lower bound on the recurrent gain
  double n1 = 1.0;          // expected transient visits, first bound
  double n2 = 1.0;          // expected transient visits, second bound
  double epsilon = 0.5;     // slack
};

struct SelectedParameters {
  double gamma;
  double w_bad;
};

/// Checks the two inequalities the selected parameters must satisfy.
inline bool parameters_satisfy(const ParameterBoundEstimate& est, double gamma, double w_bad) {
  bool recurrent = 1.0 + w_bad * est.p_bar < -est.epsilon;
  double transient = std::max(-est.n1 * w_bad * (1.0 - std::pow(gamma, static_cast<double>(est.n_bar))),
                              -est.n2 * w_bad * (1.0 - gamma));
  return recurrent && transient < est.epsilon;
}

/// Smallest |w_B| of the form 2^k, then the smallest gamma of the form
/// 1 - 2^-j, meeting both inequalities.
inline SelectedParameters select_parameters(const ParameterBoundEstimate& est) {
  if (est.n_bar < 1) throw ValidationError("n_bar must be at least 1");
  if (!(est.p_bar > 0.0 && est.p_bar <= 1.0)) throw ValidationError("p_bar must lie in (0, 1]");
  if (!(est.n1 >= 1.0 && est.n2 >= 1.0)) throw ValidationError("N1 and N2 must be at least 1");
  if (!(est.epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(est.epsilon < est.m_bar)) throw ValidationError("infeasible estimate: epsilon must be below M_bar");

  double w_bad = 0.0;
  for (int k = 0; k < 1024; ++k) {
    double cand = -std::ldexp(1.0, k);
    if (1.0 + cand * est.p_bar < -est.epsilon) {
      w_bad = cand;
      break;
    }
  }
  if (w_bad == 0.0) throw ValidationError("no representable w_B meets the bound");
  for (int j = 1; j <= 52; ++j) {
    double gamma = 1.0 - std::ldexp(1.0, -j);
    if (parameters_satisfy(est, gamma, w_bad)) return {gamma, w_bad};
  }
  throw ValidationError("no representable discount meets the bound");
}

}  // namespace rabin
