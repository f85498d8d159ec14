#pragma once

// The two case studies wired end to end: the grid world and the traffic
// network with a warm-started learner.

#include <string>
#include <vector>

#include "rabin/fragment_dra.hpp"
#include "rabin/grid_world.hpp"
#include "rabin/hoa.hpp"
#include "rabin/learner.hpp"
#include "rabin/ltl.hpp"
#include "rabin/product.hpp"
#include "rabin/solver.hpp"
#include "rabin/traffic.hpp"

namespace rabin {

inline const std::string kGridSpec = "G F A & G F B & G !C";
inline const std::string kTrafficSpec =
    "F G (x1le30 & x2le30) & G F x3le10 & G F x4le10 & G ((sv2 & X !sv2) -> (X X !sv2 & X X X !sv2))";

/// Translates an LTL formula in the supported fragment over the model atoms.
inline Dra automaton_for(const std::string& ltl_text, const std::vector<std::string>& atoms) {
  auto f = ltl::parse(ltl_text);
  auto spec = ltl::to_fragment(f);
  if (!spec)
    throw UnsupportedError("formula is outside the directly translatable fragment; supply a HOA automaton instead");
  return translate_fragment(*spec, atoms);
}

struct GridDemoParams {
  GridConfig grid;
  double gamma = 0.98;
  double w_good = 500;
  double w_bad = -500;
  std::size_t trials = 600;
  std::size_t steps = 200;
};

inline ProductMdp grid_demo_product(const GridConfig& cfg = {}) {
  auto m = build_grid_world(cfg);
  auto d = automaton_for(kGridSpec, m.atoms);
  return ProductMdp(std::move(m), std::move(d));
}

struct TrafficDemoParams {
  TrafficConfig truth;
  double gamma = 0.98;
  double w_good = 500;
  double w_bad = -5e5;
  std::size_t trials = 600;
  std::size_t steps = 200;
  std::string explore = "eps:0.1";
  double prior_weight = 20;
  std::uint64_t seed = 5;
};

struct TrafficDemo {
  ProductMdp truth;
  ProductMdp approx;
  SolveResult approx_solution;   // optimal on the approximate model
  StationaryPolicy learned;      // greedy policy after learning on the truth
  std::vector<TrialRecord> log;
};

inline TrafficDemo run_traffic_demo(const TrafficDemoParams& params) {
  auto true_model = build_traffic_network(params.truth);
  auto approx_model = build_traffic_network(approximate_traffic_config(params.truth));
  auto dra = automaton_for(kTrafficSpec, true_model.atoms);
  TrafficDemo demo{ProductMdp(true_model, dra), ProductMdp(approx_model, dra), {}, {}, {}};
  const RewardScheme scheme{0, params.w_good, params.w_bad};
  SolverConfig cfg;
  cfg.gamma = params.gamma;
  demo.approx_solution = value_iteration(demo.approx, scheme, cfg);

  LearnerConfig lc;
  lc.gamma = params.gamma;
  lc.reward = scheme;
  lc.explore = Exploration::parse(params.explore);
  Learner learner(demo.truth, lc);
  warm_start_from_model(learner, demo.approx_solution.utilities, demo.approx_solution.policy, approx_model,
                        params.prior_weight);
  demo.log = run_trials(learner, params.trials, params.steps, params.seed);
  demo.learned = learner.policy();
  return demo;
}

}  // namespace rabin
