#pragma once

// Subcommands of the rabin_synth tool. Each returns a process exit code.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rabin/demos.hpp"
#include "rabin/hoa.hpp"
#include "rabin/learner.hpp"
#include "rabin/mdp_io.hpp"
#include "rabin/product.hpp"
#include "rabin/solver.hpp"
#include "rabin/trace_io.hpp"
#include "rabin/verifier.hpp"

namespace rabin::cli {

enum ExitCode : int { ok = 0, io_error = 1, parse_error = 2, validation_error = 3, no_convergence = 4, negative = 5 };

inline constexpr std::uint64_t kDefaultSeed = 20140101;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

/// --seed wins, then RABIN_SYNTH_SEED, then the built-in default.
inline std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("RABIN_SYNTH_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ValidationError("RABIN_SYNTH_SEED is not an unsigned integer");
    }
  }
  return kDefaultSeed;
}

/// Runs a command body and maps exceptions onto exit codes.
inline int guarded(const std::function<int()>& body, std::ostream& err = std::cerr) {
  try {
    return body();
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return io_error;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return parse_error;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return validation_error;
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << "\n";
    return validation_error;
  } catch (const ConvergenceError& e) {
    err << "solver: " << e.what() << "\n";
    return no_convergence;
  }
}

struct SpecOptions {
  std::string model;
  std::optional<std::string> ltl;
  std::optional<std::string> hoa;
};

inline ProductMdp load_product(const SpecOptions& o) {
  if (o.ltl.has_value() == o.hoa.has_value()) throw ValidationError("give exactly one of --ltl and --hoa");
  auto m = deserialize_mdp(read_file(o.model));
  Dra d = o.ltl ? automaton_for(*o.ltl, m.atoms) : hoa::parse(read_file(*o.hoa), m.atoms);
  return ProductMdp(std::move(m), std::move(d));
}

inline void warn_overlap(const ProductMdp& p, std::size_t pair, std::ostream& err) {
  if (reward_overlap(p, pair))
    err << "warning: acceptance pair " << pair + 1 << " has states in both G and B; B rewards take precedence\n";
}

inline PolicyFile to_policy_file(const ProductMdp& p, const StationaryPolicy& pi, const std::vector<double>& u = {}) {
  PolicyFile f;
  for (auto a : pi.choice) f.choices.push_back(p.mdp().actions.at(a));
  f.mdp_states = p.mdp().num_states();
  f.dra_states = p.dra().num_states();
  f.utilities = u;
  return f;
}

inline StationaryPolicy from_policy_file(const ProductMdp& p, const PolicyFile& f) {
  if (f.mdp_states != p.mdp().num_states() || f.dra_states != p.dra().num_states())
    throw ValidationError("policy was built for a product of a different shape");
  StationaryPolicy pi;
  for (const auto& name : f.choices) {
    auto a = p.mdp().action_id(name);
    if (!a) throw ValidationError("policy names unknown action '" + name + "'");
    pi.choice.push_back(*a);
  }
  require_policy(p, pi);
  return pi;
}

struct BuildOptions {
  SpecOptions spec;
  std::string out;
  std::optional<std::string> acceptance;
};

inline int cmd_build(const BuildOptions& o, std::ostream& out = std::cout) {
  auto p = load_product(o.spec);
  write_file(o.out, serialize_mdp(export_product_model(p)));
  if (o.acceptance) write_file(*o.acceptance, export_acceptance(p));
  out << "product: " << p.num_states() << " states (" << p.mdp().num_states() << " x " << p.dra().num_states()
      << "), " << p.num_pairs() << " acceptance pair(s)\n";
  return ok;
}

struct SynthOptions {
  SpecOptions spec;
  double gamma = 0.98;
  double w_good = 500;
  double w_bad = -500;
  std::optional<std::size_t> pair;  // 1-based; all pairs when absent
  double tolerance = 1e-8;
  std::string out;
  std::string report;
};

inline int cmd_synth(const SynthOptions& o, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  auto p = load_product(o.spec);
  SolverConfig cfg{o.gamma, o.tolerance, 1'000'000};
  std::vector<std::size_t> pairs;
  if (o.pair) {
    if (*o.pair == 0 || *o.pair > p.num_pairs()) throw ValidationError("--pair-index out of range");
    pairs.push_back(*o.pair - 1);
  } else {
    for (std::size_t i = 0; i < p.num_pairs(); ++i) pairs.push_back(i);
  }
  std::optional<std::pair<SolveResult, VerificationResult>> first;
  for (auto i : pairs) {
    warn_overlap(p, i, err);
    auto sol = value_iteration(p, RewardScheme{i, o.w_good, o.w_bad}, cfg);
    auto ver = satisfies_prob_one(p, sol.policy);
    out << "pair " << i + 1 << ": " << sol.iterations << " sweeps, residual " << sol.residual << ", "
        << (ver.prob_one ? "probability one" : "not probability one") << "\n";
    if (ver.prob_one) {
      write_file(o.out, serialize_policy(to_policy_file(p, sol.policy, sol.utilities)));
      write_file(o.report, report_json(ver));
      return ok;
    }
    if (!first) first.emplace(std::move(sol), std::move(ver));
  }
  write_file(o.out, serialize_policy(to_policy_file(p, first->first.policy, first->first.utilities)));
  write_file(o.report, report_json(first->second));
  out << first->second.explanation << "\n";
  return negative;
}

struct LearnOptions {
  SpecOptions spec;
  std::size_t trials = 600;
  std::size_t steps = 200;
  double alpha = 0.9;
  double gamma = 0.98;
  double w_good = 500;
  double w_bad = -500;
  std::size_t pair = 1;
  std::size_t reset_interval = 200;
  std::string explore = "uniform";
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> log;
  std::optional<std::string> warm_policy;  // policy file with utilities
  std::optional<std::string> warm_model;   // approximate model for prior counts
  double prior_weight = 20;
};

inline int cmd_learn(const LearnOptions& o, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  auto p = load_product(o.spec);
  if (o.pair == 0 || o.pair > p.num_pairs()) throw ValidationError("--pair-index out of range");
  warn_overlap(p, o.pair - 1, err);
  LearnerConfig lc;
  lc.alpha = o.alpha;
  lc.gamma = o.gamma;
  lc.reward = RewardScheme{o.pair - 1, o.w_good, o.w_bad};
  lc.reset_interval = o.reset_interval;
  lc.explore = Exploration::parse(o.explore);
  Learner learner(p, lc);
  if (o.warm_policy) {
    auto f = deserialize_policy(read_file(*o.warm_policy));
    auto pi = from_policy_file(p, f);
    if (f.utilities.empty()) throw ValidationError("warm-start policy file carries no utilities");
    if (o.warm_model) {
      warm_start_from_model(learner, f.utilities, pi, deserialize_mdp(read_file(*o.warm_model)), o.prior_weight);
    } else {
      learner.warm_start(f.utilities, pi);
    }
  } else if (o.warm_model) {
    throw ValidationError("--warm-model requires --warm-policy");
  }
  auto log = run_trials(learner, o.trials, o.steps, resolve_seed(o.seed));
  write_file(o.out, serialize_policy(to_policy_file(p, learner.policy(), learner.utilities())));
  if (o.log) write_file(*o.log, trial_log_csv(log));
  out << "learned over " << o.trials << " trials of " << o.steps << " steps\n";
  return ok;
}

struct VerifyOptions {
  SpecOptions spec;
  std::string policy;
  std::string report;
};

inline int cmd_verify(const VerifyOptions& o, std::ostream& out = std::cout) {
  auto p = load_product(o.spec);
  auto pi = from_policy_file(p, deserialize_policy(read_file(o.policy)));
  auto ver = satisfies_prob_one(p, pi);
  write_file(o.report, report_json(ver));
  out << ver.explanation << "\n";
  return ok;
}

struct SimulateOptions {
  SpecOptions spec;
  std::optional<std::string> policy;
  bool naive_traffic = false;
  bool traffic_columns = false;
  std::size_t steps = 1000;
  std::optional<std::uint64_t> seed;
  double w_good = 500;
  double w_bad = -500;
  std::size_t pair = 1;
  std::string out;
};

inline int cmd_simulate(const SimulateOptions& o) {
  auto p = load_product(o.spec);
  if (o.pair == 0 || o.pair > p.num_pairs()) throw ValidationError("--pair-index out of range");
  auto w = reward_vector(p, RewardScheme{o.pair - 1, o.w_good, o.w_bad});
  if (o.policy.has_value() == o.naive_traffic) throw ValidationError("give exactly one of --policy and --naive-traffic");
  std::vector<TraceStep> trace;
  if (o.policy) {
    auto pi = from_policy_file(p, deserialize_policy(read_file(*o.policy)));
    trace = simulate(p, pi, o.steps, resolve_seed(o.seed), w);
  } else {
    if (p.mdp().actions != traffic_actions()) throw ValidationError("--naive-traffic needs the traffic model");
    trace = simulate(p, [](ProductState, std::size_t k) { return naive_traffic_action(k); }, o.steps,
                     resolve_seed(o.seed), w);
  }
  std::optional<TrafficConfig> traffic;
  if (o.traffic_columns) {
    traffic = TrafficConfig{};
    if (p.mdp().num_states() != TrafficIndex(*traffic).num_states())
      throw ValidationError("--traffic needs a model with the default traffic layout");
  }
  write_file(o.out, trace_csv(trace, p.mdp(), traffic));
  return ok;
}

struct DemoOptions {
  std::string which;  // "grid" or "traffic"
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
};

inline int cmd_demo(const DemoOptions& o, std::ostream& out = std::cout) {
  std::filesystem::create_directories(o.out_dir);
  auto path = [&](const std::string& name) { return (std::filesystem::path(o.out_dir) / name).string(); };
  const std::uint64_t seed = resolve_seed(o.seed);
  if (o.which == "grid") {
    GridDemoParams params;
    auto p = grid_demo_product(params.grid);
    write_file(path("grid_model.json"), serialize_mdp(p.mdp()));
    write_file(path("grid_dra.hoa"), write_hoa(p.dra(), kGridSpec));
    const RewardScheme scheme{0, params.w_good, params.w_bad};
    SolverConfig cfg;
    cfg.gamma = params.gamma;
    auto sol = value_iteration(p, scheme, cfg);
    auto ver = satisfies_prob_one(p, sol.policy);
    write_file(path("grid_policy.json"), serialize_policy(to_policy_file(p, sol.policy, sol.utilities)));
    write_file(path("grid_report.json"), report_json(ver));
    LearnerConfig lc;
    lc.gamma = params.gamma;
    lc.reward = scheme;
    Learner learner(p, lc);
    auto log = run_trials(learner, params.trials, params.steps, seed);
    auto lver = satisfies_prob_one(p, learner.policy());
    write_file(path("grid_learned_policy.json"),
               serialize_policy(to_policy_file(p, learner.policy(), learner.utilities())));
    write_file(path("grid_learned_report.json"), report_json(lver));
    write_file(path("grid_trials.csv"), trial_log_csv(log));
    const auto w = reward_vector(p, scheme);
    write_file(path("grid_trace.csv"), trace_csv(simulate(p, learner.policy(), 1000, seed, w), p.mdp()));
    out << "grid: product " << p.num_states() << " states; synthesized policy "
        << (ver.prob_one ? "satisfies" : "does not satisfy") << " the specification with probability one; learned policy "
        << (lver.prob_one ? "satisfies" : "does not satisfy") << " it\n";
    return ok;
  }
  if (o.which == "traffic") {
    TrafficDemoParams params;
    params.seed = seed;
    auto demo = run_traffic_demo(params);
    const auto& p = demo.truth;
    write_file(path("traffic_model.json"), serialize_mdp(p.mdp()));
    write_file(path("traffic_approx_model.json"), serialize_mdp(demo.approx.mdp()));
    write_file(path("traffic_dra.hoa"), write_hoa(p.dra(), kTrafficSpec));
    write_file(path("traffic_approx_policy.json"),
               serialize_policy(to_policy_file(p, demo.approx_solution.policy, demo.approx_solution.utilities)));
    write_file(path("traffic_learned_policy.json"), serialize_policy(to_policy_file(p, demo.learned)));
    write_file(path("traffic_trials.csv"), trial_log_csv(demo.log));
    auto ver = satisfies_prob_one(p, demo.learned);
    write_file(path("traffic_report.json"), report_json(ver));
    const auto w = reward_vector(p, RewardScheme{0, params.w_good, params.w_bad});
    const TrafficConfig layout = params.truth;
    write_file(path("traffic_trace_naive.csv"),
               trace_csv(simulate(p, [](ProductState, std::size_t k) { return naive_traffic_action(k); }, 200, seed, w),
                         p.mdp(), layout));
    write_file(path("traffic_trace_approx.csv"),
               trace_csv(simulate(p, demo.approx_solution.policy, 200, seed, w), p.mdp(), layout));
    write_file(path("traffic_trace_learned.csv"), trace_csv(simulate(p, demo.learned, 200, seed, w), p.mdp(), layout));
    out << "traffic: product " << p.num_states() << " states; learned policy "
        << (ver.prob_one ? "satisfies" : "does not satisfy") << " the specification with probability one\n";
    return ok;
  }
  throw ValidationError("unknown demo '" + o.which + "' (expected grid or traffic)");
}

}  // namespace rabin::cli
