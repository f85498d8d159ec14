// rabin_synth: build, synthesize, learn, verify, simulate, demo.

#include <CLI11.hpp>

#include "rabin/cli.hpp"

namespace {

void add_spec(CLI::App* app, rabin::cli::SpecOptions& s) {
  app->add_option("--model", s.model, "Labeled MDP (JSON)")->required();
  auto* ltl = app->add_option("--ltl", s.ltl, "LTL formula in the supported fragment");
  auto* hoa = app->add_option("--hoa", s.hoa, "Deterministic Rabin automaton (HOA v1)");
  ltl->excludes(hoa);
  hoa->excludes(ltl);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace rabin::cli;
  CLI::App app{"Controller synthesis and learning for LTL specifications on MDPs"};
  app.require_subcommand(1);

  BuildOptions build;
  auto* b = app.add_subcommand("build", "Construct the product MDP");
  add_spec(b, build.spec);
  b->add_option("--out", build.out, "Product model (JSON)")->required();
  b->add_option("--acceptance", build.acceptance, "Acceptance sidecar (JSON)");

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "Synthesize a policy by value iteration");
  add_spec(s, synth.spec);
  s->add_option("--gamma", synth.gamma, "Discount factor")->capture_default_str();
  s->add_option("--w-good", synth.w_good, "Reward on G states")->capture_default_str();
  s->add_option("--w-bad", synth.w_bad, "Reward on B states")->capture_default_str();
  s->add_option("--pair-index", synth.pair, "Acceptance pair (1-based); all pairs when omitted");
  s->add_option("--tolerance", synth.tolerance, "Value iteration tolerance")->capture_default_str();
  s->add_option("--out", synth.out, "Policy file")->required();
  s->add_option("--report", synth.report, "Verification report")->required();

  LearnOptions learn;
  auto* l = app.add_subcommand("learn", "Learn a policy from simulated interaction");
  add_spec(l, learn.spec);
  l->add_option("--trials", learn.trials)->capture_default_str();
  l->add_option("--steps", learn.steps)->capture_default_str();
  l->add_option("--alpha", learn.alpha)->capture_default_str();
  l->add_option("--gamma", learn.gamma)->capture_default_str();
  l->add_option("--w-good", learn.w_good)->capture_default_str();
  l->add_option("--w-bad", learn.w_bad)->capture_default_str();
  l->add_option("--pair-index", learn.pair)->capture_default_str();
  l->add_option("--reset-interval", learn.reset_interval)->capture_default_str();
  l->add_option("--explore", learn.explore, "uniform | eps:E[:DECAY] | opt:N[:RMAX]")->capture_default_str();
  l->add_option("--seed", learn.seed);
  l->add_option("--out", learn.out, "Policy file")->required();
  l->add_option("--log", learn.log, "Per-trial log (CSV)");
  l->add_option("--warm-policy", learn.warm_policy, "Policy file with utilities to start from");
  l->add_option("--warm-model", learn.warm_model, "Approximate model used as prior counts");
  l->add_option("--prior-weight", learn.prior_weight)->capture_default_str();

  VerifyOptions verify;
  auto* v = app.add_subcommand("verify", "Check probability-one satisfaction of a policy");
  add_spec(v, verify.spec);
  v->add_option("--policy", verify.policy)->required();
  v->add_option("--report", verify.report)->required();

  SimulateOptions sim;
  auto* m = app.add_subcommand("simulate", "Simulate a trace under a policy");
  add_spec(m, sim.spec);
  m->add_option("--policy", sim.policy);
  m->add_flag("--naive-traffic", sim.naive_traffic, "Use the fixed-cycle traffic controller");
  m->add_flag("--traffic", sim.traffic_columns, "Emit per-link queue midpoints");
  m->add_option("--steps", sim.steps)->capture_default_str();
  m->add_option("--seed", sim.seed);
  m->add_option("--w-good", sim.w_good)->capture_default_str();
  m->add_option("--w-bad", sim.w_bad)->capture_default_str();
  m->add_option("--pair-index", sim.pair)->capture_default_str();
  m->add_option("--out", sim.out, "Trace (CSV)")->required();

  DemoOptions demo;
  auto* d = app.add_subcommand("demo", "Regenerate a case study");
  d->add_option("which", demo.which, "grid or traffic")->required()->check(CLI::IsMember({"grid", "traffic"}));
  d->add_option("--out-dir", demo.out_dir)->capture_default_str();
  d->add_option("--seed", demo.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? ok : parse_error;
  }

  return guarded([&] {
    if (*b) return cmd_build(build);
    if (*s) return cmd_synth(synth);
    if (*l) return cmd_learn(learn);
    if (*v) return cmd_verify(verify);
    if (*m) return cmd_simulate(sim);
    return cmd_demo(demo);
  });
}
