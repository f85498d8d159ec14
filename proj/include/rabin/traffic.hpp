#pragma once

// Two-intersection traffic network abstracted to a finite MDP. Links 1 and 3
// feed signal v1, links 2 and 4 feed signal v2; link 2 is downstream of v1.
// The discrete state is the subinterval of each queue plus the last action.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "rabin/error.hpp"
#include "rabin/mdp.hpp"

namespace rabin {

inline constexpr std::size_t kLinks = 4;
using LinkValues = std::array<double, kLinks>;

struct TrafficConfig {
  LinkValues capacity{40, 50, 30, 30};
  std::array<std::vector<double>, kLinks> boundaries{
      std::vector<double>{0, 10, 20, 30, 40}, std::vector<double>{0, 10, 20, 30, 40, 50},
      std::vector<double>{0, 10, 30}, std::vector<double>{0, 10, 30}};
  LinkValues saturation{15, 10, 10, 10};  // vehicles forwarded per step when actuated
  double turn_1_to_2 = 0.9;             // share of link-1 outflow entering link 2
  double turn_3_to_2 = 0.1;             // share of link-3 outflow entering link 2
  LinkValues arrival_mean{6, 0, 0.5, 0.5};  // Poisson arrivals per step
  LinkValues threshold{30, 30, 10, 10}; // label thresholds x_l <= threshold_l
  std::size_t samples = 20000;
  double prune_below = 1e-3;
  std::uint64_t seed = 20140101;
};

/// Actions in order: (1,2), (1,4), (3,2), (3,4).
inline const std::vector<std::string>& traffic_actions() {
  static const std::vector<std::string> names{"(1,2)", "(1,4)", "(3,2)", "(3,4)"};
  return names;
}

inline bool actuates(ActionId a, std::size_t link) {
  switch (link) {
    case 0: return a == 0 || a == 1;
    case 1: return a == 0 || a == 2;
    case 2: return a == 2 || a == 3;
    case 3: return a == 1 || a == 3;
    default: return false;
  }
}

/// One 15 s step of the queue dynamics. Actuated links forward up to their
/// saturation limit; flow into link 2 is scaled down to the space it has
/// after its own discharge; arrivals beyond capacity are turned away.
inline LinkValues traffic_step(const TrafficConfig& cfg, const LinkValues& x, ActionId a, const LinkValues& arrivals) {
  LinkValues out{};
  for (std::size_t l = 0; l < kLinks; ++l) out[l] = actuates(a, l) ? std::min(x[l], cfg.saturation[l]) : 0.0;
  double space = cfg.capacity[1] - x[1] + out[1];
  double demand = cfg.turn_1_to_2 * out[0] + cfg.turn_3_to_2 * out[2];
  if (demand > space && demand > 0.0) {
    double scale = std::max(space, 0.0) / demand;
    out[0] *= scale;
    out[2] *= scale;
    demand = cfg.turn_1_to_2 * out[0] + cfg.turn_3_to_2 * out[2];
  }
  LinkValues next{};
  for (std::size_t l = 0; l < kLinks; ++l) {
    double inflow = arrivals[l] + (l == 1 ? demand : 0.0);
    next[l] = std::clamp(x[l] - out[l] + inflow, 0.0, cfg.capacity[l]);
  }
  return next;
}

struct TrafficState {
  std::array<std::size_t, kLinks> interval{};
  ActionId last = 0;
  friend bool operator==(const TrafficState&, const TrafficState&) = default;
};

class TrafficIndex {
 public:
  explicit TrafficIndex(const TrafficConfig& cfg) {
    for (std::size_t l = 0; l < kLinks; ++l) counts_[l] = cfg.boundaries[l].size() - 1;
  }
  std::size_t queue_tuples() const { return counts_[0] * counts_[1] * counts_[2] * counts_[3]; }
  std::size_t num_states() const { return queue_tuples() * traffic_actions().size(); }
  std::size_t intervals(std::size_t l) const { return counts_[l]; }

  std::size_t tuple_index(const std::array<std::size_t, kLinks>& iv) const {
    std::size_t t = 0;
    for (std::size_t l = 0; l < kLinks; ++l) t = t * counts_[l] + iv[l];
    return t;
  }
  std::array<std::size_t, kLinks> tuple(std::size_t t) const {
    std::array<std::size_t, kLinks> iv{};
    for (std::size_t l = kLinks; l-- > 0;) {
      iv[l] = t % counts_[l];
      t /= counts_[l];
    }
    return iv;
  }
  std::size_t encode(const TrafficState& st) const { return tuple_index(st.interval) * traffic_actions().size() + st.last; }
  TrafficState decode(std::size_t s) const {
    return {tuple(s / traffic_actions().size()), s % traffic_actions().size()};
  }

 private:
  std::array<std::size_t, kLinks> counts_{};
};

/// Subinterval of `x` on link l: [b0,b1], (b1,b2], ...
inline std::size_t traffic_interval(const TrafficConfig& cfg, std::size_t l, double x) {
  const auto& b = cfg.boundaries[l];
  for (std::size_t k = 1; k + 1 < b.size(); ++k)
    if (x <= b[k]) return k - 1;
  return b.size() - 2;
}

inline LinkValues traffic_midpoints(const TrafficConfig& cfg, const TrafficState& st) {
  LinkValues mid{};
  for (std::size_t l = 0; l < kLinks; ++l)
    mid[l] = 0.5 * (cfg.boundaries[l][st.interval[l]] + cfg.boundaries[l][st.interval[l] + 1]);
  return mid;
}

inline std::vector<std::string> traffic_atoms(const TrafficConfig& cfg) {
  std::vector<std::string> atoms{"sv2"};
  for (std::size_t l = 0; l < kLinks; ++l)
    atoms.push_back("x" + std::to_string(l + 1) + "le" + std::to_string(static_cast<long long>(std::llround(cfg.threshold[l]))));
  return atoms;
}

inline void validate_traffic_config(const TrafficConfig& cfg) {
  for (std::size_t l = 0; l < kLinks; ++l) {
    const auto& b = cfg.boundaries[l];
    const std::string link = "link " + std::to_string(l + 1);
    if (cfg.capacity[l] <= 0) throw ValidationError(link + ": capacity must be positive");
    if (b.size() < 2 || b.front() != 0.0 || b.back() != cfg.capacity[l])
      throw ValidationError(link + ": boundaries must run from 0 to the capacity");
    for (std::size_t k = 1; k < b.size(); ++k)
      if (!(b[k] > b[k - 1])) throw ValidationError(link + ": boundaries must be strictly increasing");
    if (!(cfg.saturation[l] > 0)) throw ValidationError(link + ": saturation limit must be positive");
    if (cfg.arrival_mean[l] < 0) throw ValidationError(link + ": arrival mean must be nonnegative");
    if (std::find(b.begin(), b.end(), cfg.threshold[l]) == b.end() || cfg.threshold[l] == b.front())
      throw ValidationError(link + ": label threshold is not a subinterval boundary");
    if (std::abs(cfg.threshold[l] - std::llround(cfg.threshold[l])) > 0)
      throw ValidationError(link + ": label threshold must be an integer");
  }
  for (double r : {cfg.turn_1_to_2, cfg.turn_3_to_2})
    if (r < 0.0 || r > 1.0) throw ValidationError("turn ratios must lie in [0, 1]");
  if (cfg.samples == 0) throw ValidationError("Monte-Carlo sample count must be positive");
  if (cfg.prune_below < 0.0 || cfg.prune_below >= 1.0) throw ValidationError("pruning threshold must lie in [0, 1)");
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Seed used for the Monte-Carlo estimate of one (queue tuple, action) row.
inline std::uint64_t traffic_row_seed(std::uint64_t seed, std::size_t tuple, ActionId a) {
  return detail::splitmix64(detail::splitmix64(seed) ^ (tuple * 16 + a));
}

inline LabeledMdp build_traffic_network(const TrafficConfig& cfg) {
  validate_traffic_config(cfg);
  const TrafficIndex idx(cfg);
  const auto& actions = traffic_actions();
  const auto atoms = traffic_atoms(cfg);
  LabeledMdp m(atoms, actions, idx.num_states());

  // The last action does not influence the queues, so each row is estimated
  // once per queue tuple and shared by the four last-action copies.
  const std::size_t tuples = idx.queue_tuples();
  std::vector<std::vector<std::pair<std::size_t, double>>> est(tuples * actions.size());
  for (std::size_t t = 0; t < tuples; ++t) {
    const auto iv = idx.tuple(t);
    for (ActionId a = 0; a < actions.size(); ++a) {
      std::mt19937_64 rng(traffic_row_seed(cfg.seed, t, a));
      std::array<std::uniform_real_distribution<double>, kLinks> pick;
      std::array<std::poisson_distribution<int>, kLinks> arrive;
      for (std::size_t l = 0; l < kLinks; ++l) {
        pick[l] = std::uniform_real_distribution<double>(cfg.boundaries[l][iv[l]], cfg.boundaries[l][iv[l] + 1]);
        arrive[l] = std::poisson_distribution<int>(cfg.arrival_mean[l] > 0 ? cfg.arrival_mean[l] : 1.0);
      }
      std::map<std::size_t, std::size_t> counts;
      for (std::size_t k = 0; k < cfg.samples; ++k) {
        LinkValues x{}, arr{};
        for (std::size_t l = 0; l < kLinks; ++l) x[l] = pick[l](rng);
        for (std::size_t l = 0; l < kLinks; ++l) arr[l] = cfg.arrival_mean[l] > 0 ? arrive[l](rng) : 0.0;
        LinkValues nx = traffic_step(cfg, x, a, arr);
        std::array<std::size_t, kLinks> niv{};
        for (std::size_t l = 0; l < kLinks; ++l) niv[l] = traffic_interval(cfg, l, nx[l]);
        ++counts[idx.tuple_index(niv)];
      }
      auto& row = est[t * actions.size() + a];
      double kept = 0.0;
      for (auto [to, c] : counts) {
        double p = static_cast<double>(c) / static_cast<double>(cfg.samples);
        if (p < cfg.prune_below) continue;
        row.emplace_back(to, p);
        kept += p;
      }
      if (row.empty()) {  // every successor below the threshold: keep the most frequent
        auto best = std::max_element(counts.begin(), counts.end(),
                                     [](const auto& l, const auto& r) { return l.second < r.second; });
        row.emplace_back(best->first, 1.0);
        kept = 1.0;
      }
      for (auto& e : row) e.second /= kept;
    }
  }

  for (std::size_t s = 0; s < idx.num_states(); ++s) {
    const TrafficState st = idx.decode(s);
    m.enabled[s] = {0, 1, 2, 3};
    Letter label = actuates(st.last, 1) ? Letter{1} : 0;
    for (std::size_t l = 0; l < kLinks; ++l)
      if (cfg.boundaries[l][st.interval[l] + 1] <= cfg.threshold[l]) label |= Letter{1} << (l + 1);
    m.labels[s] = label;
    const std::size_t t = idx.tuple_index(st.interval);
    for (ActionId a = 0; a < actions.size(); ++a) {
      auto& row = m.row(s, a);
      for (auto [to, p] : est[t * actions.size() + a]) row.push_back({to * actions.size() + a, p});
      std::sort(row.begin(), row.end(), [](const Transition& l, const Transition& r) { return l.to < r.to; });
    }
  }
  m.initial = idx.encode(TrafficState{{0, 0, 0, 0}, 0});
  return m;
}

/// A stale estimate of `truth`, standing in for parameters fitted to
/// historical data: link-1 turn ratio 0.5 and link-2 saturation 14.
inline TrafficConfig approximate_traffic_config(const TrafficConfig& truth) {
  TrafficConfig approx = truth;
  approx.turn_1_to_2 = 0.5;
  approx.saturation[1] = truth.saturation[1] + 4;
  approx.seed = truth.seed + 7;
  return approx;
}

/// The fixed-time baseline: (1,2) for three steps, then (3,4) for three.
inline ActionId naive_traffic_action(std::size_t step) { return (step % 6) < 3 ? 0 : 3; }

}  // namespace rabin
