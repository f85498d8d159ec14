#include <gtest/gtest.h>

#include <map>

#include "support.hpp"

using namespace rabin;

namespace {

std::map<StateId, double> row_map(const LabeledMdp& m, StateId s, ActionId a) {
  std::map<StateId, double> out;
  for (const auto& t : m.row(s, a)) out[t.to] += t.p;
  return out;
}

const LabeledMdp& default_traffic() {
  static const LabeledMdp m = build_traffic_network(TrafficConfig{});
  return m;
}

TrafficConfig small_sample_config() {
  TrafficConfig cfg;
  cfg.samples = 500;
  return cfg;
}

}  // namespace

TEST(GridWorld, Shape) {
  GridConfig cfg;
  auto m = build_grid_world(cfg);
  EXPECT_EQ(m.num_states(), 25u);
  EXPECT_EQ(m.actions, (std::vector<std::string>{"UR", "UL", "DR", "DL"}));
  EXPECT_EQ(m.atoms, (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(m.initial, cfg.index({0, 3}));
  EXPECT_TRUE(validate_mdp(m).empty());
  EXPECT_TRUE(m.holds(cfg.index({4, 4}), 0));
  EXPECT_TRUE(m.holds(cfg.index({4, 0}), 1));
  EXPECT_TRUE(m.holds(cfg.index({2, 2}), 2));
  std::size_t labelled = 0;
  for (StateId s = 0; s < 25; ++s) labelled += m.labels[s] != 0;
  EXPECT_EQ(labelled, 3u);
}

TEST(GridWorld, InteriorMove) {
  GridConfig cfg;
  auto m = build_grid_world(cfg);
  auto r = row_map(m, cfg.index({2, 1}), 0);
  EXPECT_EQ(r, (std::map<StateId, double>{{cfg.index({3, 1}), 0.4}, {cfg.index({2, 2}), 0.4}, {cfg.index({2, 1}), 0.2}}));
}

TEST(GridWorld, CornerIntoWallsStays) {
  GridConfig cfg;
  auto m = build_grid_world(cfg);
  EXPECT_EQ(row_map(m, cfg.index({4, 4}), 0), (std::map<StateId, double>{{cfg.index({4, 4}), 1.0}}));
  EXPECT_EQ(row_map(m, cfg.index({0, 0}), 3), (std::map<StateId, double>{{cfg.index({0, 0}), 1.0}}));
}

TEST(GridWorld, EdgeSlidesAlongWall) {
  GridConfig cfg;
  auto m = build_grid_world(cfg);
  auto r = row_map(m, cfg.index({4, 2}), 0);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_DOUBLE_EQ(r[cfg.index({4, 3})], 0.8);
  EXPECT_NEAR(r[cfg.index({4, 2})], 0.2, 1e-12);
}

TEST(GridWorld, InvalidConfigs) {
  GridConfig cfg;
  cfg.regions.push_back({{7, 7}, "Z"});
  EXPECT_THROW(build_grid_world(cfg), ValidationError);
  cfg = GridConfig{};
  cfg.p_move = 0.5;
  EXPECT_THROW(build_grid_world(cfg), ValidationError);
  cfg = GridConfig{};
  cfg.initial = {5, 0};
  EXPECT_THROW(build_grid_world(cfg), ValidationError);
}

TEST(GridWorldProperty, RandomSizesAreStochastic) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 50; ++i) {
    GridConfig cfg;
    cfg.width = 1 + static_cast<int>(rng() % 7);
    cfg.height = 1 + static_cast<int>(rng() % 7);
    cfg.regions = {{{0, 0}, "A"}};
    cfg.initial = {cfg.width - 1, cfg.height - 1};
    auto m = build_grid_world(cfg);
    EXPECT_TRUE(validate_mdp(m).empty());
    for (StateId s = 0; s < m.num_states(); ++s) {
      for (ActionId a = 0; a < 4; ++a) {
        for (const auto& t : m.row(s, a)) {
          auto from = cfg.cell(s), to = cfg.cell(t.to);
          EXPECT_LE(std::abs(from.x - to.x) + std::abs(from.y - to.y), 1);
        }
      }
    }
  }
}

TEST(Traffic, DefaultModelShape) {
  const auto& m = default_traffic();
  EXPECT_EQ(m.num_states(), 320u);
  EXPECT_EQ(m.num_actions(), 4u);
  EXPECT_TRUE(validate_mdp(m).empty());
  EXPECT_EQ(m.atoms, (std::vector<std::string>{"sv2", "x1le30", "x2le30", "x3le10", "x4le10"}));
  TrafficConfig cfg;
  EXPECT_EQ(cfg.capacity, (LinkValues{40, 50, 30, 30}));
}

TEST(Traffic, LabelsFollowThresholds) {
  TrafficConfig cfg;
  const auto& m = default_traffic();
  TrafficIndex idx(cfg);
  for (StateId s = 0; s < m.num_states(); ++s) {
    auto st = idx.decode(s);
    EXPECT_EQ(m.holds(s, 0), st.last == 0 || st.last == 2);
    EXPECT_EQ(m.holds(s, 1), st.interval[0] <= 2);  // x1 <= 30 of {0,10,20,30,40}
    EXPECT_EQ(m.holds(s, 2), st.interval[1] <= 2);  // x2 <= 30 of {0,...,50}
    EXPECT_EQ(m.holds(s, 3), st.interval[2] == 0);  // bottom of {0,10,30}
    EXPECT_EQ(m.holds(s, 4), st.interval[3] == 0);
  }
}

TEST(Traffic, SuccessorRecordsTheActionTaken) {
  const auto& m = default_traffic();
  TrafficIndex idx{TrafficConfig{}};
  for (StateId s = 0; s < m.num_states(); s += 7)
    for (ActionId a = 0; a < 4; ++a)
      for (const auto& t : m.row(s, a)) EXPECT_EQ(idx.decode(t.to).last, a);
}

TEST(Traffic, LastActionCopiesShareQueueDynamics) {
  const auto& m = default_traffic();
  TrafficIndex idx{TrafficConfig{}};
  for (std::size_t t = 0; t < idx.queue_tuples(); ++t)
    for (ActionId a = 0; a < 4; ++a)
      for (ActionId last = 1; last < 4; ++last)
        EXPECT_EQ(m.row(idx.encode({idx.tuple(t), 0}), a), m.row(idx.encode({idx.tuple(t), last}), a));
}

TEST(Traffic, IndexRoundTrip) {
  TrafficIndex idx{TrafficConfig{}};
  for (std::size_t s = 0; s < idx.num_states(); ++s) EXPECT_EQ(idx.encode(idx.decode(s)), s);
}

TEST(Traffic, IntervalsAndMidpoints) {
  TrafficConfig cfg;
  EXPECT_EQ(traffic_interval(cfg, 0, 0.0), 0u);
  EXPECT_EQ(traffic_interval(cfg, 0, 10.0), 0u);
  EXPECT_EQ(traffic_interval(cfg, 0, 10.5), 1u);
  EXPECT_EQ(traffic_interval(cfg, 0, 40.0), 3u);
  EXPECT_EQ(traffic_interval(cfg, 2, 29.0), 1u);
  auto mid = traffic_midpoints(cfg, TrafficState{{3, 4, 0, 1}, 0});
  EXPECT_EQ(mid, (LinkValues{35, 45, 5, 20}));
}

TEST(Traffic, StepByHand) {
  TrafficConfig cfg;
  // (1,2) green: link 1 forwards 15, link 2 forwards 10; 13.5 enter link 2.
  auto next = traffic_step(cfg, {20, 30, 5, 5}, 0, {3, 0, 1, 2});
  EXPECT_DOUBLE_EQ(next[0], 8.0);
  EXPECT_DOUBLE_EQ(next[1], 33.5);
  EXPECT_DOUBLE_EQ(next[2], 6.0);
  EXPECT_DOUBLE_EQ(next[3], 7.0);
  // (1,4) with link 2 full: no space downstream, link 1 is held back.
  next = traffic_step(cfg, {20, 50, 5, 5}, 1, {0, 0, 0, 0});
  EXPECT_DOUBLE_EQ(next[0], 20.0);
  EXPECT_DOUBLE_EQ(next[1], 50.0);
  EXPECT_DOUBLE_EQ(next[3], 0.0);
  // (1,4) with 4 spaces left: 15 * scale * 0.9 = 4.
  next = traffic_step(cfg, {20, 46, 0, 0}, 1, {0, 0, 0, 0});
  EXPECT_NEAR(next[1], 50.0, 1e-12);
  EXPECT_NEAR(next[0], 20.0 - 4.0 / 0.9, 1e-12);
}

TEST(TrafficProperty, StepStaysWithinCapacity) {
  TrafficConfig cfg;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    LinkValues x{}, arr{};
    for (std::size_t l = 0; l < kLinks; ++l) {
      x[l] = u(rng) * cfg.capacity[l];
      arr[l] = std::floor(u(rng) * 12);
    }
    ActionId a = static_cast<ActionId>(rng() % 4);
    auto nx = traffic_step(cfg, x, a, arr);
    for (std::size_t l = 0; l < kLinks; ++l) {
      ASSERT_GE(nx[l], 0.0);
      ASSERT_LE(nx[l], cfg.capacity[l]);
      if (!actuates(a, l) && l != 1) {
        ASSERT_GE(nx[l], std::min(x[l] + arr[l], cfg.capacity[l]) - 1e-12);
      }
    }
  }
}

TEST(TrafficProperty, ModelIsDeterministicAndSeedSensitive) {
  auto cfg = small_sample_config();
  auto a = build_traffic_network(cfg);
  auto b = build_traffic_network(cfg);
  EXPECT_EQ(a, b);
  cfg.seed += 1;
  EXPECT_NE(build_traffic_network(cfg), a);
}

TEST(TrafficProperty, PruningRenormalizes) {
  auto cfg = small_sample_config();
  cfg.prune_below = 0.2;
  auto m = build_traffic_network(cfg);
  EXPECT_TRUE(validate_mdp(m).empty());
  for (StateId s = 0; s < m.num_states(); ++s)
    for (ActionId a = 0; a < 4; ++a) EXPECT_LE(m.row(s, a).size(), 5u);
}

TEST(Traffic, InvalidConfigs) {
  TrafficConfig cfg;
  cfg.boundaries[2] = {0, 10, 20};
  EXPECT_THROW(validate_traffic_config(cfg), ValidationError);
  cfg = TrafficConfig{};
  cfg.threshold[0] = 25;
  EXPECT_THROW(validate_traffic_config(cfg), ValidationError);
  cfg = TrafficConfig{};
  cfg.turn_1_to_2 = 1.5;
  EXPECT_THROW(validate_traffic_config(cfg), ValidationError);
  cfg = TrafficConfig{};
  cfg.samples = 0;
  EXPECT_THROW(validate_traffic_config(cfg), ValidationError);
}

TEST(NaiveTraffic, PhasesAndPeriod) {
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(traffic_actions()[naive_traffic_action(k)], "(1,2)");
  for (std::size_t k = 3; k < 6; ++k) EXPECT_EQ(traffic_actions()[naive_traffic_action(k)], "(3,4)");
  for (std::size_t k = 0; k < 60; ++k) EXPECT_EQ(naive_traffic_action(k), naive_traffic_action(k + 6));
}

TEST(Traffic, ApproximateConfigDiffersOnlyInStaleParameters) {
  TrafficConfig truth;
  auto approx = approximate_traffic_config(truth);
  EXPECT_EQ(approx.capacity, truth.capacity);
  EXPECT_EQ(approx.boundaries, truth.boundaries);
  EXPECT_NE(approx.turn_1_to_2, truth.turn_1_to_2);
  EXPECT_NO_THROW(validate_traffic_config(approx));
}
