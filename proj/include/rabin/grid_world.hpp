#pragma once

// The stochastic grid world: four diagonal actions, each moving along one of
// its two axes or staying put.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "rabin/error.hpp"
#include "rabin/mdp.hpp"

namespace rabin {

struct Cell {
  int x = 0;  // column, grows to the right
  int y = 0;  // row, grows upward
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct Region {
  Cell cell;
  std::string label;
};

struct GridConfig {
  int width = 5;
  int height = 5;
  std::vector<Region> regions{{{4, 4}, "A"}, {{4, 0}, "B"}, {{2, 2}, "C"}};
  Cell initial{0, 3};
  double p_move = 0.4;
  double p_stay = 0.2;
  double p_wall = 0.8;

  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) + c.x; }
  Cell cell(std::size_t s) const {
    return {static_cast<int>(s % static_cast<std::size_t>(width)), static_cast<int>(s / static_cast<std::size_t>(width))};
  }
  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
};

/// Action order: UR, UL, DR, DL. Each is (horizontal step, vertical step).
inline const std::vector<std::string>& grid_actions() {
  static const std::vector<std::string> names{"UR", "UL", "DR", "DL"};
  return names;
}

inline LabeledMdp build_grid_world(const GridConfig& cfg) {
  if (cfg.width <= 0 || cfg.height <= 0) throw ValidationError("grid dimensions must be positive");
  if (!cfg.in_bounds(cfg.initial)) throw ValidationError("initial cell out of bounds");
  if (std::abs(2 * cfg.p_move + cfg.p_stay - 1.0) > kStochasticTol)
    throw ValidationError("grid move probabilities must sum to 1");
  if (cfg.p_wall < 0.0 || cfg.p_wall > 1.0 || cfg.p_move < 0.0 || cfg.p_stay < 0.0)
    throw ValidationError("grid probabilities must lie in [0, 1]");

  std::set<std::string> names;
  for (const auto& r : cfg.regions) {
    if (!cfg.in_bounds(r.cell))
      throw ValidationError("region '" + r.label + "' at (" + std::to_string(r.cell.x) + "," + std::to_string(r.cell.y) +
                            ") is out of bounds");
    names.insert(r.label);
  }
  std::vector<std::string> atoms(names.begin(), names.end());
  const std::size_t n = static_cast<std::size_t>(cfg.width) * static_cast<std::size_t>(cfg.height);
  LabeledMdp m(atoms, grid_actions(), n);
  m.initial = cfg.index(cfg.initial);
  for (const auto& r : cfg.regions) {
    auto id = static_cast<std::size_t>(std::find(atoms.begin(), atoms.end(), r.label) - atoms.begin());
    m.labels[cfg.index(r.cell)] |= Letter{1} << id;
  }

  const int dx[] = {1, -1, 1, -1};
  const int dy[] = {1, 1, -1, -1};
  for (std::size_t s = 0; s < n; ++s) {
    const Cell c = cfg.cell(s);
    m.enabled[s] = {0, 1, 2, 3};
    for (ActionId a = 0; a < 4; ++a) {
      const Cell horiz{c.x + dx[a], c.y};
      const Cell vert{c.x, c.y + dy[a]};
      const bool h_ok = cfg.in_bounds(horiz);
      const bool v_ok = cfg.in_bounds(vert);
      std::vector<Transition> row;
      auto add = [&](Cell to, double p) {
        if (p > 0.0) row.push_back({cfg.index(to), p});
      };
      if (h_ok && v_ok) {
        add(horiz, cfg.p_move);
        add(vert, cfg.p_move);
        add(c, cfg.p_stay);
      } else if (h_ok) {
        add(horiz, cfg.p_wall);
        add(c, 1.0 - cfg.p_wall);
      } else if (v_ok) {
        add(vert, cfg.p_wall);
        add(c, 1.0 - cfg.p_wall);
      } else {
        add(c, 1.0);
      }
      std::sort(row.begin(), row.end(), [](const Transition& l, const Transition& r) { return l.to < r.to; });
      m.row(s, a) = std::move(row);
    }
  }
  return m;
}

}  // namespace rabin
