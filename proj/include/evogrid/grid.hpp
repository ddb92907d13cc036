#ifndef EVOGRID_GRID_HPP
#define EVOGRID_GRID_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "evogrid/torus.hpp"

namespace evogrid {

enum class Strategy : uint8_t { C = 0, D = 1 };

inline char strategy_char(Strategy s) { return s == Strategy::C ? '.' : '#'; }

class StrategyGrid {
 public:
  StrategyGrid() = default;
  StrategyGrid(const TorusDims& d, Strategy fill) : dims_(d), cells_(d.cells(), fill) {}

  static StrategyGrid all_c(const TorusDims& d) { return StrategyGrid(d, Strategy::C); }
  static StrategyGrid all_d(const TorusDims& d) { return StrategyGrid(d, Strategy::D); }

  // Rows as strings of '.'/'#', e.g. {"..#", "###", ".#."}.
  static StrategyGrid from_rows(const std::vector<std::string>& rows) {
    TorusDims d(static_cast<int>(rows.size()), static_cast<int>(rows.at(0).size()));
    StrategyGrid g(d, Strategy::C);
    for (int i = 0; i < d.rows; ++i) {
      if (static_cast<int>(rows[i].size()) != d.cols)
        throw std::invalid_argument("ragged grid literal");
      for (int j = 0; j < d.cols; ++j) {
        char c = rows[i][j];
        if (c != '.' && c != '#') throw std::invalid_argument("grid literal cells must be '.' or '#'");
        g.cells_[i * d.cols + j] = (c == '#') ? Strategy::D : Strategy::C;
      }
    }
    return g;
  }

  const TorusDims& dims() const { return dims_; }
  int cells() const { return static_cast<int>(cells_.size()); }

  Strategy at(NodeId n) const { return cells_[to_index(n, dims_)]; }
  Strategy at_flat(int k) const { return cells_[k]; }
  void set(NodeId n, Strategy s) { cells_[to_index(n, dims_)] = s; }
  void set_flat(int k, Strategy s) { cells_[k] = s; }

  const std::vector<Strategy>& raw() const { return cells_; }

  int n_cooperators() const {
    int n = 0;
    for (Strategy s : cells_)
      if (s == Strategy::C) ++n;
    return n;
  }

  int coop_neighbors(int flat, const NeighborTable& nb) const {
    int k = 0;
    for (int q = 0; q < 4; ++q)
      if (cells_[nb[flat][q]] == Strategy::C) ++k;
    return k;
  }

  bool operator==(const StrategyGrid& o) const = default;

  uint64_t hash() const {
    uint64_t h = 14695981039346656037ULL;
    h = (h ^ static_cast<uint64_t>(dims_.rows)) * 1099511628211ULL;
    h = (h ^ static_cast<uint64_t>(dims_.cols)) * 1099511628211ULL;
    for (Strategy s : cells_) h = (h ^ static_cast<uint64_t>(s)) * 1099511628211ULL;
    return h;
  }

 private:
  TorusDims dims_;
  std::vector<Strategy> cells_;
};

}  // namespace evogrid

#endif
