#ifndef EVOGRID_SNAPSHOT_HPP
#define EVOGRID_SNAPSHOT_HPP

#include <string>

#include "evogrid/grid.hpp"

namespace evogrid {

// One row per line, '.' = C, '#' = D. Streams of snapshots are separated by
// a single blank line.
inline std::string render_ascii(const StrategyGrid& g) {
  std::string out;
  const TorusDims& d = g.dims();
  out.reserve(static_cast<std::size_t>(d.rows) * (d.cols + 1));
  for (int i = 0; i < d.rows; ++i) {
    for (int j = 0; j < d.cols; ++j) out.push_back(strategy_char(g.at_flat(i * d.cols + j)));
    out.push_back('\n');
  }
  return out;
}

// Plain PGM (P2), 0 = C, 255 = D, width M, height N. Byte-exact by contract.
inline std::string render_pgm(const StrategyGrid& g) {
  const TorusDims& d = g.dims();
  std::string out = "P2\n" + std::to_string(d.cols) + " " + std::to_string(d.rows) + "\n255\n";
  for (int i = 0; i < d.rows; ++i) {
    for (int j = 0; j < d.cols; ++j) {
      if (j) out.push_back(' ');
      out += (g.at_flat(i * d.cols + j) == Strategy::C) ? "0" : "255";
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace evogrid

#endif
