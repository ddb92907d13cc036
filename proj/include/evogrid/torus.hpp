#ifndef EVOGRID_TORUS_HPP
#define EVOGRID_TORUS_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace evogrid {

// N x M toroidal grid. Coordinates are 1-based like the usual matrix
// convention, with the identification (i +- N, j) = (i, j) = (i, j +- M).
// Flat indices are 0-based row-major and used everywhere internally.
struct TorusDims {
  int rows = 0;
  int cols = 0;

  TorusDims() = default;
  TorusDims(int n, int m) : rows(n), cols(m) {
    if (n < 3 || m < 3)
      throw std::invalid_argument("torus dimensions must satisfy N >= 3 and M >= 3");
  }
  int cells() const { return rows * cols; }
  bool operator==(const TorusDims& o) const = default;
};

struct NodeId {
  int i = 1;  // row in [1, N]
  int j = 1;  // col in [1, M]
  bool operator==(const NodeId& o) const = default;
};

inline int wrap(int x, int n) {
  int r = (x - 1) % n;
  if (r < 0) r += n;
  return r + 1;
}

inline NodeId canonical(NodeId n, const TorusDims& d) {
  return NodeId{wrap(n.i, d.rows), wrap(n.j, d.cols)};
}

inline int to_index(NodeId n, const TorusDims& d) {
  NodeId c = canonical(n, d);
  return (c.i - 1) * d.cols + (c.j - 1);
}

inline NodeId from_index(int k, const TorusDims& d) {
  if (k < 0 || k >= d.cells()) throw std::out_of_range("flat index outside grid");
  return NodeId{k / d.cols + 1, k % d.cols + 1};
}

// Fixed neighbor order: up, down, left, right. Sampling and tie-breaking
// depend on this order, so it must never change.
inline std::array<NodeId, 4> neighbors(NodeId n, const TorusDims& d) {
  NodeId c = canonical(n, d);
  return {canonical({c.i - 1, c.j}, d), canonical({c.i + 1, c.j}, d),
          canonical({c.i, c.j - 1}, d), canonical({c.i, c.j + 1}, d)};
}

// min_k |i1-i2+kN| + min_k |j1-j2+kM|
inline int torus_distance(NodeId a, NodeId b, const TorusDims& d) {
  auto axis = [](int x1, int x2, int n) {
    int diff = (x1 - x2) % n;
    if (diff < 0) diff += n;
    return diff < n - diff ? diff : n - diff;
  };
  return axis(a.i, b.i, d.rows) + axis(a.j, b.j, d.cols);
}

// Flat-index neighbor table, precomputed once per dims.
class NeighborTable {
 public:
  explicit NeighborTable(const TorusDims& d) : dims_(d), table_(d.cells()) {
    for (int k = 0; k < d.cells(); ++k) {
      auto nb = neighbors(from_index(k, d), d);
      for (int q = 0; q < 4; ++q) table_[k][q] = to_index(nb[q], d);
    }
  }
  const std::array<int32_t, 4>& operator[](int k) const { return table_[k]; }
  const TorusDims& dims() const { return dims_; }

 private:
  TorusDims dims_;
  std::vector<std::array<int32_t, 4>> table_;
};

// Unit offset on the torus; frames below give the local coordinate system
// used by the controller gadgets.
struct Offset {
  int di = 0;
  int dj = 0;
};

inline NodeId shifted(NodeId n, Offset o, int times, const TorusDims& d) {
  return canonical({n.i + o.di * times, n.j + o.dj * times}, d);
}

// Orthogonal pair (down-axis, right-axis). The eight frames are the dihedral
// symmetries of the grid; the proofs' gadgets are stated in one frame and
// applied in whichever frame matches the found configuration.
struct Frame {
  Offset d;
  Offset e;
  NodeId at(NodeId base, int a, int b, const TorusDims& dims) const {
    return canonical({base.i + a * d.di + b * e.di, base.j + a * d.dj + b * e.dj}, dims);
  }
};

inline const std::array<Offset, 4>& axis_offsets() {
  // Same order as neighbors(): up, down, left, right.
  static const std::array<Offset, 4> off = {Offset{-1, 0}, Offset{1, 0}, Offset{0, -1}, Offset{0, 1}};
  return off;
}

}  // namespace evogrid

#endif
