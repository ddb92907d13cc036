#include "evogrid/oracle.hpp"

#include <algorithm>
#include <stdexcept>

#include "evogrid/seg.hpp"

namespace evogrid {

StateIndex encode_state(const StrategyGrid& g) {
  StateIndex s = 0;
  for (int k = 0; k < g.cells(); ++k)
    if (g.at_flat(k) == Strategy::D) s |= (StateIndex(1) << k);
  return s;
}

StrategyGrid decode_state(StateIndex s, const TorusDims& d) {
  StrategyGrid g(d, Strategy::C);
  for (int k = 0; k < d.cells(); ++k)
    if (s & (StateIndex(1) << k)) g.set_flat(k, Strategy::D);
  return g;
}

SupportGraph build_support_graph(const TorusDims& dims, const PayoffMatrix& m,
                                 const ImitationRule& rule, const FixedSet* fixed) {
  if (dims.cells() > kOracleCellCap)
    throw std::invalid_argument("support graph capped at 16 cells");
  SupportGraph g;
  g.dims = dims;
  g.cells = dims.cells();
  g.n_states = uint32_t(1) << g.cells;
  g.value.assign(g.n_states, 0);
  g.free_mask.assign(g.n_states, 0);
  if (fixed) {
    if (fixed->dims() != dims) throw std::invalid_argument("fixed set dims mismatch");
    for (int k : fixed->members()) {
      g.fixed_mask |= uint32_t(1) << k;
      if (fixed->strategy() == Strategy::D) g.fixed_value |= uint32_t(1) << k;
    }
  }

  const SegEngine engine(dims, m, rule);
  int cls[SegEngine::kMaxCells];
  g.for_each_consistent([&](StateIndex s) {
    const StrategyGrid grid = decode_state(s, dims);
    engine.classes(grid, cls);
    uint32_t value = 0, free = 0;
    for (int k = 0; k < g.cells; ++k) {
      if (fixed && fixed->contains_flat(k)) {
        value |= s & (uint32_t(1) << k);
        continue;
      }
      const SupportSet sup = engine.support_flat(grid, k, cls);
      if (sup.size() == 2)
        free |= uint32_t(1) << k;
      else if (sup.only(Strategy::D))
        value |= uint32_t(1) << k;
    }
    g.value[s] = value;
    g.free_mask[s] = free;
  });
  return g;
}

std::vector<uint8_t> reach_backward(const SupportGraph& g, const std::vector<uint8_t>& target) {
  std::vector<uint8_t> reach = target;
  bool changed = true;
  while (changed) {
    changed = false;
    g.for_each_consistent([&](StateIndex s) {
      if (reach[s]) return;
      bool hit = false;
      const uint32_t free = g.free_mask[s];
      uint32_t sub = free;
      while (true) {
        if (reach[g.value[s] | sub]) {
          hit = true;
          break;
        }
        if (sub == 0) break;
        sub = (sub - 1) & free;
      }
      if (hit) {
        reach[s] = 1;
        changed = true;
      }
    });
  }
  return reach;
}

namespace {

// First completed SCC of an iterative Tarjan walk restricted to `allowed`
// states: a terminal component of the explored subgraph.
std::vector<StateIndex> terminal_scc_from(const SupportGraph& g, StateIndex start,
                                          const std::vector<uint8_t>& allowed) {
  std::vector<int32_t> index(g.n_states, -1), low(g.n_states, 0);
  std::vector<uint8_t> on_stack(g.n_states, 0);
  std::vector<StateIndex> stack;
  std::vector<StateIndex> scc;
  int32_t counter = 0;

  struct Elem {
    StateIndex s;
    std::vector<StateIndex> succ;
    std::size_t next = 0;
  };
  std::vector<Elem> dfs;

  auto push = [&](StateIndex s) {
    index[s] = low[s] = counter++;
    stack.push_back(s);
    on_stack[s] = 1;
    Elem e;
    e.s = s;
    g.for_each_successor(s, [&](StateIndex t) {
      if (allowed[t]) e.succ.push_back(t);
    });
    dfs.push_back(std::move(e));
  };

  push(start);
  while (!dfs.empty()) {
    Elem& e = dfs.back();
    if (e.next < e.succ.size()) {
      const StateIndex t = e.succ[e.next++];
      if (index[t] < 0) {
        push(t);
      } else if (on_stack[t]) {
        low[e.s] = std::min(low[e.s], index[t]);
      }
    } else {
      if (low[e.s] == index[e.s]) {
        // Root of the first completed SCC: in Tarjan's order this component
        // has no edges leaving it within the explored subgraph.
        while (true) {
          const StateIndex w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          scc.push_back(w);
          if (w == e.s) break;
        }
        return scc;
      }
      const StateIndex done = e.s;
      dfs.pop_back();
      if (!dfs.empty()) low[dfs.back().s] = std::min(low[dfs.back().s], low[done]);
    }
  }
  return scc;
}

}  // namespace

ConvergenceCertificate certify_as_convergence(const SupportGraph& g) {
  std::vector<uint8_t> absorbing(g.n_states, 0);
  g.for_each_consistent([&](StateIndex s) { absorbing[s] = g.is_absorbing(s) ? 1 : 0; });
  const std::vector<uint8_t> reach = reach_backward(g, absorbing);

  ConvergenceCertificate cert;
  cert.converges = true;
  StateIndex first_bad = 0;
  bool found = false;
  g.for_each_consistent([&](StateIndex s) {
    if (!reach[s] && !found) {
      found = true;
      first_bad = s;
    }
  });
  if (!found) return cert;

  cert.converges = false;
  std::vector<uint8_t> allowed(g.n_states, 0);
  g.for_each_consistent([&](StateIndex s) { allowed[s] = reach[s] ? 0 : 1; });
  cert.witness = terminal_scc_from(g, first_bad, allowed);
  std::sort(cert.witness.begin(), cert.witness.end());
  return cert;
}

TerminalPartition classify_terminals(const SupportGraph& g) {
  TerminalPartition part;
  const StateIndex all_d = static_cast<StateIndex>(g.n_states - 1);
  g.for_each_consistent([&](StateIndex s) {
    if (!g.is_absorbing(s)) return;
    if (s == 0)
      part.all_c.push_back(s);
    else if (s == all_d)
      part.all_d.push_back(s);
    else
      part.mixed.push_back(s);
  });
  return part;
}

bool certify_almost_sure_consensus(const SupportGraph& g, StateIndex target,
                                   const std::vector<uint8_t>& start) {
  std::vector<uint8_t> target_set(g.n_states, 0);
  target_set[target] = 1;
  const std::vector<uint8_t> can_reach_target = reach_backward(g, target_set);

  // States that can wander somewhere the target is no longer reachable from.
  std::vector<uint8_t> doomed(g.n_states, 0);
  g.for_each_consistent([&](StateIndex s) { doomed[s] = can_reach_target[s] ? 0 : 1; });
  const std::vector<uint8_t> can_reach_doomed = reach_backward(g, doomed);

  bool ok = true;
  g.for_each_consistent([&](StateIndex s) {
    if (start[s] && can_reach_doomed[s]) ok = false;
  });
  return ok;
}

bool has_c_square(StateIndex s, const TorusDims& d) {
  for (int i = 1; i <= d.rows; ++i) {
    for (int j = 1; j <= d.cols; ++j) {
      bool all = true;
      for (int a = 0; a < 2 && all; ++a)
        for (int b = 0; b < 2 && all; ++b) {
          const int k = to_index(canonical({i + a, j + b}, d), d);
          all = (s & (StateIndex(1) << k)) == 0;
        }
      if (all) return true;
    }
  }
  return false;
}

bool verify_thm3_basin(const SupportGraph& g) {
  std::vector<uint8_t> start(g.n_states, 0);
  g.for_each_consistent([&](StateIndex s) { start[s] = has_c_square(s, g.dims) ? 1 : 0; });
  return certify_almost_sure_consensus(g, 0, start);
}

}  // namespace evogrid
