#ifndef EVOGRID_CONFIG_HPP
#define EVOGRID_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evogrid/fixed.hpp"
#include "evogrid/imitation.hpp"
#include "evogrid/payoff.hpp"
#include "evogrid/torus.hpp"

namespace evogrid {

enum class InitKind { Random, RandomWithCSquare };

enum class SnapshotFormat { None, Ascii, Pgm, Both };

// Payoff specification: either an explicit matrix (entries kept as exact
// strings) or a named family plus parameter.
struct PayoffSpec {
  std::string family;                 // empty when explicit
  std::string param;                  // exact decimal / ratio string
  std::vector<std::string> entries;   // p1..p4 when explicit

  PayoffMatrix build() const;
  std::string describe() const;
};

struct RuleSpec {
  RuleKind kind = RuleKind::Deterministic;
  double kappa = 0.1;
};

struct FixedSpec {
  FixedKind kind = FixedKind::FixedD;
  std::vector<NodeId> nodes;            // explicit members
  std::optional<FixedRect> rect;        // rectangle shorthand (kind C)

  FixedSet build(const TorusDims& dims) const;
};

struct ExperimentConfig {
  TorusDims dims{10, 10};
  PayoffSpec payoff;
  RuleSpec rule;
  std::vector<uint64_t> seeds;
  long max_steps = 1000000;
  std::optional<FixedSpec> fixed;
  InitKind init = InitKind::Random;
  long snapshot_every = 0;  // 0 = no snapshots
  SnapshotFormat snapshot_format = SnapshotFormat::Ascii;
  std::string out_dir = "out";

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  std::string canonical_json() const;
  uint64_t hash() const;  // FNV-1a over the canonical form
};

// One point of a parameter sweep: a family parameter and its own budget.
struct SweepPoint {
  std::string param;
  long max_steps = 10000;
};

struct SweepSpec {
  TorusDims dims{10, 10};
  std::string family;
  std::vector<SweepPoint> points;
  RuleSpec rule;
  int replications = 100;
  uint64_t seed_base = 1;
  InitKind init = InitKind::Random;
  std::string out_dir = "out";

  static SweepSpec from_json_text(const std::string& text);
  static SweepSpec from_file(const std::string& path);
  std::string canonical_json() const;
  uint64_t hash() const;
};

// Built-in experiment presets reproducing the simulation section.
std::vector<std::string> preset_names();
SweepSpec preset(const std::string& name);

}  // namespace evogrid

#endif
