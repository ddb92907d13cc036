#ifndef EVOGRID_RUNNER_HPP
#define EVOGRID_RUNNER_HPP

#include <string>
#include <vector>

#include "evogrid/config.hpp"
#include "evogrid/seg.hpp"

namespace evogrid {

// Initial grid for a seed: the stream draws the random cells first; the
// guaranteed block / fixed-set stamps are applied on top.
StrategyGrid make_initial(const TorusDims& dims, InitKind init, RngStream& rng,
                          const FixedSet* fixed);

struct RunOutputs {
  std::vector<RunRecord> records;  // ordered like config.seeds
};

// Executes one run per seed on a worker pool. Outputs and any snapshot files
// are identical for any worker count.
RunOutputs run_experiment(const ExperimentConfig& config, int workers = 0,
                          bool write_outputs = true);

std::string run_records_csv(uint64_t config_hash, const std::vector<RunRecord>& records);

struct SweepRow {
  std::string param;
  int runs = 0;
  int converged = 0;
  double fraction = 0.0;
  long median_steps = -1;  // among converged; -1 when none converged
};

struct SweepOutputs {
  std::vector<SweepRow> rows;
};

SweepOutputs run_sweep(const SweepSpec& spec, int workers = 0, bool write_outputs = true);

std::string sweep_csv(uint64_t spec_hash, const std::vector<SweepRow>& rows);

}  // namespace evogrid

#endif
