#include "evogrid/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "evogrid/parallel.hpp"
#include "evogrid/snapshot.hpp"

namespace evogrid {

namespace fs = std::filesystem;

StrategyGrid make_initial(const TorusDims& dims, InitKind init, RngStream& rng,
                          const FixedSet* fixed) {
  StrategyGrid g = random_initial(dims, rng);
  if (init == InitKind::RandomWithCSquare) {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) g.set(canonical({1 + a, 1 + b}, dims), Strategy::C);
  }
  if (fixed) fixed->stamp(g);
  return g;
}

namespace {

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

struct SeedArtifacts {
  std::string ascii_stream;
  std::vector<std::pair<long, std::string>> pgm;  // (step, bytes)
};

}  // namespace

RunOutputs run_experiment(const ExperimentConfig& config, int workers, bool write_outputs) {
  if (workers <= 0) workers = default_workers();
  std::optional<FixedSet> fixed;
  if (config.fixed) fixed = config.fixed->build(config.dims);
  const PayoffMatrix m = config.payoff.build();
  const ImitationRule rule = make_rule(config.rule.kind, m, config.rule.kappa);

  const int n = static_cast<int>(config.seeds.size());
  RunOutputs out;
  out.records.resize(n);
  std::vector<SeedArtifacts> artifacts(config.snapshot_every > 0 ? n : 0);

  parallel_for(n, workers, [&](int i) {
    RngStream rng(config.seeds[i]);
    StrategyGrid init = make_initial(config.dims, config.init, rng, fixed ? &*fixed : nullptr);

    SeedArtifacts* art = config.snapshot_every > 0 ? &artifacts[i] : nullptr;
    auto emit = [&config, art](long step, const StrategyGrid& g) {
      if (config.snapshot_format != SnapshotFormat::Pgm) {
        if (!art->ascii_stream.empty()) art->ascii_stream.push_back('\n');
        art->ascii_stream += render_ascii(g);
      }
      if (config.snapshot_format == SnapshotFormat::Pgm ||
          config.snapshot_format == SnapshotFormat::Both)
        art->pgm.emplace_back(step, render_pgm(g));
    };

    SnapshotCallback cb = nullptr;
    long last_step = 0;
    StrategyGrid last_grid;
    if (art) {
      cb = [&config, &emit, &last_step, &last_grid](long step, const StrategyGrid& g) {
        last_step = step;
        last_grid = g;
        if (step % config.snapshot_every == 0) emit(step, g);
      };
    }
    out.records[i] = run_until_absorbing(init, m, rule, rng, config.max_steps, cb,
                                         fixed ? fixed->mask() : nullptr);
    // Final state joins the stream when the schedule missed it.
    if (art && last_step % config.snapshot_every != 0) emit(last_step, last_grid);
  });

  if (write_outputs) {
    fs::create_directories(config.out_dir);
    write_file(fs::path(config.out_dir) / "runs.csv",
               run_records_csv(config.hash(), out.records));
    for (int i = 0; i < n; ++i) {
      if (config.snapshot_every <= 0) continue;
      const SeedArtifacts& art = artifacts[i];
      const std::string tag = "seed" + std::to_string(config.seeds[i]);
      if (!art.ascii_stream.empty())
        write_file(fs::path(config.out_dir) / ("snapshots_" + tag + ".txt"), art.ascii_stream);
      for (const auto& [step, bytes] : art.pgm)
        write_file(fs::path(config.out_dir) / ("snap_" + tag + "_t" + std::to_string(step) + ".pgm"),
                   bytes);
    }
  }
  return out;
}

std::string run_records_csv(uint64_t config_hash, const std::vector<RunRecord>& records) {
  std::ostringstream ss;
  ss << "config_hash,seed,T,terminal_class,n_C_final\n";
  for (const RunRecord& r : records)
    ss << config_hash << ',' << r.seed << ',' << r.steps << ',' << to_string(r.terminal) << ','
       << r.n_c_final << '\n';
  return ss.str();
}

SweepOutputs run_sweep(const SweepSpec& spec, int workers, bool write_outputs) {
  SweepOutputs out;
  fs::path dir(spec.out_dir);
  if (write_outputs) fs::create_directories(dir);
  for (const SweepPoint& point : spec.points) {
    ExperimentConfig c;
    c.dims = spec.dims;
    c.payoff.family = spec.family;
    c.payoff.param = point.param;
    c.rule = spec.rule;
    c.max_steps = point.max_steps;
    c.init = spec.init;
    c.out_dir = (dir / ("point_" + point.param)).string();
    for (int r = 0; r < spec.replications; ++r) c.seeds.push_back(spec.seed_base + r);
    const RunOutputs res = run_experiment(c, workers, write_outputs);

    SweepRow row;
    row.param = point.param;
    row.runs = spec.replications;
    std::vector<long> steps;
    for (const RunRecord& rec : res.records) {
      if (rec.terminal != TerminalClass::Timeout) {
        ++row.converged;
        steps.push_back(rec.steps);
      }
    }
    row.fraction = row.runs ? static_cast<double>(row.converged) / row.runs : 0.0;
    if (!steps.empty()) {
      std::sort(steps.begin(), steps.end());
      row.median_steps = steps[(steps.size() - 1) / 2];
    }
    out.rows.push_back(row);
  }
  if (write_outputs)
    write_file(dir / "sweep.csv", sweep_csv(spec.hash(), out.rows));
  return out;
}

std::string sweep_csv(uint64_t spec_hash, const std::vector<SweepRow>& rows) {
  std::ostringstream ss;
  ss << "config_hash,param,runs,converged,fraction,median_T_converged\n";
  for (const SweepRow& r : rows)
    ss << spec_hash << ',' << r.param << ',' << r.runs << ',' << r.converged << ',' << r.fraction
       << ',' << r.median_steps << '\n';
  return ss.str();
}

}  // namespace evogrid
