// Command-line front end: simulation runs, parameter sweeps, exhaustive
// verification, controller traces, and consensus-control experiments.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evogrid/controllers.hpp"
#include "evogrid/experiments.hpp"
#include "evogrid/oracle.hpp"
#include "evogrid/runner.hpp"
#include "evogrid/snapshot.hpp"

namespace fs = std::filesystem;
using namespace evogrid;

namespace {

struct MatrixArgs {
  std::vector<std::string> entries;
  std::string family;
  std::string param;

  PayoffSpec spec() const {
    PayoffSpec p;
    if (!entries.empty())
      p.entries = entries;
    else {
      p.family = family;
      p.param = param;
    }
    return p;
  }
};

void add_matrix_options(CLI::App* cmd, MatrixArgs& args) {
  cmd->add_option("--matrix", args.entries, "payoff entries p1 p2 p3 p4 (exact decimals)")
      ->expected(4);
  cmd->add_option("--family", args.family,
                  "payoff family: snowdrift_classic|hawk_dove|chicken|stag_hunt");
  cmd->add_option("--param", args.param, "family parameter (exact decimal or ratio)");
}

TorusDims parse_dims(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw CLI::ValidationError("--dims expects NxM");
  return TorusDims(std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1)));
}

RuleKind parse_rule(const std::string& text) {
  if (text == "deterministic") return RuleKind::Deterministic;
  if (text == "fermi") return RuleKind::Fermi;
  if (text == "proportional") return RuleKind::Proportional;
  throw CLI::ValidationError("unknown rule: " + text);
}

std::vector<uint64_t> parse_seeds(uint64_t seed, const std::string& range) {
  if (range.empty()) return {seed};
  const auto dots = range.find("..");
  if (dots == std::string::npos) throw CLI::ValidationError("--seeds expects A..B");
  const uint64_t a = std::stoull(range.substr(0, dots));
  const uint64_t b = std::stoull(range.substr(dots + 2));
  if (b < a) throw CLI::ValidationError("empty seed range");
  std::vector<uint64_t> out;
  for (uint64_t s = a; s <= b; ++s) out.push_back(s);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f << text;
}

std::string trace_csv(const ControlTrace& trace) {
  std::ostringstream ss;
  ss << "step,phase,n_C\n";
  ss << 0 << ",initial," << trace.initial.n_cooperators() << '\n';
  for (const TraceEntry& e : trace.entries)
    ss << e.step << ',' << to_string(e.phase) << ',' << e.n_c << '\n';
  return ss.str();
}

int cmd_verify(const TorusDims& dims, const PayoffSpec& payoff, RuleKind rule_kind, double kappa,
               const std::string& check, bool dump_witness) {
  const PayoffMatrix m = payoff.build();
  const ImitationRule rule = make_rule(rule_kind, m, kappa);
  const ConditionReport cond = check_conditions(m);
  const SupportGraph g = build_support_graph(dims, m, rule);

  if (check == "conditions") {
    std::cout << "matrix " << payoff.describe() << ": class=" << to_string(classify(m))
              << " thm1=" << cond.thm1_ok << " thm2=" << cond.thm2_ok << " thm3=" << cond.thm3_ok
              << " cor1=" << cond.cor1_ok << " thm4_i=" << cond.thm4_i_ok
              << " thm4_ii=" << cond.thm4_ii_ok << '\n';
    return 0;
  }
  if (check == "convergence") {
    const ConvergenceCertificate cert = certify_as_convergence(g);
    std::cout << "verdict: " << (cert.converges ? "converges" : "does-not-converge")
              << " (every state " << (cert.converges ? "reaches" : "does not reach")
              << " the absorbing set; " << g.dims.rows << "x" << g.dims.cols << ", rule "
              << to_string(rule_kind) << ")\n";
    if (!cert.converges && dump_witness) {
      std::cout << "witness recurrent class (" << cert.witness.size() << " states), first:\n"
                << render_ascii(decode_state(cert.witness.front(), dims));
    }
    return cert.converges ? 0 : 1;
  }
  if (check == "terminals") {
    const TerminalPartition part = classify_terminals(g);
    std::cout << "absorbing states: all-C=" << part.all_c.size() << " all-D=" << part.all_d.size()
              << " mixed=" << part.mixed.size() << '\n';
    if (dump_witness && !part.mixed.empty())
      std::cout << "first mixed absorbing state:\n" << render_ascii(decode_state(part.mixed.front(), dims));
    return 0;
  }
  if (check == "staghunt-basin") {
    if (!cond.thm3_ok) {
      std::cerr << "matrix does not satisfy the stag-hunt convergence conditions\n";
      return 2;
    }
    const bool ok = verify_thm3_basin(g);
    std::cout << "verdict: " << (ok ? "every C-square state reaches all-C a.s." : "basin violated")
              << '\n';
    return ok ? 0 : 1;
  }
  std::cerr << "unknown --check value: " << check << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evolutionary games on toroidal grids: simulate, control, verify"};
  app.require_subcommand(1);

  // ---- run -----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "seeded SEG runs, CSV records and snapshots");
  std::string run_config, run_preset, run_seed_range, run_out = "out", run_snapshots;
  uint64_t run_seed = 1;
  long run_max_steps = 0;
  int run_workers = 0;
  run->add_option("--config", run_config, "experiment config (JSON)");
  run->add_option("--preset", run_preset, "built-in preset name");
  run->add_option("--seed", run_seed, "single seed");
  run->add_option("--seeds", run_seed_range, "seed range A..B");
  run->add_option("--max-steps", run_max_steps, "step budget override");
  run->add_option("--snapshots", run_snapshots, "snapshot schedule, e.g. every:50");
  run->add_option("--out", run_out, "output directory");
  run->add_option("--workers", run_workers, "worker threads (default: hardware)");

  // ---- sweep ---------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "parameter sweeps with aggregated CSV");
  std::string sweep_config, sweep_preset, sweep_out;
  int sweep_workers = 0;
  sweep->add_option("--config", sweep_config, "sweep spec (JSON)");
  sweep->add_option("--preset", sweep_preset, "built-in preset name");
  sweep->add_option("--out", sweep_out, "output directory override");
  sweep->add_option("--workers", sweep_workers, "worker threads");

  // ---- verify --------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "exhaustive support-graph verification");
  std::string verify_dims = "3x3", verify_rule = "deterministic", verify_check = "convergence";
  double verify_kappa = 0.1;
  bool verify_witness = false;
  MatrixArgs verify_matrix;
  verify->add_option("--dims", verify_dims, "grid size NxM (at most 16 cells)");
  add_matrix_options(verify, verify_matrix);
  verify->add_option("--rule", verify_rule, "deterministic|fermi|proportional");
  verify->add_option("--kappa", verify_kappa, "fermi temperature");
  verify->add_option("--check", verify_check,
                     "conditions|convergence|terminals|staghunt-basin");
  verify->add_flag("--witness", verify_witness, "dump a witness state");

  // ---- control -------------------------------------------------------------
  auto* control = app.add_subcommand("control", "theorem controllers, trace CSV");
  std::string ctl_dims = "10x10", ctl_name = "thm1", ctl_out = "out", ctl_snapshots;
  uint64_t ctl_seed = 1;
  bool ctl_pgm = false;
  std::vector<int> ctl_rect;
  MatrixArgs ctl_matrix;
  control->add_option("--controller", ctl_name, "thm1|thm2|thm3|thm4");
  control->add_option("--dims", ctl_dims, "grid size NxM");
  add_matrix_options(control, ctl_matrix);
  control->add_option("--seed", ctl_seed, "seed for the random initial state");
  control->add_option("--rect", ctl_rect, "pinned rectangle i0 j0 rows cols (thm4)")->expected(4);
  control->add_option("--out", ctl_out, "output directory");
  control->add_option("--snapshots", ctl_snapshots, "every:K to dump per-step grids");
  control->add_flag("--pgm", ctl_pgm, "also write PGM images for scheduled steps");

  // ---- macc ----------------------------------------------------------------
  auto* macc = app.add_subcommand("macc", "consensus-control experiments");
  std::string macc_dims = "5x5", macc_mode = "defection", macc_out = "out", macc_seeds = "1..200";
  std::string macc_rule = "deterministic";
  long macc_max_steps = 10000;
  int macc_workers = 0;
  std::vector<int> macc_rect;
  std::vector<int> macc_nodes;
  MatrixArgs macc_matrix;
  macc->add_option("--mode", macc_mode, "defection|cooperation|prop2");
  macc->add_option("--dims", macc_dims, "grid size NxM");
  add_matrix_options(macc, macc_matrix);
  macc->add_option("--rule", macc_rule, "deterministic|fermi|proportional");
  macc->add_option("--seeds", macc_seeds, "seed range A..B");
  macc->add_option("--max-steps", macc_max_steps, "per-run step budget");
  macc->add_option("--rect", macc_rect, "pinned rectangle i0 j0 rows cols")->expected(4);
  macc->add_option("--nodes", macc_nodes, "pinned nodes as i j pairs");
  macc->add_option("--out", macc_out, "output directory");
  macc->add_option("--workers", macc_workers, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentConfig config;
      if (!run_config.empty()) {
        config = ExperimentConfig::from_file(run_config);
      } else if (!run_preset.empty()) {
        // A preset is a sweep; `run` executes it point by point.
        SweepSpec spec = preset(run_preset);
        spec.out_dir = run_out;
        run_sweep(spec, run_workers);
        std::cout << "preset " << run_preset << " written to " << run_out << '\n';
        return 0;
      } else {
        std::cerr << "run requires --config or --preset\n";
        return 2;
      }
      if (!run_seed_range.empty() || run->count("--seed"))
        config.seeds = parse_seeds(run_seed, run_seed_range);
      if (run_max_steps > 0) config.max_steps = run_max_steps;
      if (!run_snapshots.empty()) {
        if (run_snapshots.rfind("every:", 0) != 0)
          throw CLI::ValidationError("--snapshots expects every:K");
        config.snapshot_every = std::stol(run_snapshots.substr(6));
      }
      if (run->count("--out")) config.out_dir = run_out;
      run_experiment(config, run_workers);
      std::cout << "wrote " << config.seeds.size() << " run records to " << config.out_dir
                << "/runs.csv\n";
      return 0;
    }

    if (*sweep) {
      SweepSpec spec;
      if (!sweep_config.empty())
        spec = SweepSpec::from_file(sweep_config);
      else if (!sweep_preset.empty())
        spec = preset(sweep_preset);
      else {
        std::cerr << "sweep requires --config or --preset\n";
        return 2;
      }
      if (!sweep_out.empty()) spec.out_dir = sweep_out;
      const SweepOutputs out = run_sweep(spec, sweep_workers);
      for (const SweepRow& row : out.rows)
        std::cout << spec.family << "(" << row.param << "): " << row.converged << "/" << row.runs
                  << " converged, median T " << row.median_steps << '\n';
      return 0;
    }

    if (*verify)
      return cmd_verify(parse_dims(verify_dims), verify_matrix.spec(), parse_rule(verify_rule),
                        verify_kappa, verify_check, verify_witness);

    if (*control) {
      const TorusDims dims = parse_dims(ctl_dims);
      const PayoffMatrix m = ctl_matrix.spec().build();
      RngStream rng(ctl_seed);
      StrategyGrid init = random_initial(dims, rng);
      ControlTrace trace;
      if (ctl_name == "thm1") {
        trace = run_controller_thm1(init, m);
      } else if (ctl_name == "thm2") {
        trace = run_controller_thm2(init, m);
      } else if (ctl_name == "thm3") {
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) init.set(canonical({1 + a, 1 + b}, dims), Strategy::C);
        trace = run_flood_thm3(init, m);
      } else if (ctl_name == "thm4") {
        if (ctl_rect.size() != 4) throw CLI::ValidationError("thm4 requires --rect");
        FixedRect rect{{ctl_rect[0], ctl_rect[1]}, ctl_rect[2], ctl_rect[3]};
        rect.to_fixed_set(dims).stamp(init);
        trace = run_controller_thm4(init, m, rect);
      } else {
        throw CLI::ValidationError("unknown controller: " + ctl_name);
      }
      fs::create_directories(ctl_out);
      write_text(fs::path(ctl_out) / "trace.csv", trace_csv(trace));
      if (!ctl_snapshots.empty()) {
        if (ctl_snapshots.rfind("every:", 0) != 0)
          throw CLI::ValidationError("--snapshots expects every:K");
        const long every = std::stol(ctl_snapshots.substr(6));
        std::string stream = render_ascii(trace.initial);
        if (ctl_pgm) write_text(fs::path(ctl_out) / "trace_t0.pgm", render_pgm(trace.initial));
        for (const TraceEntry& e : trace.entries) {
          if (every <= 0 || e.step % every != 0) continue;
          stream += "\n" + render_ascii(e.after);
          if (ctl_pgm)
            write_text(fs::path(ctl_out) / ("trace_t" + std::to_string(e.step) + ".pgm"),
                       render_pgm(e.after));
        }
        write_text(fs::path(ctl_out) / "trace_snapshots.txt", stream);
      }
      std::cout << "controller " << ctl_name << ": " << trace.length() << " steps, final n_C "
                << trace.final_state().n_cooperators() << ", trace in " << ctl_out
                << "/trace.csv\n";
      return 0;
    }

    if (*macc) {
      const TorusDims dims = parse_dims(macc_dims);
      const PayoffMatrix m = macc_matrix.spec().build();
      const ImitationRule rule = make_rule(parse_rule(macc_rule), m);
      const std::vector<uint64_t> seeds = parse_seeds(1, macc_seeds);
      auto node_list = [&]() {
        std::vector<NodeId> nodes;
        if (macc_nodes.size() % 2 != 0) throw CLI::ValidationError("--nodes expects i j pairs");
        for (std::size_t k = 0; k + 1 < macc_nodes.size(); k += 2)
          nodes.push_back({macc_nodes[k], macc_nodes[k + 1]});
        return nodes;
      };

      MaccSummary summary;
      uint64_t config_tag = 0;
      if (macc_mode == "defection") {
        const FixedSet fixed(FixedKind::FixedD, dims, node_list());
        summary = macc_defection(dims, m, rule, seeds, macc_max_steps, fixed, macc_workers);
        config_tag = fixed.members().empty() ? 0 : fixed.members().front();
      } else if (macc_mode == "cooperation") {
        if (macc_rect.size() != 4) throw CLI::ValidationError("cooperation requires --rect");
        FixedRect rect{{macc_rect[0], macc_rect[1]}, macc_rect[2], macc_rect[3]};
        summary = macc_cooperation(dims, m, rule, seeds, macc_max_steps, rect, macc_workers);
        config_tag = to_index(rect.origin, dims);
      } else if (macc_mode == "prop2") {
        const FixedSet fixed(FixedKind::FixedC, dims, node_list());
        const Prop2Certificate cert = prop2_unreachability(dims, m, rule, fixed);
        std::cout << "S_C unreachable: " << (cert.s_c_unreachable ? "yes" : "no")
                  << (cert.frozen ? " (initial state frozen)" : "") << ", reachable states "
                  << cert.reachable_states << '\n';
        return cert.s_c_unreachable ? 0 : 1;
      } else {
        throw CLI::ValidationError("unknown mode: " + macc_mode);
      }
      std::ostringstream ss;
      ss << "config_hash,seeds,success_fraction,mean_T,max_T\n"
         << config_tag << ',' << seeds.size() << ',' << summary.success_fraction << ','
         << summary.mean_steps << ',' << summary.max_steps << '\n';
      fs::create_directories(macc_out);
      write_text(fs::path(macc_out) / "macc.csv", ss.str());
      std::cout << macc_mode << ": " << summary.reached << "/" << summary.runs
                << " reached consensus, summary in " << macc_out << "/macc.csv\n";
      return 0;
    }
  } catch (const TraceIntegrityError& e) {
    std::cerr << "trace integrity error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
