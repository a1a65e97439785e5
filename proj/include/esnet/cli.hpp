#pragma once

// Subcommand implementations and the argv entry point. Exit codes:
//   0 success | 1 usage/flag errors | 2 data/file errors | 3 invariant
// violations (energy increase, nonfinite state).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "esnet/config.hpp"
#include "esnet/dataset.hpp"
#include "esnet/diagnostics.hpp"
#include "esnet/model.hpp"
#include "esnet/training.hpp"

namespace esnet {

namespace detail {

// stream tags so weight init, epoch shuffles, and subset picks never share a
// derived seed for small indices
inline constexpr std::uint64_t kInitStream = 0x696e6974u;   // "init"
inline constexpr std::uint64_t kDiagStream = 0x64696167u;   // "diag"

inline int effective_workers(const RunConfig& cfg) {
  return cfg.deterministic ? 1 : cfg.workers;
}

inline EStableNet net_from_config(const RunConfig& cfg) {
  return make_net(net_kind_from(cfg.kind), cfg.dims, cfg.blocks, cfg.kernel,
                  parse_channels(cfg.channels), cfg.epsilon, cfg.c_shift, cfg.t_end,
                  g_inverse_from(cfg.g_inverse));
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os << text;
  if (!os) throw DataError("write failed for " + path);
}

inline void echo_config(const RunConfig& cfg, const std::string& path) {
  write_text(path, render_config(cfg));
}

inline void write_metrics_csv(const std::vector<EpochMetrics>& log, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path);
  os << "epoch,lr,train_mse,test_mse,test_rel_l2\n";
  os << std::setprecision(17);
  for (const auto& em : log) {
    os << em.epoch << ',' << em.lr << ',' << em.train_mse << ',';
    if (em.evaluated)
      os << em.test_mse << ',' << em.test_rel_l2;
    else
      os << "nan,nan";
    os << '\n';
  }
  if (!os) throw DataError("write failed for " + path);
}

inline void write_train_summary(const TrainResult& r, EStableNet& net, double wall_s,
                                const std::string& dir) {
  std::ostringstream csv;
  csv << std::setprecision(17);
  csv << "key,value\n"
      << "kind," << to_string(net.kind) << '\n'
      << "param_count," << net.parameter_count() << '\n'
      << "train_count," << r.train_count << '\n'
      << "test_count," << r.test_count << '\n'
      << "best_epoch," << r.best_epoch << '\n'
      << "best_test_mse," << r.best_test_mse << '\n'
      << "final_test_mse," << r.final_test_mse << '\n'
      << "final_test_rel_l2," << r.final_test_rel_l2 << '\n'
      << "wall_seconds," << wall_s << '\n';
  write_text(dir + "/summary.csv", csv.str());

  std::ostringstream txt;
  txt << to_string(net.kind) << " network, " << net.parameter_count() << " parameters\n"
      << "train/test " << r.train_count << "/" << r.test_count << '\n'
      << std::scientific << std::setprecision(6)
      << "best test mse " << r.best_test_mse << " at epoch " << r.best_epoch << '\n'
      << "final test mse " << r.final_test_mse << ", rel L2 " << r.final_test_rel_l2 << '\n'
      << std::defaultfloat << "wall time " << wall_s << " s\n";
  write_text(dir + "/summary.txt", txt.str());
}

inline std::vector<Field> diagnostic_inputs(const RunConfig& cfg, const EStableNet& net) {
  std::vector<Field> inputs;
  std::size_t want = std::size_t(cfg.samples);
  if (want == 0) throw UsageError("diagnose: samples must be positive");
  if (!cfg.dataset.empty()) {
    Dataset ds = read_dataset(cfg.dataset);
    if (ds.grid.dims != net.dims)
      throw DataError("diagnose: dataset dimensionality does not match the network");
    std::vector<std::size_t> idx(ds.samples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (want < idx.size())
      seeded_shuffle(idx, derive_seed(cfg.seed, kDiagStream));
    std::size_t take = std::min(want, idx.size());
    for (std::size_t i = 0; i < take; ++i) inputs.push_back(ds.samples[idx[i]].phi0);
  } else {
    Grid g(net.dims, cfg.n);
    for (std::size_t i = 0; i < want; ++i)
      inputs.push_back(sample_ic(g, derive_seed(cfg.seed, i)));
  }
  return inputs;
}

}  // namespace detail

// ---- subcommands ----

inline int cmd_generate(const RunConfig& cfg, const std::string& export_csv = "") {
  Grid g(cfg.dims, cfg.n);
  SolverConfig sc;
  sc.epsilon = cfg.epsilon;
  sc.t_end = cfg.t_end;
  sc.rtol = cfg.rtol;
  sc.atol = cfg.atol;
  sc.dealias = cfg.dealias;
  if (cfg.epsilon <= 0) throw UsageError("generate: epsilon must be positive");
  if (cfg.t_end <= 0) throw UsageError("generate: t_end must be positive");
  std::string out = cfg.dataset.empty() ? "dataset.bin" : cfg.dataset;
  if (auto dir = std::filesystem::path(out).parent_path(); !dir.empty())
    std::filesystem::create_directories(dir);

  WorkerPool pool(detail::effective_workers(cfg));
  auto t0 = std::chrono::steady_clock::now();
  std::size_t stride = std::max<std::size_t>(1, cfg.count / 20);
  std::mutex print_mu;
  Dataset ds = generate(g, sc, cfg.count, cfg.seed, &pool,
                        [&](std::size_t done, std::size_t total) {
                          if (done % stride != 0 && done != total) return;
                          std::scoped_lock lk(print_mu);
                          std::cout << "  solved " << done << "/" << total << " samples\r"
                                    << std::flush;
                        });
  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_dataset(out, ds);
  detail::echo_config(cfg, out + ".config.txt");
  if (!export_csv.empty()) export_dataset_csv(export_csv, ds);
  std::cout << "\nwrote " << cfg.count << " samples (" << cfg.dims << "D, n=" << cfg.n
            << ", eps=" << cfg.epsilon << ", T=" << cfg.t_end << ") to " << out << " in "
            << std::fixed << std::setprecision(1) << wall << " s\n"
            << std::defaultfloat;
  return 0;
}

inline int cmd_train(RunConfig cfg) {
  if (cfg.dataset.empty()) throw UsageError("train: --dataset is required");
  Dataset ds = read_dataset(cfg.dataset);
  // the dataset header is authoritative for the physics it was generated with
  cfg.dims = ds.grid.dims;
  cfg.n = ds.grid.n;
  cfg.epsilon = ds.epsilon;
  cfg.t_end = ds.t_end;

  EStableNet net = detail::net_from_config(cfg);
  init_params(net, init_scheme_from(cfg.init), derive_seed(cfg.seed, detail::kInitStream));

  TrainConfig tc;
  tc.lr0 = cfg.lr0;
  tc.weight_decay = cfg.weight_decay;
  tc.batch_size = cfg.batch_size;
  tc.epochs = cfg.epochs;
  tc.halve_every = cfg.halve_every;
  tc.restart_every = cfg.restart_every;
  tc.beta = cfg.beta;
  tc.train_fraction = cfg.train_fraction;
  tc.eval_every = cfg.eval_every;
  tc.energy_check_every = cfg.energy_check_every;
  tc.seed = cfg.seed;
  tc.workers = detail::effective_workers(cfg);

  std::filesystem::create_directories(cfg.out_dir);
  detail::echo_config(cfg, cfg.out_dir + "/config.resolved.txt");

  std::cout << to_string(net.kind) << " net: " << net.block_count() << " blocks, kernel "
            << net.kernel << ", " << net.parameter_count() << " parameters\n";
  auto t0 = std::chrono::steady_clock::now();
  TrainResult r = train(net, ds, tc, cfg.out_dir + "/checkpoint.bin", &std::cout);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  detail::write_metrics_csv(r.log, cfg.out_dir + "/metrics.csv");
  detail::write_train_summary(r, net, wall, cfg.out_dir);
  std::cout << std::scientific << std::setprecision(6) << "best test mse " << r.best_test_mse
            << " (epoch " << r.best_epoch << "), final rel L2 " << r.final_test_rel_l2
            << std::defaultfloat << ", wall " << std::fixed << std::setprecision(1) << wall
            << " s\n" << std::defaultfloat;
  return 0;
}

inline int cmd_eval(const RunConfig& cfg, const std::string& per_sample_csv = "",
                    const std::string& dump_dir = "", int dump_count = 4) {
  if (cfg.checkpoint.empty()) throw UsageError("eval: --checkpoint is required");
  if (cfg.dataset.empty()) throw UsageError("eval: --dataset is required");
  EStableNet net = load_checkpoint(cfg.checkpoint);
  Dataset ds = read_dataset(cfg.dataset);
  if (ds.grid.dims != net.dims)
    throw DataError("eval: checkpoint is " + std::to_string(net.dims) + "D but dataset is " +
                    std::to_string(ds.grid.dims) + "D");
  if (std::abs(ds.epsilon - net.epsilon) > 1e-12)
    std::cerr << "warning: dataset epsilon " << ds.epsilon << " differs from checkpoint epsilon "
              << net.epsilon << "\n";

  auto [n_train, n_test] = split_counts(ds.samples.size(), cfg.train_fraction);
  if (n_test == 0) throw UsageError("eval: empty test split");
  std::vector<const Sample*> test;
  for (std::size_t i = n_train; i < ds.samples.size(); ++i) test.push_back(&ds.samples[i]);

  WorkerPool pool(detail::effective_workers(cfg));
  std::vector<double> rels, mses;
  EvalMetrics m = evaluate(net, test, &pool, &rels, &mses);
  std::cout << std::scientific << std::setprecision(6) << "test mse " << m.mse << ", rel L2 "
            << m.rel_l2 << " over " << m.count << " samples";
  if (m.skipped) std::cout << " (" << m.skipped << " zero-norm truths skipped)";
  std::cout << std::defaultfloat << '\n';

  if (!per_sample_csv.empty()) {
    std::ofstream os(per_sample_csv);
    if (!os) throw DataError("eval: cannot open " + per_sample_csv);
    os << "sample,mse,rel_l2\n" << std::setprecision(17);
    for (std::size_t i = 0; i < test.size(); ++i)
      os << n_train + i << ',' << mses[i] << ',' << rels[i] << '\n';
  }
  if (!dump_dir.empty()) {
    std::filesystem::create_directories(dump_dir);
    int count = std::min<int>(dump_count, int(test.size()));
    for (int s = 0; s < count; ++s) {
      ForwardResult r = forward(net, pack_field(test[std::size_t(s)]->phi0), nullptr);
      std::ofstream os(dump_dir + "/prediction" + std::to_string(s) + ".csv");
      os << std::setprecision(17);
      const Grid& g = ds.grid;
      if (g.dims == 1) {
        os << "x,phi0,truth,prediction\n";
        for (int i = 0; i < g.n; ++i)
          os << g.x(i) << ',' << test[std::size_t(s)]->phi0[std::size_t(i)] << ','
             << test[std::size_t(s)]->phiT[std::size_t(i)] << ','
             << r.phiM().values()[std::size_t(i)] << '\n';
      } else {
        os << "x,y,phi0,truth,prediction\n";
        for (int i = 0; i < g.n; ++i)
          for (int j = 0; j < g.n; ++j) {
            std::size_t q = std::size_t(i) * g.n + j;
            os << g.x(i) << ',' << g.x(j) << ',' << test[std::size_t(s)]->phi0[q] << ','
               << test[std::size_t(s)]->phiT[q] << ',' << r.phiM().values()[q] << '\n';
          }
      }
    }
  }
  return 0;
}

inline int cmd_diagnose(const RunConfig& cfg, bool random_weights = false,
                        const std::string& dump_dir = "", int dump_count = 4) {
  EStableNet net;
  if (random_weights) {
    net = detail::net_from_config(cfg);
    init_params(net, init_scheme_from(cfg.init), derive_seed(cfg.seed, detail::kInitStream));
  } else {
    if (cfg.checkpoint.empty())
      throw UsageError("diagnose: --checkpoint is required (or pass --random-weights)");
    net = load_checkpoint(cfg.checkpoint);
  }
  if (net.kind == NetKind::plain)
    throw UsageError("diagnose: plain networks carry no auxiliary state, nothing to verify");

  std::vector<Field> inputs = detail::diagnostic_inputs(cfg, net);
  WorkerPool pool(detail::effective_workers(cfg));
  DecayReport rep = verify_decay(net, inputs, 1e-10, &pool);

  std::filesystem::create_directories(cfg.out_dir);
  export_trace(rep.traces, cfg.out_dir + "/trace.csv");
  if (!dump_dir.empty()) {
    std::filesystem::create_directories(dump_dir);
    export_block_fields(net, inputs, dump_dir, std::size_t(dump_count));
  }

  std::cout << rep.samples << " samples through " << rep.blocks << " blocks ("
            << to_string(net.kind) << ")\n"
            << std::scientific << std::setprecision(3) << "max identity residual "
            << rep.max_identity_residual << ", max modified-energy jump "
            << rep.max_modified_increase << std::defaultfloat << '\n'
            << "trace written to " << cfg.out_dir << "/trace.csv\n";
  if (!rep.pass) {
    for (const auto& v : rep.violations) std::cerr << "violation: " << v << '\n';
    throw InvariantViolation("diagnose: modified-energy decay violated on " +
                             std::to_string(rep.violations.size()) + "+ block steps");
  }
  std::cout << "per-block energy decay verified (tolerance 1e-10)\n";
  return 0;
}

inline int cmd_compare(RunConfig cfg) {
  if (cfg.dataset.empty()) throw UsageError("compare: --dataset is required");
  Dataset ds = read_dataset(cfg.dataset);
  cfg.dims = ds.grid.dims;
  cfg.n = ds.grid.n;
  cfg.epsilon = ds.epsilon;
  cfg.t_end = ds.t_end;
  std::filesystem::create_directories(cfg.out_dir);
  detail::echo_config(cfg, cfg.out_dir + "/config.resolved.txt");

  auto [n_train, n_test] = split_counts(ds.samples.size(), cfg.train_fraction);
  (void)n_train;
  if (n_test == 0) throw UsageError("compare: empty test split");

  struct Run {
    std::string label;
    NetKind kind;
    TrainResult result;
  };
  std::vector<Run> runs = {{"estable", NetKind::estable_g, {}}, {"plain", NetKind::plain, {}}};

  TrainConfig tc;
  tc.lr0 = cfg.lr0;
  tc.weight_decay = cfg.weight_decay;
  tc.batch_size = cfg.batch_size;
  tc.epochs = cfg.epochs;
  tc.halve_every = cfg.halve_every;
  tc.restart_every = cfg.restart_every;
  tc.train_fraction = cfg.train_fraction;
  tc.eval_every = cfg.eval_every;
  tc.energy_check_every = cfg.energy_check_every;
  tc.seed = cfg.seed;
  tc.workers = detail::effective_workers(cfg);

  for (auto& run : runs) {
    std::string dir = cfg.out_dir + "/" + run.label;
    std::filesystem::create_directories(dir);
    RunConfig sub = cfg;
    sub.kind = to_string(run.kind);
    EStableNet net = detail::net_from_config(sub);
    init_params(net, init_scheme_from(cfg.init), derive_seed(cfg.seed, detail::kInitStream));
    std::cout << "== training " << run.label << " (" << net.parameter_count()
              << " parameters) ==\n";
    auto t0 = std::chrono::steady_clock::now();
    run.result = train(net, ds, tc, dir + "/checkpoint.bin", &std::cout);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail::write_metrics_csv(run.result.log, dir + "/metrics.csv");
    detail::write_train_summary(run.result, net, wall, dir);

    // per-block physical energy on shared diagnostic inputs
    std::size_t n_diag = std::min<std::size_t>(cfg.samples, n_test);
    std::vector<Field> inputs;
    for (std::size_t i = 0; i < n_diag; ++i)
      inputs.push_back(ds.samples[ds.samples.size() - n_test + i].phi0);
    WorkerPool pool(tc.workers);
    if (run.kind == NetKind::estable_g) {
      DecayReport rep = verify_decay(net, inputs, 1e-10, &pool);
      export_trace(rep.traces, dir + "/trace.csv");
      if (!rep.pass)
        throw InvariantViolation("compare: decay violated by the trained estable-g network");
    } else {
      std::ofstream os(dir + "/trace.csv");
      os << "sample,block,original_energy\n" << std::setprecision(17);
      for (std::size_t s = 0; s < inputs.size(); ++s) {
        ForwardResult r = forward(net, pack_field(inputs[s]), nullptr);
        for (std::size_t b = 0; b < r.phi.size(); ++b)
          os << s << ',' << b << ','
             << original_energy(tensor_item_field(r.phi[b], 0), net.epsilon) << '\n';
      }
    }
  }

  double est = runs[0].result.final_test_rel_l2;
  double plain = runs[1].result.final_test_rel_l2;
  double ratio = est > 0 ? plain / est : std::numeric_limits<double>::infinity();
  std::ostringstream csv;
  csv << std::setprecision(17) << "key,value\n"
      << "estable_rel_l2," << est << '\n'
      << "plain_rel_l2," << plain << '\n'
      << "ratio_plain_over_estable," << ratio << '\n'
      << "estable_best_test_mse," << runs[0].result.best_test_mse << '\n'
      << "plain_best_test_mse," << runs[1].result.best_test_mse << '\n';
  detail::write_text(cfg.out_dir + "/compare_summary.csv", csv.str());
  std::cout << std::scientific << std::setprecision(6) << "estable rel L2 " << est
            << " | plain rel L2 " << plain << " | ratio " << std::fixed
            << std::setprecision(2) << ratio << "x\n"
            << std::defaultfloat;
  return 0;
}

// ---- argv entry point ----

namespace detail {

inline void add_model_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--kind", cfg.kind, "network kind: estable-g | aux-tilde | plain");
  cmd->add_option("--blocks", cfg.blocks, "number of blocks M");
  cmd->add_option("--kernel", cfg.kernel, "conv kernel size (odd)");
  cmd->add_option("--channels", cfg.channels, "comma-separated channel widths");
  cmd->add_option("--c-shift", cfg.c_shift, "stabilizing shift C in the auxiliary radicand");
  cmd->add_option("--g-inverse", cfg.g_inverse, "identity | inverse-neg-laplacian");
  cmd->add_option("--init", cfg.init, "xavier-uniform | kaiming-uniform");
}

inline void add_train_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--lr0", cfg.lr0, "initial learning rate");
  cmd->add_option("--weight-decay", cfg.weight_decay, "L2 weight decay");
  cmd->add_option("--batch-size", cfg.batch_size, "minibatch size");
  cmd->add_option("--epochs", cfg.epochs, "training epochs");
  cmd->add_option("--halve-every", cfg.halve_every, "epochs per LR halving");
  cmd->add_option("--restart-every", cfg.restart_every, "epochs per LR restart");
  cmd->add_option("--beta", cfg.beta, "consistency-penalty weight");
  cmd->add_option("--train-fraction", cfg.train_fraction, "leading fraction used for training");
  cmd->add_option("--eval-every", cfg.eval_every, "test evaluation cadence (epochs)");
  cmd->add_option("--energy-check-every", cfg.energy_check_every,
                  "audit energy decay every k optimizer steps (0 = off)");
}

inline void add_exec_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--seed", cfg.seed, "base seed");
  cmd->add_option("--workers", cfg.workers, "worker threads (0 = hardware)");
  cmd->add_flag("--deterministic", cfg.deterministic,
                "bitwise-reproducible mode (forces --workers 1)");
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv) {
  RunConfig cfg;
  if (const char* env = std::getenv("ESNET_SEED")) {
    try {
      cfg.seed = detail::parse_u64("ESNET_SEED", env);
    } catch (const UsageError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }

  // presets and config files apply before flag binding, in argv order
  try {
    for (int i = 1; i < argc; ++i) {
      std::string a = argv[i];
      auto value_of = [&](const std::string& flag) -> std::string {
        if (a.rfind(flag + "=", 0) == 0) return a.substr(flag.size() + 1);
        if (a == flag) {
          if (i + 1 >= argc) throw UsageError(flag + " needs a value");
          return argv[++i];
        }
        return {};
      };
      if (std::string v = value_of("--preset"); !v.empty()) apply_preset(cfg, v);
      else if (std::string v2 = value_of("--config"); !v2.empty()) load_config_file(cfg, v2);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  CLI::App app{"energy-stable block networks for gradient-flow PDEs"};
  app.require_subcommand(1);
  std::string preset_dummy, config_dummy;  // consumed above; registered so parsing accepts them

  std::string export_csv, per_sample_csv, dump_dir;
  int dump_count = 4;
  bool random_weights = false;

  auto* gen = app.add_subcommand("generate", "sample initial conditions and solve them");
  gen->add_option("--preset", preset_dummy, "ac1d | ac2d");
  gen->add_option("--config", config_dummy, "key=value config file");
  gen->add_option("--dims", cfg.dims, "spatial dimensions (1 or 2)");
  gen->add_option("--n", cfg.n, "grid points per axis");
  gen->add_option("--epsilon", cfg.epsilon, "interface width parameter");
  gen->add_option("--t-end", cfg.t_end, "final time");
  gen->add_option("--count", cfg.count, "number of samples");
  gen->add_option("--rtol", cfg.rtol, "solver relative tolerance");
  gen->add_option("--atol", cfg.atol, "solver absolute tolerance");
  gen->add_flag("--dealias,!--no-dealias", cfg.dealias, "2/3-rule dealiasing of the cubic");
  gen->add_option("--out", cfg.dataset, "output dataset path");
  gen->add_option("--export-csv", export_csv, "also dump the dataset as CSV");
  detail::add_exec_flags(gen, cfg);

  auto* tr = app.add_subcommand("train", "train a block network on a dataset");
  tr->add_option("--preset", preset_dummy, "ac1d | ac2d");
  tr->add_option("--config", config_dummy, "key=value config file");
  tr->add_option("--dataset", cfg.dataset, "dataset file from `generate`")->required();
  tr->add_option("--out", cfg.out_dir, "output directory");
  detail::add_model_flags(tr, cfg);
  detail::add_train_flags(tr, cfg);
  detail::add_exec_flags(tr, cfg);

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset's test split");
  ev->add_option("--preset", preset_dummy, "ac1d | ac2d");
  ev->add_option("--config", config_dummy, "key=value config file");
  ev->add_option("--checkpoint", cfg.checkpoint, "checkpoint file")->required();
  ev->add_option("--dataset", cfg.dataset, "dataset file")->required();
  ev->add_option("--train-fraction", cfg.train_fraction, "split used at training time");
  ev->add_option("--per-sample", per_sample_csv, "write per-sample metrics CSV");
  ev->add_option("--dump-predictions", dump_dir, "write truth-vs-prediction CSVs here");
  ev->add_option("--dump-count", dump_count, "how many samples to dump");
  detail::add_exec_flags(ev, cfg);

  auto* di = app.add_subcommand("diagnose", "verify per-block modified-energy decay");
  di->add_option("--preset", preset_dummy, "ac1d | ac2d");
  di->add_option("--config", config_dummy, "key=value config file");
  di->add_option("--checkpoint", cfg.checkpoint, "checkpoint file");
  di->add_flag("--random-weights", random_weights, "diagnose a freshly initialized network");
  di->add_option("--dataset", cfg.dataset, "draw inputs from this dataset");
  di->add_option("--samples", cfg.samples, "number of diagnostic inputs");
  di->add_option("--n", cfg.n, "grid points when sampling fresh inputs");
  di->add_option("--out", cfg.out_dir, "output directory for trace.csv");
  di->add_option("--dump-fields", dump_dir, "write per-block state CSVs here");
  di->add_option("--dump-count", dump_count, "how many samples to dump");
  detail::add_model_flags(di, cfg);
  detail::add_exec_flags(di, cfg);

  auto* cp = app.add_subcommand("compare", "train estable-g and plain nets on the same budget");
  cp->add_option("--preset", preset_dummy, "ac1d | ac2d");
  cp->add_option("--config", config_dummy, "key=value config file");
  cp->add_option("--dataset", cfg.dataset, "dataset file")->required();
  cp->add_option("--out", cfg.out_dir, "output directory");
  cp->add_option("--samples", cfg.samples, "diagnostic sample count");
  detail::add_model_flags(cp, cfg);
  detail::add_train_flags(cp, cfg);
  detail::add_exec_flags(cp, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help/--version
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_generate(cfg, export_csv);
    if (tr->parsed()) return cmd_train(cfg);
    if (ev->parsed()) return cmd_eval(cfg, per_sample_csv, dump_dir, dump_count);
    if (di->parsed()) return cmd_diagnose(cfg, random_weights, dump_dir, dump_count);
    if (cp->parsed()) return cmd_compare(cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace esnet
