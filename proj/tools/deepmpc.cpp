#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "deepmpc/dataset.hpp"
#include "deepmpc/microbench.hpp"
#include "deepmpc/roundlab.hpp"
#include "deepmpc/trainer.hpp"

using namespace deepmpc;

namespace {

BackendMode parse_mode(const std::string& s) {
  if (s == "emulate") return BackendMode::emulate;
  if (s == "3pc") return BackendMode::mpc3;
  throw ConfigError("unknown mode '" + s + "' (expected emulate or 3pc)");
}

struct TrainArgs {
  TrainConfig cfg;
  std::string optimizer = "sgd", rounding = "prob", mode = "emulate", init = "secure";
  std::string data_dir = "data", metrics, dump;
};

struct BenchArgs {
  std::string op = "all", mode = "3pc", rounding = "prob", output;
  std::size_t size = 1000;
  int f = 16, k = 31;
  std::uint64_t seed = 1;
};

struct AnalyzeArgs {
  RoundingExperiment spec;
  std::string experiment = "prop1", output;
};

int do_train(TrainArgs& a) {
  TrainConfig cfg = a.cfg;
  cfg.optim.mode = parse_optim_mode(a.optimizer);
  cfg.rounding = parse_rounding(a.rounding);
  cfg.mode = parse_mode(a.mode);
  if (a.init == "secure")
    cfg.init = InitMode::secure;
  else if (a.init == "seeded")
    cfg.init = InitMode::seeded;
  else
    throw ConfigError("unknown init '" + a.init + "'");
  cfg.data_dir = a.data_dir;
  cfg.metrics = a.metrics;
  cfg.dump_model = a.dump;
  cfg.fixed.validate();
  run_train(cfg);
  return 0;
}

int do_microbench(const BenchArgs& a) {
  FixedConfig fc;
  fc.f = a.f;
  fc.k = a.k;
  std::vector<std::string> ops = a.op == "all" ? microbench_ops() : std::vector{a.op};
  std::vector<MicrobenchResult> rows;
  for (const auto& op : ops)
    rows.push_back(run_microbench(op, a.size, parse_mode(a.mode), parse_rounding(a.rounding), fc, a.seed));
  if (a.output.empty()) {
    write_microbench_csv(std::cout, rows);
  } else {
    std::ofstream out(a.output);
    if (!out) throw ConfigError("cannot write " + a.output);
    write_microbench_csv(out, rows);
  }
  return 0;
}

int do_analyze(const AnalyzeArgs& a) {
  RoundingClaim claim = parse_claim(a.experiment);
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!a.output.empty()) {
    file.open(a.output);
    if (!file) throw ConfigError("cannot write " + a.output);
    out = &file;
  }
  RoundingReport rep = run_rounding_experiment(a.spec, claim, out);
  std::cerr << to_string(claim) << ": statistic=" << rep.statistic
            << " threshold=" << rep.threshold << " violations=" << rep.violations << " -> "
            << (rep.pass ? "pass" : "fail") << '\n';
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-party secure training of quantized neural networks"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a model and write per-epoch metrics");
  train->add_option("--model", ta.cfg.model, "A, B, C, D or alexnet")
      ->check(CLI::IsMember(model_names()))->capture_default_str();
  train->add_option("--optimizer", ta.optimizer, "sgd, adam or amsgrad")->capture_default_str();
  train->add_option("--lr", ta.cfg.optim.lr, "Learning rate")->capture_default_str();
  train->add_option("--batch-size", ta.cfg.optim.batch, "Minibatch size")->capture_default_str();
  train->add_option("--epochs", ta.cfg.epochs, "Training epochs")->capture_default_str();
  train->add_option("--f", ta.cfg.fixed.f, "Fractional bits")->capture_default_str();
  train->add_option("--k", ta.cfg.fixed.k, "Value bit length")->capture_default_str();
  train->add_option("--rounding", ta.rounding, "prob or nearest")->capture_default_str();
  train->add_option("--mode", ta.mode, "emulate or 3pc")->capture_default_str();
  train->add_option("--party", ta.cfg.party, "Party id in 3pc mode")
      ->check(CLI::Range(0, 2))->capture_default_str();
  train->add_option("--hosts", ta.cfg.hosts, "Hosts file with `id host:port` lines");
  train->add_option("--data-dir", ta.data_dir, "Dataset directory")
      ->envname("DEEPMPC_DATA_DIR")->capture_default_str();
  train->add_option("--metrics", ta.metrics, "Metrics CSV path (stdout if empty)");
  train->add_option("--seed", ta.cfg.seed, "Public seed")->capture_default_str();
  train->add_flag("--dropout", ta.cfg.dropout, "Enable dropout in network C");
  train->add_option("--init", ta.init, "secure or seeded weight initialization")
      ->capture_default_str();
  train->add_option("--train-limit", ta.cfg.train_limit, "Use only the first N training samples");
  train->add_option("--test-limit", ta.cfg.test_limit, "Use only the first N test samples");
  train->add_option("--dump-model", ta.dump, "Write the opened final parameters here");

  BenchArgs ba;
  auto* bench = app.add_subcommand("microbench", "Measure communication of single operations");
  bench->add_option("--op", ba.op, "mul, dot, trunc, ltz, exp2, invsqrt, div or all")
      ->capture_default_str();
  bench->add_option("--size", ba.size, "Number of elements (vector length for dot)")
      ->capture_default_str();
  bench->add_option("--mode", ba.mode, "Must be 3pc")->capture_default_str();
  bench->add_option("--rounding", ba.rounding, "prob or nearest")->capture_default_str();
  bench->add_option("--f", ba.f, "Fractional bits")->capture_default_str();
  bench->add_option("--k", ba.k, "Value bit length")->capture_default_str();
  bench->add_option("--seed", ba.seed, "Seed")->capture_default_str();
  bench->add_option("--output", ba.output, "CSV path (stdout if empty)");

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "Empirical checks of the rounding error bounds");
  analyze->add_option("--experiment", aa.experiment, "prop1, prop2 or prop3")->capture_default_str();
  analyze->add_option("--m", aa.spec.m, "Rows of A")->capture_default_str();
  analyze->add_option("--n", aa.spec.n, "Inner dimension")->capture_default_str();
  analyze->add_option("--p", aa.spec.p, "Columns of B")->capture_default_str();
  analyze->add_option("--k-bound", aa.spec.k_bound, "Entries bounded by 2^k")->capture_default_str();
  analyze->add_option("--iota", aa.spec.iota, "Deviation parameter for prop3")->capture_default_str();
  analyze->add_option("--trials", aa.spec.trials, "Trials")->capture_default_str();
  analyze->add_option("--seed", aa.spec.seed, "Seed")->capture_default_str();
  analyze->add_option("--f", aa.spec.f, "Fractional bits")->capture_default_str();
  analyze->add_flag("--deferred", aa.spec.deferred, "Round once per output entry");
  analyze->add_option("--output", aa.output, "CSV path (stdout if empty)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return do_train(ta);
    if (*bench) return do_microbench(ba);
    if (*analyze) return do_analyze(aa);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
