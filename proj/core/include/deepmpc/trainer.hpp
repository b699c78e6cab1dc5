#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "deepmpc/dataset.hpp"
#include "deepmpc/models.hpp"
#include "deepmpc/optimizer.hpp"
#include "deepmpc/transport.hpp"

namespace deepmpc {

struct TrainConfig {
  std::string model = "A";
  OptimConfig optim;           // lr 0.01, batch 128 by default
  int epochs = 15;
  FixedConfig fixed;           // f 16, k 31
  Rounding rounding = Rounding::prob;
  BackendMode mode = BackendMode::emulate;
  int party = 0;
  std::string hosts;
  std::filesystem::path data_dir;
  std::filesystem::path metrics;
  std::filesystem::path dump_model;
  std::uint64_t seed = 1;
  bool dropout = false;
  InitMode init = InitMode::secure;
  std::size_t train_limit = 0;  // 0 keeps the whole split
  std::size_t test_limit = 0;

  // key=value lines describing every resolved setting.
  std::vector<std::string> describe() const;
};

struct EpochMetrics {
  int epoch = 0;
  double loss = 0;    // mean per-sample cross-entropy over the epoch's batches
  double error = 0;   // test misclassification rate
  CommStats comm;     // this party's traffic during the epoch
  double seconds = 0;
};

// One party's view of a training run. Party 0 supplies all data; the other
// parties only need the split sizes, which they read from the same files.
class Trainer {
 public:
  Trainer(Backend& be, const TrainConfig& cfg, const DataSplit& data);

  Model& model() { return model_; }
  double evaluate();
  EpochMetrics train_epoch(int epoch);
  // Writes the CSV (config comments, header, one row per epoch) and returns
  // the per-epoch metrics. The callback, if set, sees each epoch as it ends.
  std::vector<EpochMetrics> run(std::ostream& csv,
                                const std::function<void(const EpochMetrics&)>& on_epoch = {});
  // Opens every parameter and writes `name shape raw...` lines.
  void dump(std::ostream& out);

 private:
  ArithVec input_images(const Dataset& d, std::span<const std::size_t> idx);
  ArithVec input_onehot(const Dataset& d, std::span<const std::size_t> idx);

  Backend& be_;
  TrainConfig cfg_;
  const DataSplit& data_;
  Model model_;
  Optimizer opt_;
  Rng rng_;
};

// Entry point used by the CLI: loads data, builds the backend (connecting to
// peers in 3pc mode) and trains.
std::vector<EpochMetrics> run_train(const TrainConfig& cfg);

DataSplit load_for_model(const std::string& model, const std::filesystem::path& dir);

// Fails on every party unless all three passed the same fingerprint.
void check_config_agreement(Session& s, const std::string& fingerprint);

}  // namespace deepmpc
