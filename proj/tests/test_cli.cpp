#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "deepmpc/microbench.hpp"
#include "deepmpc/parties.hpp"
#include "deepmpc/trainer.hpp"
#include "scenarios.hpp"

using namespace deepmpc;
namespace fs = std::filesystem;

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("deepmpc_test_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_images(const fs::path& p, const std::vector<std::uint8_t>& pixels, std::uint32_t count,
                  std::uint32_t rows = 28, std::uint32_t cols = 28, std::uint32_t magic = 2051) {
  std::ofstream out(p, std::ios::binary);
  put_u32(out, magic);
  put_u32(out, count);
  put_u32(out, rows);
  put_u32(out, cols);
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

void write_labels(const fs::path& p, const std::vector<std::uint8_t>& labels, std::uint32_t magic = 2049) {
  std::ofstream out(p, std::ios::binary);
  put_u32(out, magic);
  put_u32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

// Writes a split drawn from the synthetic generator in MNIST file layout.
void write_mnist_dir(const fs::path& dir, std::size_t train, std::size_t test) {
  auto s = deepmpc::testing::synthetic_mnist(train, test, 5);
  auto dump = [&](const Dataset& d, const std::string& prefix) {
    std::vector<std::uint8_t> px;
    for (float v : d.images) px.push_back(static_cast<std::uint8_t>(std::lround(v * 255)));
    write_images(dir / (prefix + "-images-idx3-ubyte"), px, static_cast<std::uint32_t>(d.size()));
    write_labels(dir / (prefix + "-labels-idx1-ubyte"), d.labels);
  };
  dump(s.train, "train");
  dump(s.test, "t10k");
}

}  // namespace

TEST(LoadIdx, ParsesHeaderAndScalesPixels) {
  TempDir dir;
  std::vector<std::uint8_t> px(2 * 4 * 3, 0);
  px[0] = 255;
  px[1] = 51;
  write_images(dir.path() / "img", px, 2, 4, 3);
  write_labels(dir.path() / "lab", {7, 1});
  Dataset d = load_idx(dir.path() / "img", dir.path() / "lab");
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.sample_shape, (std::vector<std::size_t>{1, 4, 3}));
  EXPECT_EQ(fx_encode_raw(d.images[0], 16), 65536u);
  EXPECT_FLOAT_EQ(d.images[1], 0.2f);
  EXPECT_EQ(d.labels[0], 7);
}

TEST(LoadIdx, RejectsSwappedFiles) {
  TempDir dir;
  write_images(dir.path() / "img", std::vector<std::uint8_t>(784), 1);
  write_labels(dir.path() / "lab", {3});
  EXPECT_THROW(load_idx(dir.path() / "lab", dir.path() / "img"), DataError);
}

TEST(LoadIdx, RejectsTruncationAndCountMismatch) {
  TempDir dir;
  write_images(dir.path() / "short", std::vector<std::uint8_t>(784 + 100), 2);
  write_images(dir.path() / "img", std::vector<std::uint8_t>(2 * 784), 2);
  write_labels(dir.path() / "lab", {3});
  write_labels(dir.path() / "lab2", {3, 4});
  EXPECT_THROW(load_idx(dir.path() / "short", dir.path() / "lab2"), DataError);
  EXPECT_THROW(load_idx(dir.path() / "img", dir.path() / "lab"), DataError);
  EXPECT_THROW(load_idx(dir.path() / "missing", dir.path() / "lab"), DataError);
  EXPECT_NO_THROW(load_idx(dir.path() / "img", dir.path() / "lab2"));
}

TEST(LoadIdx, LabelsOutOfRange) {
  TempDir dir;
  write_images(dir.path() / "img", std::vector<std::uint8_t>(784), 1);
  write_labels(dir.path() / "lab", {12});
  EXPECT_THROW(load_idx(dir.path() / "img", dir.path() / "lab"), DataError);
}

TEST(LoadIdx, MnistTrainingSplitWhenAvailable) {
  const char* env = std::getenv("DEEPMPC_DATA_DIR");
  fs::path dir = env ? env : "/root/data/mnist";
  if (!fs::exists(dir / "train-images-idx3-ubyte")) GTEST_SKIP() << "no MNIST under " << dir;
  auto s = load_mnist_dir(dir);
  EXPECT_EQ(s.train.size(), 60000u);
  EXPECT_EQ(s.test.size(), 10000u);
  EXPECT_EQ(s.train.sample_shape, (std::vector<std::size_t>{1, 28, 28}));
}

TEST(RunTrain, ZeroEpochsWritesHeaderOnly) {
  TempDir dir;
  write_mnist_dir(dir.path(), 128, 400);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.data_dir = dir.path();
  cfg.metrics = dir.path() / "m.csv";
  auto metrics = run_train(cfg);
  EXPECT_TRUE(metrics.empty());
  std::ifstream in(cfg.metrics);
  std::string line, last;
  double initial = -1;
  int data_rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("# initial_error=", 0) == 0) initial = std::stod(line.substr(16));
    if (line == "epoch,loss,error") header = true;
    else if (!line.empty() && line[0] != '#') ++data_rows;
  }
  EXPECT_TRUE(header);
  EXPECT_EQ(data_rows, 0);
  EXPECT_NEAR(initial, 0.9, 0.05);
}

TEST(RunTrain, ConfigEchoAndLearning) {
  TempDir dir;
  write_mnist_dir(dir.path(), 1024, 256);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.optim.batch = 32;
  cfg.optim.lr = 0.05;
  cfg.data_dir = dir.path();
  cfg.metrics = dir.path() / "m.csv";
  auto metrics = run_train(cfg);
  ASSERT_EQ(metrics.size(), 2u);
  EXPECT_LT(metrics.back().error, 0.5);
  std::ifstream in(cfg.metrics);
  std::stringstream ss;
  ss << in.rdbuf();
  for (const auto& kv : cfg.describe()) EXPECT_NE(ss.str().find("# " + kv + "\n"), std::string::npos) << kv;
  EXPECT_NE(ss.str().find("\n1,"), std::string::npos);
}

TEST(RunTrain, MissingDataset) {
  TrainConfig cfg;
  cfg.data_dir = "/nonexistent/deepmpc";
  EXPECT_THROW(run_train(cfg), DataError);
}

TEST(RunTrain, ThreePartyModeNeedsHosts) {
  TempDir dir;
  write_mnist_dir(dir.path(), 64, 64);
  TrainConfig cfg;
  cfg.mode = BackendMode::mpc3;
  cfg.data_dir = dir.path();
  EXPECT_THROW(run_train(cfg), ConfigError);
}

TEST(ConfigAgreement, MismatchFailsEverywhere) {
  std::array<int, 3> failures{};
  run_three_parties(seed_from_u64(1), [&](Session& s) {
    try {
      check_config_agreement(s, s.id().id == 2 ? "lr=0.1" : "lr=0.01");
    } catch (const ConfigError&) {
      failures[static_cast<std::size_t>(s.id().id)] = 1;
    }
  });
  EXPECT_EQ(failures, (std::array<int, 3>{1, 1, 1}));
  run_three_parties(seed_from_u64(1), [&](Session& s) { check_config_agreement(s, "same"); });
}

TEST(Microbench, EmulateModeRejected) {
  EXPECT_THROW(run_microbench("mul", 10, BackendMode::emulate), ConfigError);
  EXPECT_THROW(run_microbench("conv", 10, BackendMode::mpc3), ConfigError);
}

TEST(Microbench, MultiplicationAndDotCosts) {
  auto mul = run_microbench("mul", 1, BackendMode::mpc3);
  EXPECT_EQ(mul.bits_per_instance(), 192.0);
  EXPECT_EQ(mul.rounds, 1u);
  auto dot = run_microbench("dot", 1000, BackendMode::mpc3);
  EXPECT_EQ(dot.bits_per_instance(), 192.0);
}

TEST(Microbench, ExpCostOrderOfMagnitude) {
  auto r = run_microbench("exp2", 100, BackendMode::mpc3);
  EXPECT_GE(r.bits_per_instance(), 0.5 * 16303);
  EXPECT_LE(r.bits_per_instance(), 2.0 * 16303);
}

TEST(Microbench, CsvHasOneRowPerOp) {
  std::vector<MicrobenchResult> rows;
  for (const auto& op : microbench_ops()) rows.push_back(run_microbench(op, 4, BackendMode::mpc3));
  std::ostringstream os;
  write_microbench_csv(os, rows);
  std::istringstream in(os.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, static_cast<int>(rows.size()) + 1);
}
