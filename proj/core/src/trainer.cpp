#include "deepmpc/trainer.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "deepmpc/layers.hpp"

namespace deepmpc {

std::vector<std::string> TrainConfig::describe() const {
  std::vector<std::string> out;
  auto kv = [&](const std::string& k, const auto& v) {
    std::ostringstream os;
    os << k << '=' << v;
    out.push_back(os.str());
  };
  kv("model", model);
  kv("optimizer", to_string(optim.mode));
  kv("lr", optim.lr);
  kv("batch_size", optim.batch);
  kv("epochs", epochs);
  kv("f", fixed.f);
  kv("k", fixed.k);
  kv("rounding", to_string(rounding));
  kv("mode", mode == BackendMode::emulate ? "emulate" : "3pc");
  kv("seed", seed);
  kv("dropout", dropout ? "on" : "off");
  kv("init", init == InitMode::secure ? "secure" : "seeded");
  kv("train_limit", train_limit);
  kv("test_limit", test_limit);
  return out;
}

Trainer::Trainer(Backend& be, const TrainConfig& cfg, const DataSplit& data)
    : be_(be),
      cfg_(cfg),
      data_(data),
      model_(build_model(cfg.model, cfg.dropout)),
      opt_(cfg.optim),
      rng_(cfg.seed) {
  if (data.train.sample_shape != model_.input_shape())
    throw ConfigError("model " + cfg.model + " expects samples of shape " +
                      shape_str(model_.input_shape()) + ", dataset has " +
                      shape_str(data.train.sample_shape));
  if (cfg.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (data.train.size() < cfg.optim.batch && cfg.epochs > 0)
    throw ConfigError("training set smaller than one batch");
  model_.shape_trace();
  model_.init(be_, cfg.init, rng_);
}

ArithVec Trainer::input_images(const Dataset& d, std::span<const std::size_t> idx) {
  const std::size_t s = d.sample_size();
  std::vector<Ring> raw;
  if (be_.plays(0)) {
    raw.resize(idx.size() * s);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < s; ++j)
        raw[i * s + j] = fx_encode_raw(d.images[idx[i] * s + j], be_.cfg().f);
  }
  return be_.input(0, raw, idx.size() * s);
}

ArithVec Trainer::input_onehot(const Dataset& d, std::span<const std::size_t> idx) {
  std::vector<Ring> raw;
  if (be_.plays(0)) {
    raw.assign(idx.size() * d.classes, 0);
    for (std::size_t i = 0; i < idx.size(); ++i)
      raw[i * d.classes + d.labels[idx[i]]] = Ring{1} << be_.cfg().f;
  }
  return be_.input(0, raw, idx.size() * d.classes);
}

double Trainer::evaluate() {
  const Dataset& test = data_.test;
  const std::size_t n = test.size();
  if (n == 0) return 0.0;
  const std::size_t bs = cfg_.optim.batch, classes = test.classes;
  std::size_t wrong = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < n; start += bs) {
    const std::size_t len = std::min(bs, n - start);
    idx.resize(len);
    for (std::size_t i = 0; i < len; ++i) idx[i] = start + i;
    Shape shape{len};
    shape.insert(shape.end(), test.sample_shape.begin(), test.sample_shape.end());
    Tensor x(shape, input_images(test, idx));
    Tensor logits = model_.forward(be_, x, false);
    auto opened = be_.open(logits.data);
    for (std::size_t i = 0; i < len; ++i) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < classes; ++c)
        if (to_signed(opened[i * classes + c]) > to_signed(opened[i * classes + best])) best = c;
      if (best != test.labels[start + i]) ++wrong;
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(n);
}

EpochMetrics Trainer::train_epoch(int epoch) {
  const auto t0 = std::chrono::steady_clock::now();
  const CommStats c0 = be_.comm();
  const Dataset& train = data_.train;
  const std::size_t bs = cfg_.optim.batch;
  const std::size_t batches = train.size() / bs;
  auto perm = shuffle_epoch(rng_, train.size());
  double loss_sum = 0;
  for (std::size_t b = 0; b < batches; ++b) {
    std::span<const std::size_t> idx(perm.data() + b * bs, bs);
    Shape shape{bs};
    shape.insert(shape.end(), train.sample_shape.begin(), train.sample_shape.end());
    Tensor x(shape, input_images(train, idx));
    ArithVec y = input_onehot(train, idx);
    Tensor logits = model_.forward(be_, x, true);
    SoftmaxResult sm = softmax_xent_grad(be_, logits, y, true);
    model_.backward(be_, sm.grad);
    opt_.step(be_, model_.params());
    loss_sum += fx_decode(be_.open(sm.loss)[0], be_.cfg()) / static_cast<double>(bs);
  }
  EpochMetrics m;
  m.epoch = epoch;
  m.loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
  m.error = evaluate();
  m.comm = be_.comm() - c0;
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

std::vector<EpochMetrics> Trainer::run(std::ostream& csv,
                                       const std::function<void(const EpochMetrics&)>& on_epoch) {
  for (const auto& line : cfg_.describe()) csv << "# " << line << '\n';
  csv << "# train_samples=" << data_.train.size() << '\n'
      << "# test_samples=" << data_.test.size() << '\n'
      << "# parameters=" << model_.param_count() << '\n';
  csv << "# initial_error=" << evaluate() << '\n';
  csv << "epoch,loss,error\n" << std::flush;
  std::vector<EpochMetrics> out;
  for (int e = 1; e <= cfg_.epochs; ++e) {
    EpochMetrics m = train_epoch(e);
    csv << std::setprecision(6) << m.epoch << ',' << m.loss << ',' << m.error << '\n'
        << "# epoch=" << m.epoch << " bits_sent=" << m.comm.bits_sent
        << " rounds=" << m.comm.rounds << '\n'
        << std::flush;
    if (on_epoch) on_epoch(m);
    out.push_back(m);
  }
  return out;
}

void Trainer::dump(std::ostream& out) {
  for (std::size_t i = 0; i < model_.size(); ++i) {
    Layer& l = model_.layer(i);
    for (Param* p : l.params()) {
      auto v = be_.open(p->value.data);
      out << i << '.' << l.kind() << '.' << p->name << ' ' << shape_str(p->value.shape);
      for (Ring r : v) out << ' ' << to_signed(r);
      out << '\n';
    }
  }
}

DataSplit load_for_model(const std::string& model, const std::filesystem::path& dir) {
  return model == "alexnet" ? load_cifar_dir(dir) : load_mnist_dir(dir);
}

void check_config_agreement(Session& s, const std::string& fingerprint) {
  Bytes mine(fingerprint.begin(), fingerprint.end());
  auto [from_prev, from_next] = s.exchange(mine, mine);
  if (from_prev != mine || from_next != mine)
    throw ConfigError("training configuration differs between parties");
}

std::vector<EpochMetrics> run_train(const TrainConfig& cfg) {
  DataSplit data = load_for_model(cfg.model, cfg.data_dir);
  if (cfg.train_limit) data.train.truncate(cfg.train_limit);
  if (cfg.test_limit) data.test.truncate(cfg.test_limit);

  std::unique_ptr<Session> session;
  if (cfg.mode == BackendMode::mpc3) {
    if (cfg.hosts.empty()) throw ConfigError("3pc mode needs a hosts file");
    SessionConfig sc;
    sc.my_id = cfg.party;
    sc.endpoints = parse_hosts_file(cfg.hosts);
    sc.test_mode = false;
    session = setup_session(sc);
    std::string fp;
    for (const auto& l : cfg.describe()) fp += l + '\n';
    check_config_agreement(*session, fp);
  }
  auto be = make_backend(cfg.mode, cfg.fixed, cfg.rounding, cfg.seed, session.get());
  Trainer trainer(*be, cfg, data);

  std::ofstream file;
  const bool write = !cfg.metrics.empty() && cfg.party == 0;
  if (write) {
    file.open(cfg.metrics);
    if (!file) throw ConfigError("cannot write metrics to " + cfg.metrics.string());
  }
  std::ostream& csv = write ? static_cast<std::ostream&>(file) : std::cout;
  // Wall-clock time goes to stderr so metrics files stay reproducible.
  auto metrics = trainer.run(csv, [&](const EpochMetrics& m) {
    std::cerr << "epoch " << m.epoch << ": loss=" << m.loss << " error=" << m.error
              << " seconds=" << std::setprecision(4) << m.seconds << '\n';
  });
  if (!cfg.dump_model.empty()) {
    std::ostringstream os;
    trainer.dump(os);
    if (cfg.party == 0) {
      std::ofstream d(cfg.dump_model);
      if (!d) throw ConfigError("cannot write model to " + cfg.dump_model.string());
      d << os.str();
    }
  }
  return metrics;
}

}  // namespace deepmpc
