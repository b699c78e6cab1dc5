#include "deepmpc/dataset.hpp"

#include <fstream>
#include <iterator>

namespace deepmpc {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | b[off + 3];
}

std::filesystem::path first_existing(const std::filesystem::path& dir,
                                     std::initializer_list<const char*> names) {
  for (const char* n : names)
    if (std::filesystem::exists(dir / n)) return dir / n;
  throw DataError("none of the expected files found in " + dir.string() + " (e.g. " +
                  *names.begin() + ")");
}

}  // namespace

std::size_t Dataset::sample_size() const {
  std::size_t n = 1;
  for (auto d : sample_shape) n *= d;
  return n;
}

void Dataset::truncate(std::size_t n) {
  if (n >= size()) return;
  labels.resize(n);
  images.resize(n * sample_size());
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  auto img = read_file(images);
  auto lab = read_file(labels);
  if (img.size() < 16) throw DataError("truncated image file " + images.string());
  if (lab.size() < 8) throw DataError("truncated label file " + labels.string());
  if (be32(img, 0) != 2051) throw DataError("bad magic in image file " + images.string());
  if (be32(lab, 0) != 2049) throw DataError("bad magic in label file " + labels.string());
  const std::size_t n = be32(img, 4), rows = be32(img, 8), cols = be32(img, 12);
  if (be32(lab, 4) != n)
    throw DataError("image count " + std::to_string(n) + " does not match label count " +
                    std::to_string(be32(lab, 4)));
  if (img.size() < 16 + n * rows * cols) throw DataError("truncated image file " + images.string());
  if (lab.size() < 8 + n) throw DataError("truncated label file " + labels.string());
  Dataset d;
  d.sample_shape = {1, rows, cols};
  d.images.resize(n * rows * cols);
  for (std::size_t i = 0; i < d.images.size(); ++i) d.images[i] = img[16 + i] / 255.0f;
  d.labels.assign(lab.begin() + 8, lab.begin() + 8 + static_cast<std::ptrdiff_t>(n));
  for (auto l : d.labels)
    if (l >= d.classes) throw DataError("label out of range in " + labels.string());
  return d;
}

Dataset load_cifar(const std::vector<std::filesystem::path>& files) {
  constexpr std::size_t kRecord = 3073, kPixels = 3072;
  Dataset d;
  d.sample_shape = {3, 32, 32};
  for (const auto& f : files) {
    auto raw = read_file(f);
    if (raw.size() % kRecord) throw DataError("truncated CIFAR file " + f.string());
    for (std::size_t off = 0; off < raw.size(); off += kRecord) {
      if (raw[off] >= d.classes) throw DataError("label out of range in " + f.string());
      d.labels.push_back(raw[off]);
      for (std::size_t i = 0; i < kPixels; ++i) d.images.push_back(raw[off + 1 + i] / 255.0f);
    }
  }
  return d;
}

DataSplit load_mnist_dir(const std::filesystem::path& dir) {
  return {load_idx(first_existing(dir, {"train-images-idx3-ubyte", "train-images.idx3-ubyte"}),
                   first_existing(dir, {"train-labels-idx1-ubyte", "train-labels.idx1-ubyte"})),
          load_idx(first_existing(dir, {"t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte"}),
                   first_existing(dir, {"t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte"}))};
}

DataSplit load_cifar_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> train;
  for (int i = 1; i <= 5; ++i)
    train.push_back(first_existing(dir, {("data_batch_" + std::to_string(i) + ".bin").c_str()}));
  return {load_cifar(train), load_cifar({first_existing(dir, {"test_batch.bin"})})};
}

}  // namespace deepmpc
