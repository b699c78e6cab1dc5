#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace deepmpc {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cleartext samples; pixels are bytes/255 in [0, 1].
struct Dataset {
  std::vector<std::size_t> sample_shape;  // (C, H, W)
  std::size_t classes = 10;
  std::vector<float> images;              // count × numel(sample_shape)
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t sample_size() const;
  // Keeps the first n samples.
  void truncate(std::size_t n);
};

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);
// CIFAR-10 binary batches: 1 label byte then 3072 channel-major pixel bytes.
Dataset load_cifar(const std::vector<std::filesystem::path>& files);

struct DataSplit {
  Dataset train, test;
};

// Looks for the standard MNIST / CIFAR-10 file names under dir.
DataSplit load_mnist_dir(const std::filesystem::path& dir);
DataSplit load_cifar_dir(const std::filesystem::path& dir);

}  // namespace deepmpc
