#pragma once

// IDX readers and the PCA projection used to turn MNIST into a multiclass
// dataset: pixels scaled to [0, 1], the 60k training images split into
// train/validation by a seeded permutation, PCA fit on the training part only.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "orbit/core.hpp"
#include "orbit/tasks/multiclass.hpp"

namespace orbit {

struct IdxImages {
  std::size_t count = 0;
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major per image
};

/// Magic 0x00000803. Throws BAD_MAGIC, COUNT_MISMATCH (payload shorter or
/// longer than the header promises) or IO.
IdxImages read_idx_images(const std::filesystem::path& path);

/// Magic 0x00000801.
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

/// Images as an n x (rows * cols) matrix with entries pixel / 255.
Eigen::MatrixXd idx_to_matrix(const IdxImages& images);

struct PcaModel {
  Vector mean;            // d
  Eigen::MatrixXd basis;  // d x k, orthonormal columns by decreasing variance
  Vector variances;       // k

  /// (X - mean) * basis for the rows of X.
  Eigen::MatrixXd project(const Eigen::MatrixXd& x) const;
  /// project(x) * basis^T + mean.
  Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& projected) const;
  /// FNV-1a over the mean and basis bytes, as 16 hex digits.
  std::string hash() const;
};

/// Centred PCA on the rows of X keeping k components. Each component's sign
/// is fixed so that its largest-magnitude entry is positive.
PcaModel fit_pca(const Eigen::MatrixXd& x, int k);

struct MnistSplits {
  Dataset<MulticlassTask> train;
  Dataset<MulticlassTask> valid;
  Dataset<MulticlassTask> test;
  PcaModel pca;
};

struct MnistIngestConfig {
  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  std::filesystem::path test_images;  // optional
  std::filesystem::path test_labels;  // optional
  int pca_dim = 100;
  int valid_count = 10000;
  std::uint64_t split_seed = 0;
};

MnistSplits ingest_mnist(const MnistIngestConfig& cfg);

}  // namespace orbit
