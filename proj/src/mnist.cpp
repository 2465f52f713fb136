#include "orbit/mnist.hpp"

#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "orbit/rng.hpp"

namespace orbit {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t big_endian_u32(const std::vector<std::uint8_t>& b, std::size_t offset) {
  return (std::uint32_t{b[offset]} << 24) | (std::uint32_t{b[offset + 1]} << 16) |
         (std::uint32_t{b[offset + 2]} << 8) | std::uint32_t{b[offset + 3]};
}

void require_header(const std::vector<std::uint8_t>& b, std::size_t bytes,
                    const std::filesystem::path& path) {
  if (b.size() < bytes) {
    throw Error(ErrorCode::CountMismatch, path.string() + " is shorter than its IDX header");
  }
}

Dataset<MulticlassTask> to_dataset(const Eigen::MatrixXd& projected,
                                   const std::vector<std::uint8_t>& labels,
                                   const std::vector<std::size_t>& rows) {
  Dataset<MulticlassTask> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.push_back({projected.row(static_cast<Eigen::Index>(i)).transpose(), labels[rows[i]]});
  }
  return out;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace

IdxImages read_idx_images(const std::filesystem::path& path) {
  const auto b = slurp(path);
  require_header(b, 4, path);
  if (big_endian_u32(b, 0) != kImageMagic) {
    throw Error(ErrorCode::BadMagic, fmt::format("{} has magic {:#010x}, expected 0x00000803",
                                                 path.string(), big_endian_u32(b, 0)));
  }
  require_header(b, 16, path);
  IdxImages img;
  img.count = big_endian_u32(b, 4);
  img.rows = static_cast<int>(big_endian_u32(b, 8));
  img.cols = static_cast<int>(big_endian_u32(b, 12));
  const std::size_t expected =
      img.count * static_cast<std::size_t>(img.rows) * static_cast<std::size_t>(img.cols);
  if (b.size() - 16 != expected) {
    throw Error(ErrorCode::CountMismatch,
                fmt::format("{} holds {} pixel bytes, header promises {}", path.string(),
                            b.size() - 16, expected));
  }
  img.pixels.assign(b.begin() + 16, b.end());
  return img;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  const auto b = slurp(path);
  require_header(b, 4, path);
  if (big_endian_u32(b, 0) != kLabelMagic) {
    throw Error(ErrorCode::BadMagic, fmt::format("{} has magic {:#010x}, expected 0x00000801",
                                                 path.string(), big_endian_u32(b, 0)));
  }
  require_header(b, 8, path);
  const std::size_t count = big_endian_u32(b, 4);
  if (b.size() - 8 != count) {
    throw Error(ErrorCode::CountMismatch, fmt::format("{} holds {} labels, header promises {}",
                                                      path.string(), b.size() - 8, count));
  }
  return {b.begin() + 8, b.end()};
}

Eigen::MatrixXd idx_to_matrix(const IdxImages& images) {
  const auto d = static_cast<Eigen::Index>(images.rows) * images.cols;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(images.count), d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      x(i, j) = images.pixels[static_cast<std::size_t>(i * d + j)] / 255.0;
    }
  }
  return x;
}

Eigen::MatrixXd PcaModel::project(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) throw Error(ErrorCode::DimMismatch, "PCA input has the wrong width");
  return (x.rowwise() - mean.transpose()) * basis;
}

Eigen::MatrixXd PcaModel::reconstruct(const Eigen::MatrixXd& projected) const {
  return (projected * basis.transpose()).rowwise() + mean.transpose();
}

std::string PcaModel::hash() const {
  std::uint64_t h = fnv1a64(mean.data(), static_cast<std::size_t>(mean.size()) * sizeof(double));
  h = fnv1a64(basis.data(), static_cast<std::size_t>(basis.size()) * sizeof(double), h);
  return fmt::format("{:016x}", h);
}

PcaModel fit_pca(const Eigen::MatrixXd& x, int k) {
  const auto d = x.cols();
  if (k < 1 || k > d || x.rows() < 2) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("PCA needs 1 <= k <= {} and >= 2 rows", d));
  }
  PcaModel pca;
  pca.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centred = x.rowwise() - pca.mean.transpose();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centred.transpose());
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(x.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::InvalidConfig, "PCA eigensolver failed");
  pca.basis.resize(d, k);
  pca.variances.resize(k);
  for (int j = 0; j < k; ++j) {
    const Eigen::Index src = d - 1 - j;  // eigenvalues come in increasing order
    Vector v = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    pca.basis.col(j) = v;
    pca.variances[j] = eig.eigenvalues()[src];
  }
  return pca;
}

MnistSplits ingest_mnist(const MnistIngestConfig& cfg) {
  const IdxImages images = read_idx_images(cfg.train_images);
  const auto labels = read_idx_labels(cfg.train_labels);
  if (labels.size() != images.count) {
    throw Error(ErrorCode::CountMismatch,
                fmt::format("{} images but {} labels", images.count, labels.size()));
  }
  if (cfg.valid_count < 0 || static_cast<std::size_t>(cfg.valid_count) >= images.count) {
    throw Error(ErrorCode::InvalidConfig, "valid_count must leave at least one training image");
  }
  const Eigen::MatrixXd x = idx_to_matrix(images);
  const auto order = seeded_permutation(images.count, cfg.split_seed);
  const auto n_train = images.count - static_cast<std::size_t>(cfg.valid_count);
  const std::vector<std::size_t> train_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<std::size_t> valid_rows(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

  MnistSplits out;
  const Eigen::MatrixXd x_train = gather_rows(x, train_rows);
  out.pca = fit_pca(x_train, cfg.pca_dim);
  out.train = to_dataset(out.pca.project(x_train), labels, train_rows);
  out.valid = to_dataset(out.pca.project(gather_rows(x, valid_rows)), labels, valid_rows);

  if (!cfg.test_images.empty()) {
    const IdxImages test_images = read_idx_images(cfg.test_images);
    const auto test_labels = read_idx_labels(cfg.test_labels);
    if (test_labels.size() != test_images.count) {
      throw Error(ErrorCode::CountMismatch,
                  fmt::format("{} test images but {} test labels", test_images.count, test_labels.size()));
    }
    if (test_images.rows != images.rows || test_images.cols != images.cols) {
      throw Error(ErrorCode::DimMismatch, "test images differ in size from training images");
    }
    std::vector<std::size_t> rows(test_images.count);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    out.test = to_dataset(out.pca.project(idx_to_matrix(test_images)), test_labels, rows);
  }
  return out;
}

}  // namespace orbit
