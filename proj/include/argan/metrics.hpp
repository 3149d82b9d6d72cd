#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace argan {

class FeatureExtractor;

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Polynomial kernel (a.b / d + 1)^3 between rows of x (n x d) and y (m x d).
torch::Tensor polynomial_kernel(const torch::Tensor& x, const torch::Tensor& y);

// Unbiased MMD^2 of one block pair (diagonal terms of the within-set kernels excluded).
double mmd2_unbiased(const torch::Tensor& x, const torch::Tensor& y);

struct KidResult {
  double estimate = 0.0;  // mean over blocks
  double stddev = 0.0;    // standard deviation of the per-block estimates
  int64_t blocks = 0;
  int64_t block_size = 0;
};

// Kernel inception distance over consecutive equal-size blocks.
KidResult kid(const torch::Tensor& real_features, const torch::Tensor& fake_features,
              int64_t block_size = 1000);

// Scale-invariant depth error for signed disparity: per image, the estimate
// is aligned to the reference by a non-negative least-squares scale (with
// shift), then the standard deviation of the residual is taken. Averaged
// over the batch. Accepts B x 1 x H x W or H x W.
double side(const torch::Tensor& estimate, const torch::Tensor& reference);

// LPIPS-style distance: per layer, unit-normalize features along channels,
// take squared Euclidean distance per position, average over positions and
// layers, then over the batch.
double feature_distance(const torch::Tensor& a, const torch::Tensor& b, FeatureExtractor& extractor);

// Mean SSIM with an 11x11 Gaussian window (sigma 1.5) on images mapped from
// [-1, 1] to [0, 1]; valid windows only.
double ssim(const torch::Tensor& a, const torch::Tensor& b);

// Pooled (population) standard deviation over every pixel of every map.
double dsd(const torch::Tensor& depths);
// Per-pixel mean across the batch: 1 x 1 x H x W.
torch::Tensor ad(const torch::Tensor& depths);

struct MetricEntry {
  std::string name;
  double value = 0.0;
  std::optional<double> stddev;
  int64_t samples = 0;
  std::optional<std::string> extractor;
};

class MetricReport {
 public:
  void add(MetricEntry entry) { entries_.push_back(std::move(entry)); }
  const std::vector<MetricEntry>& entries() const { return entries_; }
  const MetricEntry* find(const std::string& name) const;

  std::string to_json() const;
  static MetricReport from_json(const std::string& text);
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<MetricEntry> entries_;
};

struct EvaluationInputs {
  torch::Tensor real_images;  // N x 3 x H x W
  torch::Tensor fake_images;  // M x 3 x H x W
  std::optional<torch::Tensor> real_depth;  // paired with fake_depth by index
  std::optional<torch::Tensor> fake_depth;
};

// Names: kid, ssim, feature_distance, side, dsd. Paired metrics use the
// first min(N, M) entries of each set.
MetricReport evaluate(const EvaluationInputs& inputs, const std::vector<std::string>& metrics,
                      FeatureExtractor& extractor, int64_t kid_block_size = 1000);

}  // namespace argan
