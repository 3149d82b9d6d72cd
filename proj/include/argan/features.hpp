#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace argan {

// Frozen map from images (B x 3 x H x W in [-1, 1]) to features. Never
// trained by this library; gradients flow to the input only.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;

  virtual std::string name() const = 0;
  virtual uint64_t seed() const = 0;
  // Length of the pooled embedding.
  virtual int64_t dim() const = 0;

  // Activation maps of each layer.
  virtual std::vector<torch::Tensor> layers(const torch::Tensor& images) = 0;

  // B x dim embedding; defaults to the spatial mean of every layer, concatenated.
  virtual torch::Tensor embed(const torch::Tensor& images);

  std::string identity() const;
};

// Randomly initialized 4-layer stride-2 conv stack with a fixed seed.
class RandomConvFeatures final : public FeatureExtractor {
 public:
  explicit RandomConvFeatures(uint64_t seed = 0, std::vector<int64_t> widths = {32, 64, 128, 256});

  std::string name() const override { return "random-conv"; }
  uint64_t seed() const override { return seed_; }
  int64_t dim() const override;
  std::vector<torch::Tensor> layers(const torch::Tensor& images) override;

 private:
  uint64_t seed_;
  std::vector<int64_t> widths_;
  std::vector<torch::Tensor> weights_;
  std::vector<torch::Tensor> biases_;
};

std::unique_ptr<FeatureExtractor> make_default_extractor(uint64_t seed = 0);

}  // namespace argan
