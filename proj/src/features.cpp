#include "argan/features.hpp"

#include <cmath>

#include "argan/rng.hpp"

namespace argan {

namespace F = torch::nn::functional;

torch::Tensor FeatureExtractor::embed(const torch::Tensor& images) {
  std::vector<torch::Tensor> pooled;
  for (const auto& a : layers(images)) pooled.push_back(a.mean({2, 3}));
  return torch::cat(pooled, 1);
}

std::string FeatureExtractor::identity() const {
  return name() + "/seed=" + std::to_string(seed()) + "/dim=" + std::to_string(dim());
}

RandomConvFeatures::RandomConvFeatures(uint64_t seed, std::vector<int64_t> widths)
    : seed_(seed), widths_(std::move(widths)) {
  auto gen = stream(seed_, "feature-extractor");
  int64_t in = 3;
  for (const auto out : widths_) {
    const double std = std::sqrt(2.0 / static_cast<double>(in * 9));
    weights_.push_back(torch::randn({out, in, 3, 3}, gen, torch::kFloat32) * std);
    biases_.push_back(torch::zeros({out}));
    in = out;
  }
}

int64_t RandomConvFeatures::dim() const {
  int64_t d = 0;
  for (const auto w : widths_) d += w;
  return d;
}

std::vector<torch::Tensor> RandomConvFeatures::layers(const torch::Tensor& images) {
  std::vector<torch::Tensor> out;
  auto x = images;
  for (size_t i = 0; i < weights_.size(); ++i) {
    const auto w = weights_[i].to(x.scalar_type());
    const auto b = biases_[i].to(x.scalar_type());
    x = F::leaky_relu(F::conv2d(x, w, F::Conv2dFuncOptions().bias(b).stride(2).padding(1)),
                      F::LeakyReLUFuncOptions().negative_slope(0.2));
    out.push_back(x);
  }
  return out;
}

std::unique_ptr<FeatureExtractor> make_default_extractor(uint64_t seed) {
  return std::make_unique<RandomConvFeatures>(seed);
}

}  // namespace argan
