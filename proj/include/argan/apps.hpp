#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "argan/config.hpp"
#include "argan/lfrender.hpp"
#include "argan/models.hpp"

namespace argan {

inline constexpr const char* kUNetCheckpointFormat = "argan-unet-v1";

class AppError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class UNetTarget { dof_renderer, depth_estimator };
UNetTarget parse_unet_target(const std::string& name);
std::string to_string(UNetTarget target);

// Encoder of 3x3 conv / LReLU stages with five 2x2 max-pools, decoder of
// nearest upsampling plus skip concatenation. Input sides must be multiples
// of 32.
struct UNetImpl : torch::nn::Module {
  explicit UNetImpl(int64_t out_channels);

  torch::Tensor forward(const torch::Tensor& x);

  int64_t out_channels;
  std::vector<torch::nn::Conv2d> encoder;  // enc_conv0 .. enc_conv6
  std::vector<torch::nn::Conv2d> decoder;  // two per upsampling stage, deepest first
  torch::nn::Conv2d head{nullptr};
};
TORCH_MODULE(UNet);

UNet make_unet(UNetTarget target, uint64_t seed = 0);

// The EMA generator and expansion network of a training checkpoint.
struct ArganModel {
  TrainingConfig config;
  ApertureMask mask{5};
  Generator generator{nullptr};
  DepthExpansionNetwork expansion{nullptr};
};

ArganModel load_argan_model(const std::filesystem::path& checkpoint);

struct Tuples {
  torch::Tensor deep;       // n x 3 x S x S
  torch::Tensor disparity;  // n x 1 x S x S
  torch::Tensor shallow;    // n x 3 x S x S, rendered at s = 1
};

Tuples synthesize_tuples(ArganModel& model, int64_t n, uint64_t seed);

struct UNetTrainConfig {
  int64_t iterations = 1000;
  int64_t batch_size = 4;
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  uint64_t seed = 0;
  int64_t log_interval = 100;  // iterations between best-so-far loss records

  void validate() const;
};

// Constant rate, then a linear ramp to zero over the final 30% of iterations.
double unet_learning_rate(double base, int64_t iteration, int64_t total);

struct UNetTrainResult {
  UNet net{nullptr};
  std::vector<double> losses;       // per-iteration batch L1
  std::vector<double> best_so_far;  // at every log_interval and at the end
};

// L1 regression of targets from inputs (both N x C x S x S).
UNetTrainResult train_unet(const torch::Tensor& inputs, const torch::Tensor& targets, UNetTarget target,
                           const UNetTrainConfig& config);

void save_unet(const UNet& net, UNetTarget target, const std::filesystem::path& path);
UNet load_unet(const std::filesystem::path& path, UNetTarget* target = nullptr);

enum class ShallowDofMode { argan_r, argan_dr };
ShallowDofMode parse_shallow_dof_mode(const std::string& name);

struct ShallowDofResult {
  torch::Tensor image;                    // B x 3 x H x W
  std::optional<torch::Tensor> disparity; // argan_dr only
};

// argan_r maps I_d through the renderer u-net; argan_dr predicts D with the
// depth u-net and renders through the AR-GAN's expansion network at s = 1.
ShallowDofResult render_shallow_dof(const torch::Tensor& deep, ShallowDofMode mode, UNet dof_net,
                                    UNet depth_net, const ArganModel* argan);

}  // namespace argan
