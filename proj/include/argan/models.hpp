#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace argan {

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ModelOptions {
  int64_t image_size = 64;    // 32, 64 or 128
  int64_t latent_dim = 128;
  // All channel widths are divided by this factor (1 = full-size tables).
  int64_t channel_divisor = 1;
  int64_t scale_hidden = 128;  // hidden width of the depth-scale MLP
  double max_disparity = 10.0;
};

// Number of stride-2 up-convolutions from the 4x4 constant.
int64_t upsampling_stages(int64_t image_size);

// n x latent_dim standard-normal draws.
torch::Tensor sample_latent(int64_t n, uint64_t seed, int64_t latent_dim = 128);
torch::Tensor sample_latent(int64_t n, at::Generator& gen, int64_t latent_dim = 128);

// Instance normalization followed by a per-channel affine map predicted from z.
struct AdaINImpl : torch::nn::Module {
  AdaINImpl(int64_t channels, int64_t latent_dim);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& z);

  int64_t channels;
  torch::nn::Linear style{nullptr};
};
TORCH_MODULE(AdaIN);

struct GeneratorOutput {
  torch::Tensor image;      // B x 3 x H x W in [-1, 1]
  torch::Tensor disparity;  // B x 1 x H x W, |D| < max_disparity
};

// Style-based generator: learned 4x4 constant, a shared trunk of up-convolutions
// each followed by AdaIN(z) and ReLU, then an image head and a depth head that
// both read the same trunk activations.
struct GeneratorImpl : torch::nn::Module {
  explicit GeneratorImpl(const ModelOptions& options = {});

  GeneratorOutput forward(const torch::Tensor& z);
  torch::Tensor trunk(const torch::Tensor& z);

  std::vector<torch::Tensor> trunk_parameters() const;
  std::vector<torch::Tensor> image_head_parameters() const;
  std::vector<torch::Tensor> depth_head_parameters() const;
  std::vector<torch::Tensor> scale_mlp_parameters() const;

  ModelOptions options;
  torch::Tensor constant;
  AdaIN const_style{nullptr};
  std::vector<torch::nn::ConvTranspose2d> ups;
  std::vector<AdaIN> styles;
  torch::nn::Conv2d image_head{nullptr};
  torch::nn::Conv2d depth_head{nullptr};
  torch::nn::Linear scale_hidden{nullptr};
  torch::nn::Linear scale_out{nullptr};
};
TORCH_MODULE(Generator);

// Conv2d whose weight is divided by a power-iteration estimate of its largest
// singular value. One iteration per training-mode forward; the left singular
// vector estimate is a persisted buffer.
struct SpectralNormConv2dImpl : torch::nn::Module {
  SpectralNormConv2dImpl(int64_t in, int64_t out, int64_t kernel, int64_t stride, int64_t padding);

  torch::Tensor forward(const torch::Tensor& x);
  // Weight as used by the last forward pass.
  torch::Tensor normalized_weight();

  int64_t stride, padding;
  torch::Tensor weight_orig, bias, u;

 private:
  void power_iteration();
};
TORCH_MODULE(SpectralNormConv2d);

struct DiscriminatorImpl : torch::nn::Module {
  explicit DiscriminatorImpl(const ModelOptions& options = {});

  // B x 3 x H x W -> B logits.
  torch::Tensor forward(const torch::Tensor& images);

  ModelOptions options;
  torch::nn::Conv2d conv1{nullptr};
  SpectralNormConv2d conv2{nullptr}, conv3{nullptr}, conv4{nullptr};
  torch::nn::InstanceNorm2d norm2{nullptr}, norm3{nullptr}, norm4{nullptr};
  torch::nn::Linear fc{nullptr};
};
TORCH_MODULE(Discriminator);

// avg <- decay * avg + (1 - decay) * live over matching named parameters.
void ema_update(torch::nn::Module& average, const torch::nn::Module& live, double decay = 0.999);

// Copies parameters and buffers from `source` into `target` (same architecture).
void copy_module_state(torch::nn::Module& target, const torch::nn::Module& source);

}  // namespace argan
