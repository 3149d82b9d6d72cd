#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <torch/torch.h>

// Differentiable light-field aperture renderer.
//
// Tensor layouts (all NCHW):
//   image            B x 3 x H x W, values in [-1, 1]
//   disparity        B x 1 x H x W, focal plane at 0, one unit = one pixel of
//                    displacement per unit of angular offset
//   depth stack      B x V x H x W, one disparity map per aperture view
//   light field      B x V x 3 x H x W
// where V = K * K and views are ordered row-major over (u_y, u_x).

namespace argan {

class RenderError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ViewOffset {
  int x = 0;
  int y = 0;
};

// Normalized disk indicator over a K x K grid of angular offsets.
class ApertureMask {
 public:
  explicit ApertureMask(int size = 5);

  int size() const { return size_; }
  int64_t view_count() const { return static_cast<int64_t>(offsets_.size()); }
  const std::vector<ViewOffset>& offsets() const { return offsets_; }
  // One weight per view, float64, summing to 1.
  const std::vector<double>& weights() const { return weights_; }
  // Indices of views with non-zero weight.
  const std::vector<int64_t>& active_views() const { return active_; }

  // K x K float64 tensor of weights (row = u_y, column = u_x).
  torch::Tensor weight_grid() const;

 private:
  int size_;
  std::vector<ViewOffset> offsets_;
  std::vector<double> weights_;
  std::vector<int64_t> active_;
};

ApertureMask build_aperture_mask(int size);

// Gather-style bilinear sampling with clamp-to-edge addressing.
// source: B x C x H x W; sample_x, sample_y: B x V x H x W absolute pixel
// coordinates. Returns B x V x C x H x W. Differentiable in all inputs.
torch::Tensor bilinear_sample(const torch::Tensor& source, const torch::Tensor& sample_x,
                              const torch::Tensor& sample_y);

// D sampled at x + u D(x) for every view u: B x V x H x W.
torch::Tensor self_warp_depth(const torch::Tensor& disparity, const ApertureMask& mask);

// Three 3x3 conv / instance-norm / leaky-ReLU stages over the K^2-channel
// stack with a residual connection. The affine scale and shift of the last
// normalization start at zero, so the network is the identity at
// initialization.
struct DepthExpansionNetworkImpl : torch::nn::Module {
  explicit DepthExpansionNetworkImpl(int64_t views = 25);

  torch::Tensor forward(const torch::Tensor& stack);

  // Re-applies the identity initialization of the residual branch.
  void zero_residual();

  int64_t views;
  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr}, conv3{nullptr};
  torch::nn::InstanceNorm2d norm1{nullptr}, norm2{nullptr}, norm3{nullptr};
};
TORCH_MODULE(DepthExpansionNetwork);

// M = stack + T(stack). An empty network means identity expansion.
torch::Tensor expand_depth(const torch::Tensor& stack, DepthExpansionNetwork expansion);

// L(x, u) = I(x + u M(x, u)). Returns all V views.
torch::Tensor warp_lightfield(const torch::Tensor& image, const torch::Tensor& expanded,
                              const ApertureMask& mask);

// I_s(x) = sum_u A(u) L(x, u). Accumulates in float64 so a light field of
// identical views reproduces its view exactly.
torch::Tensor integrate_aperture(const torch::Tensor& lightfield, const ApertureMask& mask);

struct RenderOutput {
  torch::Tensor image;           // B x 3 x H x W
  torch::Tensor warped_depth;    // self-warped scaled disparity, B x V x H x W
  torch::Tensor expanded_depth;  // output of the expansion network, B x V x H x W
};

// Full renderer applied to (image, scale * disparity). `scale` is either a
// scalar or a per-sample B tensor. Zero-weight views are never warped.
RenderOutput render_detailed(const torch::Tensor& image, const torch::Tensor& disparity,
                             const torch::Tensor& scale, DepthExpansionNetwork expansion,
                             const ApertureMask& mask);

torch::Tensor render(const torch::Tensor& image, const torch::Tensor& disparity, double scale,
                     DepthExpansionNetwork expansion, const ApertureMask& mask);

// lambda * mean |M - D(x + u D(x))|.
torch::Tensor depth_consistency_loss(const torch::Tensor& expanded, const torch::Tensor& warped,
                                     double weight = 1.0);

// The regularizer as a training term for T: T runs on the detached stack, so
// the loss has no gradient path into the disparity.
torch::Tensor expansion_regularizer(const torch::Tensor& warped, DepthExpansionNetwork expansion,
                                    double weight = 1.0);

}  // namespace argan
