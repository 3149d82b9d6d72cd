#pragma once

#include <cstdint>

#include <torch/torch.h>

namespace argan {

struct AugmentToggles {
  bool color = true;
  bool translation = true;
  bool cutout = true;

  bool any() const { return color || translation || cutout; }
};

// One draw of transform parameters for a batch of B images. Applying the
// same draw to the real and fake halves of a discriminator batch pairs them.
struct AugmentParams {
  AugmentToggles toggles;
  torch::Tensor brightness;  // B, added offset in [-0.5, 0.5)
  torch::Tensor saturation;  // B, gain in [0, 2)
  torch::Tensor contrast;    // B, gain in [0.5, 1.5)
  torch::Tensor shift_x;     // B integer shifts in [-ceil(W/8), ceil(W/8)]
  torch::Tensor shift_y;
  torch::Tensor cutout_x;    // B cutout centers
  torch::Tensor cutout_y;
  int64_t cutout_size = 0;
};

AugmentParams draw_augment(int64_t batch, int64_t height, int64_t width,
                           const AugmentToggles& toggles, at::Generator& gen);

// Applies color jitter, clamp-padded translation and cutout in that order.
// Differentiable with respect to the pixel values.
torch::Tensor apply_augment(const torch::Tensor& images, const AugmentParams& params);

torch::Tensor diff_augment(const torch::Tensor& images, const AugmentToggles& toggles, at::Generator& gen);

}  // namespace argan
