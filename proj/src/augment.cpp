#include "argan/augment.hpp"

#include "argan/lfrender.hpp"

namespace argan {

AugmentParams draw_augment(int64_t batch, int64_t height, int64_t width,
                           const AugmentToggles& toggles, at::Generator& gen) {
  AugmentParams p;
  p.toggles = toggles;
  // Draws happen unconditionally so toggles never shift the random stream.
  p.brightness = torch::rand({batch}, gen, torch::kFloat32) - 0.5;
  p.saturation = torch::rand({batch}, gen, torch::kFloat32) * 2.0;
  p.contrast = torch::rand({batch}, gen, torch::kFloat32) + 0.5;
  const auto max_dx = (width + 7) / 8;
  const auto max_dy = (height + 7) / 8;
  p.shift_x = torch::randint(-max_dx, max_dx + 1, {batch}, gen, torch::kLong);
  p.shift_y = torch::randint(-max_dy, max_dy + 1, {batch}, gen, torch::kLong);
  p.cutout_size = std::max<int64_t>(1, height / 2);
  p.cutout_x = torch::randint(0, width + (1 - p.cutout_size % 2), {batch}, gen, torch::kLong);
  p.cutout_y = torch::randint(0, height + (1 - p.cutout_size % 2), {batch}, gen, torch::kLong);
  return p;
}

torch::Tensor apply_augment(const torch::Tensor& images, const AugmentParams& p) {
  auto x = images;
  const auto b = x.size(0);
  const auto h = x.size(2);
  const auto w = x.size(3);
  const auto opts = x.options();
  auto per_sample = [&](const torch::Tensor& t) { return t.to(opts.dtype()).view({b, 1, 1, 1}); };

  if (p.toggles.color) {
    x = x + per_sample(p.brightness);
    auto channel_mean = x.mean(1, true);
    x = (x - channel_mean) * per_sample(p.saturation) + channel_mean;
    auto image_mean = x.mean({1, 2, 3}, true);
    x = (x - image_mean) * per_sample(p.contrast) + image_mean;
  }
  if (p.toggles.translation) {
    auto gx = torch::arange(w, opts).view({1, 1, 1, w}).expand({b, 1, h, w});
    auto gy = torch::arange(h, opts).view({1, 1, h, 1}).expand({b, 1, h, w});
    // Integer sample positions make the bilinear gather an exact shift.
    x = bilinear_sample(x, gx - per_sample(p.shift_x), gy - per_sample(p.shift_y)).squeeze(1);
  }
  if (p.toggles.cutout) {
    const auto half = p.cutout_size / 2;
    auto xs = torch::arange(w, torch::kLong).view({1, 1, 1, w});
    auto ys = torch::arange(h, torch::kLong).view({1, 1, h, 1});
    auto x0 = (p.cutout_x - half).view({b, 1, 1, 1});
    auto y0 = (p.cutout_y - half).view({b, 1, 1, 1});
    auto inside = (xs >= x0) & (xs < x0 + p.cutout_size) & (ys >= y0) & (ys < y0 + p.cutout_size);
    x = x * (~inside).to(opts.dtype());
  }
  return x;
}

torch::Tensor diff_augment(const torch::Tensor& images, const AugmentToggles& toggles, at::Generator& gen) {
  if (!toggles.any()) return images;
  return apply_augment(images, draw_augment(images.size(0), images.size(2), images.size(3), toggles, gen));
}

}  // namespace argan
