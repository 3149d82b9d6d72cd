#include "argan/lfrender.hpp"

#include <cmath>
#include <string>

namespace argan {
namespace {

namespace F = torch::nn::functional;

void check_disparity(const torch::Tensor& d) {
  if (d.dim() != 4 || d.size(1) != 1) {
    throw RenderError("disparity must be B x 1 x H x W");
  }
}

void check_image(const torch::Tensor& img) {
  if (img.dim() != 4) throw RenderError("image must be B x C x H x W");
}

// Pixel-center coordinate grids, 1 x 1 x H x W.
std::pair<torch::Tensor, torch::Tensor> pixel_grid(int64_t h, int64_t w,
                                                   const torch::TensorOptions& opts) {
  auto ys = torch::arange(h, opts).view({1, 1, h, 1}).expand({1, 1, h, w});
  auto xs = torch::arange(w, opts).view({1, 1, 1, w}).expand({1, 1, h, w});
  return {xs, ys};
}

torch::Tensor offsets_tensor(const ApertureMask& mask, const std::vector<int64_t>& views,
                             bool x_axis, const torch::TensorOptions& opts) {
  std::vector<double> values;
  values.reserve(views.size());
  for (const auto v : views) {
    const auto& o = mask.offsets()[static_cast<size_t>(v)];
    values.push_back(x_axis ? o.x : o.y);
  }
  return torch::tensor(values, torch::TensorOptions().dtype(torch::kFloat64))
      .to(opts.dtype())
      .view({1, static_cast<int64_t>(views.size()), 1, 1});
}

std::vector<int64_t> all_views(const ApertureMask& mask) {
  std::vector<int64_t> v(static_cast<size_t>(mask.view_count()));
  for (size_t i = 0; i < v.size(); ++i) v[i] = static_cast<int64_t>(i);
  return v;
}

// Warps `image` into the listed views; `expanded` holds one disparity channel
// per listed view. Returns B x |views| x C x H x W.
torch::Tensor warp_views(const torch::Tensor& image, const torch::Tensor& expanded,
                         const ApertureMask& mask, const std::vector<int64_t>& views) {
  const auto opts = expanded.options();
  auto [gx, gy] = pixel_grid(image.size(2), image.size(3), opts);
  auto ux = offsets_tensor(mask, views, true, opts);
  auto uy = offsets_tensor(mask, views, false, opts);
  return bilinear_sample(image, gx + ux * expanded, gy + uy * expanded);
}

torch::Tensor integrate_views(const torch::Tensor& lightfield, const ApertureMask& mask,
                              const std::vector<int64_t>& views) {
  std::vector<double> w;
  w.reserve(views.size());
  for (const auto v : views) w.push_back(mask.weights()[static_cast<size_t>(v)]);
  auto weights = torch::tensor(w, torch::TensorOptions().dtype(torch::kFloat64))
                     .view({1, static_cast<int64_t>(views.size()), 1, 1, 1});
  const auto dtype = lightfield.scalar_type();
  return (lightfield.to(torch::kFloat64) * weights).sum(1).to(dtype);
}

}  // namespace

ApertureMask::ApertureMask(int size) : size_(size) {
  if (size < 1 || size % 2 == 0) {
    throw RenderError("aperture size must be a positive odd integer, got " + std::to_string(size));
  }
  const int radius = (size - 1) / 2;
  offsets_.reserve(static_cast<size_t>(size * size));
  std::vector<bool> inside;
  for (int uy = -radius; uy <= radius; ++uy) {
    for (int ux = -radius; ux <= radius; ++ux) {
      offsets_.push_back({ux, uy});
      inside.push_back(ux * ux + uy * uy <= radius * radius);
    }
  }
  int count = 0;
  for (const bool b : inside) count += b ? 1 : 0;
  weights_.assign(offsets_.size(), 0.0);
  for (size_t i = 0; i < offsets_.size(); ++i) {
    if (inside[i]) {
      weights_[i] = 1.0 / count;
      active_.push_back(static_cast<int64_t>(i));
    }
  }
}

torch::Tensor ApertureMask::weight_grid() const {
  return torch::tensor(weights_, torch::TensorOptions().dtype(torch::kFloat64))
      .view({size_, size_});
}

ApertureMask build_aperture_mask(int size) { return ApertureMask(size); }

torch::Tensor bilinear_sample(const torch::Tensor& source, const torch::Tensor& sample_x,
                              const torch::Tensor& sample_y) {
  if (source.dim() != 4) throw RenderError("bilinear_sample: source must be B x C x H x W");
  if (sample_x.sizes() != sample_y.sizes() || sample_x.dim() != 4 ||
      sample_x.size(0) != source.size(0) || sample_x.size(2) != source.size(2) ||
      sample_x.size(3) != source.size(3)) {
    throw RenderError("bilinear_sample: coordinate maps must be B x V x H x W matching source");
  }
  const auto b = source.size(0);
  const auto c = source.size(1);
  const auto h = source.size(2);
  const auto w = source.size(3);
  const auto v = sample_x.size(1);

  const auto x0f = sample_x.floor();
  const auto y0f = sample_y.floor();
  const auto wx = (sample_x - x0f).unsqueeze(1);
  const auto wy = (sample_y - y0f).unsqueeze(1);

  const auto x0 = x0f.detach().to(torch::kLong);
  const auto y0 = y0f.detach().to(torch::kLong);
  const auto xa = x0.clamp(0, w - 1);
  const auto xb = (x0 + 1).clamp(0, w - 1);
  const auto ya = y0.clamp(0, h - 1);
  const auto yb = (y0 + 1).clamp(0, h - 1);

  const auto flat = source.reshape({b, c, h * w});
  auto fetch = [&](const torch::Tensor& yy, const torch::Tensor& xx) {
    auto idx = (yy * w + xx).reshape({b, 1, v * h * w}).expand({b, c, v * h * w});
    return flat.gather(2, idx).view({b, c, v, h, w});
  };
  const auto top = fetch(ya, xa) * (1 - wx) + fetch(ya, xb) * wx;
  const auto bottom = fetch(yb, xa) * (1 - wx) + fetch(yb, xb) * wx;
  return (top * (1 - wy) + bottom * wy).permute({0, 2, 1, 3, 4});
}

torch::Tensor self_warp_depth(const torch::Tensor& disparity, const ApertureMask& mask) {
  check_disparity(disparity);
  const auto views = all_views(mask);
  return warp_views(disparity, disparity, mask, views).squeeze(2);
}

DepthExpansionNetworkImpl::DepthExpansionNetworkImpl(int64_t views) : views(views) {
  auto conv = [views] {
    return torch::nn::Conv2d(
        torch::nn::Conv2dOptions(views, views, 3).padding(1).padding_mode(torch::kReplicate));
  };
  auto norm = [views] {
    return torch::nn::InstanceNorm2d(torch::nn::InstanceNorm2dOptions(views).affine(true));
  };
  conv1 = register_module("conv1", conv());
  norm1 = register_module("norm1", norm());
  conv2 = register_module("conv2", conv());
  norm2 = register_module("norm2", norm());
  conv3 = register_module("conv3", conv());
  norm3 = register_module("norm3", norm());
  zero_residual();
}

void DepthExpansionNetworkImpl::zero_residual() {
  torch::NoGradGuard no_grad;
  norm3->weight.zero_();
  norm3->bias.zero_();
}

torch::Tensor DepthExpansionNetworkImpl::forward(const torch::Tensor& stack) {
  auto lrelu = F::LeakyReLUFuncOptions().negative_slope(0.2);
  auto x = F::leaky_relu(norm1(conv1(stack)), lrelu);
  x = F::leaky_relu(norm2(conv2(x)), lrelu);
  x = F::leaky_relu(norm3(conv3(x)), lrelu);
  return stack + x;
}

torch::Tensor expand_depth(const torch::Tensor& stack, DepthExpansionNetwork expansion) {
  if (stack.dim() != 4) throw RenderError("depth stack must be B x V x H x W");
  if (expansion.is_empty()) return stack;
  if (stack.size(1) != expansion->views) {
    throw RenderError("depth stack has " + std::to_string(stack.size(1)) +
                      " channels, expansion network expects " +
                      std::to_string(expansion->views));
  }
  return expansion->forward(stack);
}

torch::Tensor warp_lightfield(const torch::Tensor& image, const torch::Tensor& expanded,
                              const ApertureMask& mask) {
  check_image(image);
  if (expanded.dim() != 4 || expanded.size(1) != mask.view_count()) {
    throw RenderError("expanded depth must carry one channel per aperture view");
  }
  if (expanded.size(0) != image.size(0) || expanded.size(2) != image.size(2) ||
      expanded.size(3) != image.size(3)) {
    throw RenderError("image and depth stack shapes disagree");
  }
  return warp_views(image, expanded, mask, all_views(mask));
}

torch::Tensor integrate_aperture(const torch::Tensor& lightfield, const ApertureMask& mask) {
  if (lightfield.dim() != 5 || lightfield.size(1) != mask.view_count()) {
    throw RenderError("light field must be B x V x C x H x W with V = K^2");
  }
  return integrate_views(lightfield.index_select(1, torch::tensor(mask.active_views())), mask,
                         mask.active_views());
}

RenderOutput render_detailed(const torch::Tensor& image, const torch::Tensor& disparity,
                             const torch::Tensor& scale, DepthExpansionNetwork expansion,
                             const ApertureMask& mask) {
  check_image(image);
  check_disparity(disparity);
  if (image.size(0) != disparity.size(0) || image.size(2) != disparity.size(2) ||
      image.size(3) != disparity.size(3)) {
    throw RenderError("image and disparity shapes disagree");
  }
  auto s = scale.to(disparity.scalar_type());
  if (s.dim() == 1) {
    if (s.size(0) != disparity.size(0)) throw RenderError("scale must have one entry per sample");
    s = s.view({-1, 1, 1, 1});
  }
  RenderOutput out;
  out.warped_depth = self_warp_depth(disparity * s, mask);
  out.expanded_depth = expand_depth(out.warped_depth, expansion);
  const auto& active = mask.active_views();
  auto active_depth = out.expanded_depth.index_select(1, torch::tensor(active));
  auto lf = warp_views(image, active_depth, mask, active);
  out.image = integrate_views(lf, mask, active);
  return out;
}

torch::Tensor render(const torch::Tensor& image, const torch::Tensor& disparity, double scale,
                     DepthExpansionNetwork expansion, const ApertureMask& mask) {
  return render_detailed(image, disparity, torch::tensor(scale, torch::kFloat64), expansion, mask)
      .image;
}

torch::Tensor depth_consistency_loss(const torch::Tensor& expanded, const torch::Tensor& warped,
                                     double weight) {
  if (expanded.sizes() != warped.sizes()) throw RenderError("depth stacks disagree in shape");
  // The warped disparity is the regression target for the expansion network.
  return weight * (expanded - warped.detach()).abs().mean();
}

torch::Tensor expansion_regularizer(const torch::Tensor& warped, DepthExpansionNetwork expansion,
                                    double weight) {
  const auto stack = warped.detach();
  return depth_consistency_loss(expand_depth(stack, expansion), stack, weight);
}

}  // namespace argan
