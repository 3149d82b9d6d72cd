#include "argan/models.hpp"

#include <algorithm>
#include <bit>

#include "argan/rng.hpp"

namespace argan {
namespace {

namespace F = torch::nn::functional;

int64_t scaled(int64_t channels, int64_t divisor) { return std::max<int64_t>(1, channels / divisor); }

// Channel width of the generator stage producing `resolution` for a final
// image size: 64 at full resolution, doubling per halving, capped at 1024.
int64_t generator_width(int64_t image_size, int64_t resolution) {
  return std::min<int64_t>(1024, 64 * (image_size / resolution));
}

void check_options(const ModelOptions& o) {
  upsampling_stages(o.image_size);
  if (o.latent_dim < 1) throw ModelError("latent_dim must be positive");
  if (o.channel_divisor < 1) throw ModelError("channel_divisor must be positive");
  if (o.scale_hidden < 1) throw ModelError("scale_hidden must be positive");
}

// TF-style "same" padding for the even 4x4 head kernels.
torch::Tensor pad_same4(const torch::Tensor& x) {
  return F::pad(x, F::PadFuncOptions({1, 2, 1, 2}).mode(torch::kReplicate));
}

void append(std::vector<torch::Tensor>& out, const torch::nn::Module& m) {
  for (const auto& p : m.parameters()) out.push_back(p);
}

}  // namespace

int64_t upsampling_stages(int64_t image_size) {
  if (image_size < 8 || !std::has_single_bit(static_cast<uint64_t>(image_size))) {
    throw ModelError("image_size must be a power of two >= 8, got " + std::to_string(image_size));
  }
  return std::countr_zero(static_cast<uint64_t>(image_size)) - 2;
}

torch::Tensor sample_latent(int64_t n, at::Generator& gen, int64_t latent_dim) {
  if (n < 1) throw ModelError("sample_latent: n must be >= 1");
  return torch::randn({n, latent_dim}, gen, torch::kFloat32);
}

torch::Tensor sample_latent(int64_t n, uint64_t seed, int64_t latent_dim) {
  auto gen = stream(seed, "latent");
  return sample_latent(n, gen, latent_dim);
}

AdaINImpl::AdaINImpl(int64_t channels, int64_t latent_dim) : channels(channels) {
  style = register_module("style", torch::nn::Linear(latent_dim, 2 * channels));
  torch::NoGradGuard no_grad;
  // Style scales are predicted as 1 + delta.
  style->weight.mul_(0.1);
  style->bias.zero_();
}

torch::Tensor AdaINImpl::forward(const torch::Tensor& x, const torch::Tensor& z) {
  auto normed = F::instance_norm(x, F::InstanceNormFuncOptions().eps(1e-5));
  auto params = style(z).view({z.size(0), 2, channels, 1, 1});
  auto gain = 1.0 + params.select(1, 0);
  auto shift = params.select(1, 1);
  return normed * gain + shift;
}

GeneratorImpl::GeneratorImpl(const ModelOptions& opts) : options(opts) {
  check_options(options);
  const auto s = options.image_size;
  const auto div = options.channel_divisor;
  const auto stages = upsampling_stages(s);
  const auto const_ch = scaled(1024, div);
  constant = register_parameter("constant", torch::randn({1, const_ch, 4, 4}));
  const_style = register_module("const_style", AdaIN(const_ch, options.latent_dim));

  int64_t in_ch = const_ch;
  int64_t res = 4;
  for (int64_t i = 0; i < stages; ++i) {
    res *= 2;
    const auto out_ch = scaled(generator_width(s, res), div);
    ups.push_back(register_module(
        "up" + std::to_string(i),
        torch::nn::ConvTranspose2d(
            torch::nn::ConvTranspose2dOptions(in_ch, out_ch, 4).stride(2).padding(1))));
    styles.push_back(register_module("style" + std::to_string(i), AdaIN(out_ch, options.latent_dim)));
    in_ch = out_ch;
  }
  image_head = register_module("image_head", torch::nn::Conv2d(torch::nn::Conv2dOptions(in_ch, 3, 4)));
  depth_head = register_module("depth_head", torch::nn::Conv2d(torch::nn::Conv2dOptions(in_ch, 1, 4)));
  scale_hidden = register_module("scale_hidden", torch::nn::Linear(options.latent_dim, options.scale_hidden));
  scale_out = register_module("scale_out", torch::nn::Linear(options.scale_hidden, 1));
}

torch::Tensor GeneratorImpl::trunk(const torch::Tensor& z) {
  auto x = constant.expand({z.size(0), -1, -1, -1});
  x = torch::relu(const_style(x, z));
  for (size_t i = 0; i < ups.size(); ++i) {
    x = torch::relu(styles[i](ups[i](x), z));
  }
  return x;
}

GeneratorOutput GeneratorImpl::forward(const torch::Tensor& z) {
  auto features = trunk(z);
  auto padded = pad_same4(features);
  GeneratorOutput out;
  out.image = torch::tanh(image_head(padded));
  auto scale = torch::sigmoid(scale_out(torch::relu(scale_hidden(z)))).view({-1, 1, 1, 1});
  out.disparity = torch::tanh(depth_head(padded)) * options.max_disparity * scale;
  return out;
}

std::vector<torch::Tensor> GeneratorImpl::trunk_parameters() const {
  std::vector<torch::Tensor> out{constant};
  append(out, *const_style);
  for (size_t i = 0; i < ups.size(); ++i) {
    append(out, *ups[i]);
    append(out, *styles[i]);
  }
  return out;
}

std::vector<torch::Tensor> GeneratorImpl::image_head_parameters() const {
  std::vector<torch::Tensor> out;
  append(out, *image_head);
  return out;
}

std::vector<torch::Tensor> GeneratorImpl::depth_head_parameters() const {
  std::vector<torch::Tensor> out;
  append(out, *depth_head);
  return out;
}

std::vector<torch::Tensor> GeneratorImpl::scale_mlp_parameters() const {
  std::vector<torch::Tensor> out;
  append(out, *scale_hidden);
  append(out, *scale_out);
  return out;
}

SpectralNormConv2dImpl::SpectralNormConv2dImpl(int64_t in, int64_t out, int64_t kernel,
                                               int64_t stride, int64_t padding)
    : stride(stride), padding(padding) {
  // Reuse Conv2d's initialization for the raw weight and bias.
  torch::nn::Conv2d proto(torch::nn::Conv2dOptions(in, out, kernel));
  weight_orig = register_parameter("weight_orig", proto->weight.detach().clone());
  bias = register_parameter("bias", proto->bias.detach().clone());
  u = register_buffer("u", F::normalize(torch::randn({out}), F::NormalizeFuncOptions().dim(0)));
}

void SpectralNormConv2dImpl::power_iteration() {
  torch::NoGradGuard no_grad;
  const auto mat = weight_orig.reshape({weight_orig.size(0), -1});
  auto opts = F::NormalizeFuncOptions().dim(0).eps(1e-12);
  auto v = F::normalize(torch::mv(mat.t(), u), opts);
  u.copy_(F::normalize(torch::mv(mat, v), opts));
}

torch::Tensor SpectralNormConv2dImpl::normalized_weight() {
  const auto mat = weight_orig.reshape({weight_orig.size(0), -1});
  torch::Tensor u_now, v;
  {
    // Snapshot u: later power iterations update the buffer in place.
    torch::NoGradGuard no_grad;
    u_now = u.clone();
    v = F::normalize(torch::mv(mat.t(), u_now), F::NormalizeFuncOptions().dim(0).eps(1e-12));
  }
  auto sigma = torch::dot(u_now, torch::mv(mat, v));
  return weight_orig / sigma;
}

torch::Tensor SpectralNormConv2dImpl::forward(const torch::Tensor& x) {
  if (is_training()) power_iteration();
  return F::conv2d(x, normalized_weight(),
                   F::Conv2dFuncOptions().bias(bias).stride(stride).padding(padding));
}

DiscriminatorImpl::DiscriminatorImpl(const ModelOptions& opts) : options(opts) {
  check_options(options);
  if (options.image_size < 16) throw ModelError("discriminator needs image_size >= 16");
  const auto div = options.channel_divisor;
  const auto c1 = scaled(64, div);
  const auto c2 = scaled(128, div);
  const auto c3 = scaled(256, div);
  const auto c4 = scaled(512, div);
  conv1 = register_module("conv1", torch::nn::Conv2d(torch::nn::Conv2dOptions(3, c1, 5).stride(2).padding(2)));
  conv2 = register_module("conv2", SpectralNormConv2d(c1, c2, 5, 2, 2));
  norm2 = register_module("norm2", torch::nn::InstanceNorm2d(torch::nn::InstanceNorm2dOptions(c2).affine(true)));
  conv3 = register_module("conv3", SpectralNormConv2d(c2, c3, 5, 2, 2));
  norm3 = register_module("norm3", torch::nn::InstanceNorm2d(torch::nn::InstanceNorm2dOptions(c3).affine(true)));
  conv4 = register_module("conv4", SpectralNormConv2d(c3, c4, 5, 2, 2));
  norm4 = register_module("norm4", torch::nn::InstanceNorm2d(torch::nn::InstanceNorm2dOptions(c4).affine(true)));
  const auto spatial = options.image_size / 16;
  fc = register_module("fc", torch::nn::Linear(c4 * spatial * spatial, 1));
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& images) {
  auto lrelu = F::LeakyReLUFuncOptions().negative_slope(0.2);
  auto x = F::leaky_relu(conv1(images), lrelu);
  x = F::leaky_relu(norm2(conv2(x)), lrelu);
  x = F::leaky_relu(norm3(conv3(x)), lrelu);
  x = F::leaky_relu(norm4(conv4(x)), lrelu);
  return fc(x.flatten(1)).view({-1});
}

void ema_update(torch::nn::Module& average, const torch::nn::Module& live, double decay) {
  if (decay < 0.0 || decay > 1.0) throw ModelError("ema decay must lie in [0, 1]");
  torch::NoGradGuard no_grad;
  auto avg_params = average.named_parameters(true);
  const auto live_params = live.named_parameters(true);
  if (avg_params.size() != live_params.size()) {
    throw ModelError("ema_update: parameter sets differ in size");
  }
  for (auto& item : avg_params) {
    const auto* src = live_params.find(item.key());
    if (src == nullptr || src->sizes() != item.value().sizes()) {
      throw ModelError("ema_update: parameter '" + item.key() + "' missing or mismatched");
    }
    item.value().mul_(decay).add_(*src, 1.0 - decay);
  }
  auto avg_buffers = average.named_buffers(true);
  const auto live_buffers = live.named_buffers(true);
  for (auto& item : avg_buffers) {
    if (const auto* src = live_buffers.find(item.key())) item.value().copy_(*src);
  }
}

void copy_module_state(torch::nn::Module& target, const torch::nn::Module& source) {
  torch::NoGradGuard no_grad;
  auto dst_params = target.named_parameters(true);
  const auto src_params = source.named_parameters(true);
  for (auto& item : dst_params) {
    const auto* src = src_params.find(item.key());
    if (src == nullptr || src->sizes() != item.value().sizes()) {
      throw ModelError("copy_module_state: parameter '" + item.key() + "' missing or mismatched");
    }
    item.value().copy_(*src);
  }
  auto dst_buffers = target.named_buffers(true);
  const auto src_buffers = source.named_buffers(true);
  for (auto& item : dst_buffers) {
    if (const auto* src = src_buffers.find(item.key())) item.value().copy_(*src);
  }
}

}  // namespace argan
