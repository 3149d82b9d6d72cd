#include "argan/apps.hpp"

#include <cmath>
#include <limits>

#include "argan/checkpoint.hpp"
#include "argan/rng.hpp"
#include "argan/trainer.hpp"

namespace argan {
namespace {

namespace F = torch::nn::functional;

constexpr double kSlope = 0.2;

torch::nn::Conv2d conv3x3(int64_t in, int64_t out) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).padding(1));
}

torch::Tensor act(const torch::Tensor& x) {
  return F::leaky_relu(x, F::LeakyReLUFuncOptions().negative_slope(kSlope));
}

torch::Tensor pool(const torch::Tensor& x) { return F::max_pool2d(x, F::MaxPool2dFuncOptions(2)); }

torch::Tensor upsample(const torch::Tensor& x) {
  return F::interpolate(x, F::InterpolateFuncOptions()
                               .scale_factor(std::vector<double>{2.0, 2.0})
                               .mode(torch::kNearest));
}

}  // namespace

UNetTarget parse_unet_target(const std::string& name) {
  if (name == "dof_renderer") return UNetTarget::dof_renderer;
  if (name == "depth_estimator") return UNetTarget::depth_estimator;
  throw AppError("unknown u-net target '" + name + "' (expected dof_renderer or depth_estimator)");
}

std::string to_string(UNetTarget target) {
  return target == UNetTarget::dof_renderer ? "dof_renderer" : "depth_estimator";
}

UNetImpl::UNetImpl(int64_t out_channels_) : out_channels(out_channels_) {
  constexpr int64_t enc = 48;
  constexpr int64_t dec = 96;
  for (int i = 0; i <= 6; ++i) {
    encoder.push_back(register_module("enc_conv" + std::to_string(i), conv3x3(i == 0 ? 3 : enc, enc)));
  }
  // Stages 5..2 concatenate a pooled encoder output; stage 1 the input.
  const std::vector<std::pair<int64_t, int64_t>> stages = {
      {enc + enc, dec}, {dec + enc, dec}, {dec + enc, dec}, {dec + enc, dec}, {dec + 3, 64}};
  for (size_t i = 0; i < stages.size(); ++i) {
    const auto [in, out] = stages[i];
    const auto level = std::to_string(5 - i);
    const int64_t second_out = i + 1 == stages.size() ? 32 : out;
    decoder.push_back(register_module("dec_conv" + level + "a", conv3x3(in, out)));
    decoder.push_back(register_module("dec_conv" + level + "b", conv3x3(out, second_out)));
  }
  head = register_module("dec_conv1c", conv3x3(32, out_channels));
}

torch::Tensor UNetImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 4 || x.size(1) != 3) throw AppError("u-net expects B x 3 x H x W input");
  if (x.size(2) % 32 != 0 || x.size(3) % 32 != 0) {
    throw AppError("u-net input sides must be multiples of 32, got " + std::to_string(x.size(2)) + "x" +
                   std::to_string(x.size(3)));
  }
  auto h = act(encoder[0](x));
  h = act(encoder[1](h));
  std::vector<torch::Tensor> skips{x};
  h = pool(h);
  for (int i = 2; i <= 5; ++i) {
    skips.push_back(h);
    h = pool(act(encoder[i](h)));
  }
  h = act(encoder[6](h));
  for (size_t i = 0; i < 5; ++i) {
    h = torch::cat({upsample(h), skips[skips.size() - 1 - i]}, 1);
    h = act(decoder[2 * i](h));
    h = act(decoder[2 * i + 1](h));
  }
  return head(h);
}

UNet make_unet(UNetTarget target, uint64_t seed) {
  torch::manual_seed(mix_seed(seed, "unet-init"));
  return UNet(target == UNetTarget::dof_renderer ? 3 : 1);
}

ArganModel load_argan_model(const std::filesystem::path& checkpoint) {
  CheckpointReader r(checkpoint, kTrainCheckpointFormat);
  ArganModel m;
  m.config = TrainingConfig::from_text(r.get_text("config"));
  m.mask = ApertureMask(m.config.aperture_size);
  m.generator = Generator(m.config.model_options());
  m.expansion = DepthExpansionNetwork(m.mask.view_count());
  r.get("ema_generator", *m.generator);
  r.get("ema_expansion", *m.expansion);
  m.generator->eval();
  m.expansion->eval();
  return m;
}

Tuples synthesize_tuples(ArganModel& model, int64_t n, uint64_t seed) {
  torch::NoGradGuard no_grad;
  model.generator->eval();
  model.expansion->eval();
  const auto z = sample_latent(n, seed, model.config.latent_dim);
  const auto out = model.generator->forward(z);
  Tuples t;
  t.deep = out.image;
  t.disparity = out.disparity;
  t.shallow = render(out.image, out.disparity, 1.0, model.expansion, model.mask);
  return t;
}

void UNetTrainConfig::validate() const {
  if (iterations < 0) throw AppError("u-net iterations must be >= 0");
  if (batch_size < 1) throw AppError("u-net batch size must be >= 1");
  if (!(learning_rate >= 0.0)) throw AppError("u-net learning rate must be >= 0");
  if (log_interval < 1) throw AppError("u-net log interval must be >= 1");
}

double unet_learning_rate(double base, int64_t iteration, int64_t total) {
  if (total <= 0) return base;
  const double progress = static_cast<double>(iteration) / static_cast<double>(total);
  constexpr double ramp_start = 0.7;
  if (progress <= ramp_start) return base;
  return base * std::max(0.0, (1.0 - progress) / (1.0 - ramp_start));
}

UNetTrainResult train_unet(const torch::Tensor& inputs, const torch::Tensor& targets, UNetTarget target,
                           const UNetTrainConfig& config) {
  config.validate();
  if (!inputs.defined() || inputs.dim() != 4 || inputs.size(0) < 1) {
    throw AppError("u-net training needs at least one N x 3 x H x W input");
  }
  const int64_t want = target == UNetTarget::dof_renderer ? 3 : 1;
  if (targets.dim() != 4 || targets.size(0) != inputs.size(0) || targets.size(1) != want ||
      targets.size(2) != inputs.size(2) || targets.size(3) != inputs.size(3)) {
    throw AppError("u-net targets must be N x " + std::to_string(want) + " x H x W matching the inputs");
  }
  UNetTrainResult result;
  result.net = make_unet(target, config.seed);
  result.net->train();
  torch::optim::Adam opt(result.net->parameters(), torch::optim::AdamOptions(config.learning_rate)
                                                       .betas({config.beta1, config.beta2}));
  const auto x_all = inputs.to(torch::kFloat32);
  const auto y_all = targets.to(torch::kFloat32);
  double best = std::numeric_limits<double>::infinity();
  for (int64_t it = 0; it < config.iterations; ++it) {
    for (auto& group : opt.param_groups()) {
      static_cast<torch::optim::AdamOptions&>(group.options())
          .lr(unet_learning_rate(config.learning_rate, it, config.iterations));
    }
    auto gen = stream(config.seed, "unet-batch", static_cast<uint64_t>(it));
    const auto idx = torch::randint(0, x_all.size(0), {config.batch_size}, gen, torch::kLong);
    const auto loss = (result.net->forward(x_all.index_select(0, idx)) - y_all.index_select(0, idx)).abs().mean();
    const double value = loss.item<double>();
    if (!std::isfinite(value)) throw NonFiniteLossError("non-finite u-net loss at iteration " + std::to_string(it));
    opt.zero_grad();
    loss.backward();
    opt.step();
    result.losses.push_back(value);
    best = std::min(best, value);
    if ((it + 1) % config.log_interval == 0 || it + 1 == config.iterations) result.best_so_far.push_back(best);
  }
  result.net->eval();
  return result;
}

void save_unet(const UNet& net, UNetTarget target, const std::filesystem::path& path) {
  CheckpointWriter w(kUNetCheckpointFormat);
  w.put("target", to_string(target));
  w.put("net", *net);
  w.save(path);
}

UNet load_unet(const std::filesystem::path& path, UNetTarget* target) {
  CheckpointReader r(path, kUNetCheckpointFormat);
  const auto t = parse_unet_target(r.get_text("target"));
  UNet net(t == UNetTarget::dof_renderer ? 3 : 1);
  r.get("net", *net);
  net->eval();
  if (target) *target = t;
  return net;
}

ShallowDofMode parse_shallow_dof_mode(const std::string& name) {
  if (name == "argan_r") return ShallowDofMode::argan_r;
  if (name == "argan_dr") return ShallowDofMode::argan_dr;
  throw AppError("unknown render mode '" + name + "' (expected argan_r or argan_dr)");
}

ShallowDofResult render_shallow_dof(const torch::Tensor& deep, ShallowDofMode mode, UNet dof_net,
                                    UNet depth_net, const ArganModel* argan) {
  torch::NoGradGuard no_grad;
  ShallowDofResult out;
  if (mode == ShallowDofMode::argan_r) {
    if (dof_net.is_empty()) throw AppError("argan_r needs a dof_renderer u-net");
    out.image = dof_net->forward(deep);
    return out;
  }
  if (depth_net.is_empty()) throw AppError("argan_dr needs a depth_estimator u-net");
  if (!argan) throw AppError("argan_dr needs the AR-GAN checkpoint for its expansion network");
  const auto disparity = depth_net->forward(deep);
  out.image = render(deep, disparity, 1.0, argan->expansion, argan->mask);
  out.disparity = disparity;
  return out;
}

}  // namespace argan
