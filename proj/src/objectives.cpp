#include "argan/objectives.hpp"

#include <cmath>

#include "argan/features.hpp"
#include "argan/rng.hpp"

namespace argan {

namespace F = torch::nn::functional;

void DoFScalePolicy::validate() const {
  if (kind == Kind::binomial && !(p_s >= 0.0 && p_s <= 1.0)) {
    throw ObjectiveError("p_s must lie in [0, 1], got " + std::to_string(p_s));
  }
}

DoFScalePolicy::Kind parse_dof_policy_kind(const std::string& name) {
  if (name == "binomial") return DoFScalePolicy::Kind::binomial;
  if (name == "uniform") return DoFScalePolicy::Kind::uniform;
  throw ObjectiveError("unknown DoF scale policy '" + name + "' (expected binomial|uniform)");
}

std::string to_string(DoFScalePolicy::Kind kind) {
  return kind == DoFScalePolicy::Kind::binomial ? "binomial" : "uniform";
}

torch::Tensor sample_dof_scale(const DoFScalePolicy& policy, int64_t n, at::Generator& gen) {
  policy.validate();
  auto u = torch::rand({n}, gen, torch::kFloat32);
  if (policy.kind == DoFScalePolicy::Kind::uniform) return u;
  // rand() lies in [0, 1), so p_s = 1 always yields 1 and p_s = 0 never does.
  return (u < policy.p_s).to(torch::kFloat32);
}

torch::Tensor sample_dof_scale(const DoFScalePolicy& policy, int64_t n, uint64_t seed) {
  auto gen = stream(seed, "dof-scale");
  return sample_dof_scale(policy, n, gen);
}

void CenterFocusPriorConfig::validate() const {
  if (!(r_th >= 0.0 && r_th <= 1.0)) throw ObjectiveError("prior r_th must lie in [0, 1]");
  if (!(gain >= 0.0)) throw ObjectiveError("prior gain must be >= 0");
  if (!(weight >= 0.0)) throw ObjectiveError("prior weight must be >= 0");
  if (warmup_iters < 0) throw ObjectiveError("prior warmup_iters must be >= 0");
}

double center_focus_value(double r, const CenterFocusPriorConfig& cfg) {
  return r <= cfg.r_th ? 0.0 : -cfg.gain * (r - cfg.r_th);
}

torch::Tensor center_focus_prior(int64_t height, int64_t width, const CenterFocusPriorConfig& cfg) {
  cfg.validate();
  if (height != width) throw ObjectiveError("center focus prior expects square images");
  if (height < 1) throw ObjectiveError("center focus prior expects a positive size");
  const double center = (static_cast<double>(width) - 1.0) / 2.0;
  const double half = static_cast<double>(width) / 2.0;
  auto out = torch::empty({1, 1, height, width}, torch::kFloat64);
  auto acc = out.accessor<double, 4>();
  for (int64_t y = 0; y < height; ++y) {
    for (int64_t x = 0; x < width; ++x) {
      const double dx = static_cast<double>(x) - center;
      const double dy = static_cast<double>(y) - center;
      acc[0][0][y][x] = center_focus_value(std::sqrt(dx * dx + dy * dy) / half, cfg);
    }
  }
  return out.to(torch::kFloat32);
}

torch::Tensor prior_loss(const torch::Tensor& disparity, const torch::Tensor& prior, double weight,
                         int64_t iteration, int64_t warmup_iters) {
  if (disparity.size(-1) != prior.size(-1) || disparity.size(-2) != prior.size(-2)) {
    throw ObjectiveError("prior and disparity spatial sizes disagree");
  }
  if (!prior_active(iteration, warmup_iters)) {
    return torch::zeros({}, disparity.options().requires_grad(false));
  }
  return weight * (disparity - prior.to(disparity.scalar_type())).pow(2).mean();
}

torch::Tensor gan_loss_discriminator(const torch::Tensor& logits_real, const torch::Tensor& logits_fake) {
  return F::softplus(-logits_real).mean() + F::softplus(logits_fake).mean();
}

torch::Tensor gan_loss_generator(const torch::Tensor& logits_fake) {
  return F::softplus(-logits_fake).mean();
}

AblationMode parse_ablation_mode(const std::string& name) {
  if (name == "none" || name.empty()) return AblationMode::none;
  if (name == "l1") return AblationMode::l1;
  if (name == "perceptual") return AblationMode::perceptual;
  if (name == "double_disc") return AblationMode::double_disc;
  throw ObjectiveError("unknown ablation mode '" + name + "' (expected none|l1|perceptual|double_disc)");
}

std::string to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::none: return "none";
    case AblationMode::l1: return "l1";
    case AblationMode::perceptual: return "perceptual";
    case AblationMode::double_disc: return "double_disc";
  }
  return "none";
}

torch::Tensor l1_content_loss(const torch::Tensor& deep, const torch::Tensor& shallow) {
  return (deep - shallow).abs().mean();
}

torch::Tensor perceptual_content_loss(const torch::Tensor& deep, const torch::Tensor& shallow,
                                      FeatureExtractor& extractor) {
  const auto a = extractor.layers(deep);
  const auto b = extractor.layers(shallow);
  auto total = torch::zeros({}, deep.options());
  for (size_t i = 0; i < a.size(); ++i) total = total + (a[i] - b[i]).pow(2).mean();
  return total / static_cast<double>(a.size());
}

torch::Tensor ablation_loss(AblationMode mode, const torch::Tensor& deep, const torch::Tensor& shallow,
                            FeatureExtractor* extractor, double weight) {
  switch (mode) {
    case AblationMode::l1:
      return weight * l1_content_loss(deep, shallow);
    case AblationMode::perceptual:
      if (extractor == nullptr) throw ObjectiveError("perceptual ablation requires a feature extractor");
      return weight * perceptual_content_loss(deep, shallow, *extractor);
    case AblationMode::none:
    case AblationMode::double_disc:
      break;
  }
  return torch::zeros({}, deep.options());
}

}  // namespace argan
