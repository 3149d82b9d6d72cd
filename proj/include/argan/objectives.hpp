#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <torch/torch.h>

namespace argan {

class FeatureExtractor;

class ObjectiveError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Distribution of the DoF scale s applied to the generated disparity.
struct DoFScalePolicy {
  enum class Kind { binomial, uniform };
  Kind kind = Kind::binomial;
  double p_s = 0.5;  // P(s = 1), binomial only

  void validate() const;
};

DoFScalePolicy::Kind parse_dof_policy_kind(const std::string& name);
std::string to_string(DoFScalePolicy::Kind kind);

torch::Tensor sample_dof_scale(const DoFScalePolicy& policy, int64_t n, at::Generator& gen);
torch::Tensor sample_dof_scale(const DoFScalePolicy& policy, int64_t n, uint64_t seed);

struct CenterFocusPriorConfig {
  double r_th = 0.25;  // focused radius (r = 1 at half the image width)
  double gain = 1.0;
  double weight = 1.0;  // lambda_p
  int64_t warmup_iters = 0;

  void validate() const;
};

// Prior disparity as a function of normalized radius.
double center_focus_value(double r, const CenterFocusPriorConfig& cfg);

// 1 x 1 x H x W prior map: 0 inside r_th, -g (r - r_th) outside.
torch::Tensor center_focus_prior(int64_t height, int64_t width, const CenterFocusPriorConfig& cfg);

// lambda_p * mean (D - D_p)^2 while iteration < warmup_iters, otherwise an
// exact zero that is not connected to the graph.
torch::Tensor prior_loss(const torch::Tensor& disparity, const torch::Tensor& prior,
                         double weight, int64_t iteration, int64_t warmup_iters);

inline bool prior_active(int64_t iteration, int64_t warmup_iters) { return iteration < warmup_iters; }

// Non-saturating logistic GAN losses, batch-averaged.
torch::Tensor gan_loss_discriminator(const torch::Tensor& logits_real, const torch::Tensor& logits_fake);
torch::Tensor gan_loss_generator(const torch::Tensor& logits_fake);

// Alternatives to DoF mixture learning.
enum class AblationMode { none, l1, perceptual, double_disc };

AblationMode parse_ablation_mode(const std::string& name);
std::string to_string(AblationMode mode);

// Mean |I_d - I_s|.
torch::Tensor l1_content_loss(const torch::Tensor& deep, const torch::Tensor& shallow);
// Mean squared difference of extractor features, averaged over layers.
torch::Tensor perceptual_content_loss(const torch::Tensor& deep, const torch::Tensor& shallow,
                                      FeatureExtractor& extractor);

// Generator-side content term of an ablation; zero for none and double_disc.
torch::Tensor ablation_loss(AblationMode mode, const torch::Tensor& deep, const torch::Tensor& shallow,
                            FeatureExtractor* extractor, double weight = 1.0);

}  // namespace argan
