#include <cmath>

#include <gtest/gtest.h>

#include "argan/features.hpp"
#include "argan/objectives.hpp"
#include "oracles.hpp"

using namespace argan;

TEST(DoFScale, BinomialExtremesAndFrequency) {
  DoFScalePolicy p;
  p.p_s = 1.0;
  EXPECT_TRUE(torch::all(sample_dof_scale(p, 100, 1) == 1).item<bool>());
  p.p_s = 0.0;
  EXPECT_TRUE(torch::all(sample_dof_scale(p, 100, 1) == 0).item<bool>());
  p.p_s = 0.25;
  const double mean = sample_dof_scale(p, 10000, 2).mean().item<double>();
  EXPECT_GE(mean, 0.23);
  EXPECT_LE(mean, 0.27);
  EXPECT_TRUE(torch::equal(sample_dof_scale(p, 50, 9), sample_dof_scale(p, 50, 9)));
}

TEST(DoFScale, UniformPassesKolmogorovSmirnov) {
  DoFScalePolicy p;
  p.kind = DoFScalePolicy::Kind::uniform;
  auto s = sample_dof_scale(p, 10000, 3).to(torch::kFloat64).contiguous();
  std::vector<double> v(s.data_ptr<double>(), s.data_ptr<double>() + s.numel());
  EXPECT_LT(oracle::ks_uniform(v), oracle::ks_critical_01(v.size()));
  EXPECT_GE(s.min().item<double>(), 0.0);
  EXPECT_LE(s.max().item<double>(), 1.0);
}

TEST(DoFScale, RejectsInvalidProbability) {
  DoFScalePolicy p;
  p.p_s = 1.5;
  EXPECT_THROW(sample_dof_scale(p, 4, 0), ObjectiveError);
  EXPECT_THROW(parse_dof_policy_kind("gaussian"), ObjectiveError);
  EXPECT_EQ(parse_dof_policy_kind(to_string(DoFScalePolicy::Kind::uniform)), DoFScalePolicy::Kind::uniform);
}

TEST(CenterFocus, PointValues) {
  CenterFocusPriorConfig cfg;
  EXPECT_EQ(center_focus_value(0.0, cfg), 0.0);
  EXPECT_EQ(center_focus_value(0.25, cfg), 0.0);
  EXPECT_EQ(center_focus_value(1.0, cfg), -0.75);
  cfg.gain = 2.0;
  EXPECT_EQ(center_focus_value(1.0, cfg), -1.5);
}

TEST(CenterFocus, MapMatchesDirectEvaluation) {
  CenterFocusPriorConfig cfg;
  const int64_t s = 16;
  auto map = center_focus_prior(s, s, cfg).to(torch::kFloat64);
  for (int64_t y = 0; y < s; ++y) {
    for (int64_t x = 0; x < s; ++x) {
      const double r = std::hypot(x - 7.5, y - 7.5) / 8.0;
      const double expect = r <= 0.25 ? 0.0 : -(r - 0.25);
      EXPECT_NEAR(map[0][0][y][x].item<double>(), expect, 1e-7);
    }
  }
  EXPECT_THROW(center_focus_prior(8, 10, cfg), ObjectiveError);
}

TEST(CenterFocus, Symmetric) {
  CenterFocusPriorConfig cfg;
  auto map = center_focus_prior(17, 17, cfg);
  EXPECT_TRUE(torch::equal(map, map.flip({3})));
  EXPECT_TRUE(torch::equal(map, map.flip({2})));
  EXPECT_TRUE(torch::equal(map, map.rot90(1, {2, 3})));
}

TEST(PriorLoss, Schedule) {
  CenterFocusPriorConfig cfg;
  auto prior = center_focus_prior(8, 8, cfg);
  EXPECT_EQ(prior_loss(prior, prior, 1.0, 0, 5).item<float>(), 0.0f);
  EXPECT_NEAR(prior_loss(prior + 1, prior, 1.0, 0, 5).item<float>(), 1.0, 1e-6);
  auto d = (prior + 1).requires_grad_(true);
  auto off = prior_loss(d, prior, 1.0, 5, 5);
  EXPECT_EQ(off.item<float>(), 0.0f);
  EXPECT_FALSE(off.requires_grad());
}

TEST(GanLoss, ZeroLogitsAndLimits) {
  auto zero = torch::zeros({4});
  EXPECT_NEAR(gan_loss_discriminator(zero, zero).item<double>(), 2 * std::log(2.0), 1e-6);
  EXPECT_NEAR(gan_loss_generator(zero).item<double>(), std::log(2.0), 1e-6);
  auto big = torch::full({4}, 60.0);
  EXPECT_LT(gan_loss_discriminator(big, -big).item<double>(), 1e-20);
}

TEST(GanLoss, GeneratorGradient) {
  auto logits = torch::tensor({-2.0, 0.3, 1.7}, torch::kFloat64).requires_grad_(true);
  gan_loss_generator(logits).backward();
  auto expected = -torch::sigmoid(-logits.detach()) / 3.0;
  EXPECT_LE((logits.grad() - expected).abs().max().item<double>(), 1e-12);
  auto f = [](const torch::Tensor& x) { return gan_loss_generator(x).item<double>(); };
  EXPECT_LE(oracle::relative_error(logits.grad(), oracle::numeric_grad(f, logits.detach())), 1e-3);
}

TEST(Ablation, ContentTerms) {
  torch::manual_seed(1);
  auto a = torch::rand({2, 3, 16, 16}) * 2 - 1;
  EXPECT_EQ(ablation_loss(AblationMode::l1, a, a, nullptr).item<float>(), 0.0f);
  EXPECT_NEAR(ablation_loss(AblationMode::l1, a, a + 0.2, nullptr).item<float>(), 0.2, 1e-6);
  RandomConvFeatures feats(0);
  EXPECT_EQ(ablation_loss(AblationMode::perceptual, a, a, &feats).item<float>(), 0.0f);
  EXPECT_GT(ablation_loss(AblationMode::perceptual, a, a * 0.5, &feats).item<float>(), 0.0f);
  EXPECT_EQ(ablation_loss(AblationMode::none, a, a + 1, nullptr).item<float>(), 0.0f);
  EXPECT_EQ(ablation_loss(AblationMode::double_disc, a, a + 1, nullptr).item<float>(), 0.0f);
  EXPECT_THROW(ablation_loss(AblationMode::perceptual, a, a, nullptr), ObjectiveError);
  EXPECT_THROW(parse_ablation_mode("l2"), ObjectiveError);
}
