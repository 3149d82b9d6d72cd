#include <filesystem>

#include <gtest/gtest.h>

#include "argan/apps.hpp"
#include "argan/trainer.hpp"

using namespace argan;
namespace fs = std::filesystem;

namespace {

// Freshly initialized AR-GAN written to disk once per process.
const fs::path& init_checkpoint() {
  static const fs::path path = [] {
    TrainingConfig c;
    c.image_size = 32;
    c.batch_size = 2;
    c.channel_divisor = 8;
    c.latent_dim = 32;
    c.scale_hidden = 16;
    c.synthetic_count = 4;
    c.total_d_iterations = 0;
    c.output_dir = (fs::temp_directory_path() / "argan_unit_apps_model").string();
    fs::remove_all(c.output_dir);
    return run_training(c).final_checkpoint;
  }();
  return path;
}

}  // namespace

TEST(UNet, ShapesAndSideConstraint) {
  auto dof = make_unet(UNetTarget::dof_renderer, 1);
  auto depth = make_unet(UNetTarget::depth_estimator, 1);
  auto x = torch::rand({2, 3, 64, 32});
  EXPECT_EQ(dof->forward(x).sizes(), (std::vector<int64_t>{2, 3, 64, 32}));
  EXPECT_EQ(depth->forward(x).sizes(), (std::vector<int64_t>{2, 1, 64, 32}));
  EXPECT_EQ(dof->encoder.size(), 7u);
  EXPECT_THROW(dof->forward(torch::rand({1, 3, 48, 48})), AppError);
  EXPECT_THROW(parse_unet_target("segmenter"), AppError);
  EXPECT_EQ(parse_unet_target(to_string(UNetTarget::depth_estimator)), UNetTarget::depth_estimator);
}

TEST(UNet, LearningRateRamp) {
  EXPECT_DOUBLE_EQ(unet_learning_rate(1e-3, 0, 100), 1e-3);
  EXPECT_DOUBLE_EQ(unet_learning_rate(1e-3, 70, 100), 1e-3);
  EXPECT_NEAR(unet_learning_rate(1e-3, 85, 100), 0.5e-3, 1e-15);
  EXPECT_NEAR(unet_learning_rate(1e-3, 100, 100), 0.0, 1e-15);
}

TEST(UNet, ZeroIterationsLeavesInitialization) {
  auto x = torch::rand({2, 3, 32, 32});
  UNetTrainConfig cfg;
  cfg.iterations = 0;
  cfg.seed = 3;
  auto r = train_unet(x, x, UNetTarget::dof_renderer, cfg);
  auto ref = make_unet(UNetTarget::dof_renderer, 3);
  auto a = r.net->parameters();
  auto b = ref->parameters();
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(torch::equal(a[i], b[i]));
  EXPECT_TRUE(r.losses.empty());
}

TEST(UNet, MemorizesSinglePair) {
  torch::manual_seed(4);
  auto x = torch::rand({1, 3, 32, 32}) * 2 - 1;
  auto y = 0.5 * x.mean(1, true) + 0.1;
  UNetTrainConfig cfg;
  cfg.iterations = 300;
  cfg.batch_size = 1;
  cfg.log_interval = 25;
  auto r = train_unet(x, y, UNetTarget::depth_estimator, cfg);
  const double initial = (y - make_unet(UNetTarget::depth_estimator, 0)->forward(x)).abs().mean().item<double>();
  EXPECT_LT(r.losses.back(), 0.1 * initial);
  EXPECT_EQ(r.best_so_far.size(), 12u);
  for (size_t i = 1; i < r.best_so_far.size(); ++i) EXPECT_LE(r.best_so_far[i], r.best_so_far[i - 1]);
}

TEST(UNet, SaveLoadRoundTrip) {
  auto dir = fs::temp_directory_path() / "argan_unit_unet_io";
  fs::create_directories(dir);
  auto net = make_unet(UNetTarget::depth_estimator, 9);
  save_unet(net, UNetTarget::depth_estimator, dir / "u.ckpt");
  UNetTarget target = UNetTarget::dof_renderer;
  auto back = load_unet(dir / "u.ckpt", &target);
  EXPECT_EQ(target, UNetTarget::depth_estimator);
  auto x = torch::rand({1, 3, 32, 32});
  net->eval();
  EXPECT_TRUE(torch::equal(net->forward(x), back->forward(x)));
}

TEST(Tuples, DeterministicAndConsistent) {
  auto model = load_argan_model(init_checkpoint());
  auto a = synthesize_tuples(model, 3, 5);
  auto b = synthesize_tuples(model, 3, 5);
  EXPECT_TRUE(torch::equal(a.deep, b.deep));
  EXPECT_TRUE(torch::equal(a.shallow, b.shallow));
  EXPECT_EQ(a.disparity.sizes(), (std::vector<int64_t>{3, 1, 32, 32}));
  EXPECT_TRUE(torch::equal(a.shallow, render(a.deep, a.disparity, 1.0, model.expansion, model.mask)));
}

TEST(ShallowDof, DepthPathComposition) {
  auto model = load_argan_model(init_checkpoint());
  auto depth = make_unet(UNetTarget::depth_estimator, 2);
  depth->eval();
  torch::manual_seed(6);
  auto deep = torch::rand({2, 3, 32, 32}) * 2 - 1;
  auto res = render_shallow_dof(deep, ShallowDofMode::argan_dr, nullptr, depth, &model);
  ASSERT_TRUE(res.disparity.has_value());
  auto direct = render(deep, depth->forward(deep), 1.0, model.expansion, model.mask);
  EXPECT_TRUE(torch::equal(res.image, direct));

  {
    torch::NoGradGuard no_grad;
    for (auto& p : depth->parameters()) p.zero_();
  }
  auto flat = render_shallow_dof(deep, ShallowDofMode::argan_dr, nullptr, depth, &model);
  EXPECT_LE((flat.image - deep).abs().max().item<float>(), 1e-6);
  EXPECT_THROW(render_shallow_dof(deep, ShallowDofMode::argan_dr, nullptr, depth, nullptr), AppError);
  EXPECT_THROW(render_shallow_dof(deep, ShallowDofMode::argan_r, nullptr, nullptr, nullptr), AppError);
}
