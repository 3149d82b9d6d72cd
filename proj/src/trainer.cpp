#include "argan/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "argan/augment.hpp"
#include "argan/checkpoint.hpp"
#include "argan/objectives.hpp"
#include "argan/rng.hpp"
#include "argan/synthdata.hpp"
#include "argan/tensor_io.hpp"

namespace argan {
namespace {

namespace fs = std::filesystem;

void check_finite(const torch::Tensor& loss, const char* what, int64_t iteration) {
  if (!std::isfinite(loss.item<double>())) {
    throw NonFiniteLossError(std::string("non-finite ") + what + " at iteration " +
                             std::to_string(iteration));
  }
}

void set_requires_grad(torch::nn::Module& m, bool flag) {
  for (auto& p : m.parameters()) p.set_requires_grad(flag);
}

// DoF scales for one batch: mixture sampling in the default mode, s = 1 for
// the ablations that render every sample shallow.
torch::Tensor draw_scales(const TrainingConfig& cfg, int64_t n, at::Generator& gen) {
  if (cfg.ablation == AblationMode::none) return sample_dof_scale(cfg.dof_policy, n, gen);
  return torch::ones({n});
}

std::string checkpoint_name(int64_t iteration) {
  std::ostringstream os;
  os << "ckpt_" << std::setw(6) << std::setfill('0') << iteration << ".ckpt";
  return os.str();
}

std::unique_ptr<torch::optim::Adam> make_adam(std::vector<torch::Tensor> params, const TrainingConfig& c) {
  return std::make_unique<torch::optim::Adam>(
      std::move(params), torch::optim::AdamOptions(c.learning_rate).betas({c.beta1, c.beta2}));
}

}  // namespace

std::vector<torch::Tensor> TrainState::generator_parameters() const {
  auto params = generator->parameters();
  for (const auto& p : expansion->parameters()) params.push_back(p);
  return params;
}

std::string StepLog::to_json() const {
  nlohmann::json j{{"iteration", iteration},
                   {"d_loss", d_loss},
                   {"g_adv_loss", g_adv_loss},
                   {"depth_loss", depth_loss},
                   {"content_loss", content_loss},
                   {"wall_time", wall_seconds}};
  if (prior_loss) j["prior_loss"] = *prior_loss;
  return j.dump();
}

torch::Tensor load_training_images(const TrainingConfig& config) {
  if (config.synthetic_count > 0) {
    SyntheticParams p;
    p.count = config.synthetic_count;
    p.image_size = config.image_size;
    p.seed = mix_seed(config.seed, "training-data");
    p.d_min = config.synthetic_d_min;
    p.d_max = config.synthetic_d_max;
    p.aperture_size = config.aperture_size;
    return make_synthetic_dataset(p).images;
  }
  return ingest_folder(config.dataset_path, config.image_size).images;
}

TrainState init_state(const TrainingConfig& config, torch::Tensor dataset) {
  config.validate();
  if (!dataset.defined() || dataset.size(0) < 1) throw ConfigError("training dataset is empty");
  if (dataset.dim() != 4 || dataset.size(1) != 3 || dataset.size(2) != config.image_size ||
      dataset.size(3) != config.image_size) {
    throw ConfigError("training images must be N x 3 x image_size x image_size");
  }
  TrainState st;
  st.config = config;
  st.mask = ApertureMask(config.aperture_size);
  st.dataset = dataset.to(torch::kFloat32).contiguous();
  st.prior_map = center_focus_prior(config.image_size, config.image_size, config.prior);

  torch::manual_seed(mix_seed(config.seed, "init"));
  const auto opts = config.model_options();
  const auto views = st.mask.view_count();
  st.generator = Generator(opts);
  st.expansion = DepthExpansionNetwork(views);
  st.discriminator = Discriminator(opts);
  if (config.ablation == AblationMode::double_disc) st.deep_discriminator = Discriminator(opts);
  st.ema_generator = Generator(opts);
  st.ema_expansion = DepthExpansionNetwork(views);
  copy_module_state(*st.ema_generator, *st.generator);
  copy_module_state(*st.ema_expansion, *st.expansion);
  set_requires_grad(*st.ema_generator, false);
  set_requires_grad(*st.ema_expansion, false);

  st.generator_optimizer = make_adam(st.generator_parameters(), config);
  st.discriminator_optimizer = make_adam(st.discriminator->parameters(), config);
  if (!st.deep_discriminator.is_empty()) {
    st.deep_discriminator_optimizer = make_adam(st.deep_discriminator->parameters(), config);
  }
  if (config.ablation == AblationMode::perceptual) {
    st.extractor = make_default_extractor(config.feature_seed);
  }
  return st;
}

StepLog train_step(TrainState& st) {
  const auto start = std::chrono::steady_clock::now();
  const auto& cfg = st.config;
  const int64_t k = st.iteration;
  const int64_t b = cfg.batch_size;
  const int64_t s = cfg.image_size;
  const bool double_disc = cfg.ablation == AblationMode::double_disc;
  st.generator->train();
  st.expansion->train();
  st.discriminator->train();
  if (double_disc) st.deep_discriminator->train();

  StepLog log;
  log.iteration = k;

  // Discriminator update: real batch and rendered fake batch share one
  // augmentation draw.
  {
    auto gen = stream(cfg.seed, "d-step", static_cast<uint64_t>(k));
    const auto idx = torch::randint(0, st.dataset.size(0), {b}, gen, torch::kLong);
    const auto real = st.dataset.index_select(0, idx);
    torch::Tensor fake, fake_deep;
    {
      torch::NoGradGuard no_grad;
      const auto z = sample_latent(b, gen, cfg.latent_dim);
      const auto out = st.generator->forward(z);
      const auto scales = double_disc ? torch::ones({b}) : draw_scales(cfg, b, gen);
      fake = render_detailed(out.image, out.disparity, scales, st.expansion, st.mask).image;
      fake_deep = out.image;
    }
    const auto aug = draw_augment(b, s, s, cfg.augment, gen);
    auto augment = [&](const torch::Tensor& t) { return cfg.augment.any() ? apply_augment(t, aug) : t; };

    st.discriminator_optimizer->zero_grad();
    auto d_loss = gan_loss_discriminator(st.discriminator->forward(augment(real)),
                                         st.discriminator->forward(augment(fake)));
    if (double_disc) {
      st.deep_discriminator_optimizer->zero_grad();
      d_loss = d_loss + gan_loss_discriminator(st.deep_discriminator->forward(augment(real)),
                                               st.deep_discriminator->forward(augment(fake_deep)));
    }
    check_finite(d_loss, "discriminator loss", k);
    d_loss.backward();
    st.discriminator_optimizer->step();
    ++st.optimizer_steps;
    if (double_disc) {
      st.deep_discriminator_optimizer->step();
      ++st.optimizer_steps;
    }
    log.d_loss = d_loss.item<double>();
  }

  // Generator updates with fresh latents, scales and augmentation draws.
  set_requires_grad(*st.discriminator, false);
  if (double_disc) set_requires_grad(*st.deep_discriminator, false);
  double prior_sum = 0.0;
  for (int64_t j = 0; j < cfg.g_updates_per_d; ++j) {
    auto gen = stream(cfg.seed, "g-step", static_cast<uint64_t>(k), static_cast<uint64_t>(j));
    const auto z = sample_latent(b, gen, cfg.latent_dim);
    const auto scales = double_disc ? torch::ones({b}) : draw_scales(cfg, b, gen);
    const auto aug = draw_augment(b, s, s, cfg.augment, gen);
    auto augment = [&](const torch::Tensor& t) { return cfg.augment.any() ? apply_augment(t, aug) : t; };

    const auto out = st.generator->forward(z);
    const auto rendered = render_detailed(out.image, out.disparity, scales, st.expansion, st.mask);
    auto adv = gan_loss_generator(st.discriminator->forward(augment(rendered.image)));
    if (double_disc) adv = adv + gan_loss_generator(st.deep_discriminator->forward(augment(out.image)));
    const auto content =
        ablation_loss(cfg.ablation, out.image, rendered.image, st.extractor.get(), cfg.ablation_weight);
    // Through the live stack this term pushes D toward the tanh bound.
    const auto depth = expansion_regularizer(rendered.warped_depth, st.expansion, cfg.depth_weight);
    const auto prior = prior_loss(out.disparity, st.prior_map, cfg.prior.weight, k, cfg.prior.warmup_iters);
    const auto total = adv + content + depth + prior;
    check_finite(total, "generator loss", k);

    st.generator_optimizer->zero_grad();
    total.backward();
    st.generator_optimizer->step();
    ++st.optimizer_steps;
    ema_update(*st.ema_generator, *st.generator, cfg.ema_decay);
    ema_update(*st.ema_expansion, *st.expansion, cfg.ema_decay);

    const auto inv = 1.0 / static_cast<double>(cfg.g_updates_per_d);
    log.g_adv_loss += adv.item<double>() * inv;
    log.content_loss += content.item<double>() * inv;
    log.depth_loss += depth.item<double>() * inv;
    prior_sum += prior.item<double>() * inv;
  }
  set_requires_grad(*st.discriminator, true);
  if (double_disc) set_requires_grad(*st.deep_discriminator, true);
  if (prior_active(k, cfg.prior.warmup_iters)) log.prior_loss = prior_sum;

  ++st.iteration;
  log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return log;
}

void save_checkpoint(const TrainState& st, const fs::path& path) {
  CheckpointWriter w(kTrainCheckpointFormat);
  w.put("config", st.config.to_text());
  w.put("iteration", st.iteration);
  w.put("generator", *st.generator);
  w.put("expansion", *st.expansion);
  w.put("discriminator", *st.discriminator);
  w.put("ema_generator", *st.ema_generator);
  w.put("ema_expansion", *st.ema_expansion);
  w.put("generator_optimizer", *st.generator_optimizer);
  w.put("discriminator_optimizer", *st.discriminator_optimizer);
  if (!st.deep_discriminator.is_empty()) {
    w.put("deep_discriminator", *st.deep_discriminator);
    w.put("deep_discriminator_optimizer", *st.deep_discriminator_optimizer);
  }
  w.save(path);
}

TrainingConfig read_checkpoint_config(const fs::path& path) {
  CheckpointReader r(path, kTrainCheckpointFormat);
  return TrainingConfig::from_text(r.get_text("config"));
}

TrainState load_checkpoint(const fs::path& path, torch::Tensor dataset) {
  CheckpointReader r(path, kTrainCheckpointFormat);
  auto st = init_state(TrainingConfig::from_text(r.get_text("config")), std::move(dataset));
  st.iteration = r.get_int("iteration");
  r.get("generator", *st.generator);
  r.get("expansion", *st.expansion);
  r.get("discriminator", *st.discriminator);
  r.get("ema_generator", *st.ema_generator);
  r.get("ema_expansion", *st.ema_expansion);
  r.get("generator_optimizer", *st.generator_optimizer);
  r.get("discriminator_optimizer", *st.discriminator_optimizer);
  if (!st.deep_discriminator.is_empty()) {
    r.get("deep_discriminator", *st.deep_discriminator);
    r.get("deep_discriminator_optimizer", *st.deep_discriminator_optimizer);
  }
  return st;
}

torch::Tensor sample_grid(TrainState& st, int64_t count) {
  torch::NoGradGuard no_grad;
  st.ema_generator->eval();
  st.ema_expansion->eval();
  const auto z = sample_latent(count, st.config.seed, st.config.latent_dim);
  const auto out = st.ema_generator->forward(z);
  const auto shallow = render(out.image, out.disparity, 1.0, st.ema_expansion, st.mask);
  const auto triplets = torch::stack({out.image, shallow, depth_to_gray(out.disparity)}, 1);
  const auto s = st.config.image_size;
  return tile_images(triplets.view({3 * count, 3, s, s}), 3);
}

TrainingReport run_training(const TrainingConfig& config, const std::optional<fs::path>& resume,
                            bool verbose) {
  config.validate();
  auto dataset = load_training_images(config);
  TrainState st = resume ? load_checkpoint(*resume, dataset) : init_state(config, dataset);
  // Schedule keys may be extended on resume; everything else comes from the checkpoint.
  st.config.total_d_iterations = config.total_d_iterations;
  st.config.output_dir = config.output_dir;

  const fs::path out_dir = st.config.output_dir;
  fs::create_directories(out_dir / "checkpoints");
  fs::create_directories(out_dir / "samples");
  st.config.save(out_dir / "config.txt");
  std::ofstream metrics(out_dir / "metrics.jsonl", resume ? std::ios::app : std::ios::trunc);
  if (!metrics) throw std::runtime_error("cannot open metrics log in " + out_dir.string());

  TrainingReport report;
  const auto total = st.config.total_d_iterations;
  try {
    while (st.iteration < total) {
      auto log = train_step(st);
      metrics << log.to_json() << std::endl;
      if (!metrics) throw std::runtime_error("cannot write metrics log in " + out_dir.string());
      report.log.push_back(log);
      if (st.iteration % st.config.sample_interval == 0) {
        write_image(out_dir / "samples" / ("iter_" + std::to_string(st.iteration) + ".png"),
                    sample_grid(st, st.config.sample_count));
      }
      if (st.iteration % st.config.checkpoint_interval == 0 && st.iteration < total) {
        save_checkpoint(st, out_dir / "checkpoints" / checkpoint_name(st.iteration));
      }
      if (verbose && (st.iteration % 100 == 0 || st.iteration == total)) {
        std::cerr << "iter " << st.iteration << "/" << total << " d=" << log.d_loss
                  << " g=" << log.g_adv_loss << " depth=" << log.depth_loss
                  << (log.prior_loss ? " prior=" + std::to_string(*log.prior_loss) : std::string{})
                  << '\n';
      }
    }
  } catch (const NonFiniteLossError&) {
    save_checkpoint(st, out_dir / "checkpoints" / "diverged.ckpt");
    throw;
  }
  metrics.flush();

  report.iterations = st.iteration;
  report.final_checkpoint = out_dir / "checkpoints" / checkpoint_name(st.iteration);
  save_checkpoint(st, report.final_checkpoint);
  save_checkpoint(st, out_dir / "checkpoints" / "latest.ckpt");
  if (!report.log.empty()) {
    write_image(out_dir / "samples" / "final.png", sample_grid(st, st.config.sample_count));
  }
  return report;
}

}  // namespace argan
