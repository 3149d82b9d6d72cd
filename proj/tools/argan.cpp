// argan: command-line entry point for training, sampling, rendering and evaluation.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "argan/apps.hpp"
#include "argan/config.hpp"
#include "argan/features.hpp"
#include "argan/metrics.hpp"
#include "argan/synthdata.hpp"
#include "argan/tensor_io.hpp"
#include "argan/trainer.hpp"

namespace fs = std::filesystem;
using namespace argan;

namespace {

struct Common {
  std::optional<uint64_t> seed;
  std::string config;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool out_required) {
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--config", c.config, "Config file (key = value lines)")->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", c.out, "Output path");
  if (out_required) out->required();
}

// Relative output paths land under $ARGAN_OUTPUT_ROOT when it is set.
fs::path output_path(const std::string& out) {
  fs::path p(out);
  if (p.is_relative()) {
    if (const char* root = std::getenv("ARGAN_OUTPUT_ROOT"); root && *root) return fs::path(root) / p;
  }
  return p;
}

TrainingConfig base_config(const Common& c) {
  return c.config.empty() ? TrainingConfig{} : TrainingConfig::load(c.config);
}

void log_resolved(const std::string& command, const std::vector<std::pair<std::string, std::string>>& values) {
  std::cerr << "[" << command << "]";
  for (const auto& [k, v] : values) std::cerr << ' ' << k << '=' << v;
  std::cerr << '\n';
}

std::string fixed6(int64_t i) {
  std::ostringstream os;
  os << std::setw(6) << std::setfill('0') << i;
  return os.str();
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::vector<std::string>& exts) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (e.is_regular_file() && std::find(exts.begin(), exts.end(), ext) != exts.end()) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  if (files.empty()) throw std::runtime_error("no matching files in " + dir.string());
  return files;
}

torch::Tensor load_image_dir(const fs::path& dir) {
  std::vector<torch::Tensor> images;
  for (const auto& f : sorted_files(dir, {".png", ".jpg", ".jpeg"})) images.push_back(read_image(f));
  for (const auto& im : images) {
    if (im.sizes() != images.front().sizes()) throw std::runtime_error("images in " + dir.string() + " differ in size");
  }
  return torch::stack(images);
}

torch::Tensor load_depth_dir(const fs::path& dir) {
  std::vector<torch::Tensor> maps;
  for (const auto& f : sorted_files(dir, {".npy"})) maps.push_back(read_disparity(f));
  return torch::stack(maps);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_disparity_pair(const fs::path& stem, const torch::Tensor& disparity) {
  write_npy(stem.string() + ".npy", disparity.squeeze(0));
  write_image(stem.string() + ".png", colorize_disparity(disparity));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aperture rendering GAN: training, sampling, rendering and evaluation"};
  app.require_subcommand(1);

  // train
  Common train_c;
  std::map<std::string, std::string> overrides;
  std::string resume;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "Train an AR-GAN");
  add_common(train, train_c, false);
  train->add_option("--resume", resume, "Checkpoint to resume from")->check(CLI::ExistingFile);
  train->add_flag("--quiet", quiet, "Suppress progress lines");
  for (const auto& key : training_config_keys()) {
    if (key == "seed" || key == "output_dir") continue;
    train->add_option("--" + key, overrides[key], "Config key " + key);
  }

  // generate
  Common gen_c;
  std::string gen_ckpt;
  int64_t gen_n = 8;
  auto* generate = app.add_subcommand("generate", "Sample (deep image, disparity, shallow image) tuples");
  add_common(generate, gen_c, true);
  generate->add_option("--checkpoint", gen_ckpt, "Training checkpoint")->required()->check(CLI::ExistingFile);
  generate->add_option("-n,--count", gen_n, "Number of samples")->check(CLI::PositiveNumber);

  // render
  Common ren_c;
  std::string ren_image, ren_depth, ren_mode, ren_ckpt, ren_unet;
  double ren_scale = 1.0;
  int64_t ren_aperture = 5;
  auto* render_cmd = app.add_subcommand("render", "Render shallow depth of field for one image");
  add_common(render_cmd, ren_c, true);
  render_cmd->add_option("--image", ren_image, "Input image")->required()->check(CLI::ExistingFile);
  auto* depth_opt = render_cmd->add_option("--depth", ren_depth, "Disparity (.npy or float image)")
                        ->check(CLI::ExistingFile);
  auto* mode_opt = render_cmd->add_option("--mode", ren_mode, "argan_r or argan_dr")
                       ->check(CLI::IsMember({"argan_r", "argan_dr"}));
  depth_opt->excludes(mode_opt);
  render_cmd->add_option("--scale", ren_scale, "Defocus scale s");
  render_cmd->add_option("--checkpoint", ren_ckpt, "AR-GAN checkpoint (expansion network)")
      ->check(CLI::ExistingFile);
  render_cmd->add_option("--unet", ren_unet, "u-net checkpoint for --mode")->check(CLI::ExistingFile);
  render_cmd->add_option("--aperture_size,--aperture-size", ren_aperture, "Aperture K without a checkpoint");

  // evaluate
  Common ev_c;
  std::string ev_real, ev_fake, ev_real_depth, ev_fake_depth, ev_metrics;
  int64_t ev_block = 1000;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Compute metrics between image/depth directories");
  add_common(evaluate_cmd, ev_c, true);
  evaluate_cmd->add_option("--real", ev_real, "Reference image directory")->check(CLI::ExistingDirectory);
  evaluate_cmd->add_option("--fake", ev_fake, "Generated image directory")->check(CLI::ExistingDirectory);
  evaluate_cmd->add_option("--real-depth", ev_real_depth, "Reference disparity directory")
      ->check(CLI::ExistingDirectory);
  evaluate_cmd->add_option("--fake-depth", ev_fake_depth, "Generated disparity directory")
      ->check(CLI::ExistingDirectory);
  evaluate_cmd->add_option("--metrics", ev_metrics, "Comma list: kid,ssim,feature_distance,side,dsd");
  evaluate_cmd->add_option("--kid-block", ev_block, "KID block size")->check(CLI::Range(2, 1 << 30));

  // predict-depth
  Common pd_c;
  std::string pd_image, pd_ckpt;
  auto* predict = app.add_subcommand("predict-depth", "Estimate disparity with a u-net");
  add_common(predict, pd_c, true);
  predict->add_option("--image", pd_image, "Input image")->required()->check(CLI::ExistingFile);
  predict->add_option("--checkpoint", pd_ckpt, "depth_estimator u-net checkpoint")
      ->required()
      ->check(CLI::ExistingFile);

  // make-synthetic
  Common ms_c;
  int64_t ms_n = 1000, ms_size = 64, ms_aperture = 5;
  double ms_dmin = 1.0, ms_dmax = 3.0;
  auto* make_syn = app.add_subcommand("make-synthetic", "Write a synthetic dataset with known disparity");
  add_common(make_syn, ms_c, true);
  make_syn->add_option("-n,--count", ms_n, "Number of scenes")->check(CLI::PositiveNumber);
  make_syn->add_option("--size", ms_size, "Image side");
  make_syn->add_option("--d-min", ms_dmin, "Minimum background disparity magnitude");
  make_syn->add_option("--d-max", ms_dmax, "Maximum background disparity magnitude");
  make_syn->add_option("--aperture_size,--aperture-size", ms_aperture, "Aperture K");

  // train-unet
  Common tu_c;
  std::string tu_ckpt, tu_target = "depth_estimator";
  int64_t tu_tuples = 1000;
  UNetTrainConfig tu_cfg;
  auto* train_unet_cmd = app.add_subcommand("train-unet", "Train AR-GAN-R / AR-GAN-DR u-nets on generated tuples");
  add_common(train_unet_cmd, tu_c, true);
  train_unet_cmd->add_option("--checkpoint", tu_ckpt, "AR-GAN training checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  train_unet_cmd->add_option("--target", tu_target, "dof_renderer or depth_estimator")
      ->check(CLI::IsMember({"dof_renderer", "depth_estimator"}));
  train_unet_cmd->add_option("--tuples", tu_tuples, "Generated training tuples")->check(CLI::PositiveNumber);
  train_unet_cmd->add_option("--iterations", tu_cfg.iterations, "Training iterations");
  train_unet_cmd->add_option("--batch-size", tu_cfg.batch_size, "Batch size");
  train_unet_cmd->add_option("--learning-rate", tu_cfg.learning_rate, "Adam step size");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      TrainingConfig cfg = resume.empty() || !train_c.config.empty() ? base_config(train_c)
                                                                      : read_checkpoint_config(resume);
      for (const auto& [key, value] : overrides) {
        if (train->count("--" + key) > 0) cfg.set(key, value);
      }
      if (train_c.seed) cfg.seed = *train_c.seed;
      if (!train_c.out.empty()) cfg.output_dir = output_path(train_c.out).string();
      else cfg.output_dir = output_path(cfg.output_dir).string();
      cfg.validate();
      std::cerr << "[train] resolved config:\n" << cfg.to_text();
      std::optional<fs::path> resume_path;
      if (!resume.empty()) resume_path = resume;
      const auto report = run_training(cfg, resume_path, !quiet);
      std::cout << report.final_checkpoint.string() << '\n';
    } else if (*generate) {
      auto model = load_argan_model(gen_ckpt);
      const uint64_t seed = gen_c.seed.value_or(base_config(gen_c).seed);
      const auto out = output_path(gen_c.out);
      log_resolved("generate", {{"checkpoint", gen_ckpt}, {"n", std::to_string(gen_n)},
                                {"seed", std::to_string(seed)}, {"out", out.string()}});
      const auto t = synthesize_tuples(model, gen_n, seed);
      const auto s = model.config.image_size;
      const auto rows = torch::stack({t.deep, t.shallow, depth_to_gray(t.disparity)}, 1).view({3 * gen_n, 3, s, s});
      write_image(out / "grid.png", tile_images(rows, 3));
      for (int64_t i = 0; i < gen_n; ++i) {
        write_image(out / "deep" / (fixed6(i) + ".png"), t.deep[i]);
        write_image(out / "shallow" / (fixed6(i) + ".png"), t.shallow[i]);
        write_disparity_pair(out / "disparity" / fixed6(i), t.disparity[i]);
      }
    } else if (*render_cmd) {
      if (ren_depth.empty() && ren_mode.empty()) throw std::runtime_error("render needs --depth or --mode");
      const auto out = output_path(ren_c.out);
      log_resolved("render", {{"image", ren_image}, {"depth", ren_depth}, {"mode", ren_mode},
                              {"scale", std::to_string(ren_scale)}, {"checkpoint", ren_ckpt},
                              {"unet", ren_unet}, {"out", out.string()}});
      std::optional<ArganModel> model;
      if (!ren_ckpt.empty()) model = load_argan_model(ren_ckpt);
      const auto image = read_image(ren_image).unsqueeze(0);
      if (!ren_depth.empty()) {
        const auto disparity = read_disparity(ren_depth).unsqueeze(0);
        if (disparity.size(2) != image.size(2) || disparity.size(3) != image.size(3)) {
          throw std::runtime_error("disparity and image sizes differ");
        }
        torch::NoGradGuard no_grad;
        const ApertureMask mask = model ? model->mask : ApertureMask(ren_aperture);
        const auto shallow = render(image, disparity, ren_scale, model ? model->expansion : DepthExpansionNetwork(nullptr), mask);
        write_image(out, shallow[0]);
      } else {
        if (ren_unet.empty()) throw std::runtime_error("--mode needs --unet");
        const auto mode = parse_shallow_dof_mode(ren_mode);
        UNetTarget target;
        auto net = load_unet(ren_unet, &target);
        const auto want = mode == ShallowDofMode::argan_r ? UNetTarget::dof_renderer : UNetTarget::depth_estimator;
        if (target != want) throw std::runtime_error("u-net target does not match --mode");
        if (mode == ShallowDofMode::argan_dr && !model) throw std::runtime_error("argan_dr needs --checkpoint");
        const auto result = mode == ShallowDofMode::argan_r
                                ? render_shallow_dof(image, mode, net, nullptr, nullptr)
                                : render_shallow_dof(image, mode, nullptr, net, &*model);
        write_image(out, result.image[0]);
        if (result.disparity) write_disparity_pair(out.parent_path() / (out.stem().string() + "_disparity"),
                                                   (*result.disparity)[0]);
      }
    } else if (*evaluate_cmd) {
      const auto out = output_path(ev_c.out);
      EvaluationInputs in;
      if (!ev_real.empty()) in.real_images = load_image_dir(ev_real);
      if (!ev_fake.empty()) in.fake_images = load_image_dir(ev_fake);
      if (!ev_real_depth.empty()) in.real_depth = load_depth_dir(ev_real_depth);
      if (!ev_fake_depth.empty()) in.fake_depth = load_depth_dir(ev_fake_depth);
      auto metrics = split_list(ev_metrics);
      if (metrics.empty()) {
        if (in.real_images.defined() && in.fake_images.defined()) metrics = {"kid", "ssim", "feature_distance"};
        if (in.fake_depth) {
          if (in.real_depth) metrics.push_back("side");
          metrics.push_back("dsd");
        }
      }
      if (metrics.empty()) throw std::runtime_error("evaluate needs --real/--fake or --fake-depth inputs");
      const uint64_t seed = ev_c.seed.value_or(base_config(ev_c).feature_seed);
      log_resolved("evaluate", {{"real", ev_real}, {"fake", ev_fake}, {"real-depth", ev_real_depth},
                                {"fake-depth", ev_fake_depth}, {"metrics", ev_metrics},
                                {"feature-seed", std::to_string(seed)}, {"out", out.string()}});
      auto extractor = make_default_extractor(seed);
      const auto report = evaluate(in, metrics, *extractor, ev_block);
      report.write(out);
      std::cout << report.to_json() << '\n';
    } else if (*predict) {
      const auto out = output_path(pd_c.out);
      log_resolved("predict-depth", {{"image", pd_image}, {"checkpoint", pd_ckpt}, {"out", out.string()}});
      UNetTarget target;
      auto net = load_unet(pd_ckpt, &target);
      if (target != UNetTarget::depth_estimator) throw std::runtime_error("checkpoint is not a depth_estimator u-net");
      torch::NoGradGuard no_grad;
      const auto disparity = net->forward(read_image(pd_image).unsqueeze(0))[0];
      auto stem = out;
      if (stem.extension() == ".npy" || stem.extension() == ".png") stem.replace_extension();
      write_disparity_pair(stem, disparity);
    } else if (*make_syn) {
      const auto cfg = base_config(ms_c);
      SyntheticParams p;
      p.count = ms_n;
      p.image_size = ms_size;
      p.seed = ms_c.seed.value_or(cfg.seed);
      p.d_min = ms_dmin;
      p.d_max = ms_dmax;
      p.aperture_size = ms_aperture;
      const auto out = output_path(ms_c.out);
      log_resolved("make-synthetic", {{"n", std::to_string(p.count)}, {"size", std::to_string(p.image_size)},
                                      {"seed", std::to_string(p.seed)}, {"d_min", std::to_string(p.d_min)},
                                      {"d_max", std::to_string(p.d_max)},
                                      {"aperture_size", std::to_string(p.aperture_size)}, {"out", out.string()}});
      save_synthetic_dataset(make_synthetic_dataset(p), p, out);
    } else if (*train_unet_cmd) {
      const auto target = parse_unet_target(tu_target);
      tu_cfg.seed = tu_c.seed.value_or(base_config(tu_c).seed);
      const auto out = output_path(tu_c.out);
      log_resolved("train-unet", {{"checkpoint", tu_ckpt}, {"target", tu_target},
                                  {"tuples", std::to_string(tu_tuples)},
                                  {"iterations", std::to_string(tu_cfg.iterations)},
                                  {"batch_size", std::to_string(tu_cfg.batch_size)},
                                  {"learning_rate", std::to_string(tu_cfg.learning_rate)},
                                  {"seed", std::to_string(tu_cfg.seed)}, {"out", out.string()}});
      auto model = load_argan_model(tu_ckpt);
      const auto t = synthesize_tuples(model, tu_tuples, tu_cfg.seed);
      const auto& targets = target == UNetTarget::dof_renderer ? t.shallow : t.disparity;
      const auto result = train_unet(t.deep, targets, target, tu_cfg);
      save_unet(result.net, target, out);
      if (!result.losses.empty()) {
        std::cerr << "[train-unet] final loss " << result.losses.back() << ", best " << result.best_so_far.back()
                  << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    if (const auto nl = msg.find('\n'); nl != std::string::npos) msg.resize(nl);
    std::cerr << "argan: error: " << msg << '\n';
    return 1;
  }
  return 0;
}
