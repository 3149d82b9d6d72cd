#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "argan/augment.hpp"
#include "argan/models.hpp"
#include "argan/objectives.hpp"

namespace argan {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Declarative description of one training run. Serialized as a flat
// `key = value` text file; `#` starts a comment.
struct TrainingConfig {
  int64_t image_size = 64;
  int64_t batch_size = 32;
  double learning_rate = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int64_t g_updates_per_d = 2;
  int64_t total_d_iterations = 150000;

  DoFScalePolicy dof_policy{};
  CenterFocusPriorConfig prior{.r_th = 0.25, .gain = 1.0, .weight = 1.0, .warmup_iters = 5000};
  double depth_weight = 1.0;  // lambda_d
  AblationMode ablation = AblationMode::none;
  double ablation_weight = 1.0;
  AugmentToggles augment{};
  double ema_decay = 0.999;

  uint64_t seed = 0;
  std::string dataset_path;
  // When > 0, train on an in-memory synthetic dataset instead of dataset_path.
  int64_t synthetic_count = 0;
  double synthetic_d_min = 1.0;
  double synthetic_d_max = 3.0;

  std::string output_dir = "argan-run";
  int64_t checkpoint_interval = 1000;
  int64_t sample_interval = 1000;
  int64_t sample_count = 8;
  uint64_t feature_seed = 0;

  int64_t channel_divisor = 1;
  int64_t latent_dim = 128;
  int64_t scale_hidden = 128;
  double max_disparity = 10.0;  // bound of the depth head, in pixels
  int aperture_size = 5;

  void validate() const;

  ModelOptions model_options() const;

  // Sets one key from its text form; unknown keys and malformed values throw.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  std::string to_text() const;
  static TrainingConfig from_text(const std::string& text);
  static TrainingConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

// Every key accepted by TrainingConfig::set, in serialization order.
const std::vector<std::string>& training_config_keys();

}  // namespace argan
