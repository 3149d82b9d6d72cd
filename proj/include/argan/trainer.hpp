#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "argan/config.hpp"
#include "argan/features.hpp"
#include "argan/lfrender.hpp"
#include "argan/models.hpp"

namespace argan {

inline constexpr const char* kTrainCheckpointFormat = "argan-train-v1";

class NonFiniteLossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything that evolves during training. Randomness is not stored: each
// iteration derives its generators from (config.seed, iteration).
struct TrainState {
  TrainingConfig config;
  ApertureMask mask{5};
  Generator generator{nullptr};
  DepthExpansionNetwork expansion{nullptr};
  Discriminator discriminator{nullptr};
  // Second discriminator, fed only deep-DoF images (double_disc ablation).
  Discriminator deep_discriminator{nullptr};
  Generator ema_generator{nullptr};
  DepthExpansionNetwork ema_expansion{nullptr};
  std::unique_ptr<torch::optim::Adam> generator_optimizer;
  std::unique_ptr<torch::optim::Adam> discriminator_optimizer;
  std::unique_ptr<torch::optim::Adam> deep_discriminator_optimizer;
  std::shared_ptr<FeatureExtractor> extractor;  // perceptual ablation only
  torch::Tensor dataset;                        // N x 3 x S x S
  torch::Tensor prior_map;                      // 1 x 1 x S x S
  int64_t iteration = 0;
  // Count of optimizer step() calls, for auditing the update ratio.
  int64_t optimizer_steps = 0;

  std::vector<torch::Tensor> generator_parameters() const;
};

struct StepLog {
  int64_t iteration = 0;
  double d_loss = 0.0;
  double g_adv_loss = 0.0;  // mean over generator updates
  double depth_loss = 0.0;
  double content_loss = 0.0;
  std::optional<double> prior_loss;  // present only while the prior is active
  double wall_seconds = 0.0;

  std::string to_json() const;
};

// Training images for a config: an in-memory synthetic set when
// synthetic_count > 0, otherwise the ingested dataset_path folder.
torch::Tensor load_training_images(const TrainingConfig& config);

TrainState init_state(const TrainingConfig& config, torch::Tensor dataset);

// One discriminator update followed by g_updates_per_d generator updates.
StepLog train_step(TrainState& state);

void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
// Restores a state saved by save_checkpoint; `dataset` must match the config.
TrainState load_checkpoint(const std::filesystem::path& path, torch::Tensor dataset);
TrainingConfig read_checkpoint_config(const std::filesystem::path& path);

// EMA samples as rows of (deep image | shallow image | normalized depth).
torch::Tensor sample_grid(TrainState& state, int64_t count);

struct TrainingReport {
  std::filesystem::path final_checkpoint;
  int64_t iterations = 0;
  std::vector<StepLog> log;
};

// Runs (or resumes) training up to config.total_d_iterations, writing
// checkpoints/, samples/ and metrics.jsonl under config.output_dir.
TrainingReport run_training(const TrainingConfig& config,
                            const std::optional<std::filesystem::path>& resume = std::nullopt,
                            bool verbose = false);

}  // namespace argan
