#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace argan {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IngestResult {
  torch::Tensor images;  // N x 3 x S x S in [-1, 1]
  std::vector<std::filesystem::path> files;
  std::vector<std::filesystem::path> skipped;
};

// Decodes every PNG/JPEG under `dir` (sorted by file name), center-crops to a
// square and resizes to image_size. Undecodable files are skipped with a
// warning on stderr; an empty result is an error.
IngestResult ingest_folder(const std::filesystem::path& dir, int64_t image_size);

// Center crop + antialiased resize of one 3 x H x W image.
torch::Tensor crop_and_resize(const torch::Tensor& image, int64_t image_size);

struct SyntheticParams {
  int64_t count = 1000;
  int64_t image_size = 64;
  uint64_t seed = 0;
  double d_min = 1.0;
  double d_max = 3.0;
  int aperture_size = 5;

  void validate() const;
};

// Textured background at a per-image negative disparity behind a centered
// textured disc on the focal plane, rendered with an identity expansion
// network at a per-image DoF scale drawn uniformly from [0, 1].
struct SyntheticDataset {
  torch::Tensor sharp;       // N x 3 x S x S all-in-focus composite
  torch::Tensor images;      // N x 3 x S x S rendered at dof_scale
  torch::Tensor disparity;   // N x 1 x S x S ground truth
  torch::Tensor foreground;  // N x 1 x S x S boolean disc mask
  torch::Tensor dof_scale;   // N
};

SyntheticDataset make_synthetic_dataset(const SyntheticParams& params);

// The i-th scene alone, identical to entry i of make_synthetic_dataset.
SyntheticDataset make_synthetic_scene(const SyntheticParams& params, int64_t index);

// Writes images/, sharp/ (PNG), disparity/ (.npy) and manifest.json.
void save_synthetic_dataset(const SyntheticDataset& data, const SyntheticParams& params,
                            const std::filesystem::path& dir);

}  // namespace argan
