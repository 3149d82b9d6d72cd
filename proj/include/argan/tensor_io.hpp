#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <torch/torch.h>

namespace argan {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Disparity interchange format: NumPy .npy (version 1.0 header), little-endian
// float32, C order. Reading also accepts float64 and converts.
void write_npy(const std::filesystem::path& path, const torch::Tensor& values);
torch::Tensor read_npy(const std::filesystem::path& path);

// Images are exchanged as 3xHxW float tensors in [-1, 1], RGB channel order.
torch::Tensor read_image(const std::filesystem::path& path);
// Accepts 3xHxW or 1xHxW in [-1, 1]; values are clamped and rounded to 8 bit.
void write_image(const std::filesystem::path& path, const torch::Tensor& image);

// A disparity map from either an .npy file or a single-channel
// floating-point image (TIFF/EXR/PFM). Returns 1xHxW float.
torch::Tensor read_disparity(const std::filesystem::path& path);

// Min/max normalized depth rendered through a perceptual colormap, 3xHxW in [-1, 1].
torch::Tensor colorize_disparity(const torch::Tensor& disparity);

// Depth normalized per map to [-1, 1] and replicated to 3 channels.
torch::Tensor depth_to_gray(const torch::Tensor& disparity);

// Tiles a batch NxCxHxW into a grid with `columns` images per row.
torch::Tensor tile_images(const torch::Tensor& batch, int64_t columns, int64_t padding = 1);

}  // namespace argan
