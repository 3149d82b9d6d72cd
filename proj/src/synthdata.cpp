#include "argan/synthdata.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "argan/lfrender.hpp"
#include "argan/rng.hpp"
#include "argan/tensor_io.hpp"

namespace argan {
namespace {

namespace F = torch::nn::functional;
namespace fs = std::filesystem;

bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

double uniform(at::Generator& gen, double lo, double hi) {
  return lo + (hi - lo) * torch::rand({1}, gen, torch::kFloat64).item<double>();
}

// Sum of random oriented gratings, S x S, roughly in [-1, 1].
torch::Tensor grating_texture(at::Generator& gen, int64_t size, int64_t waves, double min_period,
                              double max_period) {
  auto ys = torch::arange(size, torch::kFloat64).view({size, 1});
  auto xs = torch::arange(size, torch::kFloat64).view({1, size});
  auto acc = torch::zeros({size, size}, torch::kFloat64);
  for (int64_t k = 0; k < waves; ++k) {
    const double theta = uniform(gen, 0.0, std::numbers::pi);
    const double period = uniform(gen, min_period, max_period);
    const double phase = uniform(gen, 0.0, 2.0 * std::numbers::pi);
    const double freq = 2.0 * std::numbers::pi / period;
    acc = acc + torch::sin(freq * (std::cos(theta) * xs + std::sin(theta) * ys) + phase);
  }
  return acc / static_cast<double>(waves);
}

torch::Tensor random_color(at::Generator& gen, double lo, double hi) {
  return (lo + (hi - lo) * torch::rand({3}, gen, torch::kFloat64)).view({3, 1, 1});
}

struct Scene {
  torch::Tensor sharp;      // 3 x S x S
  torch::Tensor disparity;  // 1 x S x S
  torch::Tensor mask;       // 1 x S x S bool
  double scale = 0.0;
};

Scene build_scene(const SyntheticParams& p, int64_t index) {
  auto gen = stream(p.seed, "synthetic-scene", static_cast<uint64_t>(index));
  const auto s = p.image_size;
  const double sd = static_cast<double>(s);

  const auto bg_tex = grating_texture(gen, s, 3, sd / 10.0, sd / 4.0);
  const auto bg = (random_color(gen, -0.6, 0.6) + 0.35 * random_color(gen, 0.5, 1.0) * bg_tex).clamp(-1.0, 1.0);

  const double cx = (sd - 1.0) / 2.0 + uniform(gen, -sd / 16.0, sd / 16.0);
  const double cy = (sd - 1.0) / 2.0 + uniform(gen, -sd / 16.0, sd / 16.0);
  const double radius = uniform(gen, 0.2, 0.32) * sd;
  auto ys = torch::arange(s, torch::kFloat64).view({s, 1});
  auto xs = torch::arange(s, torch::kFloat64).view({1, s});
  auto dist2 = (xs - cx).pow(2) + (ys - cy).pow(2);
  auto mask = (dist2 <= radius * radius).view({1, s, s});

  const auto fg_tex = grating_texture(gen, s, 2, sd / 10.0, sd / 5.0);
  const auto fg = (random_color(gen, -0.7, 0.7) + 0.4 * random_color(gen, 0.5, 1.0) * fg_tex).clamp(-1.0, 1.0);

  const double depth = uniform(gen, p.d_min, p.d_max);
  Scene scene;
  scene.mask = mask;
  scene.sharp = torch::where(mask, fg, bg).to(torch::kFloat32);
  scene.disparity = torch::where(mask, torch::zeros({1, s, s}, torch::kFloat64),
                                 torch::full({1, s, s}, -depth, torch::kFloat64))
                        .to(torch::kFloat32);
  scene.scale = uniform(gen, 0.0, 1.0);
  return scene;
}

SyntheticDataset assemble(const SyntheticParams& params, int64_t first, int64_t count) {
  const ApertureMask mask(params.aperture_size);
  std::vector<torch::Tensor> sharp, depth, fgmask;
  std::vector<double> scales;
  for (int64_t i = first; i < first + count; ++i) {
    auto scene = build_scene(params, i);
    sharp.push_back(scene.sharp);
    depth.push_back(scene.disparity);
    fgmask.push_back(scene.mask);
    scales.push_back(scene.scale);
  }
  SyntheticDataset out;
  out.sharp = torch::stack(sharp);
  out.disparity = torch::stack(depth);
  out.foreground = torch::stack(fgmask);
  out.dof_scale = torch::tensor(scales, torch::kFloat64).to(torch::kFloat32);
  torch::NoGradGuard no_grad;
  out.images = render_detailed(out.sharp, out.disparity, out.dof_scale, nullptr, mask).image;
  return out;
}

}  // namespace

torch::Tensor crop_and_resize(const torch::Tensor& image, int64_t image_size) {
  const auto h = image.size(1);
  const auto w = image.size(2);
  const auto side = std::min(h, w);
  auto cropped = image.slice(1, (h - side) / 2, (h - side) / 2 + side)
                     .slice(2, (w - side) / 2, (w - side) / 2 + side);
  if (side == image_size) return cropped.contiguous();
  auto resized = F::interpolate(cropped.unsqueeze(0),
                                F::InterpolateFuncOptions()
                                    .size(std::vector<int64_t>{image_size, image_size})
                                    .mode(torch::kBilinear)
                                    .align_corners(false)
                                    .antialias(side > image_size));
  return resized.squeeze(0).clamp(-1.0, 1.0).contiguous();
}

IngestResult ingest_folder(const fs::path& dir, int64_t image_size) {
  if (!fs::is_directory(dir)) throw DataError("dataset directory not found: " + dir.string());
  std::vector<fs::path> candidates;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) candidates.push_back(entry.path());
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  IngestResult out;
  std::vector<torch::Tensor> images;
  for (const auto& path : candidates) {
    try {
      images.push_back(crop_and_resize(read_image(path), image_size));
      out.files.push_back(path);
    } catch (const IoError& e) {
      std::cerr << "warning: skipping " << path.string() << ": " << e.what() << '\n';
      out.skipped.push_back(path);
    }
  }
  if (!out.skipped.empty()) {
    std::cerr << "warning: " << out.skipped.size() << " of " << candidates.size()
              << " files in " << dir.string() << " could not be decoded\n";
  }
  if (images.empty()) throw DataError("no usable images in " + dir.string());
  out.images = torch::stack(images);
  return out;
}

void SyntheticParams::validate() const {
  if (count < 1) throw DataError("synthetic dataset needs count >= 1");
  if (image_size < 8) throw DataError("synthetic image_size must be >= 8");
  if (!(d_min > 0.0 && d_min <= d_max && d_max < 10.0)) {
    throw DataError("synthetic disparity range must satisfy 0 < d_min <= d_max < 10");
  }
}

SyntheticDataset make_synthetic_dataset(const SyntheticParams& params) {
  params.validate();
  return assemble(params, 0, params.count);
}

SyntheticDataset make_synthetic_scene(const SyntheticParams& params, int64_t index) {
  params.validate();
  return assemble(params, index, 1);
}

void save_synthetic_dataset(const SyntheticDataset& data, const SyntheticParams& params,
                            const fs::path& dir) {
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "sharp");
  fs::create_directories(dir / "disparity");
  nlohmann::json files = nlohmann::json::array();
  const auto n = data.images.size(0);
  for (int64_t i = 0; i < n; ++i) {
    std::ostringstream name;
    name << std::setw(6) << std::setfill('0') << i;
    write_image(dir / "images" / (name.str() + ".png"), data.images[i]);
    write_image(dir / "sharp" / (name.str() + ".png"), data.sharp[i]);
    write_npy(dir / "disparity" / (name.str() + ".npy"), data.disparity[i][0]);
    files.push_back({{"name", name.str()}, {"dof_scale", data.dof_scale[i].item<double>()}});
  }
  nlohmann::json manifest{
      {"generator", "argan-synthetic"},
      {"count", params.count},
      {"image_size", params.image_size},
      {"seed", params.seed},
      {"d_min", params.d_min},
      {"d_max", params.d_max},
      {"aperture_size", params.aperture_size},
      {"files", files},
  };
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw DataError("cannot write manifest in " + dir.string());
}

}  // namespace argan
