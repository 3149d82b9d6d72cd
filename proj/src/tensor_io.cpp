#include "argan/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace argan {
namespace {

static_assert(std::endian::native == std::endian::little,
              "npy reader assumes a little-endian host");

constexpr std::array<char, 6> kNpyMagic = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

std::string shape_tuple(const torch::Tensor& t) {
  std::ostringstream os;
  os << '(';
  for (int64_t d = 0; d < t.dim(); ++d) {
    os << t.size(d);
    if (t.dim() == 1 || d + 1 < t.dim()) os << ", ";
  }
  os << ')';
  return os.str();
}

cv::Mat to_bgr8(const torch::Tensor& image) {
  auto img = image.detach().to(torch::kCPU, torch::kFloat32);
  if (img.dim() == 4 && img.size(0) == 1) img = img.squeeze(0);
  if (img.dim() != 3 || (img.size(0) != 3 && img.size(0) != 1)) {
    throw IoError("write_image expects a 3xHxW or 1xHxW tensor");
  }
  if (img.size(0) == 1) img = img.expand({3, img.size(1), img.size(2)});
  auto bytes = ((img.clamp(-1.0, 1.0) + 1.0) * 127.5)
                   .round()
                   .to(torch::kUInt8)
                   .permute({1, 2, 0})
                   .flip({2})
                   .contiguous();
  cv::Mat mat(static_cast<int>(bytes.size(0)), static_cast<int>(bytes.size(1)), CV_8UC3);
  std::memcpy(mat.data, bytes.data_ptr<uint8_t>(), bytes.numel());
  return mat;
}

}  // namespace

void write_npy(const std::filesystem::path& path, const torch::Tensor& values) {
  auto data = values.detach().to(torch::kCPU, torch::kFloat32).contiguous();
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': " +
                       shape_tuple(data) + ", }";
  // Magic (6) + version (2) + length (2) + header must be 64-byte aligned.
  const size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  header.push_back('\n');

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(kNpyMagic.data(), kNpyMagic.size());
  const char version[2] = {1, 0};
  out.write(version, 2);
  const auto len = static_cast<uint16_t>(header.size());
  out.write(reinterpret_cast<const char*>(&len), 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(data.data_ptr<float>()),
            static_cast<std::streamsize>(data.numel() * sizeof(float)));
  if (!out) throw IoError("write failed: " + path.string());
}

torch::Tensor read_npy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::array<char, 6> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kNpyMagic) throw IoError("not an npy file: " + path.string());
  char version[2];
  in.read(version, 2);
  uint32_t header_len = 0;
  if (version[0] == 1) {
    uint16_t len16 = 0;
    in.read(reinterpret_cast<char*>(&len16), 2);
    header_len = len16;
  } else if (version[0] == 2 || version[0] == 3) {
    in.read(reinterpret_cast<char*>(&header_len), 4);
  } else {
    throw IoError("unsupported npy version in " + path.string());
  }
  std::string header(header_len, '\0');
  in.read(header.data(), header_len);
  if (!in) throw IoError("truncated npy header: " + path.string());

  std::smatch m;
  if (!std::regex_search(header, m, std::regex("'descr':\\s*'([^']+)'"))) {
    throw IoError("npy header lacks descr: " + path.string());
  }
  const std::string descr = m[1];
  if (std::regex_search(header, std::regex("'fortran_order':\\s*True"))) {
    throw IoError("fortran-ordered npy arrays are not supported: " + path.string());
  }
  if (!std::regex_search(header, m, std::regex("'shape':\\s*\\(([^)]*)\\)"))) {
    throw IoError("npy header lacks shape: " + path.string());
  }
  std::vector<int64_t> shape;
  const std::string dims = m[1];
  const std::regex num("\\d+");
  for (auto it = std::sregex_iterator(dims.begin(), dims.end(), num);
       it != std::sregex_iterator(); ++it) {
    shape.push_back(std::stoll(it->str()));
  }

  torch::ScalarType dtype;
  size_t elem = 0;
  if (descr == "<f4") {
    dtype = torch::kFloat32;
    elem = 4;
  } else if (descr == "<f8") {
    dtype = torch::kFloat64;
    elem = 8;
  } else {
    throw IoError("unsupported npy dtype '" + descr + "' in " + path.string());
  }
  auto out = torch::empty(shape, torch::TensorOptions().dtype(dtype));
  in.read(static_cast<char*>(out.data_ptr()),
          static_cast<std::streamsize>(out.numel() * elem));
  if (!in) throw IoError("truncated npy payload: " + path.string());
  return out.to(torch::kFloat32);
}

torch::Tensor read_image(const std::filesystem::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (mat.empty()) throw IoError("cannot decode image: " + path.string());
  cv::cvtColor(mat, mat, cv::COLOR_BGR2RGB);
  auto bytes = torch::from_blob(mat.data, {mat.rows, mat.cols, 3}, torch::kUInt8).clone();
  return bytes.permute({2, 0, 1}).to(torch::kFloat32).div(127.5).sub(1.0).contiguous();
}

void write_image(const std::filesystem::path& path, const torch::Tensor& image) {
  const cv::Mat mat = to_bgr8(image);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), mat)) throw IoError("cannot write image: " + path.string());
}

torch::Tensor read_disparity(const std::filesystem::path& path) {
  if (path.extension() == ".npy") {
    auto d = read_npy(path);
    while (d.dim() > 2 && d.size(0) == 1) d = d.squeeze(0);
    if (d.dim() == 3 && d.size(2) == 1) d = d.squeeze(2);
    if (d.dim() != 2) throw IoError("disparity array must be 2-D: " + path.string());
    return d.unsqueeze(0).contiguous();
  }
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw IoError("cannot decode disparity image: " + path.string());
  if (mat.channels() != 1) throw IoError("disparity image must be single-channel: " + path.string());
  if (mat.depth() != CV_32F && mat.depth() != CV_64F) {
    throw IoError("disparity image must be floating point: " + path.string());
  }
  mat.convertTo(mat, CV_32F);
  return torch::from_blob(mat.data, {1, mat.rows, mat.cols}, torch::kFloat32).clone();
}

torch::Tensor colorize_disparity(const torch::Tensor& disparity) {
  auto d = disparity.detach().to(torch::kCPU, torch::kFloat32).reshape({disparity.size(-2), disparity.size(-1)});
  const double lo = d.min().item<double>();
  const double hi = d.max().item<double>();
  auto norm = hi > lo ? (d - lo) / (hi - lo) : torch::zeros_like(d);
  auto bytes = (norm * 255.0).round().to(torch::kUInt8).contiguous();
  cv::Mat gray(static_cast<int>(bytes.size(0)), static_cast<int>(bytes.size(1)), CV_8UC1,
               bytes.data_ptr<uint8_t>());
  cv::Mat color;
  cv::applyColorMap(gray, color, cv::COLORMAP_VIRIDIS);
  cv::cvtColor(color, color, cv::COLOR_BGR2RGB);
  auto rgb = torch::from_blob(color.data, {color.rows, color.cols, 3}, torch::kUInt8).clone();
  return rgb.permute({2, 0, 1}).to(torch::kFloat32).div(127.5).sub(1.0).contiguous();
}

torch::Tensor depth_to_gray(const torch::Tensor& disparity) {
  auto d = disparity.detach().to(torch::kFloat32);
  const auto n = d.size(0);
  auto flat = d.reshape({n, -1});
  auto lo = std::get<0>(flat.min(1, true));
  auto hi = std::get<0>(flat.max(1, true));
  auto span = (hi - lo).clamp_min(1e-8);
  auto norm = ((flat - lo) / span * 2.0 - 1.0).reshape(d.sizes());
  return norm.expand({n, 3, d.size(2), d.size(3)}).contiguous();
}

torch::Tensor tile_images(const torch::Tensor& batch, int64_t columns, int64_t padding) {
  const auto n = batch.size(0);
  const auto c = batch.size(1);
  const auto h = batch.size(2);
  const auto w = batch.size(3);
  const auto rows = (n + columns - 1) / columns;
  auto grid = torch::full({c, rows * (h + padding) + padding, columns * (w + padding) + padding},
                          -1.0, batch.options());
  auto src = batch.detach();
  for (int64_t i = 0; i < n; ++i) {
    const auto r = i / columns;
    const auto col = i % columns;
    const auto y = padding + r * (h + padding);
    const auto x = padding + col * (w + padding);
    grid.slice(1, y, y + h).slice(2, x, x + w).copy_(src[i]);
  }
  return grid;
}

}  // namespace argan
