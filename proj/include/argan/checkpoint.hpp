#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <torch/torch.h>

namespace argan {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thin wrappers over the libtorch archive: every module is stored as a
// sub-archive keyed by name, so parameters end up addressed hierarchically
// ("generator/up0/weight").
class CheckpointWriter {
 public:
  explicit CheckpointWriter(std::string format);

  void put(const std::string& key, const torch::nn::Module& module);
  void put(const std::string& key, const torch::optim::Optimizer& optimizer);
  void put(const std::string& key, const std::string& text);
  void put(const std::string& key, int64_t value);

  void save(const std::filesystem::path& path);

 private:
  torch::serialize::OutputArchive archive_;
};

class CheckpointReader {
 public:
  // Throws if the file is missing or its format tag differs.
  CheckpointReader(const std::filesystem::path& path, const std::string& format);

  void get(const std::string& key, torch::nn::Module& module);
  void get(const std::string& key, torch::optim::Optimizer& optimizer);
  std::string get_text(const std::string& key);
  int64_t get_int(const std::string& key);
  bool has(const std::string& key);

 private:
  std::filesystem::path path_;
  torch::serialize::InputArchive archive_;
};

}  // namespace argan
