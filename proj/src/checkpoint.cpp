#include "argan/checkpoint.hpp"

namespace argan {

CheckpointWriter::CheckpointWriter(std::string format) { put("format", format); }

void CheckpointWriter::put(const std::string& key, const torch::nn::Module& module) {
  torch::serialize::OutputArchive sub;
  module.save(sub);
  archive_.write(key, sub);
}

void CheckpointWriter::put(const std::string& key, const torch::optim::Optimizer& optimizer) {
  torch::serialize::OutputArchive sub;
  optimizer.save(sub);
  archive_.write(key, sub);
}

void CheckpointWriter::put(const std::string& key, const std::string& text) {
  archive_.write(key, c10::IValue(text));
}

void CheckpointWriter::put(const std::string& key, int64_t value) {
  archive_.write(key, c10::IValue(value));
}

void CheckpointWriter::save(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  // Write to a sibling file first so an interrupted save never clobbers a
  // previous checkpoint.
  auto tmp = path;
  tmp += ".tmp";
  try {
    archive_.save_to(tmp.string());
  } catch (const c10::Error& e) {
    throw CheckpointError("cannot write checkpoint " + path.string() + ": " + e.what_without_backtrace());
  }
  std::filesystem::rename(tmp, path);
}

CheckpointReader::CheckpointReader(const std::filesystem::path& path, const std::string& format)
    : path_(path) {
  if (!std::filesystem::exists(path)) throw CheckpointError("checkpoint not found: " + path.string());
  try {
    archive_.load_from(path.string());
  } catch (const c10::Error& e) {
    throw CheckpointError("cannot read checkpoint " + path.string() + ": " + e.what_without_backtrace());
  }
  const auto tag = has("format") ? get_text("format") : std::string{};
  if (tag != format) {
    throw CheckpointError(path.string() + " is a '" + tag + "' archive, expected '" + format + "'");
  }
}

bool CheckpointReader::has(const std::string& key) {
  c10::IValue v;
  return archive_.try_read(key, v);
}

void CheckpointReader::get(const std::string& key, torch::nn::Module& module) {
  torch::serialize::InputArchive sub;
  if (!archive_.try_read(key, sub)) throw CheckpointError(path_.string() + ": missing entry '" + key + "'");
  try {
    module.load(sub);
  } catch (const c10::Error& e) {
    throw CheckpointError(path_.string() + ": entry '" + key + "' does not match the model: " +
                          e.what_without_backtrace());
  }
}

void CheckpointReader::get(const std::string& key, torch::optim::Optimizer& optimizer) {
  torch::serialize::InputArchive sub;
  if (!archive_.try_read(key, sub)) throw CheckpointError(path_.string() + ": missing entry '" + key + "'");
  optimizer.load(sub);
}

std::string CheckpointReader::get_text(const std::string& key) {
  c10::IValue v;
  if (!archive_.try_read(key, v) || !v.isString()) {
    throw CheckpointError(path_.string() + ": missing text entry '" + key + "'");
  }
  return v.toStringRef();
}

int64_t CheckpointReader::get_int(const std::string& key) {
  c10::IValue v;
  if (!archive_.try_read(key, v) || !v.isInt()) {
    throw CheckpointError(path_.string() + ": missing integer entry '" + key + "'");
  }
  return v.toInt();
}

}  // namespace argan
