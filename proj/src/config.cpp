#include "argan/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace argan {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

int64_t parse_int(const std::string& key, const std::string& v) {
  int64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return out;
}

uint64_t parse_uint(const std::string& key, const std::string& v) {
  uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "' expects true/false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string fmt(bool v) { return v ? "true" : "false"; }

struct Field {
  std::string key;
  std::function<void(TrainingConfig&, const std::string&)> set;
  std::function<std::string(const TrainingConfig&)> get;
};

#define ARGAN_INT_FIELD(name, member)                                                       \
  Field {                                                                                   \
    name, [](TrainingConfig& c, const std::string& v) { c.member = parse_int(name, v); },   \
        [](const TrainingConfig& c) { return std::to_string(c.member); }                    \
  }
#define ARGAN_UINT_FIELD(name, member)                                                      \
  Field {                                                                                   \
    name, [](TrainingConfig& c, const std::string& v) { c.member = parse_uint(name, v); },  \
        [](const TrainingConfig& c) { return std::to_string(c.member); }                    \
  }
#define ARGAN_REAL_FIELD(name, member)                                                       \
  Field {                                                                                    \
    name, [](TrainingConfig& c, const std::string& v) { c.member = parse_double(name, v); }, \
        [](const TrainingConfig& c) { return fmt(c.member); }                                \
  }
#define ARGAN_BOOL_FIELD(name, member)                                                     \
  Field {                                                                                  \
    name, [](TrainingConfig& c, const std::string& v) { c.member = parse_bool(name, v); }, \
        [](const TrainingConfig& c) { return fmt(c.member); }                              \
  }
#define ARGAN_STRING_FIELD(name, member)                                    \
  Field {                                                                   \
    name, [](TrainingConfig& c, const std::string& v) { c.member = v; },    \
        [](const TrainingConfig& c) { return c.member; }                    \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      ARGAN_INT_FIELD("image_size", image_size),
      ARGAN_INT_FIELD("batch_size", batch_size),
      ARGAN_REAL_FIELD("learning_rate", learning_rate),
      ARGAN_REAL_FIELD("beta1", beta1),
      ARGAN_REAL_FIELD("beta2", beta2),
      ARGAN_INT_FIELD("g_updates_per_d", g_updates_per_d),
      ARGAN_INT_FIELD("total_d_iterations", total_d_iterations),
      Field{"dof_policy",
            [](TrainingConfig& c, const std::string& v) { c.dof_policy.kind = parse_dof_policy_kind(v); },
            [](const TrainingConfig& c) { return to_string(c.dof_policy.kind); }},
      ARGAN_REAL_FIELD("p_s", dof_policy.p_s),
      ARGAN_REAL_FIELD("prior_r_th", prior.r_th),
      ARGAN_REAL_FIELD("prior_gain", prior.gain),
      ARGAN_REAL_FIELD("prior_weight", prior.weight),
      ARGAN_INT_FIELD("prior_warmup_iters", prior.warmup_iters),
      ARGAN_REAL_FIELD("depth_weight", depth_weight),
      Field{"ablation",
            [](TrainingConfig& c, const std::string& v) { c.ablation = parse_ablation_mode(v); },
            [](const TrainingConfig& c) { return to_string(c.ablation); }},
      ARGAN_REAL_FIELD("ablation_weight", ablation_weight),
      ARGAN_BOOL_FIELD("augment_color", augment.color),
      ARGAN_BOOL_FIELD("augment_translation", augment.translation),
      ARGAN_BOOL_FIELD("augment_cutout", augment.cutout),
      ARGAN_REAL_FIELD("ema_decay", ema_decay),
      ARGAN_UINT_FIELD("seed", seed),
      ARGAN_STRING_FIELD("dataset_path", dataset_path),
      ARGAN_INT_FIELD("synthetic_count", synthetic_count),
      ARGAN_REAL_FIELD("synthetic_d_min", synthetic_d_min),
      ARGAN_REAL_FIELD("synthetic_d_max", synthetic_d_max),
      ARGAN_STRING_FIELD("output_dir", output_dir),
      ARGAN_INT_FIELD("checkpoint_interval", checkpoint_interval),
      ARGAN_INT_FIELD("sample_interval", sample_interval),
      ARGAN_INT_FIELD("sample_count", sample_count),
      ARGAN_UINT_FIELD("feature_seed", feature_seed),
      ARGAN_INT_FIELD("channel_divisor", channel_divisor),
      ARGAN_INT_FIELD("latent_dim", latent_dim),
      ARGAN_INT_FIELD("scale_hidden", scale_hidden),
      ARGAN_REAL_FIELD("max_disparity", max_disparity),
      ARGAN_INT_FIELD("aperture_size", aperture_size),
  };
  return table;
}

#undef ARGAN_INT_FIELD
#undef ARGAN_UINT_FIELD
#undef ARGAN_REAL_FIELD
#undef ARGAN_BOOL_FIELD
#undef ARGAN_STRING_FIELD

const Field& find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

const std::vector<std::string>& training_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
  }();
  return keys;
}

void TrainingConfig::set(const std::string& key, const std::string& value) {
  try {
    find_field(key).set(*this, trim(value));
  } catch (const ObjectiveError& e) {
    throw ConfigError(e.what());
  }
}

std::string TrainingConfig::get(const std::string& key) const { return find_field(key).get(*this); }

void TrainingConfig::validate() const {
  try {
    upsampling_stages(image_size);
  } catch (const ModelError& e) {
    throw ConfigError(e.what());
  }
  if (image_size < 16) throw ConfigError("image_size must be >= 16");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (g_updates_per_d < 1) throw ConfigError("g_updates_per_d must be >= 1");
  if (total_d_iterations < 0) throw ConfigError("total_d_iterations must be >= 0");
  if (!(depth_weight >= 0.0)) throw ConfigError("depth_weight must be >= 0");
  if (!(ablation_weight >= 0.0)) throw ConfigError("ablation_weight must be >= 0");
  if (!(ema_decay >= 0.0 && ema_decay <= 1.0)) throw ConfigError("ema_decay must lie in [0, 1]");
  if (checkpoint_interval < 1 || sample_interval < 1) throw ConfigError("intervals must be >= 1");
  if (sample_count < 1) throw ConfigError("sample_count must be >= 1");
  if (synthetic_count < 0) throw ConfigError("synthetic_count must be >= 0");
  if (synthetic_count == 0 && dataset_path.empty()) {
    throw ConfigError("either dataset_path or synthetic_count must be given");
  }
  if (channel_divisor < 1 || latent_dim < 1 || scale_hidden < 1) {
    throw ConfigError("network sizes must be positive");
  }
  if (!(max_disparity > 0.0)) throw ConfigError("max_disparity must be > 0");
  if (aperture_size < 1 || aperture_size % 2 == 0) throw ConfigError("aperture_size must be odd");
  try {
    dof_policy.validate();
    prior.validate();
  } catch (const ObjectiveError& e) {
    throw ConfigError(e.what());
  }
}

ModelOptions TrainingConfig::model_options() const {
  ModelOptions o;
  o.image_size = image_size;
  o.latent_dim = latent_dim;
  o.channel_divisor = channel_divisor;
  o.scale_hidden = scale_hidden;
  o.max_disparity = max_disparity;
  return o;
}

std::string TrainingConfig::to_text() const {
  std::ostringstream os;
  for (const auto& f : fields()) os << f.key << " = " << f.get(*this) << '\n';
  return os.str();
}

TrainingConfig TrainingConfig::from_text(const std::string& text) {
  TrainingConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

TrainingConfig TrainingConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return from_text(os.str());
}

void TrainingConfig::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out << to_text();
  if (!out) throw ConfigError("cannot write config file: " + path.string());
}

}  // namespace argan
