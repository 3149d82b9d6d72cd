#include "argan/metrics.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "argan/features.hpp"

namespace argan {
namespace {

namespace F = torch::nn::functional;

torch::Tensor as_maps(const torch::Tensor& t) {
  auto d = t.detach().to(torch::kFloat64);
  if (d.dim() == 2) return d.unsqueeze(0).unsqueeze(0);
  if (d.dim() == 3) return d.unsqueeze(1);
  if (d.dim() != 4 || d.size(1) != 1) throw MetricError("depth maps must be B x 1 x H x W or H x W");
  return d;
}

double offdiag_sum(const torch::Tensor& k) {
  return k.sum().item<double>() - k.diagonal().sum().item<double>();
}

torch::Tensor gaussian_window(int64_t size, double sigma) {
  auto coords = torch::arange(size, torch::kFloat64) - static_cast<double>(size - 1) / 2.0;
  auto g = torch::exp(-(coords * coords) / (2.0 * sigma * sigma));
  g = g / g.sum();
  return torch::outer(g, g);
}

}  // namespace

torch::Tensor polynomial_kernel(const torch::Tensor& x, const torch::Tensor& y) {
  const double d = static_cast<double>(x.size(1));
  return (torch::mm(x, y.t()) / d + 1.0).pow(3);
}

double mmd2_unbiased(const torch::Tensor& x, const torch::Tensor& y) {
  const auto m = x.size(0);
  const auto n = y.size(0);
  if (m < 2 || n < 2) throw MetricError("MMD needs at least 2 samples per set");
  const auto xd = x.to(torch::kFloat64);
  const auto yd = y.to(torch::kFloat64);
  const double kxx = offdiag_sum(polynomial_kernel(xd, xd)) / static_cast<double>(m * (m - 1));
  const double kyy = offdiag_sum(polynomial_kernel(yd, yd)) / static_cast<double>(n * (n - 1));
  const double kxy = polynomial_kernel(xd, yd).sum().item<double>() / static_cast<double>(m * n);
  return kxx + kyy - 2.0 * kxy;
}

KidResult kid(const torch::Tensor& real_features, const torch::Tensor& fake_features,
              int64_t block_size) {
  if (real_features.dim() != 2 || fake_features.dim() != 2) {
    throw MetricError("KID features must be n x d matrices");
  }
  if (real_features.size(1) != fake_features.size(1)) {
    throw MetricError("KID feature dimensions differ: " + std::to_string(real_features.size(1)) +
                      " vs " + std::to_string(fake_features.size(1)));
  }
  const auto n = std::min(real_features.size(0), fake_features.size(0));
  if (n < 2) throw MetricError("KID needs at least 2 samples per set");
  if (block_size < 2) throw MetricError("KID block size must be >= 2");

  KidResult out;
  out.block_size = std::min(block_size, n);
  out.blocks = n / out.block_size;
  std::vector<double> values;
  for (int64_t b = 0; b < out.blocks; ++b) {
    const auto lo = b * out.block_size;
    const auto hi = lo + out.block_size;
    values.push_back(mmd2_unbiased(real_features.slice(0, lo, hi), fake_features.slice(0, lo, hi)));
  }
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  if (values.size() > 1) {
    for (const double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size() - 1);
  }
  out.estimate = mean;
  out.stddev = std::sqrt(var);
  return out;
}

double side(const torch::Tensor& estimate, const torch::Tensor& reference) {
  const auto est = as_maps(estimate);
  const auto ref = as_maps(reference);
  if (est.sizes() != ref.sizes()) throw MetricError("SIDE inputs disagree in shape");
  if (!torch::isfinite(est).all().item<bool>() || !torch::isfinite(ref).all().item<bool>()) {
    throw MetricError("SIDE inputs must be finite");
  }
  const auto b = est.size(0);
  double total = 0.0;
  for (int64_t i = 0; i < b; ++i) {
    const auto h = est[i].flatten();
    const auto r = ref[i].flatten();
    const auto rc = r - r.mean();
    const double ref_var = rc.pow(2).mean().item<double>();
    if (!(ref_var > 0.0)) throw MetricError("SIDE reference map has zero variance");
    const auto hc = h - h.mean();
    const double est_var = hc.pow(2).mean().item<double>();
    double scale = 0.0;
    if (est_var > 0.0) scale = std::max(0.0, (hc * rc).mean().item<double>() / est_var);
    const auto e = scale * hc - rc;
    const double mean_e = e.mean().item<double>();
    const double var_e = e.pow(2).mean().item<double>() - mean_e * mean_e;
    total += std::sqrt(std::max(0.0, var_e));
  }
  return total / static_cast<double>(b);
}

double feature_distance(const torch::Tensor& a, const torch::Tensor& b, FeatureExtractor& extractor) {
  if (a.sizes() != b.sizes()) throw MetricError("feature_distance inputs disagree in shape");
  torch::NoGradGuard no_grad;
  const auto fa = extractor.layers(a.to(torch::kFloat32));
  const auto fb = extractor.layers(b.to(torch::kFloat32));
  double total = 0.0;
  for (size_t l = 0; l < fa.size(); ++l) {
    auto opts = F::NormalizeFuncOptions().dim(1).eps(1e-10);
    const auto na = F::normalize(fa[l].to(torch::kFloat64), opts);
    const auto nb = F::normalize(fb[l].to(torch::kFloat64), opts);
    total += (na - nb).pow(2).sum(1).mean().item<double>();
  }
  return total / static_cast<double>(fa.size());
}

double ssim(const torch::Tensor& a, const torch::Tensor& b) {
  if (a.sizes() != b.sizes()) throw MetricError("ssim inputs disagree in shape");
  auto x = ((a.detach().to(torch::kFloat64) + 1.0) / 2.0);
  auto y = ((b.detach().to(torch::kFloat64) + 1.0) / 2.0);
  if (x.dim() == 3) {
    x = x.unsqueeze(0);
    y = y.unsqueeze(0);
  }
  if (x.dim() != 4) throw MetricError("ssim expects B x C x H x W images");
  constexpr int64_t kWindow = 11;
  if (x.size(2) < kWindow || x.size(3) < kWindow) throw MetricError("ssim needs images of at least 11x11");
  const auto c = x.size(1);
  const auto window = gaussian_window(kWindow, 1.5).view({1, 1, kWindow, kWindow}).repeat({c, 1, 1, 1});
  auto filt = [&](const torch::Tensor& t) {
    return F::conv2d(t, window, F::Conv2dFuncOptions().groups(c));
  };
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const auto mx = filt(x);
  const auto my = filt(y);
  const auto sxx = filt(x * x) - mx * mx;
  const auto syy = filt(y * y) - my * my;
  const auto sxy = filt(x * y) - mx * my;
  const auto map = ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) /
                   ((mx * mx + my * my + c1) * (sxx + syy + c2));
  return map.mean().item<double>();
}

double dsd(const torch::Tensor& depths) {
  const auto d = as_maps(depths);
  if (d.size(0) < 2) throw MetricError("DSD needs a batch of at least 2 maps");
  return d.std(/*unbiased=*/false).item<double>();
}

torch::Tensor ad(const torch::Tensor& depths) {
  const auto d = as_maps(depths);
  if (d.size(0) < 1) throw MetricError("AD needs a non-empty batch");
  return d.mean(0, /*keepdim=*/true);
}

const MetricEntry* MetricReport::find(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::string MetricReport::to_json() const {
  nlohmann::json j;
  j["metrics"] = nlohmann::json::array();
  for (const auto& e : entries_) {
    nlohmann::json item{{"name", e.name}, {"value", e.value}, {"samples", e.samples}};
    if (e.stddev) item["std"] = *e.stddev;
    if (e.extractor) item["extractor"] = *e.extractor;
    j["metrics"].push_back(item);
  }
  return j.dump(2);
}

MetricReport MetricReport::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  MetricReport report;
  for (const auto& item : j.at("metrics")) {
    MetricEntry e;
    e.name = item.at("name").get<std::string>();
    e.value = item.at("value").get<double>();
    e.samples = item.at("samples").get<int64_t>();
    if (item.contains("std")) e.stddev = item.at("std").get<double>();
    if (item.contains("extractor")) e.extractor = item.at("extractor").get<std::string>();
    report.add(std::move(e));
  }
  return report;
}

void MetricReport::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metric report: " + path.string());
  out << to_json() << '\n';
}

MetricReport evaluate(const EvaluationInputs& in, const std::vector<std::string>& metrics,
                      FeatureExtractor& extractor, int64_t kid_block_size) {
  auto need_images = [&](const std::string& name) {
    if (!in.real_images.defined() || !in.fake_images.defined()) {
      throw MetricError(name + " needs real and fake images");
    }
  };
  auto need_depth = [&](const std::string& name) {
    if (!in.fake_depth) throw MetricError(name + " needs generated depth maps");
  };
  MetricReport report;
  for (const auto& name : metrics) {
    MetricEntry e;
    e.name = name;
    if (name == "kid") {
      need_images(name);
      torch::NoGradGuard no_grad;
      const auto r = kid(extractor.embed(in.real_images), extractor.embed(in.fake_images), kid_block_size);
      e.value = r.estimate;
      e.stddev = r.stddev;
      e.samples = r.blocks * r.block_size;
      e.extractor = extractor.identity();
    } else if (name == "ssim" || name == "feature_distance") {
      need_images(name);
      const auto n = std::min(in.real_images.size(0), in.fake_images.size(0));
      const auto a = in.real_images.slice(0, 0, n);
      const auto b = in.fake_images.slice(0, 0, n);
      if (name == "ssim") {
        e.value = ssim(a, b);
      } else {
        e.value = feature_distance(a, b, extractor);
        e.extractor = extractor.identity();
      }
      e.samples = n;
    } else if (name == "side") {
      need_depth(name);
      if (!in.real_depth) throw MetricError("side needs reference depth maps");
      const auto n = std::min(in.real_depth->size(0), in.fake_depth->size(0));
      e.value = side(in.fake_depth->slice(0, 0, n), in.real_depth->slice(0, 0, n));
      e.samples = n;
    } else if (name == "dsd") {
      need_depth(name);
      e.value = dsd(*in.fake_depth);
      e.samples = in.fake_depth->size(0);
    } else {
      throw MetricError("unknown metric '" + name + "' (expected kid, ssim, feature_distance, side, dsd)");
    }
    report.add(std::move(e));
  }
  return report;
}

}  // namespace argan
