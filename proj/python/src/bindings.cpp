#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "argan/apps.hpp"
#include "argan/checkpoint.hpp"
#include "argan/config.hpp"
#include "argan/features.hpp"
#include "argan/lfrender.hpp"
#include "argan/metrics.hpp"
#include "argan/models.hpp"
#include "argan/objectives.hpp"
#include "argan/synthdata.hpp"
#include "argan/trainer.hpp"

namespace py = pybind11;
using namespace argan;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

torch::Tensor to_tensor(const FloatArray& a) {
  std::vector<int64_t> shape(a.shape(), a.shape() + a.ndim());
  return torch::from_blob(const_cast<float*>(a.data()), shape, torch::kFloat32).clone();
}

py::array_t<float> to_numpy(const torch::Tensor& t) {
  auto c = t.detach().to(torch::kFloat32).contiguous();
  py::array_t<float> out(std::vector<py::ssize_t>(c.sizes().begin(), c.sizes().end()));
  std::memcpy(out.mutable_data(), c.data_ptr<float>(), sizeof(float) * c.numel());
  return out;
}

// Accepts a single image/map without the batch axis too.
torch::Tensor batched(const FloatArray& a) {
  auto t = to_tensor(a);
  return t.dim() == 3 ? t.unsqueeze(0) : t;
}

py::array_t<float> unbatched(const torch::Tensor& t, bool was_single) {
  return to_numpy(was_single ? t[0] : t);
}

class PyModel {
 public:
  explicit PyModel(const std::filesystem::path& checkpoint) : model_(load_argan_model(checkpoint)) {}

  py::dict generate(int64_t n, uint64_t seed, double scale) {
    torch::NoGradGuard no_grad;
    py::gil_scoped_release release;
    const auto out = model_.generator->forward(sample_latent(n, seed, model_.config.latent_dim));
    const auto shallow = render(out.image, out.disparity, scale, model_.expansion, model_.mask);
    py::gil_scoped_acquire acquire;
    py::dict d;
    d["deep"] = to_numpy(out.image);
    d["disparity"] = to_numpy(out.disparity);
    d["shallow"] = to_numpy(shallow);
    return d;
  }

  py::array_t<float> render_image(const FloatArray& image, const FloatArray& disparity, double scale) {
    torch::NoGradGuard no_grad;
    const bool single = image.ndim() == 3;
    return unbatched(render(batched(image), batched(disparity), scale, model_.expansion, model_.mask), single);
  }

  std::string config() const { return model_.config.to_text(); }

 private:
  ArganModel model_;
};

}  // namespace

PYBIND11_MODULE(_argan, m) {
  m.doc() = "Aperture rendering GAN core";

  m.def("aperture_weights", [](int k) { return to_numpy(ApertureMask(k).weight_grid()); }, py::arg("size") = 5);

  m.def(
      "render",
      [](const FloatArray& image, const FloatArray& disparity, double scale, int aperture_size) {
        torch::NoGradGuard no_grad;
        const bool single = image.ndim() == 3;
        return unbatched(render(batched(image), batched(disparity), scale, nullptr, ApertureMask(aperture_size)),
                         single);
      },
      py::arg("image"), py::arg("disparity"), py::arg("scale") = 1.0, py::arg("aperture_size") = 5,
      "Renders with an identity expansion network. image: [B,]3xHxW, disparity: [B,]1xHxW.");

  m.def(
      "center_focus_prior",
      [](int64_t height, int64_t width, double r_th, double gain) {
        CenterFocusPriorConfig cfg;
        cfg.r_th = r_th;
        cfg.gain = gain;
        return to_numpy(center_focus_prior(height, width, cfg)[0][0]);
      },
      py::arg("height"), py::arg("width"), py::arg("r_th") = 0.25, py::arg("gain") = 1.0);

  m.def(
      "sample_dof_scale",
      [](int64_t n, uint64_t seed, double p_s, const std::string& kind) {
        DoFScalePolicy p;
        p.kind = parse_dof_policy_kind(kind);
        p.p_s = p_s;
        return to_numpy(sample_dof_scale(p, n, seed));
      },
      py::arg("n"), py::arg("seed") = 0, py::arg("p_s") = 0.5, py::arg("kind") = "binomial");

  m.def(
      "kid",
      [](const FloatArray& real, const FloatArray& fake, int64_t block_size) {
        const auto r = kid(to_tensor(real).to(torch::kFloat64), to_tensor(fake).to(torch::kFloat64), block_size);
        py::dict d;
        d["estimate"] = r.estimate;
        d["stddev"] = r.stddev;
        d["blocks"] = r.blocks;
        return d;
      },
      py::arg("real_features"), py::arg("fake_features"), py::arg("block_size") = 1000);
  m.def("side", [](const FloatArray& est, const FloatArray& ref) { return side(to_tensor(est), to_tensor(ref)); },
        py::arg("estimate"), py::arg("reference"));
  m.def("dsd", [](const FloatArray& d) { return dsd(to_tensor(d)); }, py::arg("depths"));
  m.def("ad", [](const FloatArray& d) { return to_numpy(ad(to_tensor(d))); }, py::arg("depths"));
  m.def("ssim", [](const FloatArray& a, const FloatArray& b) { return ssim(batched(a), batched(b)); });
  m.def(
      "feature_distance",
      [](const FloatArray& a, const FloatArray& b, uint64_t seed) {
        auto f = make_default_extractor(seed);
        return feature_distance(batched(a), batched(b), *f);
      },
      py::arg("a"), py::arg("b"), py::arg("feature_seed") = 0);

  m.def(
      "make_synthetic_dataset",
      [](int64_t count, int64_t image_size, uint64_t seed, double d_min, double d_max) {
        SyntheticParams p;
        p.count = count;
        p.image_size = image_size;
        p.seed = seed;
        p.d_min = d_min;
        p.d_max = d_max;
        const auto data = make_synthetic_dataset(p);
        py::dict d;
        d["images"] = to_numpy(data.images);
        d["sharp"] = to_numpy(data.sharp);
        d["disparity"] = to_numpy(data.disparity);
        d["dof_scale"] = to_numpy(data.dof_scale);
        return d;
      },
      py::arg("count"), py::arg("image_size") = 64, py::arg("seed") = 0, py::arg("d_min") = 1.0,
      py::arg("d_max") = 3.0);

  m.def("config_keys", &training_config_keys);
  m.def(
      "default_config", [] { return TrainingConfig{}.to_text(); }, "Default configuration as key = value text.");
  m.def(
      "train",
      [](const std::string& config_text, const std::optional<std::filesystem::path>& resume, bool verbose) {
        const auto cfg = TrainingConfig::from_text(config_text);
        py::gil_scoped_release release;
        return run_training(cfg, resume, verbose).final_checkpoint;
      },
      py::arg("config"), py::arg("resume") = std::nullopt, py::arg("verbose") = false,
      "Runs training from key = value config text; returns the final checkpoint path.");

  py::class_<PyModel>(m, "Model")
      .def(py::init<const std::filesystem::path&>(), py::arg("checkpoint"))
      .def("generate", &PyModel::generate, py::arg("n"), py::arg("seed") = 0, py::arg("scale") = 1.0)
      .def("render", &PyModel::render_image, py::arg("image"), py::arg("disparity"), py::arg("scale") = 1.0)
      .def_property_readonly("config", &PyModel::config);

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<RenderError>(m, "RenderError", PyExc_ValueError);
  py::register_exception<MetricError>(m, "MetricError", PyExc_ValueError);
  py::register_exception<ObjectiveError>(m, "ObjectiveError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_RuntimeError);
  py::register_exception<AppError>(m, "AppError", PyExc_RuntimeError);
}
