// Python surface for the core operations: dataset synthesis, training,
// evaluation, generation and gap detection. Images cross the boundary as
// numpy float32 arrays in [0,1], channel-first.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "thermogen/checkpoint.hpp"
#include "thermogen/eval.hpp"
#include "thermogen/gapfill.hpp"
#include "thermogen/runconfig.hpp"
#include "thermogen/synthscene.hpp"

namespace py = pybind11;
using namespace thermogen;

namespace {

Tensor array_to_tensor(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 3) throw ContractError("expected a (C,H,W) array");
    Shape shape{1, a.shape(0), a.shape(1), a.shape(2)};
    Tensor t = Tensor::zeros(shape);
    std::copy(a.data(), a.data() + a.size(), t.values().begin());
    return t;
}

py::array_t<float> tensor_to_array(const Tensor& t) {
    const Shape& s = t.shape();
    py::array_t<float> out({s[1], s[2], s[3]});
    std::copy(t.values().begin(), t.values().end(), out.mutable_data());
    return out;
}

TrainerConfig make_config(const std::string& arch, const std::string& style, int64_t side,
                          int64_t base_width, int levels, int res_blocks, uint64_t seed) {
    TrainerConfig cfg;
    cfg.arch = arch;
    cfg.style = parse_style(style);
    cfg.image_side = side;
    cfg.base_width = base_width;
    cfg.levels = levels;
    cfg.res_blocks = res_blocks;
    cfg.seed = seed;
    if (arch == "cyclegan") cfg.weights.adv = LossWeights::Adversarial::LeastSquares;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_thermogen, m) {
    m.doc() = "RGB-to-thermal translation toolkit";

    m.def("version", &tool_version);

    m.def(
        "generate_dataset",
        [](const std::string& root, int64_t subjects, int64_t samples, int64_t side,
           double rgb_rate, double thermal_rate, uint64_t seed) {
            SceneConfig cfg;
            cfg.subjects = subjects;
            cfg.samples_per_subject = samples;
            cfg.image_side = side;
            cfg.rgb_rate_hz = rgb_rate;
            cfg.thermal_rate_hz = thermal_rate;
            cfg.seed = seed;
            return generate_dataset(cfg, root).samples.size();
        },
        py::arg("root"), py::arg("subjects") = 2, py::arg("samples") = 20,
        py::arg("side") = 64, py::arg("rgb_rate") = 30.0, py::arg("thermal_rate") = 6.0,
        py::arg("seed") = 1);

    m.def(
        "train",
        [](const std::string& index_tsv, const std::string& checkpoint_path,
           const std::string& arch, const std::string& style, int64_t iterations,
           int64_t subject, int64_t side, int64_t base_width, int levels, int res_blocks,
           uint64_t seed) {
            TrainerConfig cfg =
                make_config(arch, style, side, base_width, levels, res_blocks, seed);
            DatasetManifest data = read_manifest(index_tsv);
            if (subject >= 0) data = filter_subject(data, subject);
            SplitResult parts = split(data, {0.8, 0.1, 0.1}, seed);
            TrainingSet set = load_training_set(parts.train, cfg.style, cfg.image_side);
            if (cfg.arch == "cyclegan") {
                CycleGanTrainer trainer(cfg);
                train_cyclegan(trainer, set, iterations);
                save_checkpoint(trainer, checkpoint_path);
            } else {
                Pix2pixTrainer trainer(cfg);
                train_pix2pix(trainer, set, iterations);
                save_checkpoint(trainer, checkpoint_path);
            }
        },
        py::arg("index_tsv"), py::arg("checkpoint_path"), py::arg("arch") = "pix2pix",
        py::arg("style") = "front", py::arg("iterations") = 5000, py::arg("subject") = -1,
        py::arg("side") = 64, py::arg("base_width") = 32, py::arg("levels") = 4,
        py::arg("res_blocks") = 4, py::arg("seed") = 0);

    m.def(
        "evaluate",
        [](const std::string& checkpoint_path, const std::string& manifest_tsv) {
            LoadedTrainer gen = load_checkpoint(checkpoint_path);
            EvalReport r = evaluate(gen, read_manifest(manifest_tsv));
            py::dict out;
            out["mean"] = r.mean;
            out["stddev"] = r.stddev;
            out["per_subject"] = r.per_subject_mean;
            out["config_digest"] = r.config_digest;
            out["seed"] = r.seed;
            return out;
        },
        py::arg("checkpoint_path"), py::arg("manifest_tsv"));

    // condition: (3,S,S) float32 in [0,1] -> (1,S,S) thermal in [0,1].
    m.def(
        "generate",
        [](const std::string& checkpoint_path,
           py::array_t<float, py::array::c_style | py::array::forcecast> condition) {
            LoadedTrainer gen = load_checkpoint(checkpoint_path);
            Tensor c = to_model_range(array_to_tensor(condition));
            return tensor_to_array(to_eval_range(gen.generate(c)));
        },
        py::arg("checkpoint_path"), py::arg("condition"));

    m.def(
        "compose_collage",
        [](const std::vector<py::array_t<float, py::array::c_style | py::array::forcecast>>&
               views,
           const std::string& style) {
            if (views.size() != 4) throw ContractError("expected 4 views");
            std::array<Tensor, 4> t;
            for (size_t i = 0; i < 4; ++i) t[i] = array_to_tensor(views[i]);
            return tensor_to_array(compose_collage(t, parse_style(style)));
        },
        py::arg("views"), py::arg("style"));

    m.def(
        "detect_gaps",
        [](const std::vector<int64_t>& rgb_ts, const std::vector<int64_t>& thermal_ts,
           int64_t threshold_ms) {
            FrameStream rgb, thermal;
            rgb.modality = Modality::Front;
            thermal.modality = Modality::Thermal;
            for (int64_t t : rgb_ts) rgb.frames.push_back({t, ""});
            for (int64_t t : thermal_ts) thermal.frames.push_back({t, ""});
            GapReport r = detect_gaps(rgb, thermal, threshold_ms);
            std::vector<std::tuple<int64_t, int64_t, int64_t, bool>> out;
            for (const GapEntry& e : r.entries)
                out.emplace_back(e.rgb_ts_ms, e.nearest_thermal_ts_ms, e.skew_ms, e.is_gap);
            return out;
        },
        py::arg("rgb_ts"), py::arg("thermal_ts"), py::arg("threshold_ms"));
}
