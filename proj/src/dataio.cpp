#include "thermogen/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "thermogen/rng.hpp"

namespace fs = std::filesystem;

namespace thermogen {

std::string modality_name(Modality m) {
    switch (m) {
        case Modality::Thermal: return "thermal";
        case Modality::Front: return "front";
        case Modality::Overhead: return "overhead";
        case Modality::Profile: return "profile";
        case Modality::Tablet: return "tablet";
    }
    return "?";
}

Modality parse_modality(const std::string& s) {
    if (s == "thermal") return Modality::Thermal;
    if (s == "front") return Modality::Front;
    if (s == "overhead") return Modality::Overhead;
    if (s == "profile") return Modality::Profile;
    if (s == "tablet") return Modality::Tablet;
    throw ConfigError("unknown modality: " + s);
}

void FrameStream::validate() const {
    for (size_t i = 1; i < frames.size(); ++i) {
        if (frames[i].ts_ms <= frames[i - 1].ts_ms)
            throw ContractError("frame timestamps not strictly increasing in " +
                                modality_name(modality) + " stream at index " +
                                std::to_string(i));
    }
}

float ThermalCalibration::thermal_to_code(float temp_c) const {
    if (temp_c < min_temp_c || temp_c > max_temp_c) {
        ++clamp_count;
        temp_c = std::clamp(temp_c, min_temp_c, max_temp_c);
    }
    return (temp_c - min_temp_c) / (max_temp_c - min_temp_c) * 255.0f;
}

float ThermalCalibration::code_to_thermal(float code) const {
    return min_temp_c + code / 255.0f * (max_temp_c - min_temp_c);
}

std::string style_name(InputStyle s) {
    switch (s) {
        case InputStyle::FrontView: return "front";
        case InputStyle::FourViewTessellated: return "tessellated";
        case InputStyle::FourViewStacked: return "stacked";
    }
    return "?";
}

InputStyle parse_style(const std::string& s) {
    if (s == "front") return InputStyle::FrontView;
    if (s == "tessellated") return InputStyle::FourViewTessellated;
    if (s == "stacked") return InputStyle::FourViewStacked;
    throw ConfigError("unknown input style: " + s + " (front|tessellated|stacked)");
}

size_t nearest_frame(const std::vector<FrameRef>& frames, int64_t ts_ms) {
    if (frames.empty()) throw ContractError("nearest_frame on empty stream");
    auto it = std::lower_bound(frames.begin(), frames.end(), ts_ms,
                               [](const FrameRef& f, int64_t t) { return f.ts_ms < t; });
    if (it == frames.begin()) return 0;
    if (it == frames.end()) return frames.size() - 1;
    size_t hi = static_cast<size_t>(it - frames.begin());
    size_t lo = hi - 1;
    int64_t dlo = ts_ms - frames[lo].ts_ms;
    int64_t dhi = frames[hi].ts_ms - ts_ms;
    return dlo <= dhi ? lo : hi;  // earlier wins ties
}

std::vector<SyncedSample> synchronize(const std::vector<FrameStream>& streams,
                                      int64_t tolerance_ms, int64_t subject_id) {
    if (tolerance_ms <= 0) throw ContractError("synchronize tolerance must be positive");
    const FrameStream* thermal = nullptr;
    std::array<const FrameStream*, 4> views = {};
    for (const auto& s : streams) {
        s.validate();
        if (s.modality == Modality::Thermal) {
            thermal = &s;
        } else {
            for (size_t i = 0; i < kViewOrder.size(); ++i)
                if (s.modality == kViewOrder[i]) views[i] = &s;
        }
    }
    if (!thermal) throw ContractError("synchronize: no thermal stream supplied");
    for (size_t i = 0; i < views.size(); ++i)
        if (!views[i])
            throw ContractError("synchronize: missing " + modality_name(kViewOrder[i]) +
                                " stream");

    std::vector<SyncedSample> out;
    for (const FrameRef& tf : thermal->frames) {
        SyncedSample sample;
        sample.subject_id = subject_id;
        sample.thermal = tf;
        bool ok = true;
        for (size_t i = 0; i < views.size(); ++i) {
            if (views[i]->frames.empty()) {
                ok = false;
                break;
            }
            const FrameRef& vf = views[i]->frames[nearest_frame(views[i]->frames, tf.ts_ms)];
            if (std::llabs(vf.ts_ms - tf.ts_ms) > tolerance_ms) {
                ok = false;
                break;
            }
            sample.views[i] = vf;
        }
        if (ok) out.push_back(std::move(sample));
    }
    return out;
}

namespace {

void check_views(const std::array<Tensor, 4>& views) {
    const Shape& s0 = views[0].shape();
    for (const Tensor& v : views) {
        if (v.shape() != s0)
            throw ContractError("collage views disagree on extent: " + shape_str(s0) +
                                " vs " + shape_str(v.shape()));
    }
    if (s0.size() != 4 || s0[2] != s0[3])
        throw ContractError("collage views must be square (1,C,S,S), got " + shape_str(s0));
}

void blit(std::vector<float>& dst, int64_t C, int64_t DH, int64_t DW,
          const Tensor& src, int64_t y0, int64_t x0) {
    const Shape& s = src.shape();
    int64_t H = s[2], W = s[3];
    const auto& v = src.values();
    for (int64_t c = 0; c < C; ++c)
        for (int64_t y = 0; y < H; ++y)
            std::memcpy(dst.data() + (c * DH + y0 + y) * DW + x0,
                        v.data() + (c * H + y) * W, static_cast<size_t>(W) * sizeof(float));
}

Tensor crop(const Tensor& src, int64_t y0, int64_t x0, int64_t h, int64_t w) {
    const Shape& s = src.shape();
    int64_t C = s[1], H = s[2], W = s[3];
    std::vector<float> out(static_cast<size_t>(C * h * w));
    const auto& v = src.values();
    for (int64_t c = 0; c < C; ++c)
        for (int64_t y = 0; y < h; ++y)
            std::memcpy(out.data() + (c * h + y) * w,
                        v.data() + (c * H + y0 + y) * W + x0,
                        static_cast<size_t>(w) * sizeof(float));
    return Tensor::from_data({1, C, h, w}, std::move(out));
}

}  // namespace

Tensor compose_collage(const std::array<Tensor, 4>& views, InputStyle style) {
    check_views(views);
    const Shape& s = views[0].shape();
    int64_t C = s[1], S = s[2];
    if (style == InputStyle::FrontView) return views[0].detach();
    if (style == InputStyle::FourViewTessellated) {
        std::vector<float> out(static_cast<size_t>(C * 2 * S * 2 * S), 0.0f);
        blit(out, C, 2 * S, 2 * S, views[0], 0, 0);
        blit(out, C, 2 * S, 2 * S, views[1], 0, S);
        blit(out, C, 2 * S, 2 * S, views[2], S, 0);
        blit(out, C, 2 * S, 2 * S, views[3], S, S);
        return Tensor::from_data({1, C, 2 * S, 2 * S}, std::move(out));
    }
    std::vector<float> out(static_cast<size_t>(C * 4 * S * S), 0.0f);
    for (int i = 0; i < 4; ++i) blit(out, C, 4 * S, S, views[i], i * S, 0);
    return Tensor::from_data({1, C, 4 * S, S}, std::move(out));
}

std::array<Tensor, 4> decompose_collage(const Tensor& collage, InputStyle style) {
    const Shape& s = collage.shape();
    if (s.size() != 4) throw ContractError("decompose_collage needs rank-4 input");
    if (style == InputStyle::FrontView)
        throw ContractError("decompose_collage: front view collage holds a single view");
    if (style == InputStyle::FourViewTessellated) {
        if (s[2] != s[3] || s[2] % 2 != 0)
            throw ContractError("tessellated collage must be square with even side, got " +
                                shape_str(s));
        int64_t S = s[2] / 2;
        return {crop(collage, 0, 0, S, S), crop(collage, 0, S, S, S),
                crop(collage, S, 0, S, S), crop(collage, S, S, S, S)};
    }
    if (s[2] != 4 * s[3])
        throw ContractError("stacked collage must be 4S x S, got " + shape_str(s));
    int64_t S = s[3];
    return {crop(collage, 0, 0, S, S), crop(collage, S, 0, S, S),
            crop(collage, 2 * S, 0, S, S), crop(collage, 3 * S, 0, S, S)};
}

SplitResult split(const DatasetManifest& manifest,
                  const std::array<double, 3>& ratios, uint64_t seed) {
    double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::fabs(sum - 1.0) > 1e-9)
        throw ConfigError("split ratios must sum to 1, got " + std::to_string(sum));
    if (manifest.samples.empty()) throw ContractError("split on empty manifest");

    std::vector<size_t> order(manifest.samples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed, /*stream=*/0xD5);
    shuffle(order, rng);

    size_t n = order.size();
    size_t n_val = static_cast<size_t>(std::floor(ratios[1] * n));
    size_t n_test = static_cast<size_t>(std::floor(ratios[2] * n));
    size_t n_train = n - n_val - n_test;  // remainder goes to train

    SplitResult r;
    for (DatasetManifest* m : {&r.train, &r.val, &r.test}) {
        m->root = manifest.root;
        m->seed = seed;
    }
    r.train.split = "train";
    r.val.split = "val";
    r.test.split = "test";
    for (size_t i = 0; i < n; ++i) {
        const SyncedSample& s = manifest.samples[order[i]];
        if (i < n_train)
            r.train.samples.push_back(s);
        else if (i < n_train + n_val)
            r.val.samples.push_back(s);
        else
            r.test.samples.push_back(s);
    }
    return r;
}

DatasetManifest subsample(const DatasetManifest& manifest, size_t n, uint64_t seed) {
    if (n > manifest.samples.size())
        throw ContractError("subsample n=" + std::to_string(n) + " exceeds pool size " +
                            std::to_string(manifest.samples.size()));
    std::vector<size_t> order(manifest.samples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed, /*stream=*/0x5B);
    shuffle(order, rng);
    DatasetManifest out;
    out.root = manifest.root;
    out.split = manifest.split;
    out.seed = seed;
    for (size_t i = 0; i < n; ++i) out.samples.push_back(manifest.samples[order[i]]);
    return out;
}

DatasetManifest merge(const std::vector<DatasetManifest>& parts) {
    if (parts.empty()) throw ContractError("merge of zero manifests");
    DatasetManifest out;
    out.root = parts[0].root;
    out.split = parts[0].split;
    out.seed = parts[0].seed;
    for (const auto& p : parts) {
        if (p.root != out.root)
            throw ContractError("merge across different dataset roots: " + out.root +
                                " vs " + p.root);
        out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
    }
    return out;
}

DatasetManifest filter_subject(const DatasetManifest& manifest, int64_t subject_id) {
    DatasetManifest out = manifest;
    out.samples.clear();
    for (const auto& s : manifest.samples)
        if (s.subject_id == subject_id) out.samples.push_back(s);
    return out;
}

std::vector<int64_t> subject_ids(const DatasetManifest& manifest) {
    std::vector<int64_t> ids;
    for (const auto& s : manifest.samples)
        if (std::find(ids.begin(), ids.end(), s.subject_id) == ids.end())
            ids.push_back(s.subject_id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write manifest: " + path);
    os << "# thermogen index v1\n";
    os << "# split=" << manifest.split << " seed=" << manifest.seed << "\n";
    // Frame paths stay relative to the dataset root, which is normally the
    // manifest's own directory. A manifest written elsewhere (a training
    // run's split files, say) records where its frames actually live.
    fs::path parent = fs::absolute(fs::path(path)).parent_path();
    if (!manifest.root.empty() &&
        fs::weakly_canonical(manifest.root) != fs::weakly_canonical(parent)) {
        fs::path rel = fs::relative(manifest.root, parent);
        os << "# root=" << (rel.empty() ? fs::absolute(manifest.root) : rel).string()
           << "\n";
    }
    for (const auto& s : manifest.samples) {
        os << s.subject_id << '\t' << s.thermal.path << '\t' << s.thermal.ts_ms;
        for (const auto& v : s.views) os << '\t' << v.path << '\t' << v.ts_ms;
        os << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read manifest: " + path);
    DatasetManifest m;
    m.root = fs::path(path).parent_path().string();
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string tok;
            hs >> tok;
            if (tok.rfind("root=", 0) == 0) {
                fs::path root = tok.substr(5);
                if (root.is_relative()) root = fs::path(m.root) / root;
                m.root = root.lexically_normal().string();
                continue;
            }
            do {
                if (tok.rfind("split=", 0) == 0) m.split = tok.substr(6);
                if (tok.rfind("seed=", 0) == 0) m.seed = std::stoull(tok.substr(5));
            } while (hs >> tok);
            continue;
        }
        std::istringstream ls(line);
        SyncedSample s;
        std::string field;
        auto next = [&]() {
            if (!std::getline(ls, field, '\t'))
                throw IoError("malformed manifest line: " + line);
            return field;
        };
        s.subject_id = std::stoll(next());
        s.thermal.path = next();
        s.thermal.ts_ms = std::stoll(next());
        for (auto& v : s.views) {
            v.path = next();
            v.ts_ms = std::stoll(next());
        }
        m.samples.push_back(std::move(s));
    }
    return m;
}

Tensor load_model_input(const DatasetManifest& manifest, const SyncedSample& sample,
                        InputStyle style, int64_t side) {
    std::array<Tensor, 4> views;
    for (size_t i = 0; i < 4; ++i) {
        ImageU8 img = read_png((fs::path(manifest.root) / sample.views[i].path).string());
        views[i] = image_to_tensor(img);
    }
    Tensor collage = compose_collage(views, style);
    collage = resize_bilinear(collage, side, side);
    return to_model_range(collage);
}

Tensor load_thermal(const DatasetManifest& manifest, const SyncedSample& sample) {
    ImageU8 img = read_png((fs::path(manifest.root) / sample.thermal.path).string());
    if (img.channels != 1)
        throw ContractError("thermal frame is not grayscale: " + sample.thermal.path);
    return image_to_tensor(img);
}

int64_t default_tolerance_ms(double thermal_rate_hz) {
    if (thermal_rate_hz <= 0) throw ContractError("thermal rate must be positive");
    return static_cast<int64_t>(std::llround(1000.0 / thermal_rate_hz / 2.0));
}

}  // namespace thermogen
