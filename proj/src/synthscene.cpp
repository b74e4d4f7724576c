#include "thermogen/synthscene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "thermogen/rng.hpp"

namespace fs = std::filesystem;

namespace thermogen {

void SceneConfig::validate() const {
    if (image_side < 8) throw ConfigError("scene image side too small");
    if (rgb_rate_hz <= 0 || thermal_rate_hz <= 0)
        throw ConfigError("scene rates must be positive");
    if (thermal_rate_hz >= rgb_rate_hz)
        throw ConfigError("thermal rate must be below the RGB rate");
    if (subjects < 1 || samples_per_subject < 1)
        throw ConfigError("scene needs at least one subject and one sample");
}

SubjectAppearance subject_appearance(const SceneConfig& config, int64_t subject_id) {
    Rng rng(config.seed, 1000 + static_cast<uint64_t>(subject_id));
    SubjectAppearance a;
    a.subject_id = subject_id;
    // Red channel is a strict function of the id (keeps appearances injective
    // even after 8-bit quantization); the rest jitters mildly.
    a.skin_tone[0] = 0.70f + 0.004f * static_cast<float>(subject_id);
    a.skin_tone[1] = 0.62f + rng.uniform(-0.01f, 0.01f);
    a.skin_tone[2] = 0.50f + rng.uniform(-0.01f, 0.01f);
    a.thermal_gain = 0.7f + 0.6f * static_cast<float>(rng.uniform());
    a.thermal_offset = rng.uniform(-6.0f, 6.0f);
    a.head_rx = 0.10f * rng.uniform(0.9f, 1.1f);
    a.head_ry = 0.13f * rng.uniform(0.9f, 1.1f);
    a.hand_r = 0.06f * rng.uniform(0.9f, 1.1f);
    a.motion_seed = rng.next_u64();
    return a;
}

SceneState scene_state(const SubjectAppearance& appearance, int64_t ts_ms) {
    Rng rng(appearance.motion_seed, 7);
    double p[7];
    for (double& v : p) v = rng.uniform() * 6.283185307179586;
    double t = static_cast<double>(ts_ms) / 1000.0;
    auto osc = [&](double amp, double hz, int phase) {
        return amp * std::sin(6.283185307179586 * hz * t + p[phase]);
    };
    SceneState s;
    s.ts_ms = ts_ms;
    // The head sits behind the occluder plane and sweeps across the panel's
    // span, so the front camera loses it for a large fraction of each cycle
    // while the other viewpoints keep tracking it.
    // Frequencies sit near the thermal camera's 6 Hz sampling scale on
    // purpose: bodies move visibly between consecutive thermal frames, which
    // is what makes the gaps in the thermal stream worth filling.
    s.head = {static_cast<float>(0.55 + osc(0.10, 1.05, 0)),
              static_cast<float>(0.27 + osc(0.03, 0.65, 1)), 0.62f};
    s.hand_a = {static_cast<float>(0.55 + osc(0.30, 1.65, 2)),
                static_cast<float>(0.66 + osc(0.10, 2.35, 3)), 0.72f};
    s.hand_b = {static_cast<float>(0.20 + osc(0.09, 1.45, 4)),
                static_cast<float>(0.74 + osc(0.07, 0.95, 5)), 0.70f};
    s.panel_x = static_cast<float>(0.62 + osc(0.04, 0.55, 6));
    return s;
}

bool occluded_in_front(const SceneState& state, const BodyPos& body) {
    return body.z > kPanelZ && std::fabs(body.x - state.panel_x) <= kPanelHalfWidth &&
           body.y >= kPanelTop;
}

namespace {

inline bool in_ellipse(float u, float v, float cx, float cy, float rx, float ry) {
    float du = (u - cx) / rx;
    float dv = (v - cy) / ry;
    return du * du + dv * dv <= 1.0f;
}

inline uint8_t to_code(float v01) {
    return static_cast<uint8_t>(std::lround(std::clamp(v01, 0.0f, 1.0f) * 255.0f));
}

struct ViewProjection {
    // Projects a scene point to (u, v) for one camera.
    float u(const BodyPos& b) const {
        switch (view) {
            case Modality::Front: return b.x;
            case Modality::Overhead: return b.x;
            case Modality::Profile: return b.z;
            default: return b.x;  // tablet
        }
    }
    float v(const BodyPos& b) const {
        switch (view) {
            case Modality::Front: return b.y;
            case Modality::Overhead: return b.z;
            case Modality::Profile: return b.y;
            default: return 0.6f * b.y + 0.4f * b.z;  // tablet
        }
    }
    Modality view;
};

}  // namespace

ImageU8 render_view(const SceneState& state, const SubjectAppearance& a,
                    Modality view, int64_t side) {
    if (view == Modality::Thermal)
        throw ContractError("render_view does not render the thermal modality");
    ViewProjection proj{view};
    const float* skin = a.skin_tone.data();
    float hand_color[3] = {skin[0] * 0.92f, skin[1] * 0.92f, skin[2] * 0.92f};
    float panel_color[3] = {0.45f, 0.45f, 0.45f};
    float bg_color[3] = {0.10f, 0.11f, 0.13f};

    // Per-view head silhouette radii (the head is wider than deep).
    float head_rx = view == Modality::Profile ? 0.08f : a.head_rx;
    float head_ry = view == Modality::Overhead ? 0.05f : a.head_ry;

    ImageU8 img;
    img.width = img.height = static_cast<int>(side);
    img.channels = 3;
    img.pixels.resize(static_cast<size_t>(side * side * 3));
    for (int64_t py = 0; py < side; ++py) {
        float v = (static_cast<float>(py) + 0.5f) / static_cast<float>(side);
        for (int64_t px = 0; px < side; ++px) {
            float u = (static_cast<float>(px) + 0.5f) / static_cast<float>(side);
            const float* c = bg_color;
            bool head = in_ellipse(u, v, proj.u(state.head), proj.v(state.head), head_rx, head_ry);
            bool hand1 = in_ellipse(u, v, proj.u(state.hand_a), proj.v(state.hand_a), a.hand_r, a.hand_r);
            bool hand2 = in_ellipse(u, v, proj.u(state.hand_b), proj.v(state.hand_b), a.hand_r, a.hand_r);
            bool panel = false;
            switch (view) {
                case Modality::Front: {
                    panel = std::fabs(u - state.panel_x) <= kPanelHalfWidth && v >= kPanelTop;
                    // The panel hides, pixel by pixel, every body behind its
                    // plane; bodies nearer the camera draw over it. Mirrors
                    // the thermal field's per-pixel attenuation test.
                    bool head_vis = head && !(panel && state.head.z > kPanelZ);
                    bool hand1_vis = hand1 && !(panel && state.hand_a.z > kPanelZ);
                    bool hand2_vis = hand2 && !(panel && state.hand_b.z > kPanelZ);
                    if (head_vis) c = skin;
                    else if (hand1_vis || hand2_vis) c = hand_color;
                    else if (panel) c = panel_color;
                    break;
                }
                case Modality::Overhead:
                    panel = std::fabs(u - state.panel_x) <= kPanelHalfWidth &&
                            std::fabs(v - kPanelZ) <= 0.015f;
                    if (head) c = skin;
                    else if (hand1 || hand2) c = hand_color;
                    else if (panel) c = panel_color;
                    break;
                case Modality::Profile:
                    panel = std::fabs(u - kPanelZ) <= 0.015f && v >= kPanelTop;
                    if (head) c = skin;
                    else if (hand1 || hand2) c = hand_color;
                    else if (panel) c = panel_color;
                    break;
                default:  // tablet
                    panel = std::fabs(u - state.panel_x) <= kPanelHalfWidth &&
                            v >= 0.6f * kPanelTop + 0.4f * kPanelZ;
                    if (head) c = skin;
                    else if (hand1 || hand2) c = hand_color;
                    else if (panel) c = panel_color;
                    break;
            }
            uint8_t* px_out = img.pixels.data() + (py * side + px) * 3;
            px_out[0] = to_code(c[0]);
            px_out[1] = to_code(c[1]);
            px_out[2] = to_code(c[2]);
        }
    }
    return img;
}

std::array<ImageU8, 4> render_views(const SceneState& state,
                                    const SubjectAppearance& a, int64_t side) {
    return {render_view(state, a, Modality::Front, side),
            render_view(state, a, Modality::Overhead, side),
            render_view(state, a, Modality::Profile, side),
            render_view(state, a, Modality::Tablet, side)};
}

float thermal_field_at(const SceneState& state, const SubjectAppearance& a,
                       int64_t px, int64_t py, int64_t side) {
    float u = (static_cast<float>(px) + 0.5f) / static_cast<float>(side);
    float v = (static_cast<float>(py) + 0.5f) / static_cast<float>(side);
    bool in_panel = std::fabs(u - state.panel_x) <= kPanelHalfWidth && v >= kPanelTop;
    float code = kBackgroundCode + a.thermal_offset;
    const BodyPos* bodies[3] = {&state.head, &state.hand_a, &state.hand_b};
    const float sigmas[3] = {kHeadSigma, kHandSigma, kHandSigma};
    const float amps[3] = {kHeadAmp, kHandAmp, kHandAmp};
    for (int b = 0; b < 3; ++b) {
        float du = u - bodies[b]->x;
        float dv = v - bodies[b]->y;
        float g = std::exp(-(du * du + dv * dv) / (2.0f * sigmas[b] * sigmas[b]));
        float occ = (in_panel && bodies[b]->z > kPanelZ) ? kOcclusionLeak : 1.0f;
        code += a.thermal_gain * amps[b] * g * occ;
    }
    return code;
}

ImageU8 render_thermal(const SceneState& state, const SubjectAppearance& a, int64_t side) {
    ImageU8 img;
    img.width = img.height = static_cast<int>(side);
    img.channels = 1;
    img.pixels.resize(static_cast<size_t>(side * side));
    for (int64_t py = 0; py < side; ++py)
        for (int64_t px = 0; px < side; ++px) {
            float code = thermal_field_at(state, a, px, py, side);
            img.pixels[static_cast<size_t>(py * side + px)] =
                static_cast<uint8_t>(std::lround(std::clamp(code, 0.0f, 255.0f)));
        }
    return img;
}

std::string subject_dir_name(int64_t subject_id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "subject_%02lld", static_cast<long long>(subject_id));
    return buf;
}

namespace {

std::string frame_file_name(int64_t index, int64_t ts_ms) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%06lld_ts%lld.png", static_cast<long long>(index),
                  static_cast<long long>(ts_ms));
    return buf;
}

}  // namespace

DatasetManifest generate_dataset(const SceneConfig& config, const std::string& root) {
    config.validate();
    bool created_root = !fs::exists(root);
    try {
        fs::create_directories(root);
        DatasetManifest manifest;
        manifest.root = root;
        manifest.seed = config.seed;
        int64_t tolerance = default_tolerance_ms(config.thermal_rate_hz);

        for (int64_t sid = 0; sid < config.subjects; ++sid) {
            SubjectAppearance app = subject_appearance(config, sid);
            fs::path subject_dir = fs::path(root) / subject_dir_name(sid);
            for (Modality m : {Modality::Thermal, Modality::Front, Modality::Overhead,
                               Modality::Profile, Modality::Tablet})
                fs::create_directories(subject_dir / modality_name(m));

            std::ofstream state_os(subject_dir / "state.tsv");
            state_os << "# ts_ms\thead_xyz\thand_a_xyz\thand_b_xyz\tpanel_x\n";

            FrameStream thermal_stream{Modality::Thermal, config.thermal_rate_hz, {}};
            for (int64_t j = 0; j < config.samples_per_subject; ++j) {
                int64_t ts = std::llround(j * 1000.0 / config.thermal_rate_hz);
                SceneState st = scene_state(app, ts);
                ImageU8 img = render_thermal(st, app, config.image_side);
                std::string rel = (fs::path(subject_dir_name(sid)) / "thermal" /
                                   frame_file_name(j, ts)).string();
                write_png((fs::path(root) / rel).string(), img);
                thermal_stream.frames.push_back({ts, rel});
                state_os << ts << '\t' << st.head.x << ' ' << st.head.y << ' ' << st.head.z
                         << '\t' << st.hand_a.x << ' ' << st.hand_a.y << ' ' << st.hand_a.z
                         << '\t' << st.hand_b.x << ' ' << st.hand_b.y << ' ' << st.hand_b.z
                         << '\t' << st.panel_x << '\n';
            }
            int64_t last_ts = thermal_stream.frames.back().ts_ms;

            std::vector<FrameStream> streams = {thermal_stream};
            for (Modality m : kViewOrder)
                streams.push_back({m, config.rgb_rate_hz, {}});
            for (int64_t i = 0;; ++i) {
                int64_t ts = std::llround(i * 1000.0 / config.rgb_rate_hz);
                if (ts > last_ts) break;
                SceneState st = scene_state(app, ts);
                for (size_t vi = 0; vi < kViewOrder.size(); ++vi) {
                    ImageU8 img = render_view(st, app, kViewOrder[vi], config.image_side);
                    std::string rel = (fs::path(subject_dir_name(sid)) /
                                       modality_name(kViewOrder[vi]) /
                                       frame_file_name(i, ts)).string();
                    write_png((fs::path(root) / rel).string(), img);
                    streams[1 + vi].frames.push_back({ts, rel});
                }
            }

            auto samples = synchronize(streams, tolerance, sid);
            manifest.samples.insert(manifest.samples.end(), samples.begin(), samples.end());
        }

        write_manifest(manifest, (fs::path(root) / "index.tsv").string());
        return manifest;
    } catch (...) {
        // Leave no partial dataset behind.
        std::error_code ec;
        if (created_root)
            fs::remove_all(root, ec);
        else
            fs::remove(fs::path(root) / "index.tsv", ec);
        throw;
    }
}

FrameStream scan_stream(const std::string& root, int64_t subject_id, Modality modality,
                        double nominal_rate_hz) {
    FrameStream stream{modality, nominal_rate_hz, {}};
    fs::path dir = fs::path(root) / subject_dir_name(subject_id) / modality_name(modality);
    if (!fs::is_directory(dir)) throw IoError("no such stream directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        auto pos = name.find("_ts");
        auto dot = name.rfind(".png");
        if (pos == std::string::npos || dot == std::string::npos) continue;
        int64_t ts = std::stoll(name.substr(pos + 3, dot - pos - 3));
        std::string rel = (fs::path(subject_dir_name(subject_id)) / modality_name(modality) /
                           name).string();
        stream.frames.push_back({ts, rel});
    }
    std::sort(stream.frames.begin(), stream.frames.end(),
              [](const FrameRef& a, const FrameRef& b) { return a.ts_ms < b.ts_ms; });
    return stream;
}

}  // namespace thermogen
