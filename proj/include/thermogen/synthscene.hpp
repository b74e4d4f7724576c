#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "thermogen/dataio.hpp"
#include "thermogen/image.hpp"

namespace thermogen {

struct SceneConfig {
    int64_t image_side = 64;
    double rgb_rate_hz = 30.0;
    double thermal_rate_hz = 6.0;  // < 9 fps; gives the 1-real-in-5 pattern vs 30 Hz
    int64_t subjects = 17;
    int64_t samples_per_subject = 500;
    uint64_t seed = 1;

    void validate() const;
};

struct SubjectAppearance {
    int64_t subject_id = 0;
    std::array<float, 3> skin_tone = {0.78f, 0.62f, 0.50f};
    float thermal_gain = 1.0f;    // scales all body heat, spread +-30% across subjects
    float thermal_offset = 0.0f;  // added to the background code
    float head_rx = 0.10f, head_ry = 0.13f;
    float hand_r = 0.06f;
    uint64_t motion_seed = 0;
};

// Normalized scene coordinates in [0,1]; z grows away from the front camera.
struct BodyPos {
    float x = 0, y = 0, z = 0;
};

struct SceneState {
    BodyPos head, hand_a, hand_b;
    float panel_x = 0.62f;  // occluder center; panel plane sits at z = kPanelZ
    int64_t ts_ms = 0;
};

inline constexpr float kPanelZ = 0.5f;
inline constexpr float kPanelHalfWidth = 0.22f;
inline constexpr float kPanelTop = 0.10f;
// Heat kernel parameters (normalized units / thermal code units).
inline constexpr float kHeadSigma = 0.10f;
inline constexpr float kHandSigma = 0.06f;
inline constexpr float kHeadAmp = 95.0f;
inline constexpr float kHandAmp = 70.0f;
inline constexpr float kBackgroundCode = 34.0f;
inline constexpr float kOcclusionLeak = 0.6f;

SubjectAppearance subject_appearance(const SceneConfig& config, int64_t subject_id);

// Closed-form smooth motion; pure in (appearance.motion_seed, ts).
SceneState scene_state(const SubjectAppearance& appearance, int64_t ts_ms);

// Deterministic flat-shaded rasterization of one viewpoint.
ImageU8 render_view(const SceneState& state, const SubjectAppearance& appearance,
                    Modality view, int64_t side);
std::array<ImageU8, 4> render_views(const SceneState& state,
                                    const SubjectAppearance& appearance, int64_t side);

// Thermal camera shares the front viewpoint. The occluder attenuates the heat
// of bodies behind it but a substantial fraction leaks through, so occluded
// bodies stay thermally present while being invisible to the front camera.
ImageU8 render_thermal(const SceneState& state, const SubjectAppearance& appearance,
                       int64_t side);

// The pre-quantization thermal code at one pixel center; render_thermal is
// exactly the rounded clamp of this field.
float thermal_field_at(const SceneState& state, const SubjectAppearance& appearance,
                       int64_t px, int64_t py, int64_t side);

// True when the body's front projection falls inside the occluder panel.
bool occluded_in_front(const SceneState& state, const BodyPos& body);

// Renders every subject's streams under root (dataio layout), writes
// index.tsv and per-subject state.tsv sidecars, returns the manifest.
DatasetManifest generate_dataset(const SceneConfig& config, const std::string& root);

// Rebuilds a FrameStream by scanning a generated subject directory.
FrameStream scan_stream(const std::string& root, int64_t subject_id, Modality modality,
                        double nominal_rate_hz);

std::string subject_dir_name(int64_t subject_id);

}  // namespace thermogen
