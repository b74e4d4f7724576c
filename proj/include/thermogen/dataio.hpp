#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "thermogen/image.hpp"
#include "thermogen/tensor.hpp"

namespace thermogen {

enum class Modality { Thermal, Front, Overhead, Profile, Tablet };

std::string modality_name(Modality m);
Modality parse_modality(const std::string& s);

// The four RGB views, in the fixed collage order.
inline constexpr std::array<Modality, 4> kViewOrder = {
    Modality::Front, Modality::Overhead, Modality::Profile, Modality::Tablet};

struct FrameRef {
    int64_t ts_ms = 0;
    std::string path;  // relative to the dataset root
};

struct FrameStream {
    Modality modality = Modality::Thermal;
    double nominal_rate_hz = 0.0;
    std::vector<FrameRef> frames;  // timestamps strictly increasing

    void validate() const;
};

// Linear temperature<->code map: -20 C -> 0, 300 C -> 255. Out-of-range
// temperatures clamp; the counter records how often.
struct ThermalCalibration {
    float min_temp_c = -20.0f;
    float max_temp_c = 300.0f;
    mutable uint64_t clamp_count = 0;

    float thermal_to_code(float temp_c) const;
    float code_to_thermal(float code) const;
};

struct SyncedSample {
    int64_t subject_id = 0;
    FrameRef thermal;
    std::array<FrameRef, 4> views;  // front, overhead, profile, tablet
};

enum class InputStyle { FrontView, FourViewTessellated, FourViewStacked };

std::string style_name(InputStyle s);
InputStyle parse_style(const std::string& s);

struct DatasetManifest {
    std::string root;
    std::string split = "unsplit";  // train | val | test | unsplit
    uint64_t seed = 0;
    std::vector<SyncedSample> samples;
};

// For each thermal frame, pairs the temporally nearest frame of each RGB
// stream; drops the thermal frame when any view's nearest frame is farther
// than tolerance_ms. Output is sorted by thermal timestamp. Equidistant
// candidates resolve to the earlier frame.
std::vector<SyncedSample> synchronize(const std::vector<FrameStream>& streams,
                                      int64_t tolerance_ms, int64_t subject_id = 0);

// Index of the frame in `frames` nearest to ts (earlier wins ties).
size_t nearest_frame(const std::vector<FrameRef>& frames, int64_t ts_ms);

// views are (1,C,S,S) tensors in [0,1], collage order front/overhead/
// profile/tablet. Tessellated: 2x2 row-major grid (2S x 2S). Stacked:
// vertical concatenation (4S x S). FrontView passes the front view through.
Tensor compose_collage(const std::array<Tensor, 4>& views, InputStyle style);
std::array<Tensor, 4> decompose_collage(const Tensor& collage, InputStyle style);

// Deterministic seeded shuffle then contiguous partition; remainder goes to
// train. Ratios must sum to 1.
struct SplitResult {
    DatasetManifest train, val, test;
};
SplitResult split(const DatasetManifest& manifest,
                  const std::array<double, 3>& ratios, uint64_t seed);

// Uniform sample of n entries without replacement.
DatasetManifest subsample(const DatasetManifest& manifest, size_t n, uint64_t seed);

DatasetManifest merge(const std::vector<DatasetManifest>& parts);
DatasetManifest filter_subject(const DatasetManifest& manifest, int64_t subject_id);
std::vector<int64_t> subject_ids(const DatasetManifest& manifest);

void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

// Loads the sample's four views, composes the requested collage, resizes to
// side x side and maps to model range [-1,1].
Tensor load_model_input(const DatasetManifest& manifest, const SyncedSample& sample,
                        InputStyle style, int64_t side);
// Ground-truth thermal frame in eval range [0,1], shape (1,1,S,S).
Tensor load_thermal(const DatasetManifest& manifest, const SyncedSample& sample);

// Default pairing tolerance: half the thermal nominal period.
int64_t default_tolerance_ms(double thermal_rate_hz);

}  // namespace thermogen
