#pragma once

#include <array>
#include <string>
#include <vector>

#include "thermogen/checkpoint.hpp"
#include "thermogen/dataio.hpp"
#include "thermogen/image.hpp"

namespace thermogen {

struct GapEntry {
    int64_t rgb_ts_ms = 0;
    int64_t nearest_thermal_ts_ms = 0;
    int64_t skew_ms = 0;
    bool is_gap = false;  // skew > threshold
};

struct GapReport {
    std::vector<GapEntry> entries;  // one per RGB timestamp, in order
    int64_t threshold_ms = 0;
};

GapReport detect_gaps(const FrameStream& rgb_stream, const FrameStream& thermal_stream,
                      int64_t threshold_ms);

enum class Provenance { Real, Synthetic };

struct PseudoFrame {
    int64_t ts_ms = 0;
    Provenance provenance = Provenance::Real;
    ImageU8 frame;
    int64_t source_thermal_ts_ms = 0;  // nearest real frame (Real) or -1
    int64_t skew_ms = 0;
    bool linear_fallback = false;  // linear baseline fell back to hold-last
};

struct PseudoCompleteStream {
    std::vector<PseudoFrame> frames;  // exactly one per RGB timestamp
    InputStyle style = InputStyle::FrontView;
    uint64_t checkpoint_digest = 0;
    std::string method = "generator";  // generator | hold_last | linear
};

// The four view frames available at one RGB instant.
struct ViewGroup {
    int64_t ts_ms = 0;
    std::array<FrameRef, 4> views;
};

// Groups the four RGB streams at the front stream's timestamps.
std::vector<ViewGroup> view_groups(const std::vector<FrameStream>& view_streams);

// Non-gap timestamps copy the nearest real thermal frame; gap timestamps get
// generator output on that instant's collage. Refuses a generator whose
// recorded input style differs from `style`.
PseudoCompleteStream fill_gaps(const std::string& root,
                               const std::vector<ViewGroup>& synced_views,
                               const GapReport& report,
                               const FrameStream& thermal_stream,
                               const LoadedTrainer& generator, InputStyle style);

enum class BaselineMethod { HoldLast, Linear };

PseudoCompleteStream baseline_fill(const std::string& root,
                                   const FrameStream& thermal_stream,
                                   const std::vector<int64_t>& rgb_timestamps,
                                   BaselineMethod method);

// Frames to out_dir/thermal/ in the dataset layout plus provenance.tsv
// (timestamp, source, skew, checkpoint digest).
void write_pseudo_stream(const PseudoCompleteStream& stream, const std::string& out_dir);

}  // namespace thermogen
