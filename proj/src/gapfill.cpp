#include "thermogen/gapfill.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace thermogen {

GapReport detect_gaps(const FrameStream& rgb_stream, const FrameStream& thermal_stream,
                      int64_t threshold_ms) {
    if (threshold_ms <= 0) throw ContractError("gap threshold must be positive");
    rgb_stream.validate();
    thermal_stream.validate();
    GapReport report;
    report.threshold_ms = threshold_ms;
    if (rgb_stream.frames.empty()) return report;
    if (thermal_stream.frames.empty())
        throw ContractError("detect_gaps: thermal stream is empty");
    for (const FrameRef& f : rgb_stream.frames) {
        const FrameRef& nearest =
            thermal_stream.frames[nearest_frame(thermal_stream.frames, f.ts_ms)];
        GapEntry e;
        e.rgb_ts_ms = f.ts_ms;
        e.nearest_thermal_ts_ms = nearest.ts_ms;
        e.skew_ms = std::llabs(nearest.ts_ms - f.ts_ms);
        e.is_gap = e.skew_ms > threshold_ms;
        report.entries.push_back(e);
    }
    return report;
}

std::vector<ViewGroup> view_groups(const std::vector<FrameStream>& view_streams) {
    std::array<const FrameStream*, 4> views = {};
    for (const auto& s : view_streams) {
        s.validate();
        for (size_t i = 0; i < kViewOrder.size(); ++i)
            if (s.modality == kViewOrder[i]) views[i] = &s;
    }
    for (size_t i = 0; i < views.size(); ++i)
        if (!views[i] || views[i]->frames.empty())
            throw ContractError("view_groups: missing or empty " +
                                modality_name(kViewOrder[i]) + " stream");
    std::vector<ViewGroup> groups;
    for (const FrameRef& f : views[0]->frames) {
        ViewGroup g;
        g.ts_ms = f.ts_ms;
        for (size_t i = 0; i < views.size(); ++i)
            g.views[i] = views[i]->frames[nearest_frame(views[i]->frames, f.ts_ms)];
        groups.push_back(std::move(g));
    }
    return groups;
}

namespace {

ImageU8 generate_frame(const std::string& root, const ViewGroup& group,
                       const LoadedTrainer& generator, InputStyle style,
                       int64_t out_side) {
    std::array<Tensor, 4> views;
    for (size_t i = 0; i < 4; ++i)
        views[i] = image_to_tensor(read_png((fs::path(root) / group.views[i].path).string()));
    Tensor collage = compose_collage(views, style);
    collage = resize_bilinear(collage, generator.config.image_side, generator.config.image_side);
    Tensor out = generator.generate(to_model_range(collage));
    Tensor out01 = to_eval_range(out);
    out01 = resize_bilinear(out01, out_side, out_side);
    return tensor_to_image(out01);
}

}  // namespace

PseudoCompleteStream fill_gaps(const std::string& root,
                               const std::vector<ViewGroup>& synced_views,
                               const GapReport& report,
                               const FrameStream& thermal_stream,
                               const LoadedTrainer& generator, InputStyle style) {
    if (generator.config.style != style)
        throw ContractError("fill_gaps: generator was trained with style '" +
                            style_name(generator.config.style) + "', requested '" +
                            style_name(style) + "'");
    if (synced_views.size() != report.entries.size())
        throw ContractError("fill_gaps: view groups and gap report disagree on length");
    if (thermal_stream.frames.empty())
        throw ContractError("fill_gaps: empty thermal stream");

    // Output frames match the real thermal extent.
    ImageU8 first = read_png((fs::path(root) / thermal_stream.frames[0].path).string());
    int64_t side = first.height;

    PseudoCompleteStream out;
    out.style = style;
    out.checkpoint_digest = generator.digest;
    out.method = "generator";
    for (size_t i = 0; i < report.entries.size(); ++i) {
        const GapEntry& e = report.entries[i];
        if (synced_views[i].ts_ms != e.rgb_ts_ms)
            throw ContractError("fill_gaps: view group timestamps diverge from gap report");
        PseudoFrame f;
        f.ts_ms = e.rgb_ts_ms;
        f.skew_ms = e.skew_ms;
        if (!e.is_gap) {
            size_t idx = nearest_frame(thermal_stream.frames, e.rgb_ts_ms);
            f.provenance = Provenance::Real;
            f.source_thermal_ts_ms = thermal_stream.frames[idx].ts_ms;
            f.frame = read_png((fs::path(root) / thermal_stream.frames[idx].path).string());
        } else {
            f.provenance = Provenance::Synthetic;
            f.source_thermal_ts_ms = -1;
            f.frame = generate_frame(root, synced_views[i], generator, style, side);
        }
        out.frames.push_back(std::move(f));
    }
    return out;
}

PseudoCompleteStream baseline_fill(const std::string& root,
                                   const FrameStream& thermal_stream,
                                   const std::vector<int64_t>& rgb_timestamps,
                                   BaselineMethod method) {
    thermal_stream.validate();
    if (thermal_stream.frames.empty())
        throw ContractError("baseline_fill: empty thermal stream");
    const auto& frames = thermal_stream.frames;
    if (!rgb_timestamps.empty() && rgb_timestamps.front() < frames.front().ts_ms)
        throw ContractError("baseline_fill: no thermal frame at or before the first "
                            "requested timestamp");

    std::vector<ImageU8> cache(frames.size());
    auto frame_at = [&](size_t i) -> const ImageU8& {
        if (cache[i].pixels.empty())
            cache[i] = read_png((fs::path(root) / frames[i].path).string());
        return cache[i];
    };

    PseudoCompleteStream out;
    out.method = method == BaselineMethod::HoldLast ? "hold_last" : "linear";
    for (int64_t ts : rgb_timestamps) {
        // last frame at or before ts
        size_t lo = 0;
        while (lo + 1 < frames.size() && frames[lo + 1].ts_ms <= ts) ++lo;
        PseudoFrame f;
        f.ts_ms = ts;
        f.skew_ms = ts - frames[lo].ts_ms;
        if (frames[lo].ts_ms == ts) {
            f.provenance = Provenance::Real;
            f.source_thermal_ts_ms = frames[lo].ts_ms;
            f.frame = frame_at(lo);
        } else if (method == BaselineMethod::HoldLast || lo + 1 >= frames.size()) {
            f.provenance = Provenance::Synthetic;
            f.source_thermal_ts_ms = frames[lo].ts_ms;
            f.frame = frame_at(lo);
            f.linear_fallback = method == BaselineMethod::Linear;
        } else {
            const ImageU8& a = frame_at(lo);
            const ImageU8& b = frame_at(lo + 1);
            double w = static_cast<double>(ts - frames[lo].ts_ms) /
                       static_cast<double>(frames[lo + 1].ts_ms - frames[lo].ts_ms);
            ImageU8 blend = a;
            for (size_t i = 0; i < blend.pixels.size(); ++i) {
                double v = a.pixels[i] / 255.0 * (1.0 - w) + b.pixels[i] / 255.0 * w;
                blend.pixels[i] = static_cast<uint8_t>(std::lround(v * 255.0));
            }
            f.provenance = Provenance::Synthetic;
            f.source_thermal_ts_ms = frames[lo].ts_ms;
            f.frame = std::move(blend);
        }
        out.frames.push_back(std::move(f));
    }
    return out;
}

void write_pseudo_stream(const PseudoCompleteStream& stream, const std::string& out_dir) {
    fs::create_directories(fs::path(out_dir) / "thermal");
    std::ofstream prov(fs::path(out_dir) / "provenance.tsv");
    if (!prov) throw IoError("cannot write provenance.tsv under " + out_dir);
    prov << "# ts_ms\tsource\tskew_ms\tcheckpoint_digest\n";
    for (size_t i = 0; i < stream.frames.size(); ++i) {
        const PseudoFrame& f = stream.frames[i];
        char name[64];
        std::snprintf(name, sizeof(name), "%06zu_ts%lld.png", i,
                      static_cast<long long>(f.ts_ms));
        write_png((fs::path(out_dir) / "thermal" / name).string(), f.frame);
        prov << f.ts_ms << '\t'
             << (f.provenance == Provenance::Real ? "real" : "synthetic") << '\t'
             << f.skew_ms << '\t' << stream.checkpoint_digest << '\n';
    }
    if (!prov) throw IoError("provenance write failed under " + out_dir);
}

}  // namespace thermogen
