// thermogen: synthetic RGB->thermal translation toolbench.
//
// Subcommands: synth-data, train, evaluate, fill-gaps, compare.
// Configuration comes from flags, optionally seeded by a line-oriented
// key=value file (--config); flags override the file. Every run writes a
// run_manifest.txt of its effective inputs next to its outputs.
//
// Exit codes: 0 success, 1 usage/configuration, 2 I/O, 3 comparison ordering
// not reproduced.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>

#include "thermogen/checkpoint.hpp"
#include "thermogen/eval.hpp"
#include "thermogen/gapfill.hpp"
#include "thermogen/runconfig.hpp"
#include "thermogen/synthscene.hpp"

namespace fs = std::filesystem;
using namespace thermogen;

namespace {

// Removes a fresh output directory again if the command aborts midway, so a
// failed run never leaves partial results behind.
class OutputGuard {
  public:
    explicit OutputGuard(const std::string& dir)
        : dir_(dir), existed_(fs::exists(dir)) {
        fs::create_directories(dir);
    }
    ~OutputGuard() {
        if (committed_) return;
        std::error_code ec;
        if (!existed_) {
            fs::remove_all(dir_, ec);
        } else {
            for (const auto& p : products_) fs::remove_all(p, ec);
        }
    }
    // Files/subdirectories this run creates inside a pre-existing directory.
    void track(const std::string& path) { products_.push_back(path); }
    void commit() { committed_ = true; }
    const std::string& dir() const { return dir_; }

  private:
    std::string dir_;
    bool existed_ = false;
    bool committed_ = false;
    std::vector<std::string> products_;
};

std::vector<std::pair<std::string, std::string>> manifest_entries(const CLI::App* cmd) {
    std::vector<std::pair<std::string, std::string>> entries;
    entries.emplace_back("command", cmd->get_name());
    for (const CLI::Option* opt : cmd->get_options()) {
        if (opt->get_name() == "--help" || opt->get_name() == "--config") continue;
        std::string value = opt->count() ? opt->results().front() : opt->get_default_str();
        if (value.empty() && !opt->count()) continue;
        std::string key = opt->get_name();
        while (!key.empty() && key.front() == '-') key.erase(key.begin());
        entries.emplace_back(key, value);
    }
    return entries;
}

int run_synth_data(const CLI::App* cmd, const std::string& out, const SceneConfig& scene) {
    OutputGuard guard(out);
    DatasetManifest manifest = generate_dataset(scene, out);
    write_run_manifest(out, manifest_entries(cmd));
    guard.commit();
    std::printf("wrote %zu synced samples for %lld subjects under %s\n",
                manifest.samples.size(), static_cast<long long>(scene.subjects),
                out.c_str());
    return 0;
}

struct TrainArgs {
    std::string data, out;
    TrainerConfig config;
    std::string arch = "pix2pix";
    std::string style = "front";
    int64_t iterations = 5000;
    int64_t subject = -1;  // -1 trains on the whole manifest
    uint64_t split_seed = UINT64_MAX;
    bool snapshots = false;
};

int run_train(const CLI::App* cmd, TrainArgs& args) {
    args.config.arch = args.arch;
    args.config.style = parse_style(args.style);
    if (args.split_seed == UINT64_MAX) args.split_seed = args.config.seed;

    DatasetManifest dataset = read_manifest(args.data);
    if (args.subject >= 0) dataset = filter_subject(dataset, args.subject);
    SplitResult parts = split(dataset, {0.8, 0.1, 0.1}, args.split_seed);

    OutputGuard guard(args.out);
    guard.track(args.out + "/checkpoint.tgck");
    for (const char* name : {"train", "val", "test"}) guard.track(args.out + "/" + name + ".tsv");
    guard.track(args.out + "/snapshots");
    guard.track(args.out + "/losses.tsv");
    guard.track(args.out + "/run_manifest.txt");

    write_manifest(parts.train, args.out + "/train.tsv");
    write_manifest(parts.val, args.out + "/val.tsv");
    write_manifest(parts.test, args.out + "/test.tsv");

    TrainingSet set =
        load_training_set(parts.train, args.config.style, args.config.image_side);
    SnapshotSchedule schedule =
        SnapshotSchedule::dense_then_jump(10, 60, 20000, args.iterations);
    const SnapshotSchedule* sched = args.snapshots ? &schedule : nullptr;
    std::string snap_dir = args.out + "/snapshots";

    std::string ck_path = args.out + "/checkpoint.tgck";
    std::FILE* losses = std::fopen((args.out + "/losses.tsv").c_str(), "w");
    if (!losses) throw IoError("cannot write losses under " + args.out);
    if (args.config.arch == "cyclegan") {
        CycleGanTrainer trainer(args.config);
        std::vector<CycleGanLosses> history;
        train_cyclegan(trainer, set, args.iterations, sched, snap_dir, &history);
        std::fprintf(losses, "# iter\td_a\td_b\tg_ab_adv\tg_ba_adv\tcycle_a\tcycle_b\n");
        for (size_t i = 0; i < history.size(); ++i)
            std::fprintf(losses, "%zu\t%g\t%g\t%g\t%g\t%g\t%g\n", i, history[i].d_a,
                         history[i].d_b, history[i].g_ab_adv, history[i].g_ba_adv,
                         history[i].cycle_a, history[i].cycle_b);
        save_checkpoint(trainer, ck_path);
    } else {
        Pix2pixTrainer trainer(args.config);
        std::vector<Pix2pixLosses> history;
        train_pix2pix(trainer, set, args.iterations, sched, snap_dir, &history);
        std::fprintf(losses, "# iter\td_loss\tg_adv\tg_l1\n");
        for (size_t i = 0; i < history.size(); ++i)
            std::fprintf(losses, "%zu\t%g\t%g\t%g\n", i, history[i].d_loss,
                         history[i].g_adv, history[i].g_l1);
        save_checkpoint(trainer, ck_path);
    }
    std::fclose(losses);
    write_run_manifest(args.out, manifest_entries(cmd));
    guard.commit();
    std::printf("trained %s/%s for %lld iterations; checkpoint at %s\n",
                args.config.arch.c_str(), args.style.c_str(),
                static_cast<long long>(args.iterations), ck_path.c_str());
    return 0;
}

int run_evaluate(const CLI::App* cmd, const std::string& checkpoint,
                 const std::string& data, const std::string& out) {
    LoadedTrainer generator = load_checkpoint(checkpoint);
    DatasetManifest test = read_manifest(data);
    EvalReport report = evaluate(generator, test);

    std::printf("config digest %016llx, seed %llu\n",
                static_cast<unsigned long long>(report.config_digest),
                static_cast<unsigned long long>(report.seed));
    for (const auto& [sid, mean] : report.per_subject_mean)
        std::printf("subject %lld: mean L1 %.4f\n", static_cast<long long>(sid), mean);
    std::printf("mean L1 %.4f +- %.4f (population std across %zu subjects)\n",
                report.mean, report.stddev, report.per_subject_mean.size());

    if (!out.empty()) {
        OutputGuard guard(out);
        guard.track(out + "/report.csv");
        guard.track(out + "/run_manifest.txt");
        std::FILE* f = std::fopen((out + "/report.csv").c_str(), "w");
        if (!f) throw IoError("cannot write report under " + out);
        std::fprintf(f, "subject,mean_l1\n");
        for (const auto& [sid, mean] : report.per_subject_mean)
            std::fprintf(f, "%lld,%g\n", static_cast<long long>(sid), mean);
        std::fprintf(f, "all,%g\n", report.mean);
        std::fclose(f);
        write_run_manifest(out, manifest_entries(cmd));
        guard.commit();
    }
    return 0;
}

struct FillArgs {
    std::string data, checkpoint, out;
    int64_t subject = 0;
    int64_t threshold = 25;
    double rgb_rate = 30.0;
    double thermal_rate = 6.0;
};

int run_fill_gaps(const CLI::App* cmd, const FillArgs& args) {
    LoadedTrainer generator = load_checkpoint(args.checkpoint);
    FrameStream thermal =
        scan_stream(args.data, args.subject, Modality::Thermal, args.thermal_rate);
    std::vector<FrameStream> views;
    for (Modality m : kViewOrder)
        views.push_back(scan_stream(args.data, args.subject, m, args.rgb_rate));

    auto groups = view_groups(views);
    GapReport report = detect_gaps(views[0], thermal, args.threshold);
    PseudoCompleteStream stream = fill_gaps(args.data, groups, report, thermal, generator,
                                            generator.config.style);

    OutputGuard guard(args.out);
    guard.track(args.out + "/thermal");
    guard.track(args.out + "/provenance.tsv");
    guard.track(args.out + "/run_manifest.txt");
    write_pseudo_stream(stream, args.out);
    write_run_manifest(args.out, manifest_entries(cmd));
    guard.commit();

    size_t synth = 0;
    for (const auto& f : stream.frames) synth += f.provenance == Provenance::Synthetic;
    std::printf("%zu frames (%zu real, %zu generated) under %s\n", stream.frames.size(),
                stream.frames.size() - synth, synth, args.out.c_str());
    return 0;
}

struct CompareArgs {
    std::string mode, data, out;
    CompareOptions options;
    int64_t n_seeds = 3;
};

int run_compare(const CLI::App* cmd, CompareArgs& args) {
    args.options.seeds.clear();
    for (int64_t s = 1; s <= args.n_seeds; ++s)
        args.options.seeds.push_back(static_cast<uint64_t>(s));

    DatasetManifest dataset = read_manifest(args.data);
    ComparisonTable table;
    if (args.mode == "arch")
        table = compare_architectures(dataset, args.options);
    else if (args.mode == "style")
        table = compare_styles(dataset, args.options);
    else if (args.mode == "subjects")
        table = compare_generalization(dataset, args.options);
    else
        throw ConfigError("unknown comparison mode: " + args.mode +
                          " (arch|style|subjects)");

    OutputGuard guard(args.out);
    guard.track(args.out + "/comparison.csv");
    guard.track(args.out + "/comparison.txt");
    guard.track(args.out + "/run_manifest.txt");
    write_comparison_csv(table, args.out + "/comparison.csv");
    std::string text = format_comparison(table);
    std::FILE* f = std::fopen((args.out + "/comparison.txt").c_str(), "w");
    if (!f) throw IoError("cannot write comparison text under " + args.out);
    std::fputs(text.c_str(), f);
    std::fclose(f);
    write_run_manifest(args.out, manifest_entries(cmd));
    guard.commit();

    std::fputs(text.c_str(), stdout);
    return table.ordering_ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic RGB->thermal stream translation toolbench", "thermogen"};
    app.require_subcommand(1);
    app.set_config("--config", "", "line-oriented key=value configuration file");
    app.set_version_flag("--version", tool_version());

    SceneConfig scene;
    std::string synth_out;
    CLI::App* synth = app.add_subcommand("synth-data", "generate the synthetic dataset");
    synth->add_option("--out", synth_out, "dataset root directory")->required();
    synth->add_option("--subjects", scene.subjects, "number of subjects");
    synth->add_option("--samples", scene.samples_per_subject, "synced samples per subject");
    synth->add_option("--side", scene.image_side, "square image side in pixels");
    synth->add_option("--rgb-rate", scene.rgb_rate_hz, "RGB frame rate (Hz)");
    synth->add_option("--thermal-rate", scene.thermal_rate_hz, "thermal frame rate (Hz)");
    synth->add_option("--seed", scene.seed, "scene RNG seed");

    TrainArgs train;
    CLI::App* tr = app.add_subcommand("train", "train a translation model");
    tr->add_option("--data", train.data, "dataset index.tsv")->required();
    tr->add_option("--out", train.out, "output directory")->required();
    tr->add_option("--arch", train.arch, "pix2pix|cyclegan");
    tr->add_option("--style", train.style, "front|tessellated|stacked");
    tr->add_option("--seed", train.config.seed, "training seed");
    tr->add_option("--iterations", train.iterations, "training iterations");
    tr->add_option("--subject", train.subject, "restrict to one subject id (-1 = all)");
    tr->add_option("--side", train.config.image_side, "model input side");
    tr->add_option("--base-width", train.config.base_width, "first conv width");
    tr->add_option("--levels", train.config.levels, "U-Net depth");
    tr->add_option("--res-blocks", train.config.res_blocks, "CycleGAN residual blocks");
    tr->add_option("--split-seed", train.split_seed, "split seed (default: --seed)");
    tr->add_flag("--snapshots", train.snapshots, "emit progress snapshots");

    std::string eval_checkpoint, eval_data, eval_out;
    CLI::App* ev = app.add_subcommand("evaluate", "score a checkpoint on a manifest");
    ev->add_option("--checkpoint", eval_checkpoint, "trained checkpoint")->required();
    ev->add_option("--data", eval_data, "test manifest (.tsv)")->required();
    ev->add_option("--out", eval_out, "optional report directory");

    FillArgs fill;
    CLI::App* fg = app.add_subcommand("fill-gaps",
                                      "complete a thermal stream at the RGB rate");
    fg->add_option("--data", fill.data, "dataset root directory")->required();
    fg->add_option("--checkpoint", fill.checkpoint, "trained checkpoint")->required();
    fg->add_option("--out", fill.out, "output directory")->required();
    fg->add_option("--subject", fill.subject, "subject id");
    fg->add_option("--threshold", fill.threshold, "gap threshold in ms");
    fg->add_option("--rgb-rate", fill.rgb_rate, "RGB frame rate (Hz)");
    fg->add_option("--thermal-rate", fill.thermal_rate, "thermal frame rate (Hz)");

    CompareArgs cmp;
    CLI::App* cp = app.add_subcommand("compare", "seeded ordering comparisons");
    cp->add_option("mode", cmp.mode, "arch|style|subjects")->required();
    cp->add_option("--data", cmp.data, "dataset index.tsv")->required();
    cp->add_option("--out", cmp.out, "output directory")->required();
    cp->add_option("--seeds", cmp.n_seeds, "number of seeds (1..N)");
    cp->add_option("--iterations", cmp.options.iterations, "iterations per condition");
    cp->add_option("--subjects", cmp.options.n_subjects, "subjects per condition");
    cp->add_option("--side", cmp.options.base.image_side, "model input side");
    cp->add_option("--base-width", cmp.options.base.base_width, "first conv width");
    cp->add_option("--levels", cmp.options.base.levels, "U-Net depth");
    cp->add_option("--res-blocks", cmp.options.base.res_blocks, "CycleGAN residual blocks");
    cp->add_option("--pool-fraction", cmp.options.pool_fraction,
                   "pooled-training subsample ratio");
    cp->add_flag("--verbose", cmp.options.verbose, "log per-cell progress");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) return run_synth_data(synth, synth_out, scene);
        if (tr->parsed()) return run_train(tr, train);
        if (ev->parsed()) return run_evaluate(ev, eval_checkpoint, eval_data, eval_out);
        if (fg->parsed()) return run_fill_gaps(fg, fill);
        if (cp->parsed()) return run_compare(cp, cmp);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
