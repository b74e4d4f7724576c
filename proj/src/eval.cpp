#include "thermogen/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "thermogen/image.hpp"
#include "thermogen/ops.hpp"

namespace thermogen {

namespace {

float sample_l1(const Tensor& generated_m1, const Tensor& target01) {
    Tensor gen01 = to_eval_range(generated_m1);
    Tensor target = target01;
    if (target.shape() != gen01.shape())
        target = resize_bilinear(target, gen01.shape()[2], gen01.shape()[3]);
    return l1_mean(gen01, target).item();
}

void aggregate(EvalReport& report) {
    std::map<int64_t, std::pair<double, int64_t>> acc;
    for (const auto& [sid, l1] : report.per_sample) {
        acc[sid].first += l1;
        acc[sid].second += 1;
    }
    double mean_acc = 0.0;
    for (const auto& [sid, sum_count] : acc) {
        float m = static_cast<float>(sum_count.first / sum_count.second);
        report.per_subject_mean[sid] = m;
        mean_acc += m;
    }
    size_t k = report.per_subject_mean.size();
    report.mean = static_cast<float>(mean_acc / static_cast<double>(k));
    double var = 0.0;
    for (const auto& [sid, m] : report.per_subject_mean) {
        double d = m - report.mean;
        var += d * d;
    }
    report.stddev = static_cast<float>(std::sqrt(var / static_cast<double>(k)));
}

}  // namespace

EvalReport evaluate(const GeneratorFn& generator, const DatasetManifest& test,
                    InputStyle style, int64_t model_side) {
    if (test.samples.empty()) throw ContractError("evaluate: empty test manifest");
    EvalReport report;
    for (const SyncedSample& s : test.samples) {
        Tensor condition = load_model_input(test, s, style, model_side);
        Tensor target = load_thermal(test, s);
        float l1 = sample_l1(generator(condition), target);
        report.per_sample.emplace_back(s.subject_id, l1);
    }
    aggregate(report);
    return report;
}

EvalReport evaluate(const LoadedTrainer& generator, const DatasetManifest& test) {
    EvalReport report =
        evaluate([&](const Tensor& c) { return generator.generate(c); }, test,
                 generator.config.style, generator.config.image_side);
    report.config_digest = generator.digest;
    report.seed = generator.config.seed;
    return report;
}

TrainingSet load_training_set(const DatasetManifest& manifest, InputStyle style,
                              int64_t model_side) {
    if (manifest.samples.empty()) throw ContractError("empty training manifest");
    TrainingSet set;
    for (const SyncedSample& s : manifest.samples) {
        set.conditions.push_back(load_model_input(manifest, s, style, model_side));
        Tensor target = load_thermal(manifest, s);
        if (target.shape()[2] != model_side || target.shape()[3] != model_side)
            target = resize_bilinear(target, model_side, model_side);
        set.targets.push_back(to_model_range(target));
    }
    return set;
}

void train_pix2pix(Pix2pixTrainer& trainer, const TrainingSet& data, int64_t iterations,
                   const SnapshotSchedule* schedule, const std::string& snapshot_dir,
                   std::vector<Pix2pixLosses>* history) {
    if (!trainer.snapshot_input().defined())
        trainer.set_snapshot_input(data.conditions.front());
    for (int64_t it = 0; it < iterations; ++it) {
        if (schedule && schedule->due(trainer.iteration())) trainer.snapshot(snapshot_dir);
        size_t idx = static_cast<size_t>(trainer.rng().uniform_int(data.conditions.size()));
        Pix2pixLosses l = trainer.step(data.conditions[idx], data.targets[idx]);
        if (history) history->push_back(l);
    }
    if (schedule && schedule->due(trainer.iteration())) trainer.snapshot(snapshot_dir);
}

void train_cyclegan(CycleGanTrainer& trainer, const TrainingSet& data, int64_t iterations,
                    const SnapshotSchedule* schedule, const std::string& snapshot_dir,
                    std::vector<CycleGanLosses>* history) {
    if (!trainer.snapshot_input().defined())
        trainer.set_snapshot_input(data.conditions.front());
    for (int64_t it = 0; it < iterations; ++it) {
        if (schedule && schedule->due(trainer.iteration())) trainer.snapshot(snapshot_dir);
        // Unpaired sampling: independent draws from each domain.
        size_t ia = static_cast<size_t>(trainer.rng().uniform_int(data.conditions.size()));
        size_t ib = static_cast<size_t>(trainer.rng().uniform_int(data.targets.size()));
        CycleGanLosses l = trainer.step(data.conditions[ia], data.targets[ib]);
        if (history) history->push_back(l);
    }
    if (schedule && schedule->due(trainer.iteration())) trainer.snapshot(snapshot_dir);
}

float constant_mean_baseline(const TrainingSet& train, const DatasetManifest& test,
                             int64_t model_side) {
    if (train.targets.empty()) throw ContractError("constant_mean_baseline: empty train set");
    Tensor mean_img = Tensor::zeros(train.targets[0].shape());
    for (const Tensor& t : train.targets) {
        const auto& v = t.values();
        auto& m = mean_img.values();
        for (size_t i = 0; i < m.size(); ++i) m[i] += v[i];
    }
    for (float& m : mean_img.values()) m /= static_cast<float>(train.targets.size());

    double acc = 0.0;
    for (const SyncedSample& s : test.samples) {
        Tensor target = load_thermal(test, s);
        acc += sample_l1(mean_img, target);
    }
    return static_cast<float>(acc / static_cast<double>(test.samples.size()));
}

namespace {

ComparisonRow make_row(const std::string& label, const std::vector<float>& per_seed) {
    ComparisonRow row;
    row.label = label;
    row.per_seed = per_seed;
    double m = 0.0;
    for (float v : per_seed) m += v;
    row.mean_l1 = static_cast<float>(m / per_seed.size());
    double var = 0.0;
    for (float v : per_seed) var += (v - row.mean_l1) * (v - row.mean_l1);
    row.stddev = static_cast<float>(std::sqrt(var / per_seed.size()));
    return row;
}

int majority_count(const std::vector<float>& a, const std::vector<float>& b, bool strict) {
    int wins = 0;
    for (size_t i = 0; i < a.size(); ++i)
        if (strict ? a[i] < b[i] : a[i] <= b[i]) ++wins;
    return wins;
}

TrainerConfig with(const TrainerConfig& base, const std::string& arch, InputStyle style,
                   uint64_t seed) {
    TrainerConfig c = base;
    c.arch = arch;
    c.style = style;
    c.seed = seed;
    return c;
}

void log_progress(const CompareOptions& o, const std::string& msg) {
    if (o.verbose) std::fprintf(stderr, "[compare] %s\n", msg.c_str());
}

float run_pix2pix(const DatasetManifest& train, const DatasetManifest& test,
                  const TrainerConfig& config, int64_t iterations) {
    Pix2pixTrainer trainer(config);
    TrainingSet set = load_training_set(train, config.style, config.image_side);
    train_pix2pix(trainer, set, iterations);
    EvalReport r = evaluate([&](const Tensor& c) { return trainer.generate(c); }, test,
                            config.style, config.image_side);
    return r.mean;
}

float run_cyclegan(const DatasetManifest& train, const DatasetManifest& test,
                   const TrainerConfig& config, int64_t iterations) {
    CycleGanTrainer trainer(config);
    TrainingSet set = load_training_set(train, config.style, config.image_side);
    train_cyclegan(trainer, set, iterations);
    EvalReport r = evaluate([&](const Tensor& c) { return trainer.generate(c); }, test,
                            config.style, config.image_side);
    return r.mean;
}

}  // namespace

ComparisonTable compare_architectures(const DatasetManifest& dataset,
                                      const CompareOptions& options) {
    auto ids = subject_ids(dataset);
    if (ids.empty()) throw ContractError("compare_architectures: empty dataset");
    DatasetManifest subject = filter_subject(dataset, ids.front());

    std::vector<float> pix, cycle;
    for (uint64_t seed : options.seeds) {
        SplitResult s = split(subject, {0.8, 0.1, 0.1}, seed);
        log_progress(options, "arch seed " + std::to_string(seed) + ": pix2pix");
        pix.push_back(run_pix2pix(s.train, s.test,
                                  with(options.base, "pix2pix", InputStyle::FrontView, seed),
                                  options.iterations));
        log_progress(options, "arch seed " + std::to_string(seed) + ": cyclegan");
        TrainerConfig cg = with(options.base, "cyclegan", InputStyle::FrontView, seed);
        cg.weights.adv = LossWeights::Adversarial::LeastSquares;
        cycle.push_back(run_cyclegan(s.train, s.test, cg, options.iterations));
    }

    ComparisonTable table;
    table.experiment = "architectures";
    table.rows.push_back(make_row("pix2pix", pix));
    table.rows.push_back(make_row("cyclegan", cycle));
    table.notes.push_back("published reference (17-subject human dataset): "
                          "pix2pix 0.0676 +- 0.0106, CycleGAN 0.2179 +- 0.0633");
    int wins = majority_count(pix, cycle, true);
    table.ordering_ok = 2 * wins > static_cast<int>(pix.size());
    table.verdict = "pix2pix < cyclegan in " + std::to_string(wins) + "/" +
                    std::to_string(pix.size()) + " seeds";
    return table;
}

ComparisonTable compare_styles(const DatasetManifest& dataset,
                               const CompareOptions& options) {
    auto ids = subject_ids(dataset);
    if (static_cast<int64_t>(ids.size()) > options.n_subjects)
        ids.resize(static_cast<size_t>(options.n_subjects));
    if (ids.empty()) throw ContractError("compare_styles: empty dataset");

    const InputStyle styles[3] = {InputStyle::FrontView, InputStyle::FourViewTessellated,
                                  InputStyle::FourViewStacked};
    std::vector<float> per_seed[3];
    for (uint64_t seed : options.seeds) {
        for (int si = 0; si < 3; ++si) {
            double acc = 0.0;
            for (int64_t sid : ids) {
                SplitResult s = split(filter_subject(dataset, sid), {0.8, 0.1, 0.1}, seed);
                log_progress(options, "style " + style_name(styles[si]) + " seed " +
                                          std::to_string(seed) + " subject " +
                                          std::to_string(sid));
                acc += run_pix2pix(s.train, s.test,
                                   with(options.base, "pix2pix", styles[si], seed),
                                   options.iterations);
            }
            per_seed[si].push_back(static_cast<float>(acc / ids.size()));
        }
    }

    ComparisonTable table;
    table.experiment = "styles";
    table.rows.push_back(make_row("front", per_seed[0]));
    table.rows.push_back(make_row("tessellated", per_seed[1]));
    table.rows.push_back(make_row("stacked", per_seed[2]));
    table.notes.push_back("published reference (17-subject human dataset): front 0.0676, "
                          "tessellated 0.0587 +- 0.0109, stacked 0.0559 +- 0.0093");
    int wins_front = majority_count(per_seed[2], per_seed[0], true);
    int wins_tess = majority_count(per_seed[2], per_seed[1], false);
    table.ordering_ok = 2 * wins_front > static_cast<int>(options.seeds.size()) &&
                        2 * wins_tess > static_cast<int>(options.seeds.size());
    table.verdict = "stacked < front in " + std::to_string(wins_front) + "/" +
                    std::to_string(options.seeds.size()) + " seeds; stacked <= tessellated in " +
                    std::to_string(wins_tess) + "/" + std::to_string(options.seeds.size()) +
                    " seeds";
    return table;
}

ComparisonTable compare_generalization(const DatasetManifest& dataset,
                                       const CompareOptions& options) {
    auto ids = subject_ids(dataset);
    if (static_cast<int64_t>(ids.size()) > options.n_subjects)
        ids.resize(static_cast<size_t>(options.n_subjects));
    if (ids.size() < 2)
        throw ContractError("compare_generalization needs at least 2 subjects");

    std::vector<float> single, multi;
    for (uint64_t seed : options.seeds) {
        std::vector<DatasetManifest> train_parts;
        std::vector<DatasetManifest> test_parts;
        double single_acc = 0.0;
        for (int64_t sid : ids) {
            SplitResult s = split(filter_subject(dataset, sid), {0.8, 0.1, 0.1}, seed);
            log_progress(options, "generalization single seed " + std::to_string(seed) +
                                      " subject " + std::to_string(sid));
            single_acc += run_pix2pix(s.train, s.test,
                                      with(options.base, "pix2pix", InputStyle::FrontView, seed),
                                      options.iterations);
            train_parts.push_back(s.train);
            test_parts.push_back(s.test);
        }
        single.push_back(static_cast<float>(single_acc / ids.size()));

        DatasetManifest pool = merge(train_parts);
        size_t n = static_cast<size_t>(
            std::llround(options.pool_fraction * static_cast<double>(pool.samples.size())));
        n = std::max<size_t>(1, std::min(n, pool.samples.size()));
        DatasetManifest pooled_train = subsample(pool, n, seed);
        log_progress(options, "generalization pooled seed " + std::to_string(seed));
        Pix2pixTrainer trainer(with(options.base, "pix2pix", InputStyle::FrontView, seed));
        TrainingSet set = load_training_set(pooled_train, InputStyle::FrontView,
                                            options.base.image_side);
        train_pix2pix(trainer, set, options.iterations);
        double multi_acc = 0.0;
        for (const DatasetManifest& test : test_parts) {
            EvalReport r = evaluate([&](const Tensor& c) { return trainer.generate(c); },
                                    test, InputStyle::FrontView, options.base.image_side);
            multi_acc += r.mean;
        }
        multi.push_back(static_cast<float>(multi_acc / test_parts.size()));
    }

    ComparisonTable table;
    table.experiment = "subjects";
    table.rows.push_back(make_row("single_subject", single));
    table.rows.push_back(make_row("multi_subject", multi));
    table.notes.push_back("published reference (17-subject human dataset): single 0.0676 "
                          "+- 0.0106, multi 0.1116 +- 0.0186");
    int wins = majority_count(single, multi, true);
    table.ordering_ok = 2 * wins > static_cast<int>(single.size());
    table.verdict = "single < multi in " + std::to_string(wins) + "/" +
                    std::to_string(single.size()) + " seeds";
    return table;
}

void write_comparison_csv(const ComparisonTable& table, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write comparison csv: " + path);
    os << "condition,mean_l1,std,seeds,verdict\n";
    for (const auto& row : table.rows) {
        os << row.label << ',' << row.mean_l1 << ',' << row.stddev << ','
           << row.per_seed.size() << ',' << (table.ordering_ok ? "ok" : "not-reproduced")
           << '\n';
    }
    if (!os) throw IoError("comparison csv write failed: " + path);
}

std::string format_comparison(const ComparisonTable& table) {
    std::ostringstream os;
    os << "experiment: " << table.experiment << "\n";
    os << "std is the population std across seeds of per-subject-mean L1\n";
    char buf[128];
    for (const auto& row : table.rows) {
        std::snprintf(buf, sizeof(buf), "  %-16s %.4f +- %.4f  (", row.label.c_str(),
                      row.mean_l1, row.stddev);
        os << buf;
        for (size_t i = 0; i < row.per_seed.size(); ++i) {
            if (i) os << ", ";
            std::snprintf(buf, sizeof(buf), "%.4f", row.per_seed[i]);
            os << buf;
        }
        os << ")\n";
    }
    for (const auto& note : table.notes) os << "  note: " << note << "\n";
    os << "  verdict: " << table.verdict << (table.ordering_ok ? " [ok]" : " [NOT REPRODUCED]")
       << "\n";
    return os.str();
}

}  // namespace thermogen
