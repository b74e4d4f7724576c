#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "thermogen/checkpoint.hpp"
#include "thermogen/dataio.hpp"
#include "thermogen/trainer.hpp"

namespace thermogen {

// L1 errors on normalized [0,1] pixels. The cross-subject mean is the
// arithmetic mean of per-subject means; the standard deviation is the
// population std across per-subject means.
struct EvalReport {
    std::vector<std::pair<int64_t, float>> per_sample;  // (subject id, L1)
    std::map<int64_t, float> per_subject_mean;
    float mean = 0.0f;
    float stddev = 0.0f;
    uint64_t config_digest = 0;
    uint64_t seed = 0;
};

using GeneratorFn = std::function<Tensor(const Tensor&)>;  // [-1,1] -> [-1,1]

EvalReport evaluate(const GeneratorFn& generator, const DatasetManifest& test,
                    InputStyle style, int64_t model_side);

EvalReport evaluate(const LoadedTrainer& generator, const DatasetManifest& test);

// Preloaded (condition, target) pairs in model range.
struct TrainingSet {
    std::vector<Tensor> conditions;
    std::vector<Tensor> targets;
};
TrainingSet load_training_set(const DatasetManifest& manifest, InputStyle style,
                              int64_t model_side);

// Drives the trainer for `iterations` steps, sampling uniformly with the
// trainer's own RNG. Optional snapshot emission per schedule.
void train_pix2pix(Pix2pixTrainer& trainer, const TrainingSet& data, int64_t iterations,
                   const SnapshotSchedule* schedule = nullptr,
                   const std::string& snapshot_dir = "",
                   std::vector<Pix2pixLosses>* history = nullptr);
void train_cyclegan(CycleGanTrainer& trainer, const TrainingSet& data, int64_t iterations,
                    const SnapshotSchedule* schedule = nullptr,
                    const std::string& snapshot_dir = "",
                    std::vector<CycleGanLosses>* history = nullptr);

// Mean L1 of the per-pixel-mean training image against the test targets.
float constant_mean_baseline(const TrainingSet& train, const DatasetManifest& test,
                             int64_t model_side);

struct ComparisonRow {
    std::string label;
    float mean_l1 = 0.0f;
    float stddev = 0.0f;
    std::vector<float> per_seed;
};

struct ComparisonTable {
    std::string experiment;
    std::vector<ComparisonRow> rows;
    std::vector<std::string> notes;     // includes published reference values
    bool ordering_ok = false;           // majority over seeds
    std::string verdict;
};

struct CompareOptions {
    std::vector<uint64_t> seeds = {1, 2, 3};
    int64_t iterations = 5000;
    int64_t n_subjects = 4;
    double pool_fraction = 5000.0 / 8500.0;  // pooled-training subsample ratio
    TrainerConfig base;
    bool verbose = false;
};

// pix2pix vs CycleGAN, front view, one subject.
ComparisonTable compare_architectures(const DatasetManifest& dataset,
                                      const CompareOptions& options);
// Per-subject pix2pix across the three input styles.
ComparisonTable compare_styles(const DatasetManifest& dataset,
                               const CompareOptions& options);
// Per-subject models vs one pooled model, front view.
ComparisonTable compare_generalization(const DatasetManifest& dataset,
                                       const CompareOptions& options);

void write_comparison_csv(const ComparisonTable& table, const std::string& path);
std::string format_comparison(const ComparisonTable& table);

}  // namespace thermogen
