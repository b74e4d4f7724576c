#pragma once

#include <memory>
#include <string>
#include <vector>

#include "thermogen/adam.hpp"
#include "thermogen/dataio.hpp"
#include "thermogen/models.hpp"
#include "thermogen/rng.hpp"

namespace thermogen {

struct LossWeights {
    float lambda_l1 = 100.0f;     // pix2pix reconstruction weight
    float lambda_cycle = 10.0f;   // CycleGAN cycle weight
    enum class Adversarial { BinaryCrossEntropy, LeastSquares };
    Adversarial adv = Adversarial::BinaryCrossEntropy;

    void validate() const {
        if (lambda_l1 < 0 || lambda_cycle < 0)
            throw ConfigError("loss weights must be non-negative");
    }
};

// One trainer run's full model/optimizer configuration; round-trips through
// the checkpoint header.
struct TrainerConfig {
    std::string arch = "pix2pix";  // pix2pix | cyclegan
    InputStyle style = InputStyle::FrontView;
    int64_t image_side = 64;
    int64_t base_width = 32;
    int levels = 4;
    int res_blocks = 4;
    LossWeights weights;
    AdamConfig adam;
    uint64_t seed = 0;

    std::string to_string() const;
    static TrainerConfig from_string(const std::string& s);
    uint64_t digest() const { return fnv1a(to_string()); }
};

// Snapshot cadence: dense early stretch, then a late jump capped to the
// iteration budget.
struct SnapshotSchedule {
    std::vector<int64_t> iterations;

    static SnapshotSchedule dense_then_jump(int64_t every, int64_t until,
                                            int64_t jump, int64_t budget);
    bool due(int64_t iter) const;
};

struct Pix2pixLosses {
    float d_loss = 0, g_adv = 0, g_l1 = 0;
};

class Pix2pixTrainer {
public:
    explicit Pix2pixTrainer(const TrainerConfig& config);

    // One discriminator update on (real pair, generated pair), then one
    // generator update on adversarial + lambda_l1 * L1. Inputs in [-1,1].
    Pix2pixLosses step(const Tensor& condition, const Tensor& target);

    Tensor generate(const Tensor& condition) const;  // detached [-1,1] output

    int64_t iteration() const { return iteration_; }
    const TrainerConfig& config() const { return config_; }
    Rng& rng() { return rng_; }

    UNetGenerator& generator() { return *generator_; }
    PatchGan& discriminator() { return *discriminator_; }
    AdamState& generator_adam() { return adam_g_; }
    AdamState& discriminator_adam() { return adam_d_; }

    void set_snapshot_input(const Tensor& condition) { snapshot_input_ = condition.detach(); }
    const Tensor& snapshot_input() const { return snapshot_input_; }
    // Writes the generator's output on the fixed snapshot input, [-1,1]
    // mapped to [0,255]; returns the file path.
    std::string snapshot(const std::string& out_dir) const;

    void restore_counters(int64_t iteration, uint64_t rng_seed, uint64_t rng_stream,
                          uint64_t rng_counter);

private:
    TrainerConfig config_;
    std::unique_ptr<UNetGenerator> generator_;
    std::unique_ptr<PatchGan> discriminator_;
    std::vector<Tensor> g_params_, d_params_;
    AdamState adam_g_, adam_d_;
    int64_t iteration_ = 0;
    Rng rng_;
    Tensor snapshot_input_;
};

struct CycleGanLosses {
    float d_a = 0, d_b = 0, g_ab_adv = 0, g_ba_adv = 0, cycle_a = 0, cycle_b = 0;
};

// Domain A: RGB collages. Domain B: thermal. Least-squares adversarial loss.
class CycleGanTrainer {
public:
    explicit CycleGanTrainer(const TrainerConfig& config);

    CycleGanLosses step(const Tensor& domain_a, const Tensor& domain_b);

    Tensor generate(const Tensor& domain_a) const;  // A -> B translation

    int64_t iteration() const { return iteration_; }
    const TrainerConfig& config() const { return config_; }
    Rng& rng() { return rng_; }

    ResNetGenerator& generator_ab() { return *gen_ab_; }
    ResNetGenerator& generator_ba() { return *gen_ba_; }
    PatchGan& discriminator_a() { return *disc_a_; }
    PatchGan& discriminator_b() { return *disc_b_; }
    AdamState& generators_adam() { return adam_g_; }
    AdamState& discriminator_a_adam() { return adam_da_; }
    AdamState& discriminator_b_adam() { return adam_db_; }

    void set_snapshot_input(const Tensor& a) { snapshot_input_ = a.detach(); }
    const Tensor& snapshot_input() const { return snapshot_input_; }
    std::string snapshot(const std::string& out_dir) const;

    void restore_counters(int64_t iteration, uint64_t rng_seed, uint64_t rng_stream,
                          uint64_t rng_counter);

private:
    TrainerConfig config_;
    std::unique_ptr<ResNetGenerator> gen_ab_, gen_ba_;
    std::unique_ptr<PatchGan> disc_a_, disc_b_;
    std::vector<Tensor> g_params_, da_params_, db_params_;
    AdamState adam_g_, adam_da_, adam_db_;
    int64_t iteration_ = 0;
    Rng rng_;
    Tensor snapshot_input_;
};

void check_finite(float v, const char* term, int64_t iteration);

}  // namespace thermogen
