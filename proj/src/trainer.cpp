#include "thermogen/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "thermogen/image.hpp"

namespace fs = std::filesystem;

namespace thermogen {

std::string TrainerConfig::to_string() const {
    std::ostringstream os;
    os << "arch=" << arch << "\n"
       << "style=" << style_name(style) << "\n"
       << "image_side=" << image_side << "\n"
       << "base_width=" << base_width << "\n"
       << "levels=" << levels << "\n"
       << "res_blocks=" << res_blocks << "\n"
       << "lambda_l1=" << weights.lambda_l1 << "\n"
       << "lambda_cycle=" << weights.lambda_cycle << "\n"
       << "adv=" << (weights.adv == LossWeights::Adversarial::BinaryCrossEntropy ? "bce" : "lsgan")
       << "\n"
       << "lr=" << adam.lr << "\n"
       << "beta1=" << adam.beta1 << "\n"
       << "beta2=" << adam.beta2 << "\n"
       << "epsilon=" << adam.epsilon << "\n"
       << "seed=" << seed << "\n";
    return os.str();
}

TrainerConfig TrainerConfig::from_string(const std::string& s) {
    TrainerConfig c;
    std::istringstream is(s);
    std::string line;
    while (std::getline(is, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        if (key == "arch") c.arch = val;
        else if (key == "style") c.style = parse_style(val);
        else if (key == "image_side") c.image_side = std::stoll(val);
        else if (key == "base_width") c.base_width = std::stoll(val);
        else if (key == "levels") c.levels = std::stoi(val);
        else if (key == "res_blocks") c.res_blocks = std::stoi(val);
        else if (key == "lambda_l1") c.weights.lambda_l1 = std::stof(val);
        else if (key == "lambda_cycle") c.weights.lambda_cycle = std::stof(val);
        else if (key == "adv")
            c.weights.adv = val == "bce" ? LossWeights::Adversarial::BinaryCrossEntropy
                                         : LossWeights::Adversarial::LeastSquares;
        else if (key == "lr") c.adam.lr = std::stof(val);
        else if (key == "beta1") c.adam.beta1 = std::stof(val);
        else if (key == "beta2") c.adam.beta2 = std::stof(val);
        else if (key == "epsilon") c.adam.epsilon = std::stof(val);
        else if (key == "seed") c.seed = std::stoull(val);
    }
    return c;
}

SnapshotSchedule SnapshotSchedule::dense_then_jump(int64_t every, int64_t until,
                                                   int64_t jump, int64_t budget) {
    SnapshotSchedule s;
    for (int64_t i = 0; i <= until && i <= budget; i += every) s.iterations.push_back(i);
    int64_t last = std::min(jump, budget);
    if (s.iterations.empty() || s.iterations.back() != last) s.iterations.push_back(last);
    return s;
}

bool SnapshotSchedule::due(int64_t iter) const {
    return std::find(iterations.begin(), iterations.end(), iter) != iterations.end();
}

void check_finite(float v, const char* term, int64_t iteration) {
    if (!std::isfinite(v))
        throw std::runtime_error("non-finite " + std::string(term) + " at iteration " +
                                 std::to_string(iteration));
}

namespace {

Tensor adversarial_loss(const Tensor& logits, float target, LossWeights::Adversarial kind) {
    if (kind == LossWeights::Adversarial::BinaryCrossEntropy)
        return bce_with_logits_mean(logits, target);
    return mse_scalar_mean(logits, target);
}

void zero_all(std::initializer_list<const std::vector<Tensor>*> param_sets) {
    for (const auto* ps : param_sets)
        for (const Tensor& p : *ps) const_cast<Tensor&>(p).zero_grad();
}

std::string write_snapshot(const Tensor& output, int64_t iteration, const std::string& out_dir) {
    fs::create_directories(out_dir);
    char name[64];
    std::snprintf(name, sizeof(name), "snapshot_%07lld.png", static_cast<long long>(iteration));
    std::string path = (fs::path(out_dir) / name).string();
    write_png(path, tensor_to_image(to_eval_range(output)));
    return path;
}

}  // namespace

// ---------------------------------------------------------------- pix2pix

Pix2pixTrainer::Pix2pixTrainer(const TrainerConfig& config)
    : config_(config), adam_g_(config.adam), adam_d_(config.adam), rng_(config.seed, 1) {
    config_.weights.validate();
    Rng init_rng(config.seed, 0);
    GeneratorSpec gspec;
    gspec.in_channels = 3;
    gspec.out_channels = 1;
    gspec.base_width = config.base_width;
    gspec.levels = config.levels;
    gspec.image_side = config.image_side;
    generator_ = std::make_unique<UNetGenerator>(gspec, init_rng);
    DiscriminatorSpec dspec;
    dspec.in_channels = 4;  // condition (3) + thermal (1)
    dspec.base_width = config.base_width;
    dspec.image_side = config.image_side;
    discriminator_ = std::make_unique<PatchGan>(dspec, init_rng);
    g_params_ = generator_->parameters();
    d_params_ = discriminator_->parameters();
}

Pix2pixLosses Pix2pixTrainer::step(const Tensor& condition, const Tensor& target) {
    if (condition.shape().size() != 4 || target.shape().size() != 4 ||
        condition.shape()[0] != target.shape()[0] ||
        condition.shape()[2] != target.shape()[2] ||
        condition.shape()[3] != target.shape()[3])
        throw ContractError("pix2pix condition/target extent mismatch: " +
                            shape_str(condition.shape()) + " vs " + shape_str(target.shape()));
    auto adv = config_.weights.adv;
    Pix2pixLosses losses;

    // Discriminator update; the generator pass is detached.
    zero_all({&g_params_, &d_params_});
    Tensor fake = generator_->forward(condition).detach();
    Tensor d_real = discriminator_->forward(concat_channels(condition, target));
    Tensor d_fake = discriminator_->forward(concat_channels(condition, fake));
    Tensor d_loss = add(adversarial_loss(d_real, 1.0f, adv), adversarial_loss(d_fake, 0.0f, adv));
    losses.d_loss = d_loss.item();
    check_finite(losses.d_loss, "discriminator loss", iteration_);
    backward(d_loss);
    adam_d_.step(d_params_);

    // Generator update; discriminator parameters receive gradients here but
    // are not stepped.
    zero_all({&g_params_, &d_params_});
    Tensor gen_out = generator_->forward(condition);
    Tensor g_adv = adversarial_loss(
        discriminator_->forward(concat_channels(condition, gen_out)), 1.0f, adv);
    Tensor g_l1 = l1_mean(gen_out, target);
    losses.g_adv = g_adv.item();
    losses.g_l1 = g_l1.item();
    check_finite(losses.g_adv, "generator adversarial loss", iteration_);
    check_finite(losses.g_l1, "generator L1 loss", iteration_);
    Tensor g_loss = add(g_adv, scale(g_l1, config_.weights.lambda_l1));
    backward(g_loss);
    adam_g_.step(g_params_);

    ++iteration_;
    return losses;
}

Tensor Pix2pixTrainer::generate(const Tensor& condition) const {
    return generator_->forward(condition).detach();
}

std::string Pix2pixTrainer::snapshot(const std::string& out_dir) const {
    if (!snapshot_input_.defined())
        throw ContractError("snapshot input was never set on this trainer");
    return write_snapshot(generate(snapshot_input_), iteration_, out_dir);
}

void Pix2pixTrainer::restore_counters(int64_t iteration, uint64_t rng_seed,
                                      uint64_t rng_stream, uint64_t rng_counter) {
    iteration_ = iteration;
    rng_.restore(rng_seed, rng_stream, rng_counter);
}

// ---------------------------------------------------------------- CycleGAN

CycleGanTrainer::CycleGanTrainer(const TrainerConfig& config)
    : config_(config), adam_g_(config.adam), adam_da_(config.adam), adam_db_(config.adam),
      rng_(config.seed, 1) {
    config_.weights.validate();
    Rng init_rng(config.seed, 0);
    GeneratorSpec ab;
    ab.in_channels = 3;
    ab.out_channels = 1;
    ab.base_width = config.base_width;
    ab.res_blocks = config.res_blocks;
    ab.image_side = config.image_side;
    GeneratorSpec ba = ab;
    ba.in_channels = 1;
    ba.out_channels = 3;
    gen_ab_ = std::make_unique<ResNetGenerator>(ab, init_rng);
    gen_ba_ = std::make_unique<ResNetGenerator>(ba, init_rng);
    DiscriminatorSpec da;
    da.in_channels = 3;
    da.base_width = config.base_width;
    da.image_side = config.image_side;
    DiscriminatorSpec db = da;
    db.in_channels = 1;
    disc_a_ = std::make_unique<PatchGan>(da, init_rng);
    disc_b_ = std::make_unique<PatchGan>(db, init_rng);
    g_params_ = gen_ab_->parameters();
    auto ba_params = gen_ba_->parameters();
    g_params_.insert(g_params_.end(), ba_params.begin(), ba_params.end());
    da_params_ = disc_a_->parameters();
    db_params_ = disc_b_->parameters();
}

CycleGanLosses CycleGanTrainer::step(const Tensor& domain_a, const Tensor& domain_b) {
    auto adv = LossWeights::Adversarial::LeastSquares;
    CycleGanLosses losses;

    zero_all({&g_params_, &da_params_, &db_params_});
    Tensor fake_b = gen_ab_->forward(domain_a).detach();
    Tensor d_b_loss = add(adversarial_loss(disc_b_->forward(domain_b), 1.0f, adv),
                          adversarial_loss(disc_b_->forward(fake_b), 0.0f, adv));
    losses.d_b = d_b_loss.item();
    check_finite(losses.d_b, "thermal discriminator loss", iteration_);
    backward(d_b_loss);
    adam_db_.step(db_params_);

    zero_all({&g_params_, &da_params_, &db_params_});
    Tensor fake_a = gen_ba_->forward(domain_b).detach();
    Tensor d_a_loss = add(adversarial_loss(disc_a_->forward(domain_a), 1.0f, adv),
                          adversarial_loss(disc_a_->forward(fake_a), 0.0f, adv));
    losses.d_a = d_a_loss.item();
    check_finite(losses.d_a, "collage discriminator loss", iteration_);
    backward(d_a_loss);
    adam_da_.step(da_params_);

    zero_all({&g_params_, &da_params_, &db_params_});
    Tensor gen_b = gen_ab_->forward(domain_a);
    Tensor gen_a = gen_ba_->forward(domain_b);
    Tensor g_ab_adv = adversarial_loss(disc_b_->forward(gen_b), 1.0f, adv);
    Tensor g_ba_adv = adversarial_loss(disc_a_->forward(gen_a), 1.0f, adv);
    Tensor cycle_a = l1_mean(gen_ba_->forward(gen_b), domain_a);
    Tensor cycle_b = l1_mean(gen_ab_->forward(gen_a), domain_b);
    losses.g_ab_adv = g_ab_adv.item();
    losses.g_ba_adv = g_ba_adv.item();
    losses.cycle_a = cycle_a.item();
    losses.cycle_b = cycle_b.item();
    check_finite(losses.g_ab_adv, "A->B adversarial loss", iteration_);
    check_finite(losses.g_ba_adv, "B->A adversarial loss", iteration_);
    check_finite(losses.cycle_a, "A cycle loss", iteration_);
    check_finite(losses.cycle_b, "B cycle loss", iteration_);
    Tensor g_loss = add(add(g_ab_adv, g_ba_adv),
                        scale(add(cycle_a, cycle_b), config_.weights.lambda_cycle));
    backward(g_loss);
    adam_g_.step(g_params_);

    ++iteration_;
    return losses;
}

Tensor CycleGanTrainer::generate(const Tensor& domain_a) const {
    return gen_ab_->forward(domain_a).detach();
}

std::string CycleGanTrainer::snapshot(const std::string& out_dir) const {
    if (!snapshot_input_.defined())
        throw ContractError("snapshot input was never set on this trainer");
    return write_snapshot(generate(snapshot_input_), iteration_, out_dir);
}

void CycleGanTrainer::restore_counters(int64_t iteration, uint64_t rng_seed,
                                       uint64_t rng_stream, uint64_t rng_counter) {
    iteration_ = iteration;
    rng_.restore(rng_seed, rng_stream, rng_counter);
}

}  // namespace thermogen
