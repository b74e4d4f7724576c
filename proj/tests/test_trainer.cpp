#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "thermogen/checkpoint.hpp"
#include "thermogen/image.hpp"
#include "thermogen/trainer.hpp"

using namespace thermogen;
using namespace tgtest;

namespace {

TrainerConfig small_pix2pix(uint64_t seed) {
    TrainerConfig c;
    c.arch = "pix2pix";
    c.image_side = 16;
    c.base_width = 8;
    c.levels = 3;
    c.seed = seed;
    return c;
}

TrainerConfig small_cyclegan(uint64_t seed) {
    TrainerConfig c;
    c.arch = "cyclegan";
    c.image_side = 16;
    c.base_width = 4;
    c.res_blocks = 1;
    c.weights.adv = LossWeights::Adversarial::LeastSquares;
    c.seed = seed;
    return c;
}

std::vector<std::vector<float>> copy_values(const std::vector<Tensor>& params) {
    std::vector<std::vector<float>> out;
    for (const Tensor& p : params) out.push_back(p.values());
    return out;
}

bool values_equal(const std::vector<Tensor>& params,
                  const std::vector<std::vector<float>>& saved) {
    for (size_t i = 0; i < params.size(); ++i)
        if (params[i].values() != saved[i]) return false;
    return true;
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("trainer config round-trips through its text form") {
    TrainerConfig c = small_pix2pix(99);
    c.style = InputStyle::FourViewStacked;
    c.weights.lambda_l1 = 50.0f;
    c.adam.lr = 1e-3f;
    TrainerConfig back = TrainerConfig::from_string(c.to_string());
    CHECK(back.arch == c.arch);
    CHECK(back.style == c.style);
    CHECK(back.image_side == c.image_side);
    CHECK(back.base_width == c.base_width);
    CHECK(back.levels == c.levels);
    CHECK(back.weights.lambda_l1 == c.weights.lambda_l1);
    CHECK(back.adam.lr == c.adam.lr);
    CHECK(back.seed == c.seed);
    CHECK(back.digest() == c.digest());
}

TEST_CASE("negative loss weights are rejected") {
    TrainerConfig c = small_pix2pix(1);
    c.weights.lambda_l1 = -1.0f;
    CHECK_THROWS_AS(Pix2pixTrainer{c}, ConfigError);
}

TEST_CASE("untrained discriminator BCE loss sits near 2 ln 2") {
    Pix2pixTrainer trainer(small_pix2pix(3));
    Rng rng(17);
    Tensor cond = random_tensor({1, 3, 16, 16}, rng, false, -1.0f, 1.0f);
    Tensor target = random_tensor({1, 1, 16, 16}, rng, false, -1.0f, 1.0f);
    auto losses = trainer.step(cond, target);
    CHECK(std::fabs(losses.d_loss - 2.0 * std::log(2.0)) < 0.3);
    CHECK(trainer.iteration() == 1);
}

TEST_CASE("g_l1 is exactly zero when the target equals the generator output") {
    Pix2pixTrainer trainer(small_pix2pix(4));
    Rng rng(18);
    Tensor cond = random_tensor({1, 3, 16, 16}, rng, false, -1.0f, 1.0f);
    Tensor target = trainer.generate(cond);
    auto losses = trainer.step(cond, target);
    CHECK(losses.g_l1 == 0.0f);
}

TEST_CASE("condition/target extent mismatch is a contract violation") {
    Pix2pixTrainer trainer(small_pix2pix(5));
    Tensor cond = Tensor::zeros({1, 3, 16, 16});
    Tensor target = Tensor::zeros({1, 1, 8, 8});
    CHECK_THROWS_AS(trainer.step(cond, target), ContractError);
}

TEST_CASE("200 seeded iterations reduce g_l1 on the channel-copy task") {
    Pix2pixTrainer trainer(small_pix2pix(6));
    Rng data_rng(20);
    // Fixed task: target is the condition's first channel.
    std::vector<Tensor> conds, targets;
    for (int i = 0; i < 4; ++i) {
        Tensor c = random_tensor({1, 3, 16, 16}, data_rng, false, -1.0f, 1.0f);
        std::vector<float> first(c.values().begin(), c.values().begin() + 16 * 16);
        conds.push_back(c);
        targets.push_back(Tensor::from_data({1, 1, 16, 16}, std::move(first)));
    }
    float first_l1 = -1.0f, last_l1 = -1.0f;
    for (int it = 0; it < 200; ++it) {
        size_t j = static_cast<size_t>(trainer.rng().uniform_int(conds.size()));
        auto losses = trainer.step(conds[j], targets[j]);
        if (it == 0) first_l1 = losses.g_l1;
        last_l1 = losses.g_l1;
    }
    CHECK(first_l1 > 0.0f);
    CHECK(last_l1 < first_l1);
}

TEST_CASE("seeded pix2pix training is bit-reproducible") {
    auto run = [](uint64_t seed) {
        Pix2pixTrainer trainer(small_pix2pix(seed));
        Rng rng(30);
        Tensor cond = random_tensor({1, 3, 16, 16}, rng, false, -1.0f, 1.0f);
        Tensor target = random_tensor({1, 1, 16, 16}, rng, false, -1.0f, 1.0f);
        std::vector<float> curve;
        for (int i = 0; i < 5; ++i) {
            auto l = trainer.step(cond, target);
            curve.push_back(l.d_loss);
            curve.push_back(l.g_adv);
            curve.push_back(l.g_l1);
        }
        return curve;
    };
    CHECK(run(7) == run(7));
    CHECK(run(7) != run(8));
}

TEST_CASE("discriminator update freezes the generator and vice versa") {
    TrainerConfig cfg = small_pix2pix(9);
    Pix2pixTrainer trainer(cfg);
    Rng rng(31);
    Tensor cond = random_tensor({1, 3, 16, 16}, rng, false, -1.0f, 1.0f);
    Tensor target = random_tensor({1, 1, 16, 16}, rng, false, -1.0f, 1.0f);

    auto g_params = trainer.generator().parameters();
    auto d_params = trainer.discriminator().parameters();
    auto g0 = copy_values(g_params);
    auto d0 = copy_values(d_params);

    // Replay the discriminator phase exactly as the trainer runs it.
    for (Tensor& p : g_params) p.zero_grad();
    for (Tensor& p : d_params) p.zero_grad();
    Tensor fake = trainer.generator().forward(cond).detach();
    Tensor d_loss =
        add(bce_with_logits_mean(
                trainer.discriminator().forward(concat_channels(cond, target)), 1.0f),
            bce_with_logits_mean(
                trainer.discriminator().forward(concat_channels(cond, fake)), 0.0f));
    backward(d_loss);
    trainer.discriminator_adam().step(d_params);

    CHECK(values_equal(g_params, g0));        // generator untouched
    CHECK_FALSE(values_equal(d_params, d0));  // discriminator moved
    auto d1 = copy_values(d_params);

    // Generator phase: discriminator receives gradients but no step.
    for (Tensor& p : g_params) p.zero_grad();
    for (Tensor& p : d_params) p.zero_grad();
    Tensor gen_out = trainer.generator().forward(cond);
    Tensor g_loss =
        add(bce_with_logits_mean(
                trainer.discriminator().forward(concat_channels(cond, gen_out)), 1.0f),
            scale(l1_mean(gen_out, target), cfg.weights.lambda_l1));
    backward(g_loss);
    trainer.generator_adam().step(g_params);

    CHECK(values_equal(d_params, d1));        // discriminator untouched
    CHECK_FALSE(values_equal(g_params, g0));  // generator moved

    // The same phases through step() on a twin trainer give the same result.
    Pix2pixTrainer twin(cfg);
    twin.step(cond, target);
    auto twin_g = copy_values(twin.generator().parameters());
    auto twin_d = copy_values(twin.discriminator().parameters());
    CHECK(copy_values(g_params) == twin_g);
    CHECK(copy_values(d_params) == twin_d);
}

TEST_CASE("with lambda_l1 = 0 the L1 term contributes no generator gradient") {
    TrainerConfig cfg = small_pix2pix(10);
    Pix2pixTrainer trainer(cfg);
    Rng rng(32);
    Tensor cond = random_tensor({1, 3, 16, 16}, rng, false, -1.0f, 1.0f);
    Tensor target = random_tensor({1, 1, 16, 16}, rng, false, -1.0f, 1.0f);
    auto g_params = trainer.generator().parameters();

    auto grad_of = [&](float lambda) {
        for (Tensor& p : g_params) p.zero_grad();
        Tensor gen_out = trainer.generator().forward(cond);
        Tensor adv = bce_with_logits_mean(
            trainer.discriminator().forward(concat_channels(cond, gen_out)), 1.0f);
        Tensor loss = add(adv, scale(l1_mean(gen_out, target), lambda));
        backward(loss);
        return g_params[0].grad();
    };
    auto with_zero_lambda = grad_of(0.0f);

    for (Tensor& p : g_params) p.zero_grad();
    Tensor adv_only = bce_with_logits_mean(
        trainer.discriminator().forward(
            concat_channels(cond, trainer.generator().forward(cond))),
        1.0f);
    backward(adv_only);
    CHECK(with_zero_lambda == g_params[0].grad());
}

TEST_CASE("cyclegan step yields six finite loss terms and updates all parts") {
    CycleGanTrainer trainer(small_cyclegan(11));
    Rng rng(33);
    Tensor a = random_tensor({1, 3, 16, 16}, rng, false, -1.0f, 1.0f);
    Tensor b = random_tensor({1, 1, 16, 16}, rng, false, -1.0f, 1.0f);
    auto losses = trainer.step(a, b);
    for (float v : {losses.d_a, losses.d_b, losses.g_ab_adv, losses.g_ba_adv,
                    losses.cycle_a, losses.cycle_b})
        CHECK(std::isfinite(v));
    CHECK(losses.cycle_a > 0.0f);
    CHECK(trainer.iteration() == 1);
    CHECK(trainer.generators_adam().t() == 1);
    CHECK(trainer.discriminator_a_adam().t() == 1);
    CHECK(trainer.discriminator_b_adam().t() == 1);
}

TEST_CASE("200 seeded cyclegan iterations reduce the total cycle loss") {
    CycleGanTrainer trainer(small_cyclegan(12));
    Rng rng(34);
    std::vector<Tensor> as, bs;
    for (int i = 0; i < 3; ++i) {
        as.push_back(random_tensor({1, 3, 16, 16}, rng, false, -1.0f, 1.0f));
        bs.push_back(random_tensor({1, 1, 16, 16}, rng, false, -1.0f, 1.0f));
    }
    float first = -1.0f, last = -1.0f;
    for (int it = 0; it < 200; ++it) {
        size_t i = static_cast<size_t>(trainer.rng().uniform_int(as.size()));
        size_t j = static_cast<size_t>(trainer.rng().uniform_int(bs.size()));
        auto l = trainer.step(as[i], bs[j]);
        float cycle = l.cycle_a + l.cycle_b;
        if (it == 0) first = cycle;
        last = cycle;
    }
    CHECK(first > 0.0f);
    CHECK(last < first);
}

TEST_CASE("snapshot schedule reproduces the dense-then-jump cadence") {
    SnapshotSchedule s = SnapshotSchedule::dense_then_jump(10, 60, 20000, 25000);
    CHECK(s.iterations ==
          std::vector<int64_t>{0, 10, 20, 30, 40, 50, 60, 20000});
    CHECK(s.due(0));
    CHECK(s.due(40));
    CHECK(s.due(20000));
    CHECK_FALSE(s.due(15));
    // The jump caps to the iteration budget.
    SnapshotSchedule capped = SnapshotSchedule::dense_then_jump(10, 60, 20000, 500);
    CHECK(capped.iterations.back() == 500);
}

TEST_CASE("snapshots embed the iteration, are pure, and start noise-like") {
    TempDir dir("snap");
    Pix2pixTrainer trainer(small_pix2pix(13));
    Rng rng(35);
    trainer.set_snapshot_input(random_tensor({1, 3, 16, 16}, rng, false, -1.0f, 1.0f));
    std::string p1 = trainer.snapshot(dir.path());
    std::string p2 = trainer.snapshot(dir.path());
    CHECK(p1.find("0000000") != std::string::npos);
    CHECK(read_file(p1) == read_file(p2));  // purity

    ImageU8 img = read_png(p1);
    CHECK(img.width == 16);
    CHECK(img.height == 16);
    uint8_t lo = 255, hi = 0;
    for (uint8_t v : img.pixels) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(hi > lo);  // untrained output is not constant

    Tensor cond = random_tensor({1, 3, 16, 16}, rng, false, -1.0f, 1.0f);
    Tensor target = random_tensor({1, 1, 16, 16}, rng, false, -1.0f, 1.0f);
    trainer.step(cond, target);
    std::string p3 = trainer.snapshot(dir.path());
    CHECK(p3.find("0000001") != std::string::npos);
}

TEST_CASE("snapshot without a fixed input is refused") {
    TempDir dir("snapnone");
    Pix2pixTrainer trainer(small_pix2pix(14));
    CHECK_THROWS_AS(trainer.snapshot(dir.path()), ContractError);
}

TEST_CASE("pix2pix checkpoint round-trip restores the forward pass bitwise") {
    TempDir dir("ckpt");
    Pix2pixTrainer trainer(small_pix2pix(15));
    Rng rng(36);
    Tensor cond = random_tensor({1, 3, 16, 16}, rng, false, -1.0f, 1.0f);
    Tensor target = random_tensor({1, 1, 16, 16}, rng, false, -1.0f, 1.0f);
    for (int i = 0; i < 3; ++i) trainer.step(cond, target);
    trainer.set_snapshot_input(cond);

    std::string path = dir.path() + "/model.tgck";
    save_checkpoint(trainer, path);
    LoadedTrainer loaded = load_checkpoint(path);
    CHECK(loaded.config.arch == "pix2pix");
    CHECK(loaded.iteration() == 3);
    CHECK(loaded.digest == trainer.config().digest());
    CHECK(loaded.generate(cond).values() == trainer.generate(cond).values());
    CHECK(loaded.pix2pix->snapshot_input().values() == cond.values());

    // Saving the loaded trainer reproduces the same bytes.
    std::string path2 = dir.path() + "/model2.tgck";
    save_checkpoint(*loaded.pix2pix, path2);
    CHECK(read_file(path) == read_file(path2));
}

TEST_CASE("cyclegan checkpoint round-trip restores the forward pass bitwise") {
    TempDir dir("ckptc");
    CycleGanTrainer trainer(small_cyclegan(16));
    Rng rng(37);
    Tensor a = random_tensor({1, 3, 16, 16}, rng, false, -1.0f, 1.0f);
    Tensor b = random_tensor({1, 1, 16, 16}, rng, false, -1.0f, 1.0f);
    trainer.step(a, b);
    std::string path = dir.path() + "/model.tgck";
    save_checkpoint(trainer, path);
    LoadedTrainer loaded = load_checkpoint(path);
    CHECK(loaded.config.arch == "cyclegan");
    CHECK(loaded.generate(a).values() == trainer.generate(a).values());
}

TEST_CASE("corrupt or truncated checkpoints are refused cleanly") {
    TempDir dir("ckptbad");
    Pix2pixTrainer trainer(small_pix2pix(17));
    std::string path = dir.path() + "/model.tgck";
    save_checkpoint(trainer, path);
    std::string bytes = read_file(path);

    std::string cut_path = dir.path() + "/cut.tgck";
    std::ofstream(cut_path, std::ios::binary)
        << bytes.substr(0, bytes.size() * 2 / 3);
    CHECK_THROWS_AS(load_checkpoint(cut_path), IoError);

    std::string magic_path = dir.path() + "/magic.tgck";
    std::string corrupted = bytes;
    corrupted[0] = 'X';
    std::ofstream(magic_path, std::ios::binary) << corrupted;
    CHECK_THROWS_AS(load_checkpoint(magic_path), IoError);

    CHECK_THROWS_AS(load_checkpoint(dir.path() + "/missing.tgck"), IoError);
}

TEST_CASE("resumed training equals uninterrupted training") {
    TempDir dir("resume");
    Rng rng(38);
    std::vector<Tensor> conds, targets;
    for (int i = 0; i < 3; ++i) {
        conds.push_back(random_tensor({1, 3, 16, 16}, rng, false, -1.0f, 1.0f));
        targets.push_back(random_tensor({1, 1, 16, 16}, rng, false, -1.0f, 1.0f));
    }
    auto drive = [&](Pix2pixTrainer& t, int steps) {
        for (int i = 0; i < steps; ++i) {
            size_t j = static_cast<size_t>(t.rng().uniform_int(conds.size()));
            t.step(conds[j], targets[j]);
        }
    };

    Pix2pixTrainer straight(small_pix2pix(19));
    drive(straight, 6);

    Pix2pixTrainer half(small_pix2pix(19));
    drive(half, 3);
    std::string path = dir.path() + "/half.tgck";
    save_checkpoint(half, path);
    LoadedTrainer resumed = load_checkpoint(path);
    drive(*resumed.pix2pix, 3);

    CHECK(resumed.pix2pix->iteration() == straight.iteration());
    auto ps = straight.generator().parameters();
    auto pr = resumed.pix2pix->generator().parameters();
    REQUIRE(ps.size() == pr.size());
    for (size_t i = 0; i < ps.size(); ++i) CHECK(ps[i].values() == pr[i].values());
    auto ds = straight.discriminator().parameters();
    auto dr = resumed.pix2pix->discriminator().parameters();
    for (size_t i = 0; i < ds.size(); ++i) CHECK(ds[i].values() == dr[i].values());
}
