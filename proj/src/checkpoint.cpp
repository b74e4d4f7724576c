#include "thermogen/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "thermogen/serialize.hpp"

namespace thermogen {

namespace {

constexpr uint32_t kFormatVersion = 1;

void write_params(std::ostream& os, const std::string& prefix,
                  const std::vector<NamedTensor>& params) {
    for (const auto& [name, t] : params) {
        write_string(os, prefix + "." + name);
        write_tensor(os, t);
    }
}

void write_moments(std::ostream& os, const std::string& prefix, AdamState& opt,
                   const std::vector<Tensor>& params) {
    for (size_t i = 0; i < opt.moments1().size(); ++i) {
        write_string(os, prefix + ".m" + std::to_string(i));
        write_tensor(os, Tensor::from_data(params[i].shape(), opt.moments1()[i]));
        write_string(os, prefix + ".v" + std::to_string(i));
        write_tensor(os, Tensor::from_data(params[i].shape(), opt.moments2()[i]));
    }
}

struct Loaded {
    TrainerConfig config;
    uint64_t digest = 0;
    int64_t iteration = 0;
    uint64_t rng_seed = 0, rng_stream = 0, rng_counter = 0;
    std::vector<int64_t> opt_t;
    std::map<std::string, Tensor> tensors;
};

Loaded parse_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "TGCK", 4) != 0)
        throw IoError("not a checkpoint file (bad magic): " + path);
    uint32_t version = read_u32(is);
    if (version != kFormatVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version) +
                      " in " + path);
    Loaded l;
    std::string config_text = read_string(is);
    l.digest = read_u64(is);
    if (fnv1a(config_text) != l.digest)
        throw IoError("checkpoint config digest mismatch: " + path);
    l.config = TrainerConfig::from_string(config_text);
    l.iteration = static_cast<int64_t>(read_u64(is));
    l.rng_seed = read_u64(is);
    l.rng_stream = read_u64(is);
    l.rng_counter = read_u64(is);
    uint32_t n_opt = read_u32(is);
    for (uint32_t i = 0; i < n_opt; ++i)
        l.opt_t.push_back(static_cast<int64_t>(read_u64(is)));
    uint32_t n_tensors = read_u32(is);
    for (uint32_t i = 0; i < n_tensors; ++i) {
        std::string name = read_string(is);
        l.tensors.emplace(std::move(name), read_tensor(is));
    }
    return l;
}

void restore_params(const Loaded& l, const std::string& prefix,
                    const std::vector<NamedTensor>& params) {
    for (const auto& [name, t] : params) {
        auto it = l.tensors.find(prefix + "." + name);
        if (it == l.tensors.end())
            throw IoError("checkpoint missing tensor " + prefix + "." + name);
        if (it->second.shape() != t.shape())
            throw IoError("checkpoint tensor " + prefix + "." + name +
                          " has shape " + shape_str(it->second.shape()) + ", expected " +
                          shape_str(t.shape()));
        const_cast<Tensor&>(t).values() = it->second.values();
    }
}

void restore_moments(const Loaded& l, const std::string& prefix, AdamState& opt,
                     const std::vector<Tensor>& params, int64_t t_counter) {
    opt.restore(t_counter);
    if (t_counter == 0) return;  // moments were never allocated
    auto& m = opt.moments1();
    auto& v = opt.moments2();
    m.resize(params.size());
    v.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
        auto mit = l.tensors.find(prefix + ".m" + std::to_string(i));
        auto vit = l.tensors.find(prefix + ".v" + std::to_string(i));
        if (mit == l.tensors.end() || vit == l.tensors.end())
            throw IoError("checkpoint missing optimizer moments for " + prefix);
        m[i] = mit->second.values();
        v[i] = vit->second.values();
    }
}

void write_header(std::ostream& os, const TrainerConfig& config, int64_t iteration,
                  const Rng& rng) {
    os.write("TGCK", 4);
    write_u32(os, kFormatVersion);
    std::string text = config.to_string();
    write_string(os, text);
    write_u64(os, fnv1a(text));
    write_u64(os, static_cast<uint64_t>(iteration));
    write_u64(os, rng.seed());
    write_u64(os, rng.stream());
    write_u64(os, rng.counter());
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write checkpoint: " + path);
    return os;
}

}  // namespace

void save_checkpoint(Pix2pixTrainer& trainer, const std::string& path) {
    auto os = open_out(path);
    write_header(os, trainer.config(), trainer.iteration(), trainer.rng());
    write_u32(os, 2);
    write_u64(os, static_cast<uint64_t>(trainer.generator_adam().t()));
    write_u64(os, static_cast<uint64_t>(trainer.discriminator_adam().t()));

    auto g_named = trainer.generator().named_parameters();
    auto d_named = trainer.discriminator().named_parameters();
    auto g_params = trainer.generator().parameters();
    auto d_params = trainer.discriminator().parameters();
    uint32_t n = static_cast<uint32_t>(
        g_named.size() + d_named.size() +
        2 * (trainer.generator_adam().moments1().size() +
             trainer.discriminator_adam().moments1().size()) +
        (trainer.snapshot_input().defined() ? 1 : 0));
    write_u32(os, n);
    write_params(os, "g", g_named);
    write_params(os, "d", d_named);
    write_moments(os, "opt_g", trainer.generator_adam(), g_params);
    write_moments(os, "opt_d", trainer.discriminator_adam(), d_params);
    if (trainer.snapshot_input().defined()) {
        write_string(os, "snapshot.input");
        write_tensor(os, trainer.snapshot_input());
    }
    if (!os) throw IoError("checkpoint write failed: " + path);
}

void save_checkpoint(CycleGanTrainer& trainer, const std::string& path) {
    auto os = open_out(path);
    write_header(os, trainer.config(), trainer.iteration(), trainer.rng());
    write_u32(os, 3);
    write_u64(os, static_cast<uint64_t>(trainer.generators_adam().t()));
    write_u64(os, static_cast<uint64_t>(trainer.discriminator_a_adam().t()));
    write_u64(os, static_cast<uint64_t>(trainer.discriminator_b_adam().t()));

    auto gab = trainer.generator_ab().named_parameters();
    auto gba = trainer.generator_ba().named_parameters();
    auto da = trainer.discriminator_a().named_parameters();
    auto db = trainer.discriminator_b().named_parameters();
    std::vector<Tensor> g_params = trainer.generator_ab().parameters();
    auto ba_params = trainer.generator_ba().parameters();
    g_params.insert(g_params.end(), ba_params.begin(), ba_params.end());
    auto da_params = trainer.discriminator_a().parameters();
    auto db_params = trainer.discriminator_b().parameters();

    uint32_t n = static_cast<uint32_t>(
        gab.size() + gba.size() + da.size() + db.size() +
        2 * (trainer.generators_adam().moments1().size() +
             trainer.discriminator_a_adam().moments1().size() +
             trainer.discriminator_b_adam().moments1().size()) +
        (trainer.snapshot_input().defined() ? 1 : 0));
    write_u32(os, n);
    write_params(os, "gab", gab);
    write_params(os, "gba", gba);
    write_params(os, "da", da);
    write_params(os, "db", db);
    write_moments(os, "opt_g", trainer.generators_adam(), g_params);
    write_moments(os, "opt_da", trainer.discriminator_a_adam(), da_params);
    write_moments(os, "opt_db", trainer.discriminator_b_adam(), db_params);
    if (trainer.snapshot_input().defined()) {
        write_string(os, "snapshot.input");
        write_tensor(os, trainer.snapshot_input());
    }
    if (!os) throw IoError("checkpoint write failed: " + path);
}

LoadedTrainer load_checkpoint(const std::string& path) {
    Loaded l = parse_file(path);
    LoadedTrainer out;
    out.config = l.config;
    out.digest = l.digest;
    if (l.config.arch == "pix2pix") {
        if (l.opt_t.size() != 2) throw IoError("pix2pix checkpoint needs 2 optimizers");
        auto trainer = std::make_unique<Pix2pixTrainer>(l.config);
        restore_params(l, "g", trainer->generator().named_parameters());
        restore_params(l, "d", trainer->discriminator().named_parameters());
        restore_moments(l, "opt_g", trainer->generator_adam(),
                        trainer->generator().parameters(), l.opt_t[0]);
        restore_moments(l, "opt_d", trainer->discriminator_adam(),
                        trainer->discriminator().parameters(), l.opt_t[1]);
        trainer->restore_counters(l.iteration, l.rng_seed, l.rng_stream, l.rng_counter);
        if (auto it = l.tensors.find("snapshot.input"); it != l.tensors.end())
            trainer->set_snapshot_input(it->second);
        out.pix2pix = std::move(trainer);
    } else if (l.config.arch == "cyclegan") {
        if (l.opt_t.size() != 3) throw IoError("cyclegan checkpoint needs 3 optimizers");
        auto trainer = std::make_unique<CycleGanTrainer>(l.config);
        restore_params(l, "gab", trainer->generator_ab().named_parameters());
        restore_params(l, "gba", trainer->generator_ba().named_parameters());
        restore_params(l, "da", trainer->discriminator_a().named_parameters());
        restore_params(l, "db", trainer->discriminator_b().named_parameters());
        std::vector<Tensor> g_params = trainer->generator_ab().parameters();
        auto ba_params = trainer->generator_ba().parameters();
        g_params.insert(g_params.end(), ba_params.begin(), ba_params.end());
        restore_moments(l, "opt_g", trainer->generators_adam(), g_params, l.opt_t[0]);
        restore_moments(l, "opt_da", trainer->discriminator_a_adam(),
                        trainer->discriminator_a().parameters(), l.opt_t[1]);
        restore_moments(l, "opt_db", trainer->discriminator_b_adam(),
                        trainer->discriminator_b().parameters(), l.opt_t[2]);
        trainer->restore_counters(l.iteration, l.rng_seed, l.rng_stream, l.rng_counter);
        if (auto it = l.tensors.find("snapshot.input"); it != l.tensors.end())
            trainer->set_snapshot_input(it->second);
        out.cyclegan = std::move(trainer);
    } else {
        throw IoError("checkpoint has unknown arch: " + l.config.arch);
    }
    return out;
}

Tensor LoadedTrainer::generate(const Tensor& condition) const {
    if (pix2pix) return pix2pix->generate(condition);
    if (cyclegan) return cyclegan->generate(condition);
    throw ContractError("empty LoadedTrainer");
}

int64_t LoadedTrainer::iteration() const {
    if (pix2pix) return pix2pix->iteration();
    if (cyclegan) return cyclegan->iteration();
    throw ContractError("empty LoadedTrainer");
}

}  // namespace thermogen
