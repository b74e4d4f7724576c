#pragma once

#include <memory>
#include <string>

#include "thermogen/trainer.hpp"

namespace thermogen {

// Checkpoint file: magic "TGCK", u32 format version, config text + digest,
// iteration counter, RNG state, optimizer step counters, then a named tensor
// table (TGT1 entries) holding every parameter, optimizer moment, and the
// fixed snapshot input when set. Round-trips bitwise.

void save_checkpoint(Pix2pixTrainer& trainer, const std::string& path);
void save_checkpoint(CycleGanTrainer& trainer, const std::string& path);

struct LoadedTrainer {
    TrainerConfig config;
    uint64_t digest = 0;
    std::unique_ptr<Pix2pixTrainer> pix2pix;
    std::unique_ptr<CycleGanTrainer> cyclegan;

    // RGB collage in [-1,1] -> thermal in [-1,1], detached.
    Tensor generate(const Tensor& condition) const;
    int64_t iteration() const;
};

LoadedTrainer load_checkpoint(const std::string& path);

}  // namespace thermogen
