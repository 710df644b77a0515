#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "slca/dictionary.hpp"
#include "slca/lca.hpp"

namespace slca {

struct LearnConfig {
    double learning_rate = 1.0;
    int epochs = 10;
    int batch_size = 16;
    int kernels = 128;
    int kernel_size = 16;
    int stride = 8;
    std::uint64_t seed = 1;
    int workers = 1;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double mean_residual = 0.0;
    double mean_objective = 0.0;
    double mean_total = 0.0;
    double mean_active = 0.0;
    int pairs = 0;
};

struct TrainingState {
    Dictionary dict;
    int epochs_done = 0;
    std::vector<EpochRecord> log;
};

// Called after every completed epoch (for checkpoints and logging).
using EpochCallback = std::function<void(const TrainingState&)>;

// Mini-batch gradient descent on the kernels with frozen-kernel encoding.
// Pairs must already be preprocessed; pairs with zero energy are skipped.
// Starts from `resume` when given, else from a seeded random dictionary.
// Throws DivergenceError after three consecutive epoch-mean increases above 10%.
TrainingState learn(std::span<const StereoPair> pairs, const LearnConfig& lcfg, const LcaConfig& ecfg,
                    std::optional<TrainingState> resume = std::nullopt, const EpochCallback& on_epoch = {});

// Checkpoint: double-precision dictionary plus sidecar with epoch and log.
void save_checkpoint(const std::filesystem::path& path, const TrainingState& state);
TrainingState load_checkpoint(const std::filesystem::path& path);

nlohmann::json to_json(const EpochRecord& r);
EpochRecord epoch_record_from_json(const nlohmann::json& j);

}  // namespace slca
