#include <iostream>

#include "common.hpp"
#include "slca/dictionary.hpp"
#include "slca/errors.hpp"
#include "slca/learn.hpp"
#include "slca/tensor_io.hpp"

namespace slca::cli {

int run_train(const json& cfg) {
    const std::string data = require_path(cfg, "data");
    const std::string out = require_path(cfg, "out");
    const Dataset ds = read_manifest(data);

    LearnConfig lc;
    lc.kernel_size = cfg.at("kernel_size").get<int>();
    lc.stride = cfg.at("stride").get<int>();
    lc.kernels = cfg.at("kernels").get<int>();
    if (lc.kernels <= 0) lc.kernels = kernels_for_overcompleteness(cfg.at("overcompleteness").get<double>(), lc.stride);
    lc.epochs = cfg.at("epochs").get<int>();
    lc.batch_size = cfg.at("batch_size").get<int>();
    lc.learning_rate = cfg.at("learning_rate").get<double>();
    lc.seed = cfg.at("seed").get<std::uint64_t>();
    lc.workers = cfg.at("workers").get<int>();
    lc.validate();
    const LcaConfig ec = lca_config(cfg);

    const auto pairs = load_preprocessed(ds, preprocess_config(cfg), cfg.at("max_pairs").get<std::size_t>(), lc.workers);
    log_event("train", "training set loaded", {{"pairs", pairs.size()}, {"kernels", lc.kernels}});

    std::optional<TrainingState> resume;
    const std::string resume_path = cfg.at("resume").get<std::string>();
    if (!resume_path.empty()) {
        resume = load_checkpoint(resume_path);
        log_event("train", "resuming", {{"epochs_done", resume->epochs_done}});
    }
    const std::string checkpoint = cfg.at("checkpoint").get<std::string>();

    std::map<std::string, std::string> inputs{{"manifest", hash_file(std::filesystem::path(data) / kManifestName)}};
    auto write_result = [&](const TrainingState& s, const std::string& status) {
        json log = json::array();
        for (const auto& r : s.log) log.push_back(to_json(r));
        json meta = provenance("train", cfg, inputs);
        meta["lambda_train"] = ec.lambda;
        meta["epochs_done"] = s.epochs_done;
        meta["status"] = status;
        meta["log"] = log;
        save_dictionary(out, s.dict, meta);
    };

    std::optional<TrainingState> last;
    try {
        const TrainingState final_state = learn(pairs, lc, ec, std::move(resume), [&](const TrainingState& s) {
            last = s;
            const auto& r = s.log.back();
            log_event("train", "epoch", to_json(r));
            if (!checkpoint.empty()) save_checkpoint(checkpoint, s);
        });
        write_result(final_state, "complete");
    } catch (const DivergenceError& e) {
        log_event("train", "aborted", {{"reason", e.what()}, {"epoch", e.iteration()}});
        if (last) write_result(*last, "diverged");
        throw;
    }
    std::cout << json{{"dictionary", out}, {"kernels", lc.kernels}, {"epochs", lc.epochs}}.dump() << '\n';
    return 0;
}

}  // namespace slca::cli
