#include "slca/learn.hpp"

#include <algorithm>
#include <numeric>

#include "slca/errors.hpp"
#include "slca/parallel.hpp"
#include "slca/tensor_io.hpp"
#include "slca/textures.hpp"

namespace slca {

void LearnConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (kernels < 1) throw ConfigError("kernel count must be >= 1");
    if (stride < 1 || kernel_size % stride != 0) throw ConfigError("stride must divide the kernel size");
}

namespace {

struct BatchItem {
    Eigen::MatrixXd gradient;
    Energy energy;
};

BatchItem process(const StereoPair& pair, const Encoder& encoder, const LcaConfig& ecfg) {
    const EncodeResult enc = encoder.encode(pair, ecfg);
    const StereoPair recon = reconstruct(encoder.dictionary(), enc.code);
    const StereoPair residual(pair.left - recon.left, pair.right - recon.right);
    BatchItem item;
    // Descent direction of the residual term with respect to each kernel.
    item.gradient = extract_patches(residual, enc.code.geometry) * enc.code.a;
    item.energy = enc.trace.back();
    return item;
}

}  // namespace

TrainingState learn(std::span<const StereoPair> pairs, const LearnConfig& lcfg, const LcaConfig& ecfg,
                    std::optional<TrainingState> resume, const EpochCallback& on_epoch) {
    lcfg.validate();
    ecfg.validate();
    if (pairs.empty()) throw DataError("training set is empty");

    TrainingState state = resume ? std::move(*resume)
                                 : TrainingState{Dictionary::random(lcfg.kernels, lcfg.kernel_size, lcfg.stride, lcfg.seed),
                                                 0, {}};
    if (state.dict.count() != lcfg.kernels || state.dict.kernel_size() != lcfg.kernel_size ||
        state.dict.stride() != lcfg.stride)
        throw ConfigError("resumed dictionary does not match the training configuration");

    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (pairs[i].squared_norm() > 0.0) usable.push_back(i);

    int streak = 0;
    for (int epoch = state.epochs_done; epoch < lcfg.epochs; ++epoch) {
        std::vector<std::size_t> order = usable;
        Rng rng(mix_seed(lcfg.seed, static_cast<std::uint64_t>(epoch), 0x5eed));
        std::shuffle(order.begin(), order.end(), rng.engine());

        EpochRecord rec;
        rec.epoch = epoch + 1;
        for (std::size_t start = 0; start < order.size(); start += lcfg.batch_size) {
            const std::size_t len = std::min<std::size_t>(lcfg.batch_size, order.size() - start);
            const Encoder encoder(state.dict);
            std::vector<BatchItem> items(len);
            parallel_for(len, lcfg.workers,
                         [&](std::size_t i) { items[i] = process(pairs[order[start + i]], encoder, ecfg); });

            Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(state.dict.weights().rows(), state.dict.count());
            for (const BatchItem& item : items) {
                sum += item.gradient;
                rec.mean_residual += item.energy.residual;
                rec.mean_objective += item.energy.objective;
                rec.mean_total += item.energy.total;
                rec.mean_active += static_cast<double>(item.energy.count);
            }
            state.dict.weights() += (lcfg.learning_rate / static_cast<double>(len)) * sum;
            state.dict.normalize();
        }
        if (!order.empty()) {
            const double n = static_cast<double>(order.size());
            rec.mean_residual /= n;
            rec.mean_objective /= n;
            rec.mean_total /= n;
            rec.mean_active /= n;
        }
        rec.pairs = static_cast<int>(order.size());

        const bool rising = !state.log.empty() && rec.mean_objective > 1.1 * state.log.back().mean_objective;
        streak = rising ? streak + 1 : 0;
        state.log.push_back(rec);
        state.epochs_done = epoch + 1;
        if (on_epoch) on_epoch(state);
        if (streak >= 3)
            throw DivergenceError("training energy rose by more than 10% for three consecutive epochs", epoch + 1);
    }
    return state;
}

nlohmann::json to_json(const EpochRecord& r) {
    return {{"epoch", r.epoch},           {"mean_residual", r.mean_residual}, {"mean_objective", r.mean_objective},
            {"mean_total", r.mean_total}, {"mean_active", r.mean_active},     {"pairs", r.pairs}};
}

EpochRecord epoch_record_from_json(const nlohmann::json& j) {
    EpochRecord r;
    r.epoch = j.at("epoch").get<int>();
    r.mean_residual = j.at("mean_residual").get<double>();
    r.mean_objective = j.at("mean_objective").get<double>();
    r.mean_total = j.at("mean_total").get<double>();
    r.mean_active = j.at("mean_active").get<double>();
    r.pairs = j.at("pairs").get<int>();
    return r;
}

void save_checkpoint(const std::filesystem::path& path, const TrainingState& state) {
    nlohmann::json log = nlohmann::json::array();
    for (const auto& r : state.log) log.push_back(to_json(r));
    save_dictionary(path, state.dict, {{"epochs_done", state.epochs_done}, {"log", log}}, true);
}

TrainingState load_checkpoint(const std::filesystem::path& path) {
    nlohmann::json meta;
    const Tensor t = read_tensor(path);
    if (t.dtype != DType::F64) throw DataError(path.string() + ": checkpoints are stored in double precision");
    Dictionary d = load_dictionary(path, &meta);
    TrainingState s{std::move(d), meta.value("epochs_done", 0), {}};
    for (const auto& r : meta.value("log", nlohmann::json::array())) s.log.push_back(epoch_record_from_json(r));
    return s;
}

}  // namespace slca
