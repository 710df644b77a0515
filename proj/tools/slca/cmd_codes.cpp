#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "common.hpp"
#include "slca/dictionary.hpp"
#include "slca/error_predictor.hpp"
#include "slca/errors.hpp"
#include "slca/inference.hpp"
#include "slca/metrics.hpp"
#include "slca/parallel.hpp"
#include "slca/tensor_io.hpp"
#include "slca/tuning.hpp"

namespace slca::cli {

namespace {

std::size_t pair_limit(const json& cfg, const Dataset& ds) {
    const auto m = cfg.at("max_pairs").get<std::size_t>();
    return m > 0 ? std::min(m, ds.entries.size()) : ds.entries.size();
}

void check_compatible(const Dictionary& dict, const json& tuning_meta) {
    const int ks = tuning_meta.value("kernel_size", -1), stride = tuning_meta.value("stride", -1);
    const int k = tuning_meta.value("kernels", -1);
    if (ks != dict.kernel_size() || stride != dict.stride() || k != dict.count())
        throw ConfigError("tuning table was built for K=" + std::to_string(k) + ", kernel " + std::to_string(ks) +
                          ", stride " + std::to_string(stride) + " but the dictionary has K=" +
                          std::to_string(dict.count()) + ", kernel " + std::to_string(dict.kernel_size()) +
                          ", stride " + std::to_string(dict.stride()));
}

std::vector<std::uint8_t> pack_bits(const BinaryCode& code) {
    std::vector<std::uint8_t> out((code.bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < code.bits.size(); ++i)
        if (code.bits[i]) out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    return out;
}

std::string numbered(const char* pattern, std::size_t i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, i);
    return buf;
}

std::vector<BinaryCode> encode_all(const Dataset& ds, std::size_t n, const Dictionary& dict, const json& cfg) {
    const PreprocessConfig pre = preprocess_config(cfg);
    const LcaConfig lc = lca_config(cfg);
    const Encoder encoder(dict);
    std::vector<BinaryCode> codes(n);
    parallel_for(n, cfg.at("workers").get<int>(), [&](std::size_t i) {
        const StereoPair p = preprocess_pair(read_pair(ds.root / ds.entries[i].path), pre).pair;
        codes[i] = binarize(encoder.encode(p, lc).code);
    });
    return codes;
}

double tilt_distance(double a, double b) {
    const double d = std::fmod(std::abs(a - b), 360.0);
    return std::min(d, 360.0 - d);
}

struct Sample {
    std::size_t pair;
    int row, col;
    std::array<double, 2> truth, estimate;
    int active;
    double error;
};

std::vector<ErrorSample> read_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + " is empty");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) header.push_back(f);
    }
    const auto col = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError(path + " lacks a '" + name + "' column");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t ca = col("active_count"), ce = col("abs_error");
    std::vector<ErrorSample> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
        if (f.size() != header.size()) throw DataError(path + ": ragged row");
        out.push_back({std::stoi(f[ca]), std::stod(f[ce])});
    }
    return out;
}

}  // namespace

int run_encode(const json& cfg) {
    const Dataset ds = read_manifest(require_path(cfg, "data"));
    const std::string dict_path = require_path(cfg, "dict");
    const Dictionary dict = load_dictionary(dict_path);
    const auto root = prepare_output_dir(cfg.at("out").get<std::string>());
    std::filesystem::create_directories(root / "codes");
    const std::size_t n = pair_limit(cfg, ds);
    const PreprocessConfig pre = preprocess_config(cfg);
    const LcaConfig lc = lca_config(cfg);

    const Encoder encoder(dict);
    std::vector<json> rows(n);
    parallel_for(n, cfg.at("workers").get<int>(), [&](std::size_t i) {
        const StereoPair p = preprocess_pair(read_pair(ds.root / ds.entries[i].path), pre).pair;
        const EncodeResult r = encoder.encode(p, lc);
        const auto& g = r.code.geometry;
        const std::uint64_t shape[] = {static_cast<std::uint64_t>(dict.count()), static_cast<std::uint64_t>(g.rows),
                                       static_cast<std::uint64_t>(g.cols)};
        const std::span<const double> a(r.code.a.data(), static_cast<std::size_t>(r.code.a.size()));
        const std::string codes = numbered("codes/%06zu.lcat", i), bits = numbered("codes/%06zu.bits", i);
        write_tensor(root / codes, shape, a, DType::F32);
        const auto packed = pack_bits(binarize(r.code));
        const std::uint64_t bshape[] = {packed.size()};
        write_tensor_u8(root / bits, bshape, packed);
        const Energy& e = r.trace.back();
        rows[i] = {{"activations", codes},
                   {"bits", bits},
                   {"label_index", ds.entries[i].label_index},
                   {"shape", {dict.count(), g.rows, g.cols}},
                   {"iterations", r.iterations},
                   {"converged", r.converged},
                   {"energy", {{"residual", e.residual}, {"count", e.count}, {"total", e.total}, {"objective", e.objective}}}};
    });
    json meta = provenance("encode", cfg, {{"manifest", hash_file(ds.root / kManifestName)}, {"dict", hash_file(dict_path)}});
    meta["bit_order"] = "kernel-major (k, m, n), least significant bit first";
    meta["entries"] = rows;
    write_json(root / "codes.json", meta);
    log_event("encode", "codes written", {{"pairs", n}});
    std::cout << json{{"pairs", n}}.dump() << '\n';
    return 0;
}

int run_tune(const json& cfg) {
    const Dataset ds = read_manifest(require_path(cfg, "data"));
    const std::string dict_path = require_path(cfg, "dict");
    const std::string out = require_path(cfg, "out");
    const Dictionary dict = load_dictionary(dict_path);
    const std::string mode = cfg.at("mode").get<std::string>();
    if (mode != "shared" && mode != "per_location") throw ConfigError("mode must be shared or per_location");
    const std::size_t n = pair_limit(cfg, ds);
    const auto codes = encode_all(ds, n, dict, cfg);

    const int region = cfg.at("region").get<int>();
    TuningAccumulator acc = mode == "shared" ? TuningAccumulator::shared(ds.grid, dict.count(), cfg.at("margin").get<int>())
                                             : TuningAccumulator::per_location(ds.grid, dict.count(), region, region);
    for (std::size_t i = 0; i < n; ++i) acc.add(ds.entries[i].label_index, codes[i]);
    TuningMaps maps = acc.finalize();
    if (cfg.at("smooth").get<bool>())
        maps = smooth_tuning(maps, cfg.at("sg_degree").get<int>(), cfg.at("sg_width").get<int>());

    json meta = provenance("tune", cfg, {{"manifest", hash_file(ds.root / kManifestName)}, {"dict", hash_file(dict_path)}});
    meta["kernel_size"] = dict.kernel_size();
    meta["stride"] = dict.stride();
    meta["lambda"] = cfg.at("lambda");
    save_tuning(out, maps, meta);
    log_event("tune", "tuning maps written", {{"pairs", n}, {"labels", maps.labels()}, {"mode", mode}});
    std::cout << json{{"labels", maps.labels()}, {"kernels", maps.kernels}, {"mode", mode}}.dump() << '\n';
    return 0;
}

int run_infer(const json& cfg) {
    const Dataset ds = read_manifest(require_path(cfg, "data"));
    const std::string dict_path = require_path(cfg, "dict"), tuning_path = require_path(cfg, "tuning");
    const Dictionary dict = load_dictionary(dict_path);
    json tmeta;
    const TuningMaps tuning = load_tuning(tuning_path, &tmeta);
    check_compatible(dict, tmeta);
    const auto root = prepare_output_dir(cfg.at("out").get<std::string>());
    const std::size_t n = pair_limit(cfg, ds);
    const auto codes = encode_all(ds, n, dict, cfg);
    const int margin = cfg.at("eval_margin").get<int>();

    std::vector<Sample> samples;
    std::vector<std::vector<double>> per_label(ds.grid.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto truth = ds.entries[i].label;
        if (tuning.mode == TuningMode::Shared) {
            if (tuning.grid.kind() != LabelKind::Disparity) throw ConfigError("shared maps must be disparity maps");
            const LabelMap map = infer_map(codes[i], tuning);
            for (int r = margin; r < map.rows - margin; ++r)
                for (int c = margin; c < map.cols - margin; ++c) {
                    const auto est = tuning.grid.label(map.at(r, c));
                    const double err = std::hypot(est[0] - truth[0], est[1] - truth[1]);
                    samples.push_back({i, r, c, truth, est, map.active_count[static_cast<std::size_t>(r) * map.cols + c], err});
                    per_label[ds.entries[i].label_index].push_back(err);
                }
        } else {
            const Posterior p = infer_surface(codes[i], tuning);
            const auto est = tuning.grid.label(p.argmax);
            const double err = tuning.grid.kind() == LabelKind::Surface
                                   ? std::hypot(tilt_distance(est[0], truth[0]), est[1] - truth[1])
                                   : std::hypot(est[0] - truth[0], est[1] - truth[1]);
            samples.push_back({i, -1, -1, truth, est, p.active_count, err});
            per_label[ds.entries[i].label_index].push_back(err);
        }
    }
    if (samples.empty()) throw DataError("no cells left to evaluate");

    std::ofstream csv(root / "samples.csv");
    csv << "pair,label_index,row,col,truth_0,truth_1,estimate_0,estimate_1,active_count,abs_error\n";
    csv.precision(17);
    double total = 0.0;
    for (const Sample& s : samples) {
        csv << s.pair << ',' << ds.entries[s.pair].label_index << ',' << s.row << ',' << s.col << ',' << s.truth[0] << ','
            << s.truth[1] << ',' << s.estimate[0] << ',' << s.estimate[1] << ',' << s.active << ',' << s.error << '\n';
        total += s.error;
    }
    if (!csv) throw DataError("failed writing samples.csv");

    json labels = json::array();
    for (std::size_t y = 0; y < per_label.size(); ++y) {
        if (per_label[y].empty()) continue;
        double m = 0.0;
        for (double e : per_label[y]) m += e;
        labels.push_back({{"label_index", y}, {"label", ds.grid.label(y)}, {"mae", m / per_label[y].size()},
                          {"samples", per_label[y].size()}});
    }
    json summary = provenance("infer", cfg,
                              {{"manifest", hash_file(ds.root / kManifestName)}, {"dict", hash_file(dict_path)},
                               {"tuning", hash_file(tuning_path)}});
    summary["mae"] = total / samples.size();
    summary["samples"] = samples.size();
    summary["per_label"] = labels;
    write_json(root / "summary.json", summary);
    log_event("infer", "inference done", {{"pairs", n}, {"mae", total / samples.size()}});
    std::cout << json{{"mae", total / samples.size()}, {"samples", samples.size()}}.dump() << '\n';
    return 0;
}

int run_predict_error(const json& cfg) {
    const std::string samples_path = require_path(cfg, "samples");
    const std::string out = require_path(cfg, "out");
    const auto percentiles = cfg.at("percentiles").get<std::vector<double>>();
    const ErrorPredictor pred =
        build_error_predictor(read_samples(samples_path), cfg.at("min_per_bin").get<std::size_t>(), percentiles);
    json j = provenance("predict-error", cfg, {{"samples", hash_file(samples_path)}});
    j["predictor"] = pred.to_json();

    const std::string holdout = cfg.at("holdout").get<std::string>();
    if (!holdout.empty()) {
        const double pct = cfg.at("calibration_percentile").get<double>();
        const auto test = read_samples(holdout);
        if (test.empty()) throw DataError(holdout + " holds no samples");
        std::size_t below = 0;
        for (const auto& s : test) below += s.abs_error <= predict_error(pred, s.active_count, pct) ? 1 : 0;
        const double frac = static_cast<double>(below) / test.size();
        j["inputs"]["holdout"] = hash_file(holdout);
        j["calibration"] = {{"percentile", pct}, {"fraction_within", frac}, {"samples", test.size()}};
        log_event("predict-error", "calibration", {{"fraction_within", frac}});
    }
    write_json(out, j);
    std::cout << json{{"bins", pred.lower.size()}}.dump() << '\n';
    return 0;
}

}  // namespace slca::cli
