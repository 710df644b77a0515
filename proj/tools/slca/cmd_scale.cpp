#include <cmath>
#include <fstream>
#include <iostream>

#include "common.hpp"
#include "slca/dictionary.hpp"
#include "slca/error_predictor.hpp"
#include "slca/errors.hpp"
#include "slca/png_io.hpp"
#include "slca/scale_space.hpp"
#include "slca/tensor_io.hpp"

namespace slca::cli {

namespace {

// Blue (most uncrossed) through white to red (most crossed); masked cells black.
std::vector<std::uint8_t> false_color(const ScaleSpaceResult& r, double range) {
    std::vector<std::uint8_t> rgb;
    for (std::size_t i = 0; i < r.dx.size(); ++i) {
        if (r.masked(i)) {
            rgb.insert(rgb.end(), {0, 0, 0});
            continue;
        }
        const double t = std::clamp(r.dx[i] / range, -1.0, 1.0);
        const auto ch = [](double v) { return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))); };
        rgb.insert(rgb.end(), {ch(1.0 + std::min(t, 0.0)), ch(1.0 - std::abs(t)), ch(1.0 - std::max(t, 0.0))});
    }
    return rgb;
}

}  // namespace

int run_scale_infer(const json& cfg) {
    const std::string dict_path = require_path(cfg, "dict"), tuning_path = require_path(cfg, "tuning");
    const std::string scene_path = require_path(cfg, "scene");
    const auto root = prepare_output_dir(cfg.at("out").get<std::string>());
    const Dictionary dict = load_dictionary(dict_path);
    json tmeta;
    const TuningMaps tuning = load_tuning(tuning_path, &tmeta);
    if (tmeta.value("stride", -1) != dict.stride() || tmeta.value("kernels", -1) != dict.count())
        throw ConfigError("tuning table does not match the dictionary (stride or K)");

    std::map<std::string, std::string> inputs{{"dict", hash_file(dict_path)}, {"tuning", hash_file(tuning_path)},
                                              {"scene", hash_file(scene_path)}};
    const StereoPair scene = read_pair(scene_path);
    const std::string truth_path = cfg.at("truth").get<std::string>();
    std::vector<Image> truth;
    if (!truth_path.empty()) {
        truth = read_planes(truth_path);
        if (truth.size() != 2) throw DataError(truth_path + ": expected (2, H, W) ground truth");
        inputs["truth"] = hash_file(truth_path);
    }
    std::optional<ErrorPredictor> pred;
    const std::string pred_path = cfg.at("predictor").get<std::string>();
    if (!pred_path.empty()) {
        const json pj = read_json(pred_path);
        pred = ErrorPredictor::from_json(pj.contains("predictor") ? pj.at("predictor") : pj);
        inputs["predictor"] = hash_file(pred_path);
    }

    ScaleSpaceConfig sc;
    sc.scales = cfg.at("scales").get<std::vector<double>>();
    sc.lca = lca_config(cfg);
    sc.preprocess = preprocess_config(cfg);
    sc.preprocess.kernel_size = dict.kernel_size();
    sc.workers = cfg.at("workers").get<int>();
    const bool use_truth = cfg.at("select_by_truth").get<bool>() && !truth.empty();
    const ScaleSpaceResult r = use_truth ? scale_space_infer(scene, dict, tuning, sc, &truth[0], &truth[1])
                                         : scale_space_infer(scene, dict, tuning, sc);

    const std::size_t cells = r.dx.size();
    Image dx(r.rows, r.cols), dy(r.rows, r.cols), scale(r.rows, r.cols), active(r.rows, r.cols), predicted(r.rows, r.cols, -1.0);
    const double pct = cfg.at("percentile").get<double>();
    for (std::size_t i = 0; i < cells; ++i) {
        dx.values()[i] = r.dx[i];
        dy.values()[i] = r.dy[i];
        scale.values()[i] = r.scale_index[i];
        active.values()[i] = r.active_count[i];
        // Error in model px at the chosen scale, reported in full-resolution px.
        if (pred && !r.masked(i))
            predicted.values()[i] = predict_error(*pred, r.active_count[i], pct) / r.scales[r.scale_index[i]];
    }
    write_planes(root / "disparity.lcat", {dx, dy});
    write_planes(root / "scale.lcat", {scale});
    write_planes(root / "active.lcat", {active});
    if (pred) write_planes(root / "predicted_error.lcat", {predicted});
    double range = 1.0;
    for (std::size_t i = 0; i < cells; ++i)
        if (!r.masked(i)) range = std::max(range, std::abs(r.dx[i]));
    save_rgb(root / "disparity.png", r.rows, r.cols, false_color(r, range));

    json summary = provenance("scale-infer", cfg, inputs);
    summary["scales"] = r.scales;
    summary["cells"] = cells;
    std::size_t masked = 0;
    for (std::size_t i = 0; i < cells; ++i) masked += r.masked(i) ? 1 : 0;
    summary["masked"] = masked;
    if (!truth.empty()) {
        const Image gx = cell_average(truth[0], r.rows, r.cols, dict.stride());
        const Image gy = cell_average(truth[1], r.rows, r.cols, dict.stride());
        std::ofstream csv(root / "scatter.csv");
        csv.precision(17);
        csv << "row,col,truth_dx,truth_dy,estimate_dx,estimate_dy,scale,active_count,abs_error,predicted_error\n";
        double sum = 0.0;
        std::size_t n = 0;
        for (int i = 0; i < r.rows; ++i)
            for (int j = 0; j < r.cols; ++j) {
                const std::size_t c = static_cast<std::size_t>(i) * r.cols + j;
                if (r.masked(c)) continue;
                const double err = std::hypot(r.dx[c] - gx(i, j), r.dy[c] - gy(i, j));
                sum += err;
                ++n;
                csv << i << ',' << j << ',' << gx(i, j) << ',' << gy(i, j) << ',' << r.dx[c] << ',' << r.dy[c] << ','
                    << r.scales[r.scale_index[c]] << ',' << r.active_count[c] << ',' << err << ','
                    << predicted(i, j) << '\n';
            }
        summary["mae"] = n ? sum / n : 0.0;
    }
    write_json(root / "summary.json", summary);
    log_event("scale-infer", "maps written", {{"cells", cells}, {"masked", masked}});
    std::cout << json{{"cells", cells}, {"masked", masked}}.dump() << '\n';
    return 0;
}

}  // namespace slca::cli
