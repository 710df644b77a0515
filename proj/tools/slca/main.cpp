#include <iostream>

#include "common.hpp"
#include "slca/errors.hpp"

namespace slca::cli {

namespace {

std::vector<OptionSpec> join(std::vector<OptionSpec> a, const std::vector<OptionSpec>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::vector<OptionSpec> with_codes(std::vector<OptionSpec> own) {
    return join(join(std::move(own), lca_options()), preprocess_options());
}

}  // namespace

std::vector<Command> commands() {
    const json none = json::array();
    return {
        {"gen", "materialize a labelled stereo dataset",
         {{"kind", "disparity", "disparity | surface | vergence | scene"},
          {"out", "", "output dataset directory"},
          {"seed", 1, "global seed"},
          {"workers", 1, "worker threads"},
          {"per_label", 10, "pairs per label"},
          {"texture", "dead_leaves", "procedural texture when no sources are given (dead_leaves, noise)"},
          {"sources", none, "grayscale PNG source images", true},
          {"grid_lo", -6.0, "lowest disparity label (px)"},
          {"grid_hi", 6.0, "highest disparity label (px)"},
          {"grid_step", 0.5, "disparity label step (px)"},
          {"horizontal", false, "horizontal disparities only (dy = 0)"},
          {"crop", 128, "crop side at source resolution"},
          {"tilts", none, "tilt labels in degrees (empty selects 0..350 step 10)"},
          {"slants", none, "slant labels in degrees (empty selects the default ladder)"},
          {"baseline", 0.07, "camera baseline (m)"},
          {"distance", 1.0, "fixation distance (m)"},
          {"fov_deg", 11.8, "horizontal field of view (degrees)"},
          {"surface_size", 64, "rendered surface pair side (px)"},
          {"texels_per_pixel", 1.0, "texture texels per pixel at the fixation distance"},
          {"calibrate", true, "rescale the baseline to one pixel per slant step"},
          {"vergence_source_size", 256, "rendered source plane side for vergence pairs (px)"},
          {"max_angle", 2.0, "largest virtual fixation rotation (degrees)"},
          {"scenes", 4, "number of layered scenes"},
          {"scene_height", 256, "scene height (px)"},
          {"scene_width", 256, "scene width (px)"},
          {"scene_layers", 3, "foreground rectangles per scene"},
          {"min_disparity", -20.0, "smallest layer disparity (px)"},
          {"max_disparity", 20.0, "largest layer disparity (px)"},
          {"background_disparity", 0.0, "background disparity (px)"}},
         run_gen},
        {"train", "learn a convolutional binocular dictionary",
         with_codes({{"data", "", "dataset directory"},
                     {"out", "", "output dictionary tensor"},
                     {"kernel_size", 16, "kernel side (px)"},
                     {"stride", 8, "convolution stride (px)"},
                     {"kernels", 0, "kernel count; <= 0 derives it from overcompleteness"},
                     {"overcompleteness", 1.0, "overcompleteness ratio"},
                     {"epochs", 10, "training epochs"},
                     {"batch_size", 16, "pairs per update"},
                     {"learning_rate", 1.0, "dictionary learning rate"},
                     {"seed", 1, "initialization and shuffle seed"},
                     {"workers", 1, "worker threads"},
                     {"max_pairs", 0, "use at most this many pairs (0 = all)"},
                     {"resume", "", "checkpoint to resume from"},
                     {"checkpoint", "", "checkpoint written after every epoch"}}),
         run_train},
        {"encode", "encode a dataset into sparse codes",
         with_codes({{"data", "", "dataset directory"},
                     {"dict", "", "dictionary tensor"},
                     {"out", "", "output directory"},
                     {"max_pairs", 0, "encode at most this many pairs (0 = all)"},
                     {"workers", 1, "worker threads"}}),
         run_encode},
        {"tune", "estimate tuning maps from a labelled dataset",
         with_codes({{"data", "", "dataset directory"},
                     {"dict", "", "dictionary tensor"},
                     {"out", "", "output tuning tensor"},
                     {"mode", "shared", "shared | per_location"},
                     {"margin", 1, "border cells skipped in shared mode"},
                     {"region", 7, "per-location region side (cells)"},
                     {"smooth", false, "Savitzky-Golay smoothing along the label axes"},
                     {"sg_degree", 3, "smoothing polynomial degree"},
                     {"sg_width", 5, "smoothing window width"},
                     {"max_pairs", 0, "use at most this many pairs (0 = all)"},
                     {"workers", 1, "worker threads"}}),
         run_tune},
        {"infer", "infer labels on a labelled dataset and score them",
         with_codes({{"data", "", "dataset directory"},
                     {"dict", "", "dictionary tensor"},
                     {"tuning", "", "tuning tensor"},
                     {"out", "", "output directory"},
                     {"eval_margin", 1, "border blocks excluded from scoring"},
                     {"max_pairs", 0, "use at most this many pairs (0 = all)"},
                     {"workers", 1, "worker threads"}}),
         run_infer},
        {"scale-infer", "multi-scale disparity map for one scene",
         with_codes({{"dict", "", "dictionary tensor"},
                     {"tuning", "", "shared disparity tuning tensor"},
                     {"scene", "", "stereo pair tensor"},
                     {"truth", "", "optional (2, H, W) ground-truth tensor"},
                     {"select_by_truth", true, "pick scales with the ground truth when it is given"},
                     {"predictor", "", "optional error predictor JSON"},
                     {"percentile", 80.0, "predicted-error percentile"},
                     {"scales", json::array({1.0, 0.8, 0.6, 0.4, 0.2}), "scale factors, finest first"},
                     {"out", "", "output directory"},
                     {"workers", 1, "worker threads"}}),
         run_scale_infer},
        {"analyze", "Gabor fits and receptive-field statistics",
         {{"dict", "", "dictionary tensor"},
          {"tuning", "", "optional tuning tensor"},
          {"out", "", "output directory"},
          {"r2_cut", 0.93, "fit quality threshold"},
          {"workers", 1, "worker threads"}},
         run_analyze},
        {"predict-error", "fit the activity-binned error predictor",
         {{"samples", "", "samples.csv from infer"},
          {"out", "", "output JSON"},
          {"percentiles", json::array({25.0, 50.0, 75.0, 80.0, 90.0}), "stored percentiles"},
          {"min_per_bin", 50, "minimum samples per activity bin"},
          {"holdout", "", "optional held-out samples.csv for calibration"},
          {"calibration_percentile", 75.0, "percentile checked on the held-out samples"}},
         run_predict_error},
    };
}

}  // namespace slca::cli

int main(int argc, char** argv) {
    using namespace slca::cli;
    CLI::App app{"Binocular convolutional sparse coding and disparity readout"};
    app.require_subcommand(1);
    const auto cmds = commands();
    std::vector<json> flags(cmds.size(), json::object());
    std::vector<std::string> config_paths(cmds.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < cmds.size(); ++i) subs.push_back(add_command(app, cmds[i], flags[i], config_paths[i]));
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        const std::string& name = cmds[i].name;
        try {
            return cmds[i].run(resolve_config(cmds[i], config_paths[i], flags[i]));
        } catch (const slca::ConfigError& e) {
            log_event(name, e.what(), {{"level", "error"}, {"kind", "config"}});
            return 2;
        } catch (const json::exception& e) {
            log_event(name, e.what(), {{"level", "error"}, {"kind", "config"}});
            return 2;
        } catch (const slca::DivergenceError& e) {
            log_event(name, e.what(), {{"level", "error"}, {"kind", "divergence"}});
            return 4;
        } catch (const slca::DataError& e) {
            log_event(name, e.what(), {{"level", "error"}, {"kind", "data"}});
            return 3;
        } catch (const std::filesystem::filesystem_error& e) {
            log_event(name, e.what(), {{"level", "error"}, {"kind", "data"}});
            return 3;
        } catch (const std::exception& e) {
            log_event(name, e.what(), {{"level", "error"}});
            return 1;
        }
    }
    return 2;
}
