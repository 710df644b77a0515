#include <cmath>
#include <iostream>

#include "common.hpp"
#include "slca/errors.hpp"
#include "slca/geometry.hpp"
#include "slca/parallel.hpp"
#include "slca/png_io.hpp"
#include "slca/stimuli.hpp"
#include "slca/tensor_io.hpp"
#include "slca/textures.hpp"

namespace slca::cli {

namespace {

Image make_texture(const std::string& kind, int h, int w, std::uint64_t seed) {
    if (kind == "dead_leaves") return dead_leaves(h, w, seed);
    if (kind == "noise") return octave_noise(h, w, seed);
    throw ConfigError("unknown texture '" + kind + "' (dead_leaves, noise)");
}

std::string entry_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "pairs/%06zu.lcat", i);
    return buf;
}

SurfaceRig rig_from(const json& cfg) {
    SurfaceRig rig;
    rig.baseline = cfg.at("baseline").get<double>();
    rig.distance = cfg.at("distance").get<double>();
    rig.fov_deg = cfg.at("fov_deg").get<double>();
    rig.height = rig.width = cfg.at("surface_size").get<int>();
    rig.texels_per_pixel = cfg.at("texels_per_pixel").get<double>();
    if (cfg.at("calibrate").get<bool>()) rig = calibrate_baseline(rig, default_slant_steps());
    return rig;
}

std::vector<double> or_default(const json& v, std::vector<double> fallback) {
    auto x = v.get<std::vector<double>>();
    return x.empty() ? fallback : x;
}

}  // namespace

int run_gen(const json& cfg) {
    const std::string kind = cfg.at("kind").get<std::string>();
    const auto root = prepare_output_dir(cfg.at("out").get<std::string>());
    std::filesystem::create_directories(root / "pairs");
    const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
    const int workers = cfg.at("workers").get<int>();
    const int per_label = cfg.at("per_label").get<int>();
    if (per_label < 1) throw ConfigError("per_label must be >= 1");
    const std::string texture = cfg.at("texture").get<std::string>();

    std::map<std::string, std::string> inputs;
    std::vector<Image> sources;
    for (const auto& s : cfg.at("sources").get<std::vector<std::string>>()) {
        sources.push_back(load_grayscale(s));
        inputs["source:" + std::filesystem::path(s).filename().string()] = hash_file(s);
    }

    Dataset ds;
    ds.root = root;
    ds.kind = kind;
    std::function<void(std::size_t)> make;

    if (kind == "disparity") {
        ds.grid = LabelGrid::disparity(cfg.at("grid_lo").get<double>(), cfg.at("grid_hi").get<double>(),
                                       cfg.at("grid_step").get<double>());
        if (cfg.at("horizontal").get<bool>()) ds.grid = LabelGrid(LabelKind::Disparity, ds.grid.col_values(), {0.0});
        const int crop = cfg.at("crop").get<int>();
        double reach = 0.0;
        for (double v : ds.grid.col_values()) reach = std::max(reach, std::abs(v));
        for (double v : ds.grid.row_values()) reach = std::max(reach, std::abs(v));
        const int side = crop + 2 * static_cast<int>(std::ceil(2 * reach)) + 16;
        for (std::size_t y = 0; y < ds.grid.size(); ++y)
            for (int k = 0; k < per_label; ++k) {
                const std::size_t i = ds.entries.size();
                ds.entries.push_back({entry_name(i), y, ds.grid.label(y), mix_seed(seed, i, 1), 0.5, ""});
            }
        make = [&, crop, side](std::size_t i) {
            const DatasetEntry& e = ds.entries[i];
            const Image src = sources.empty() ? make_texture(texture, side, side, mix_seed(seed, i, 2))
                                              : sources[i % sources.size()];
            write_pair(root / e.path, make_shifted_pair(src, ds.grid.disparity_label(e.label_index), crop, e.seed));
        };
    } else if (kind == "surface") {
        ds.grid = LabelGrid::surface(or_default(cfg.at("tilts"), LabelGrid::default_surface().col_values()),
                                     or_default(cfg.at("slants"), LabelGrid::default_surface().row_values()));
        const SurfaceRig rig = rig_from(cfg);
        ds.extra = {{"baseline", rig.baseline}, {"distance", rig.distance}, {"fov_deg", rig.fov_deg},
                    {"size", rig.width}, {"texels_per_pixel", rig.texels_per_pixel}};
        for (std::size_t y = 0; y < ds.grid.size(); ++y)
            for (int k = 0; k < per_label; ++k) {
                const std::size_t i = ds.entries.size();
                // One texture per sample slot, shared by every label.
                ds.entries.push_back({entry_name(i), y, ds.grid.label(y), mix_seed(seed, static_cast<std::uint64_t>(k), 3), 1.0, ""});
            }
        make = [&, rig](std::size_t i) {
            const DatasetEntry& e = ds.entries[i];
            const int side = 3 * rig.width;
            const Image tex = sources.empty() ? make_texture(texture, side, side, e.seed)
                                              : sources[static_cast<std::size_t>(e.seed % sources.size())];
            write_pair(root / e.path, render_slanted_plane(tex, ds.grid.surface_label(e.label_index), rig));
        };
    } else if (kind == "vergence") {
        ds.grid = LabelGrid::disparity(0.0, 0.0, 1.0);
        const int crop = cfg.at("crop").get<int>(), src_size = cfg.at("vergence_source_size").get<int>();
        const double max_angle = cfg.at("max_angle").get<double>();
        for (int k = 0; k < per_label; ++k) {
            const std::size_t i = ds.entries.size();
            ds.entries.push_back({entry_name(i), 0, {0.0, 0.0}, mix_seed(seed, i, 4), 1.0, ""});
        }
        make = [&, crop, src_size, max_angle](std::size_t i) {
            const DatasetEntry& e = ds.entries[i];
            SurfaceRig rig;
            rig.height = rig.width = src_size;
            const Image tex = sources.empty() ? make_texture(texture, src_size, src_size, e.seed)
                                              : sources[i % sources.size()];
            const StereoPair src = render_slanted_plane(tex, {0.0, 0.0}, rig);
            CameraIntrinsics K;
            K.fx = K.fy = rig.focal_px();
            K.px = rig.principal_x();
            K.py = rig.principal_y();
            Rng rng(e.seed);
            // Offsets small enough to keep the crop inside the warped view.
            const double radius = 0.4 * (src_size - crop) / 2.0, ang = rng.uniform(0.0, 2.0 * M_PI);
            const double r = radius * std::sqrt(rng.uniform());
            const Point2 fix{K.px + r * std::cos(ang), K.py + r * std::sin(ang)};
            FixationConfig fc;
            fc.crop_height = fc.crop_width = crop;
            fc.max_angle_deg = max_angle;
            write_pair(root / e.path, make_virtual_fixation(src, fix, fix, K, fc));
        };
    } else if (kind == "scene") {
        ds.grid = LabelGrid::disparity(0.0, 0.0, 1.0);
        const int n = cfg.at("scenes").get<int>();
        for (int k = 0; k < n; ++k) {
            const std::size_t i = ds.entries.size();
            char truth[32];
            std::snprintf(truth, sizeof truth, "pairs/%06zu.truth.lcat", i);
            ds.entries.push_back({entry_name(i), 0, {0.0, 0.0}, mix_seed(seed, i, 5), 1.0, truth});
        }
        make = [&](std::size_t i) {
            const DatasetEntry& e = ds.entries[i];
            SceneConfig sc;
            sc.height = cfg.at("scene_height").get<int>();
            sc.width = cfg.at("scene_width").get<int>();
            sc.layers = cfg.at("scene_layers").get<int>();
            sc.min_disparity = cfg.at("min_disparity").get<double>();
            sc.max_disparity = cfg.at("max_disparity").get<double>();
            sc.background_disparity = cfg.at("background_disparity").get<double>();
            sc.seed = e.seed;
            const Scene scene = make_layered_scene(sc);
            write_pair(root / e.path, scene.pair);
            write_planes(root / e.truth, {scene.truth_dx, scene.truth_dy});
        };
    } else {
        throw ConfigError("unknown dataset kind '" + kind + "' (disparity, surface, vergence, scene)");
    }

    parallel_for(ds.entries.size(), workers, make);
    write_manifest(ds, provenance("gen", cfg, inputs));

    json counts = json::array();
    std::vector<int> per(ds.grid.size(), 0);
    for (const auto& e : ds.entries) ++per[e.label_index];
    for (int c : per) counts.push_back(c);
    std::cout << json{{"kind", kind}, {"pairs", ds.entries.size()}, {"labels", ds.grid.size()}, {"counts", counts}}.dump()
              << '\n';
    log_event("gen", "dataset written", {{"pairs", ds.entries.size()}, {"root", root.string()}});
    return 0;
}

}  // namespace slca::cli
