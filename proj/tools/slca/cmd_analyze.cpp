#include <cmath>
#include <fstream>
#include <iostream>

#include "common.hpp"
#include "slca/dictionary.hpp"
#include "slca/errors.hpp"
#include "slca/kernel_stats.hpp"
#include "slca/metrics.hpp"
#include "slca/parallel.hpp"
#include "slca/tensor_io.hpp"
#include "slca/tuning.hpp"

namespace slca::cli {

namespace {

json fit_json(const GaborFit& f) {
    const GaborParams& p = f.params;
    return {{"a", p.a},   {"b", p.b},           {"x0", p.x0},           {"y0", p.y0},   {"phi", p.phi},
            {"theta", p.theta}, {"sigma_x", p.sigma_x}, {"sigma_y", p.sigma_y}, {"f", p.f}, {"kappa", p.kappa},
            {"n_x", p.n_x()}, {"n_y", p.n_y()}, {"r2", f.r2}};
}

}  // namespace

int run_analyze(const json& cfg) {
    const std::string dict_path = require_path(cfg, "dict");
    const Dictionary dict = load_dictionary(dict_path);
    const auto root = prepare_output_dir(cfg.at("out").get<std::string>());
    std::map<std::string, std::string> inputs{{"dict", hash_file(dict_path)}};

    std::optional<TuningMaps> tuning;
    const std::string tuning_path = cfg.at("tuning").get<std::string>();
    if (!tuning_path.empty()) {
        tuning = load_tuning(tuning_path);
        if (tuning->kernels != dict.count()) throw ConfigError("tuning table and dictionary disagree on K");
        inputs["tuning"] = hash_file(tuning_path);
    }
    // Per-kernel tuning row: averaged over region cells in per-location mode.
    auto tuning_row = [&](int k) {
        std::vector<double> row;
        if (!tuning) return row;
        const std::size_t L = tuning->labels(), cells = tuning->cells();
        row.assign(L, 0.0);
        for (std::size_t c = 0; c < cells; ++c)
            for (std::size_t y = 0; y < L; ++y) row[y] += tuning->p(static_cast<std::size_t>(k) * cells + c, y) / cells;
        return row;
    };
    std::size_t zero_index = static_cast<std::size_t>(-1);
    if (tuning && tuning->grid.kind() == LabelKind::Disparity) {
        try {
            zero_index = tuning->grid.index_of({0.0, 0.0});
        } catch (const ConfigError&) {
        }
    }

    ClassifyOptions co;
    co.r2_cut = cfg.at("r2_cut").get<double>();
    std::vector<KernelStats> stats(dict.count());
    parallel_for(stats.size(), cfg.at("workers").get<int>(), [&](std::size_t k) {
        const int kk = static_cast<int>(k);
        const auto row = tuning && tuning->grid.kind() == LabelKind::Disparity ? tuning_row(kk) : std::vector<double>{};
        stats[k] = analyze_kernel(dict.left(kk), dict.right(kk), row, zero_index, co);
    });

    std::ofstream jl(root / "stats.jsonl");
    std::ofstream csv(root / "stats.csv");
    csv.precision(17);
    csv << "kernel,type,od_bin,od_angle,r2_left,r2_right,joint_r2,pos_shift,phase_shift,dx,dy,phi_left,f_left,n_x_left,n_y_left\n";
    std::map<std::string, int> types;
    std::vector<int> od(7, 0);
    std::vector<double> orientations, tilts;
    for (int k = 0; k < dict.count(); ++k) {
        const KernelStats& s = stats[k];
        json rec = {{"kernel", k},
                    {"type", to_string(s.type)},
                    {"ocular_dominance", {{"angle", s.dominance.angle}, {"bin", s.dominance.bin}}},
                    {"left", fit_json(s.left_fit)},
                    {"right", fit_json(s.right_fit)},
                    {"joint_r2", s.joint_r2}};
        if (s.has_shift)
            rec["shift"] = {{"pos_shift", s.shift.pos_shift}, {"phase_shift", s.shift.phase_shift}, {"dx", s.shift.dx}, {"dy", s.shift.dy}};
        jl << rec.dump() << '\n';
        const GaborParams& lp = s.left_fit.params;
        csv << k << ',' << to_string(s.type) << ',' << s.dominance.bin << ',' << s.dominance.angle << ',' << s.left_fit.r2
            << ',' << s.right_fit.r2 << ',' << s.joint_r2 << ',' << s.shift.pos_shift << ',' << s.shift.phase_shift << ','
            << s.shift.dx << ',' << s.shift.dy << ',' << lp.phi << ',' << lp.f << ',' << lp.n_x() << ',' << lp.n_y() << '\n';
        ++types[to_string(s.type)];
        ++od[s.dominance.bin - 1];

        // Preferred tilt against fitted orientation, for per-location surface maps.
        if (tuning && tuning->grid.kind() == LabelKind::Surface && s.left_fit.r2 > co.r2_cut) {
            const auto row = tuning_row(k);
            const std::size_t best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
            tilts.push_back(tuning->grid.surface_label(best).tilt * M_PI / 180.0);
            orientations.push_back(lp.phi);
        }
    }
    json summary = provenance("analyze", cfg, inputs);
    summary["kernels"] = dict.count();
    summary["types"] = types;
    summary["ocular_dominance_histogram"] = od;
    if (tilts.size() >= 3) {
        try {
            summary["tilt_orientation_correlation"] = circular_correlation(tilts, orientations, true);
        } catch (const DataError& e) {
            summary["tilt_orientation_correlation"] = nullptr;
        }
    }
    write_json(root / "summary.json", summary);
    log_event("analyze", "kernel statistics written", {{"kernels", dict.count()}});
    std::cout << json{{"types", types}}.dump() << '\n';
    return 0;
}

}  // namespace slca::cli
