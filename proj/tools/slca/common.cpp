#include "common.hpp"

#include <algorithm>
#include <iostream>
#include <set>

#include "slca/errors.hpp"
#include "slca/parallel.hpp"
#include "slca/tensor_io.hpp"

namespace slca::cli {

namespace {

std::string flag_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return "--" + key;
}

}  // namespace

CLI::App* add_command(CLI::App& app, const Command& cmd, json& flags, std::string& config_path) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_path, "JSON config file; flags override its values");
    for (const OptionSpec& o : cmd.options) {
        const std::string key = o.key, name = flag_name(o.key);
        const std::string help = o.help + " (default " + o.value.dump() + ")";
        json* target = &flags;
        if (o.value.is_boolean()) {
            sub->add_option_function<bool>(name, [target, key](const bool& v) { (*target)[key] = v; }, help);
        } else if (o.value.is_number_integer()) {
            sub->add_option_function<long long>(name, [target, key](const long long& v) { (*target)[key] = v; }, help);
        } else if (o.value.is_number()) {
            sub->add_option_function<double>(name, [target, key](const double& v) { (*target)[key] = v; }, help);
        } else if (o.value.is_string()) {
            sub->add_option_function<std::string>(name, [target, key](const std::string& v) { (*target)[key] = v; }, help);
        } else if (o.string_list) {
            sub->add_option_function<std::vector<std::string>>(
                name, [target, key](const std::vector<std::string>& v) { (*target)[key] = v; }, help);
        } else {
            sub->add_option_function<std::vector<double>>(
                name, [target, key](const std::vector<double>& v) { (*target)[key] = v; }, help);
        }
    }
    return sub;
}

json resolve_config(const Command& cmd, const std::string& config_path, const json& flags) {
    json cfg = json::object();
    for (const OptionSpec& o : cmd.options) cfg[o.key] = o.value;
    auto apply = [&](const json& src, const std::string& origin) {
        for (auto it = src.begin(); it != src.end(); ++it) {
            if (!cfg.contains(it.key())) throw ConfigError("unknown option '" + it.key() + "' in " + origin);
            const json& def = cfg[it.key()];
            const json& v = it.value();
            const bool ok = (def.is_number() && v.is_number() && (!def.is_number_integer() || v.is_number_integer())) ||
                            (def.is_string() && v.is_string()) || (def.is_boolean() && v.is_boolean()) ||
                            (def.is_array() && v.is_array());
            if (!ok) throw ConfigError("option '" + it.key() + "' in " + origin + " has the wrong type");
            cfg[it.key()] = v;
        }
    };
    if (!config_path.empty()) {
        json file;
        try {
            file = read_json(config_path);
        } catch (const DataError& e) {
            throw ConfigError(e.what());
        }
        if (!file.is_object()) throw ConfigError(config_path + ": config must be a JSON object");
        apply(file, config_path);
    }
    apply(flags, "command-line flags");
    return cfg;
}

bool operational_key(const std::string& key) {
    static const std::set<std::string> keys{"out", "workers", "checkpoint", "resume", "data", "dict",
                                            "tuning", "scene", "truth", "predictor", "samples", "holdout",
                                            "sources"};
    return keys.count(key) > 0;
}

std::string config_hash(const json& cfg) {
    json h = json::object();
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
        if (!operational_key(it.key())) h[it.key()] = it.value();
    return hash_string(h.dump());
}

json provenance(const std::string& command, const json& cfg, const std::map<std::string, std::string>& inputs) {
    json c = json::object();
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
        if (!operational_key(it.key())) c[it.key()] = it.value();
    return {{"command", command}, {"config", c}, {"config_hash", config_hash(cfg)}, {"inputs", inputs}};
}

void log_event(const std::string& command, const std::string& message, const json& fields) {
    json j = {{"cmd", command}, {"msg", message}};
    for (auto it = fields.begin(); it != fields.end(); ++it) j[it.key()] = it.value();
    std::cerr << j.dump() << '\n';
}

std::vector<OptionSpec> lca_options() {
    return {{"lambda", 0.1, "activation threshold"},
            {"iterations", 400, "maximum LCA iterations"},
            {"step", 0.1, "integration step dt/tau"},
            {"tolerance", 1e-5, "relative energy change and max |du| stopping tolerance"}};
}

std::vector<OptionSpec> preprocess_options() {
    return {{"blur_sigma", 0.5, "Gaussian pre-blur sigma (px)"},
            {"dog_inner", 1.0, "inner DoG sigma (px)"},
            {"dog_outer", 5.5, "outer DoG sigma (px)"},
            {"target_norm", 0.0, "joint l2 norm after normalization; <= 0 selects sqrt(H*W)/kernel_size"}};
}

LcaConfig lca_config(const json& cfg) {
    LcaConfig c;
    c.lambda = cfg.at("lambda").get<double>();
    c.iterations = cfg.at("iterations").get<int>();
    c.step = cfg.at("step").get<double>();
    c.tolerance = cfg.at("tolerance").get<double>();
    if (cfg.contains("seed")) c.seed = cfg.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
}

PreprocessConfig preprocess_config(const json& cfg) {
    PreprocessConfig p;
    p.blur_sigma = cfg.at("blur_sigma").get<double>();
    p.dog_inner = cfg.at("dog_inner").get<double>();
    p.dog_outer = cfg.at("dog_outer").get<double>();
    p.target_norm = cfg.at("target_norm").get<double>();
    if (cfg.contains("kernel_size")) p.kernel_size = cfg.at("kernel_size").get<int>();
    return p;
}

std::vector<StereoPair> load_preprocessed(const Dataset& ds, const PreprocessConfig& pre, std::size_t max_pairs,
                                          int workers) {
    const std::size_t n = max_pairs > 0 ? std::min(max_pairs, ds.entries.size()) : ds.entries.size();
    std::vector<StereoPair> out(n);
    parallel_for(n, workers, [&](std::size_t i) {
        out[i] = preprocess_pair(read_pair(ds.root / ds.entries[i].path), pre).pair;
    });
    return out;
}

std::string require_path(const json& cfg, const std::string& key) {
    const std::string v = cfg.at(key).get<std::string>();
    if (v.empty()) throw ConfigError("option --" + key + " is required");
    return v;
}

std::filesystem::path prepare_output_dir(const std::string& dir) {
    if (dir.empty()) throw ConfigError("option --out is required");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir + ": " + ec.message());
    return dir;
}

}  // namespace slca::cli
