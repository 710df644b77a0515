#pragma once

#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "slca/dataset.hpp"
#include "slca/filters.hpp"
#include "slca/lca.hpp"

namespace slca::cli {

using nlohmann::json;

struct OptionSpec {
    std::string key;
    json value;  // default; its JSON type fixes the flag type
    std::string help;
    bool string_list = false;  // array of strings (an empty default cannot say so)
};

struct Command {
    std::string name;
    std::string help;
    std::vector<OptionSpec> options;
    int (*run)(const json& cfg);
};

// Registers one subcommand whose flags mirror the option keys (underscores
// become dashes). Flag values land in `flags`.
CLI::App* add_command(CLI::App& app, const Command& cmd, json& flags, std::string& config_path);

// defaults <- config file <- flags, rejecting unknown keys.
json resolve_config(const Command& cmd, const std::string& config_path, const json& flags);

// Keys that name files or only affect scheduling; excluded from the hash.
bool operational_key(const std::string& key);
std::string config_hash(const json& cfg);
json provenance(const std::string& command, const json& cfg, const std::map<std::string, std::string>& inputs);

void log_event(const std::string& command, const std::string& message, const json& fields = json::object());

LcaConfig lca_config(const json& cfg);
PreprocessConfig preprocess_config(const json& cfg);
std::vector<OptionSpec> lca_options();
std::vector<OptionSpec> preprocess_options();

// Reads and preprocesses the first max_pairs entries (all when 0).
std::vector<StereoPair> load_preprocessed(const Dataset& ds, const PreprocessConfig& pre, std::size_t max_pairs,
                                          int workers);

std::string require_path(const json& cfg, const std::string& key);
std::filesystem::path prepare_output_dir(const std::string& dir);

int run_gen(const json& cfg);
int run_train(const json& cfg);
int run_encode(const json& cfg);
int run_tune(const json& cfg);
int run_infer(const json& cfg);
int run_scale_infer(const json& cfg);
int run_analyze(const json& cfg);
int run_predict_error(const json& cfg);

std::vector<Command> commands();

}  // namespace slca::cli
