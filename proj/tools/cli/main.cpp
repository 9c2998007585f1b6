#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

namespace {

sliceq::cli::RunConfig resolve_config(const std::string& config_path,
                                      bool has_seed, std::uint64_t seed) {
    sliceq::cli::RunConfig config =
        config_path.empty() ? sliceq::cli::RunConfig::defaults()
                            : sliceq::cli::load_config(config_path);
    if (has_seed) {
        config.campaign.seed = seed;
        config.modsys_seed = seed;
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Video-streaming KQI estimation and slice negotiation toolbox"};
    app.require_subcommand(1);
    app.fallthrough();  // --config/--seed may follow the subcommand

    std::string config_path;
    std::uint64_t seed = 0;
    bool has_seed = false;
    app.add_option("--config", config_path,
                   "JSON run configuration (defaults when omitted)");
    app.add_option("--seed", seed, "Override campaign and modelling seeds")
        ->each([&](const std::string&) { has_seed = true; });

    std::string out_dir = "out";
    std::string dataset_path;
    std::string registry_path;
    std::string request_path;
    std::string trace_path;
    std::string targets_path;
    std::string out_path;

    auto* gen = app.add_subcommand("gen-data",
                                   "Run the measurement campaign, write the "
                                   "training dataset CSV");
    gen->add_option("--out", out_dir, "Output directory");

    auto* train = app.add_subcommand(
        "train", "Train all regressors, select the best per KQI");
    train->add_option("--data", dataset_path, "Dataset CSV")->required();
    train->add_option("--out", out_dir, "Output directory");

    auto* eval = app.add_subcommand(
        "eval", "Emit measured/estimated pairs and latency stats");
    eval->add_option("--registry", registry_path, "Registry JSON")->required();
    eval->add_option("--data", dataset_path, "Dataset CSV")->required();
    eval->add_option("--out", out_dir, "Output directory");

    auto* negotiate =
        app.add_subcommand("negotiate", "Run the slice negotiation protocol");
    negotiate->add_option("--registry", registry_path, "Registry JSON")
        ->required();
    negotiate->add_option("--request", request_path, "Request JSON")
        ->required();
    negotiate->add_option("--out", out_path, "Negotiation log path");

    auto* dysa = app.add_subcommand(
        "dysa", "Replay a radio trace through dynamic slice allocation");
    dysa->add_option("--registry", registry_path, "Registry JSON")->required();
    dysa->add_option("--trace", trace_path, "Radio trace CSV")->required();
    dysa->add_option("--targets", targets_path, "Targets JSON")->required();
    dysa->add_option("--out", out_path, "Timeline CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        const sliceq::cli::RunConfig config =
            resolve_config(config_path, has_seed, seed);
        if (gen->parsed()) {
            sliceq::cli::cmd_gen_data(config, out_dir, std::cout);
        } else if (train->parsed()) {
            sliceq::cli::cmd_train(config, dataset_path, out_dir, std::cout);
        } else if (eval->parsed()) {
            sliceq::cli::cmd_eval(config, registry_path, dataset_path, out_dir,
                                  std::cout);
        } else if (negotiate->parsed()) {
            if (out_path.empty()) out_path = "negotiation.json";
            sliceq::cli::cmd_negotiate(config, registry_path, request_path,
                                       out_path, std::cout);
        } else if (dysa->parsed()) {
            if (out_path.empty()) out_path = "timeline.csv";
            sliceq::cli::cmd_dysa(config, registry_path, trace_path,
                                  targets_path, out_path, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
