#ifndef SLICEQ_CLI_CONFIG_HPP
#define SLICEQ_CLI_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sliceq/dysa.hpp"
#include "sliceq/modsys.hpp"
#include "sliceq/netsim.hpp"
#include "sliceq/osna.hpp"
#include "sliceq/sea.hpp"

namespace sliceq::cli {

/// Everything a run needs, with working defaults for the reference
/// campaign (4 stations x {5,10,15,20} MHz x 50 playbacks).
struct RunConfig {
    netsim::SimParams sim;
    sea::CampaignPlan campaign;
    modsys::Hyperparams hyper;
    std::vector<modsys::RegressorKind> kinds;
    std::size_t cv_folds = 10;
    double train_fraction = 0.7;
    std::uint64_t modsys_seed = 42;
    double margin_percentile = 0.9;
    std::vector<SliceConfig> catalog;
    osna::PricingParams pricing;
    dysa::MonitorParams monitor;

    static RunConfig defaults();
};

/// Strict JSON parse: unknown keys anywhere are rejected with the key path;
/// unset keys keep their defaults.
RunConfig load_config(const std::filesystem::path& path);

/// Serializes a config (used to produce a template config file).
void save_config(const RunConfig& config, const std::filesystem::path& path);

}  // namespace sliceq::cli

#endif  // SLICEQ_CLI_CONFIG_HPP
