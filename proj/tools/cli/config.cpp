#include "config.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "json_util.hpp"

namespace sliceq::cli {

namespace {

using detail::expect_keys;
using detail::require_number;
using nlohmann::json;

double number_or(const json& j, const char* key, double fallback,
                 const std::string& context) {
    if (!j.contains(key)) return fallback;
    return require_number(j, key, context);
}

int int_or(const json& j, const char* key, int fallback,
           const std::string& context) {
    return static_cast<int>(number_or(j, key, fallback, context));
}

void parse_channel(const json& j, netsim::ChannelParams& channel,
                   const std::string& context) {
    expect_keys(j,
                {"reference_distance_m", "reference_loss_db",
                 "noise_floor_dbm", "overhead_factor", "efficiency_cap_bps_hz",
                 "load_max_db"},
                context);
    channel.reference_distance_m = number_or(
        j, "reference_distance_m", channel.reference_distance_m, context);
    channel.reference_loss_db =
        number_or(j, "reference_loss_db", channel.reference_loss_db, context);
    channel.noise_floor_dbm =
        number_or(j, "noise_floor_dbm", channel.noise_floor_dbm, context);
    channel.overhead_factor =
        number_or(j, "overhead_factor", channel.overhead_factor, context);
    channel.efficiency_cap_bps_hz = number_or(
        j, "efficiency_cap_bps_hz", channel.efficiency_cap_bps_hz, context);
    channel.load_max_db =
        number_or(j, "load_max_db", channel.load_max_db, context);
}

void parse_netsim(const json& j, netsim::SimParams& sim,
                  const std::string& context) {
    expect_keys(j, {"channel", "cells", "abr", "ladder_mbps", "noise_sigma"},
                context);
    if (j.contains("channel")) {
        parse_channel(j.at("channel"), sim.channel, context + ".channel");
    }
    if (j.contains("cells")) {
        sim.cells.clear();
        int i = 0;
        for (const json& jc : j.at("cells")) {
            const std::string cctx =
                context + ".cells[" + std::to_string(i) + "]";
            expect_keys(jc,
                        {"station_id", "tx_power_dbm", "pathloss_exponent",
                         "shadowing_sigma_db"},
                        cctx);
            netsim::CellSite cell;
            cell.station_id = int_or(jc, "station_id", i, cctx);
            cell.tx_power_dbm =
                number_or(jc, "tx_power_dbm", cell.tx_power_dbm, cctx);
            cell.pathloss_exponent = number_or(jc, "pathloss_exponent",
                                               cell.pathloss_exponent, cctx);
            cell.shadowing_sigma_db = number_or(jc, "shadowing_sigma_db",
                                                cell.shadowing_sigma_db, cctx);
            sim.cells.push_back(cell);
            ++i;
        }
    }
    if (j.contains("abr")) {
        const json& ja = j.at("abr");
        const std::string actx = context + ".abr";
        expect_keys(ja, {"segment_s", "safety", "buffer_target_s"}, actx);
        sim.abr.segment_s = number_or(ja, "segment_s", sim.abr.segment_s, actx);
        sim.abr.safety = number_or(ja, "safety", sim.abr.safety, actx);
        sim.abr.buffer_target_s =
            number_or(ja, "buffer_target_s", sim.abr.buffer_target_s, actx);
    }
    if (j.contains("ladder_mbps")) {
        const auto rungs = j.at("ladder_mbps").get<std::vector<double>>();
        if (rungs.size() != sim.ladder.bitrate_mbps.size()) {
            throw std::runtime_error(context +
                                     ".ladder_mbps: exactly 4 rungs required");
        }
        std::copy(rungs.begin(), rungs.end(), sim.ladder.bitrate_mbps.begin());
    }
    sim.noise_sigma = number_or(j, "noise_sigma", sim.noise_sigma, context);
}

std::vector<SliceConfig> configs_from_bandwidths(
    const std::vector<double>& bandwidths, const std::string& context) {
    if (bandwidths.empty()) {
        throw std::runtime_error(context + ": at least one bandwidth");
    }
    std::vector<SliceConfig> configs;
    for (std::size_t i = 0; i < bandwidths.size(); ++i) {
        try {
            configs.push_back(
                SliceConfig::make(static_cast<int>(i), bandwidths[i]));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(context + ": " + e.what());
        }
    }
    return configs;
}

void parse_campaign(const json& j, sea::CampaignPlan& plan,
                    const std::string& context) {
    expect_keys(j,
                {"bandwidths_mhz", "playbacks_per_config", "video_length_s",
                 "relaunch_gap_s", "reconfig_time_s", "ue_distances_m",
                 "seed"},
                context);
    if (j.contains("bandwidths_mhz")) {
        plan.configs = configs_from_bandwidths(
            j.at("bandwidths_mhz").get<std::vector<double>>(),
            context + ".bandwidths_mhz");
    }
    plan.playbacks_per_config = int_or(j, "playbacks_per_config",
                                       plan.playbacks_per_config, context);
    plan.video_length_s =
        number_or(j, "video_length_s", plan.video_length_s, context);
    plan.relaunch_gap_s =
        number_or(j, "relaunch_gap_s", plan.relaunch_gap_s, context);
    plan.reconfig_time_s =
        number_or(j, "reconfig_time_s", plan.reconfig_time_s, context);
    if (j.contains("ue_distances_m")) {
        plan.ue_distances_m =
            j.at("ue_distances_m").get<std::vector<double>>();
    }
    if (j.contains("seed")) {
        plan.seed = static_cast<std::uint64_t>(
            require_number(j, "seed", context));
    }
}

void parse_modsys(const json& j, RunConfig& config,
                  const std::string& context) {
    expect_keys(j,
                {"cv_folds", "train_fraction", "seed", "kinds",
                 "margin_percentile", "hyperparams"},
                context);
    config.cv_folds = static_cast<std::size_t>(
        int_or(j, "cv_folds", static_cast<int>(config.cv_folds), context));
    config.train_fraction =
        number_or(j, "train_fraction", config.train_fraction, context);
    if (j.contains("seed")) {
        config.modsys_seed =
            static_cast<std::uint64_t>(require_number(j, "seed", context));
    }
    if (j.contains("kinds")) {
        config.kinds.clear();
        for (const json& jk : j.at("kinds")) {
            const auto kind =
                modsys::regressor_from_name(jk.get<std::string>());
            if (!kind) {
                throw std::runtime_error(context + ".kinds: unknown kind '" +
                                         jk.get<std::string>() + "'");
            }
            config.kinds.push_back(*kind);
        }
        if (config.kinds.empty()) {
            throw std::runtime_error(context + ".kinds: empty list");
        }
    }
    config.margin_percentile =
        number_or(j, "margin_percentile", config.margin_percentile, context);
    if (j.contains("hyperparams")) {
        const json& jh = j.at("hyperparams");
        const std::string hctx = context + ".hyperparams";
        expect_keys(jh,
                    {"ridge_lambda", "dtr_max_depth", "dtr_min_leaf", "svm_c",
                     "svm_poly_offset", "gpr_lengthscale", "gpr_signal_var",
                     "gpr_noise_var"},
                    hctx);
        modsys::Hyperparams& h = config.hyper;
        h.ridge_lambda = number_or(jh, "ridge_lambda", h.ridge_lambda, hctx);
        h.dtr_max_depth = int_or(jh, "dtr_max_depth", h.dtr_max_depth, hctx);
        h.dtr_min_leaf = int_or(jh, "dtr_min_leaf", h.dtr_min_leaf, hctx);
        h.svm_c = number_or(jh, "svm_c", h.svm_c, hctx);
        h.svm_poly_offset =
            number_or(jh, "svm_poly_offset", h.svm_poly_offset, hctx);
        h.gpr_lengthscale =
            number_or(jh, "gpr_lengthscale", h.gpr_lengthscale, hctx);
        h.gpr_signal_var =
            number_or(jh, "gpr_signal_var", h.gpr_signal_var, hctx);
        h.gpr_noise_var =
            number_or(jh, "gpr_noise_var", h.gpr_noise_var, hctx);
    }
}

}  // namespace

RunConfig RunConfig::defaults() {
    RunConfig config;
    config.sim = netsim::SimParams::defaults();
    config.campaign = sea::CampaignPlan::reference();
    config.kinds.assign(modsys::kAllRegressorKinds.begin(),
                        modsys::kAllRegressorKinds.end());
    config.catalog = config.campaign.configs;
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_config: cannot open " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("load_config: " + path.string() + ": " +
                                 e.what());
    }
    const std::string context = path.filename().string();
    expect_keys(j,
                {"schema", "netsim", "campaign", "modsys", "catalog_mhz",
                 "pricing", "dysa"},
                context);
    if (j.value("schema", "") != "sliceq-config-v1") {
        throw std::runtime_error(context +
                                 ": schema must be 'sliceq-config-v1'");
    }

    RunConfig config = RunConfig::defaults();
    if (j.contains("netsim")) {
        parse_netsim(j.at("netsim"), config.sim, context + ".netsim");
    }
    if (j.contains("campaign")) {
        parse_campaign(j.at("campaign"), config.campaign,
                       context + ".campaign");
    }
    // Station count follows the simulated cell list.
    config.campaign.stations = static_cast<int>(config.sim.cells.size());
    if (j.contains("modsys")) {
        parse_modsys(j.at("modsys"), config, context + ".modsys");
    }
    if (j.contains("catalog_mhz")) {
        config.catalog = configs_from_bandwidths(
            j.at("catalog_mhz").get<std::vector<double>>(),
            context + ".catalog_mhz");
    } else {
        config.catalog = config.campaign.configs;
    }
    if (j.contains("pricing")) {
        const json& jp = j.at("pricing");
        expect_keys(jp, {"base_rate"}, context + ".pricing");
        config.pricing.base_rate = number_or(jp, "base_rate",
                                             config.pricing.base_rate,
                                             context + ".pricing");
    }
    if (j.contains("dysa")) {
        const json& jd = j.at("dysa");
        const std::string dctx = context + ".dysa";
        expect_keys(jd, {"reconfig_time_s", "hysteresis"}, dctx);
        config.monitor.reconfig_time_s = number_or(
            jd, "reconfig_time_s", config.monitor.reconfig_time_s, dctx);
        config.monitor.hysteresis =
            int_or(jd, "hysteresis", config.monitor.hysteresis, dctx);
    }

    try {
        config.sim.validate();
        config.campaign.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(context + ": " + e.what());
    }
    if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
        throw std::runtime_error(context +
                                 ": modsys.train_fraction must be in (0,1)");
    }
    if (!(config.margin_percentile > 0.0 && config.margin_percentile < 1.0)) {
        throw std::runtime_error(
            context + ": modsys.margin_percentile must be in (0,1)");
    }
    return config;
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
    json j;
    j["schema"] = "sliceq-config-v1";

    json channel;
    channel["reference_distance_m"] = config.sim.channel.reference_distance_m;
    channel["reference_loss_db"] = config.sim.channel.reference_loss_db;
    channel["noise_floor_dbm"] = config.sim.channel.noise_floor_dbm;
    channel["overhead_factor"] = config.sim.channel.overhead_factor;
    channel["efficiency_cap_bps_hz"] =
        config.sim.channel.efficiency_cap_bps_hz;
    channel["load_max_db"] = config.sim.channel.load_max_db;

    json cells = json::array();
    for (const auto& c : config.sim.cells) {
        cells.push_back({{"station_id", c.station_id},
                         {"tx_power_dbm", c.tx_power_dbm},
                         {"pathloss_exponent", c.pathloss_exponent},
                         {"shadowing_sigma_db", c.shadowing_sigma_db}});
    }

    json abr;
    abr["segment_s"] = config.sim.abr.segment_s;
    abr["safety"] = config.sim.abr.safety;
    abr["buffer_target_s"] = config.sim.abr.buffer_target_s;

    j["netsim"] = {{"channel", std::move(channel)},
                   {"cells", std::move(cells)},
                   {"abr", std::move(abr)},
                   {"ladder_mbps", config.sim.ladder.bitrate_mbps},
                   {"noise_sigma", config.sim.noise_sigma}};

    std::vector<double> bandwidths;
    for (const auto& c : config.campaign.configs) {
        bandwidths.push_back(c.bandwidth_mhz);
    }
    j["campaign"] = {
        {"bandwidths_mhz", bandwidths},
        {"playbacks_per_config", config.campaign.playbacks_per_config},
        {"video_length_s", config.campaign.video_length_s},
        {"relaunch_gap_s", config.campaign.relaunch_gap_s},
        {"reconfig_time_s", config.campaign.reconfig_time_s},
        {"ue_distances_m", config.campaign.ue_distances_m},
        {"seed", config.campaign.seed}};

    json kinds = json::array();
    for (const auto kind : config.kinds) {
        kinds.push_back(std::string(modsys::regressor_name(kind)));
    }
    j["modsys"] = {
        {"cv_folds", config.cv_folds},
        {"train_fraction", config.train_fraction},
        {"seed", config.modsys_seed},
        {"kinds", std::move(kinds)},
        {"margin_percentile", config.margin_percentile},
        {"hyperparams",
         {{"ridge_lambda", config.hyper.ridge_lambda},
          {"dtr_max_depth", config.hyper.dtr_max_depth},
          {"dtr_min_leaf", config.hyper.dtr_min_leaf},
          {"svm_c", config.hyper.svm_c},
          {"svm_poly_offset", config.hyper.svm_poly_offset},
          {"gpr_lengthscale", config.hyper.gpr_lengthscale},
          {"gpr_signal_var", config.hyper.gpr_signal_var},
          {"gpr_noise_var", config.hyper.gpr_noise_var}}}};

    std::vector<double> catalog;
    for (const auto& c : config.catalog) catalog.push_back(c.bandwidth_mhz);
    j["catalog_mhz"] = catalog;
    j["pricing"] = {{"base_rate", config.pricing.base_rate}};
    j["dysa"] = {{"reconfig_time_s", config.monitor.reconfig_time_s},
                 {"hysteresis", config.monitor.hysteresis}};

    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("save_config: cannot open " + path.string());
    }
    out << j.dump(2) << '\n';
}

}  // namespace sliceq::cli
