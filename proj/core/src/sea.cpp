#include "sliceq/sea.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "csv_util.hpp"
#include "sliceq/rng.hpp"

namespace sliceq::sea {

using detail::format_double;
using detail::parse_double;
using detail::parse_long;
using detail::split_csv_line;

void CampaignPlan::validate() const {
    if (stations < 1) {
        throw std::invalid_argument("CampaignPlan: stations must be >= 1");
    }
    if (configs.empty()) {
        throw std::invalid_argument("CampaignPlan: at least one config");
    }
    for (const auto& c : configs) c.validate();
    if (playbacks_per_config < 0) {
        throw std::invalid_argument(
            "CampaignPlan: playbacks_per_config must be >= 0");
    }
    if (!(video_length_s >= 0.0 && relaunch_gap_s >= 0.0 &&
          reconfig_time_s >= 0.0)) {
        throw std::invalid_argument("CampaignPlan: durations must be >= 0");
    }
    if (ue_distances_m.size() != static_cast<std::size_t>(stations)) {
        throw std::invalid_argument(
            "CampaignPlan: need exactly one UE distance per station");
    }
    for (double d : ue_distances_m) {
        if (!(d > 0.0)) {
            throw std::invalid_argument(
                "CampaignPlan: UE distances must be > 0");
        }
    }
}

CampaignPlan CampaignPlan::reference() {
    CampaignPlan plan;
    plan.stations = 4;
    const double bandwidths[] = {5.0, 10.0, 15.0, 20.0};
    for (int i = 0; i < 4; ++i) {
        plan.configs.push_back(SliceConfig::make(i, bandwidths[i]));
    }
    plan.playbacks_per_config = 50;
    plan.video_length_s = 60.0;
    plan.relaunch_gap_s = 10.0;
    plan.reconfig_time_s = 30.0;
    plan.ue_distances_m = netsim::SimParams::default_distances();
    plan.seed = 42;
    return plan;
}

double campaign_duration(const CampaignPlan& plan) {
    plan.validate();
    const double beta = plan.stations;
    const double gamma = static_cast<double>(plan.configs.size());
    const double n = plan.playbacks_per_config;
    return beta * gamma *
           (n * (plan.video_length_s + plan.relaunch_gap_s) +
            plan.reconfig_time_s);
}

Dataset execute_campaign(const CampaignPlan& plan,
                         const netsim::SimParams& sim) {
    plan.validate();
    sim.validate();
    if (sim.cells.size() != static_cast<std::size_t>(plan.stations)) {
        throw std::invalid_argument(
            "execute_campaign: plan.stations must match the number of "
            "simulated cells");
    }

    Dataset rows;
    rows.reserve(static_cast<std::size_t>(plan.stations) *
                 plan.configs.size() * plan.playbacks_per_config);

    double t = 0.0;
    for (int s = 0; s < plan.stations; ++s) {
        const netsim::CellSite& cell = sim.cells[s];
        const double distance = plan.ue_distances_m[s];
        for (std::size_t c = 0; c < plan.configs.size(); ++c) {
            t += plan.reconfig_time_s;  // slice reconfiguration first
            for (int r = 0; r < plan.playbacks_per_config; ++r) {
                // Sub-seeds keyed by (station, config, repetition) so the
                // rows are reproducible independent of execution order.
                const std::uint64_t radio_seed =
                    mix_seed(plan.seed, s, c, 2 * r);
                const std::uint64_t play_seed =
                    mix_seed(plan.seed, s, c, 2 * r + 1);

                TrainingRow row;
                row.station_id = cell.station_id;
                row.config = plan.configs[c];
                row.radio = netsim::radio_conditions(cell, distance,
                                                     sim.channel, radio_seed);
                auto result = netsim::simulate_playback(
                    row.radio, row.config, plan.video_length_s, sim, play_seed);
                row.kpi = result.kpi;
                row.kqi = result.kqi;
                row.timestamp = t;
                rows.push_back(row);

                t += plan.video_length_s + plan.relaunch_gap_s;
            }
        }
    }
    return rows;
}

const std::string kDatasetHeader =
    "station_id,config_id,bandwidth_mhz,rsrp_dbm,rsrq_db,rssi_dbm,sinr_db,"
    "mac_tput_mbps,init_time_s,avg_tput_mbps,share_q360,share_q720,"
    "share_q1080,share_q1440,stall_count,stall_time_s,timestamp_s";

void save_dataset(const Dataset& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("save_dataset: cannot open " + path.string());
    }
    out << kDatasetHeader << '\n';
    for (const auto& row : rows) {
        out << row.station_id << ',' << row.config.config_id << ','
            << format_double(row.config.bandwidth_mhz) << ','
            << format_double(row.radio.rsrp) << ','
            << format_double(row.radio.rsrq) << ','
            << format_double(row.radio.rssi) << ','
            << format_double(row.kpi.sinr) << ','
            << format_double(row.kpi.mac_throughput) << ','
            << format_double(row.kqi.initial_time) << ','
            << format_double(row.kqi.avg_throughput) << ','
            << format_double(row.kqi.share_q360) << ','
            << format_double(row.kqi.share_q720) << ','
            << format_double(row.kqi.share_q1080) << ','
            << format_double(row.kqi.share_q1440) << ','
            << row.kqi.stall_count << ','
            << format_double(row.kqi.stall_time) << ','
            << format_double(row.timestamp) << '\n';
    }
    if (!out) {
        throw std::runtime_error("save_dataset: write failed for " +
                                 path.string());
    }
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_dataset: cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("load_dataset: " + path.string() +
                                 " is empty, expected header");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kDatasetHeader) {
        throw std::runtime_error("load_dataset: " + path.string() +
                                 " line 1: malformed header");
    }

    Dataset rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string context =
            path.filename().string() + " line " + std::to_string(lineno);
        const auto fields = split_csv_line(line);
        if (fields.size() != 17) {
            throw std::runtime_error(context + ": expected 17 fields, got " +
                                     std::to_string(fields.size()));
        }
        TrainingRow row;
        row.station_id = static_cast<int>(parse_long(fields[0], context));
        const int config_id = static_cast<int>(parse_long(fields[1], context));
        const double bandwidth = parse_double(fields[2], context);
        row.radio.rsrp = parse_double(fields[3], context);
        row.radio.rsrq = parse_double(fields[4], context);
        row.radio.rssi = parse_double(fields[5], context);
        row.kpi.sinr = parse_double(fields[6], context);
        row.kpi.mac_throughput = parse_double(fields[7], context);
        row.kqi.initial_time = parse_double(fields[8], context);
        row.kqi.avg_throughput = parse_double(fields[9], context);
        row.kqi.share_q360 = parse_double(fields[10], context);
        row.kqi.share_q720 = parse_double(fields[11], context);
        row.kqi.share_q1080 = parse_double(fields[12], context);
        row.kqi.share_q1440 = parse_double(fields[13], context);
        row.kqi.stall_count = static_cast<int>(parse_long(fields[14], context));
        row.kqi.stall_time = parse_double(fields[15], context);
        row.timestamp = parse_double(fields[16], context);
        try {
            row.config = SliceConfig::make(config_id, bandwidth);
            row.validate();
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(context + ": " + e.what());
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sliceq::sea
