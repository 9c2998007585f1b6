#ifndef SLICEQ_NETSIM_HPP
#define SLICEQ_NETSIM_HPP

#include <array>
#include <cstdint>
#include <string_view>
#include <tuple>
#include <vector>

#include "sliceq/types.hpp"

namespace sliceq::netsim {

/// One synthetic base station.
struct CellSite {
    int station_id = 0;
    double tx_power_dbm = 30.0;
    double pathloss_exponent = 3.0;   ///< in [2,5]
    double shadowing_sigma_db = 3.0;  ///< >= 0

    void validate() const;
};

/// Log-distance channel and link-budget constants.
struct ChannelParams {
    double reference_distance_m = 1.0;  ///< d0
    double reference_loss_db = 38.0;    ///< PL0 at d0
    double noise_floor_dbm = -100.0;
    double overhead_factor = 0.75;       ///< protocol overhead on Shannon rate
    double efficiency_cap_bps_hz = 6.0;  ///< modulation ceiling
    double load_max_db = 6.0;  ///< cap of the uniform cell-load term in rssi
};

/// DASH client knobs.
struct AbrParams {
    double segment_s = 2.0;
    double safety = 0.8;          ///< rate-rule margin on measured throughput
    double buffer_target_s = 10.0;
};

enum class Resolution { R360, R720, R1080, R1440 };

constexpr std::array<Resolution, 4> kAllResolutions = {
    Resolution::R360, Resolution::R720, Resolution::R1080, Resolution::R1440};

std::string_view resolution_name(Resolution r);  // "360p" ... "1440p"

/// The encoded renditions available to the ABR client, ordered by bitrate.
/// Exactly four rungs, one per KqiVector share, strictly increasing.
struct BitrateLadder {
    std::array<double, 4> bitrate_mbps = {1.0, 2.5, 5.0, 8.0};

    void validate() const;
    double bitrate(Resolution r) const {
        return bitrate_mbps[static_cast<int>(r)];
    }
    double top() const { return bitrate_mbps.back(); }
};

/// Per-segment record of a simulated playback.
struct SegmentRecord {
    int index = 0;
    Resolution selected = Resolution::R360;
    double download_time_s = 0.0;
    double buffer_level_s = 0.0;  ///< at segment completion, >= 0
};

struct PlaybackTrace {
    std::vector<SegmentRecord> segments;

    void validate() const;
};

/// Full oracle parameter set. Everything is overridable from the CLI
/// configuration file.
struct SimParams {
    std::vector<CellSite> cells;   ///< one per station
    ChannelParams channel;
    AbrParams abr;
    BitrateLadder ladder;
    double noise_sigma = 0.2;  ///< lognormal sigma of per-segment throughput

    /// Four stations spanning good to poor coverage; pairs with
    /// default_distances().
    static SimParams defaults();
    /// UE distance per default station, metres.
    static std::vector<double> default_distances();

    const CellSite& cell(int station_id) const;
    void validate() const;
};

/// SINR implied by an RSRP against the fixed noise floor.
double sinr_db(const RadioConditions& radio, const ChannelParams& channel);

/// Deterministic rsrq/rssi completion for a given rsrp with zero cell load.
/// Used wherever radio conditions are synthesized from an rsrp sweep.
RadioConditions derive_radio(double rsrp_dbm, const ChannelParams& channel);

/// Log-distance path loss with lognormal shadowing, clamped to the
/// RadioConditions ranges. Deterministic per (cell, distance, seed).
/// Throws std::invalid_argument for distance <= 0.
RadioConditions radio_conditions(const CellSite& cell, double distance_m,
                                 const ChannelParams& channel,
                                 std::uint64_t seed);

/// Capped-Shannon MAC throughput in Mbit/s; monotone nondecreasing in both
/// rsrp and bandwidth, strictly positive.
double link_throughput(const RadioConditions& radio, const SliceConfig& config,
                       const ChannelParams& channel);

/// Feature vector for a hypothetical (radio, config) pair with the KPI
/// entries recomputed through the deterministic link model (no noise).
FeatureVector features_for(const RadioConditions& radio,
                           const SliceConfig& config,
                           const ChannelParams& channel);

struct PlaybackResult {
    KpiVector kpi;
    KqiVector kqi;
    PlaybackTrace trace;
};

/// Segment-by-segment throughput-rule ABR playback. Deterministic per seed;
/// with noise_sigma == 0 the result is independent of the seed.
/// Throws std::invalid_argument for video_length_s <= 0.
PlaybackResult simulate_playback(const RadioConditions& radio,
                                 const SliceConfig& config,
                                 double video_length_s, const SimParams& params,
                                 std::uint64_t seed);

}  // namespace sliceq::netsim

#endif  // SLICEQ_NETSIM_HPP
