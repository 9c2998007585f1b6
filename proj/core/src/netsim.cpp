#include "sliceq/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sliceq/rng.hpp"

namespace sliceq::netsim {

namespace {

double clamp(double v, double lo, double hi) {
    return std::min(std::max(v, lo), hi);
}

// Wideband offset between the per-RE reference-signal power and the total
// received power measured by RSSI.
constexpr double kRssiOffsetDb = 20.0;

// Nominal resource-block count entering the RSRQ ratio.
const double kRsrqPrbTermDb = 10.0 * std::log10(50.0);

RadioConditions complete_radio(double rsrp_dbm, double load_db) {
    RadioConditions r;
    r.rsrp = clamp(rsrp_dbm, kRsrpMin, kRsrpMax);
    r.rssi = clamp(r.rsrp + kRssiOffsetDb + load_db, kRssiMin, kRssiMax);
    r.rsrq = clamp(kRsrqPrbTermDb + r.rsrp - r.rssi, kRsrqMin, kRsrqMax);
    return r;
}

}  // namespace

void CellSite::validate() const {
    if (!(pathloss_exponent >= 2.0 && pathloss_exponent <= 5.0)) {
        throw std::invalid_argument(
            "CellSite: pathloss_exponent must be in [2,5]");
    }
    if (!(shadowing_sigma_db >= 0.0)) {
        throw std::invalid_argument("CellSite: shadowing_sigma_db must be >= 0");
    }
}

std::string_view resolution_name(Resolution r) {
    switch (r) {
        case Resolution::R360: return "360p";
        case Resolution::R720: return "720p";
        case Resolution::R1080: return "1080p";
        case Resolution::R1440: return "1440p";
    }
    throw std::invalid_argument("resolution_name: unknown resolution");
}

void BitrateLadder::validate() const {
    for (std::size_t i = 0; i < bitrate_mbps.size(); ++i) {
        if (!(bitrate_mbps[i] > 0.0)) {
            throw std::invalid_argument("BitrateLadder: bitrates must be > 0");
        }
        if (i > 0 && !(bitrate_mbps[i] > bitrate_mbps[i - 1])) {
            throw std::invalid_argument(
                "BitrateLadder: bitrates must be strictly increasing");
        }
    }
}

void PlaybackTrace::validate() const {
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].index != static_cast<int>(i)) {
            throw std::invalid_argument(
                "PlaybackTrace: segment indices must be contiguous from 0");
        }
        if (segments[i].buffer_level_s < 0.0) {
            throw std::invalid_argument(
                "PlaybackTrace: buffer level must be >= 0");
        }
    }
}

SimParams SimParams::defaults() {
    SimParams p;
    p.cells = {
        {0, 30.0, 3.0, 3.0},
        {1, 30.0, 3.2, 3.0},
        {2, 30.0, 3.4, 3.0},
        {3, 30.0, 3.6, 3.0},
    };
    return p;
}

std::vector<double> SimParams::default_distances() {
    return {350.0, 480.0, 570.0, 680.0};
}

const CellSite& SimParams::cell(int station_id) const {
    for (const auto& c : cells) {
        if (c.station_id == station_id) return c;
    }
    throw std::invalid_argument("SimParams: unknown station_id " +
                                std::to_string(station_id));
}

void SimParams::validate() const {
    if (cells.empty()) {
        throw std::invalid_argument("SimParams: at least one cell required");
    }
    for (const auto& c : cells) c.validate();
    ladder.validate();
    if (!(noise_sigma >= 0.0)) {
        throw std::invalid_argument("SimParams: noise_sigma must be >= 0");
    }
    if (!(abr.safety > 0.0 && abr.safety <= 1.0)) {
        throw std::invalid_argument("SimParams: abr.safety must be in (0,1]");
    }
    if (!(abr.segment_s > 0.0)) {
        throw std::invalid_argument("SimParams: abr.segment_s must be > 0");
    }
}

double sinr_db(const RadioConditions& radio, const ChannelParams& channel) {
    return radio.rsrp - channel.noise_floor_dbm;
}

RadioConditions derive_radio(double rsrp_dbm, const ChannelParams&) {
    return complete_radio(rsrp_dbm, 0.0);
}

RadioConditions radio_conditions(const CellSite& cell, double distance_m,
                                 const ChannelParams& channel,
                                 std::uint64_t seed) {
    if (!(distance_m > 0.0)) {
        throw std::invalid_argument("radio_conditions: distance must be > 0");
    }
    cell.validate();

    const double pathloss_db =
        channel.reference_loss_db +
        10.0 * cell.pathloss_exponent *
            std::log10(distance_m / channel.reference_distance_m);

    NormalDraw draw{std::mt19937_64{mix_seed(seed, 0x5e4d)}};
    double shadow_db = 0.0;
    if (cell.shadowing_sigma_db > 0.0) {
        shadow_db = cell.shadowing_sigma_db * draw.next();
    }
    const double load_db = channel.load_max_db * draw.uniform();

    return complete_radio(cell.tx_power_dbm - pathloss_db - shadow_db, load_db);
}

double link_throughput(const RadioConditions& radio, const SliceConfig& config,
                       const ChannelParams& channel) {
    const double sinr_linear =
        std::pow(10.0, sinr_db(radio, channel) / 10.0);
    const double efficiency = std::min(std::log2(1.0 + sinr_linear),
                                       channel.efficiency_cap_bps_hz);
    // MHz * bit/s/Hz == Mbit/s.
    return config.bandwidth_mhz * efficiency * channel.overhead_factor;
}

FeatureVector features_for(const RadioConditions& radio,
                           const SliceConfig& config,
                           const ChannelParams& channel) {
    KpiVector kpi;
    kpi.sinr = sinr_db(radio, channel);
    kpi.mac_throughput = link_throughput(radio, config, channel);
    return feature_vector(radio, kpi, config);
}

PlaybackResult simulate_playback(const RadioConditions& radio,
                                 const SliceConfig& config,
                                 double video_length_s, const SimParams& params,
                                 std::uint64_t seed) {
    if (!(video_length_s > 0.0)) {
        throw std::invalid_argument(
            "simulate_playback: video length must be > 0");
    }
    radio.validate();
    config.validate();
    params.ladder.validate();

    const AbrParams& abr = params.abr;
    const double base_tput =
        link_throughput(radio, config, params.channel);
    const int n_segments = static_cast<int>(
        std::ceil(video_length_s / abr.segment_s));

    NormalDraw draw{std::mt19937_64{mix_seed(seed, 0xab12)}};
    const double sigma = params.noise_sigma;

    // Per-segment link capacity: base throughput with mean-one lognormal
    // noise. sigma == 0 gives the exact deterministic link value.
    std::vector<double> capacity(n_segments);
    for (int i = 0; i < n_segments; ++i) {
        double noise = 1.0;
        if (sigma > 0.0) {
            noise = std::exp(sigma * draw.next() - 0.5 * sigma * sigma);
        }
        capacity[i] = base_tput * noise;
    }

    auto pick_rung = [&](double estimate) {
        const double budget = abr.safety * estimate;
        Resolution best = Resolution::R360;
        for (Resolution r : kAllResolutions) {
            if (params.ladder.bitrate(r) <= budget) best = r;
        }
        return best;
    };

    PlaybackResult out;
    out.trace.segments.reserve(n_segments);

    std::array<int, 4> counts = {0, 0, 0, 0};
    double goodput_sum = 0.0;
    double buffer = 0.0;
    int stall_count = 0;
    double stall_time = 0.0;
    double initial_time = 0.0;

    for (int i = 0; i < n_segments; ++i) {
        // Throughput rule: the estimate is the previously measured segment
        // capacity; the first segment is chosen from its own measurement
        // (startup probe).
        const double estimate = (i == 0) ? capacity[0] : capacity[i - 1];
        const Resolution sel = pick_rung(estimate);
        const double bitrate = params.ladder.bitrate(sel);
        const double dt = abr.segment_s * bitrate / capacity[i];

        if (i == 0) {
            initial_time = dt;
            buffer = abr.segment_s;
        } else if (dt > buffer) {
            // Buffer ran dry mid-download: the image freezes.
            stall_time += dt - buffer;
            stall_count += 1;
            buffer = abr.segment_s;
        } else {
            buffer = buffer - dt + abr.segment_s;
        }

        counts[static_cast<int>(sel)] += 1;
        goodput_sum += bitrate;
        out.trace.segments.push_back({i, sel, dt, buffer});

        // Client idles while the buffer is above target; it drains back to
        // the target level before the next request.
        if (buffer > abr.buffer_target_s) buffer = abr.buffer_target_s;
    }

    const auto n = static_cast<double>(n_segments);
    out.kqi.initial_time = initial_time;
    out.kqi.avg_throughput = goodput_sum / n;
    out.kqi.share_q360 = counts[0] / n;
    out.kqi.share_q720 = counts[1] / n;
    out.kqi.share_q1080 = counts[2] / n;
    out.kqi.share_q1440 = counts[3] / n;
    out.kqi.stall_count = stall_count;
    out.kqi.stall_time = stall_time;

    double cap_sum = 0.0;
    for (double c : capacity) cap_sum += c;
    out.kpi.mac_throughput = cap_sum / n;
    out.kpi.sinr = sinr_db(radio, params.channel);

    out.kqi.validate();
    out.kpi.validate();
    out.trace.validate();
    return out;
}

}  // namespace sliceq::netsim
