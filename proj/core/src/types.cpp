#include "sliceq/types.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sliceq {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void KqiVector::validate() const {
    require(finite(initial_time) && initial_time >= 0.0,
            "KqiVector: initial_time must be finite and >= 0");
    require(finite(avg_throughput) && avg_throughput >= 0.0,
            "KqiVector: avg_throughput must be finite and >= 0");
    const std::array<double, 4> shares = {share_q360, share_q720, share_q1080,
                                          share_q1440};
    double sum = 0.0;
    for (double s : shares) {
        require(finite(s) && s >= 0.0 && s <= 1.0,
                "KqiVector: quality shares must be fractions in [0,1]");
        sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "KqiVector: quality shares must sum to 1 (got " << sum << ")";
        throw std::invalid_argument(os.str());
    }
    require(stall_count >= 0, "KqiVector: stall_count must be >= 0");
    require(finite(stall_time) && stall_time >= 0.0,
            "KqiVector: stall_time must be finite and >= 0");
}

void RadioConditions::validate() const {
    require(finite(rsrp) && rsrp >= kRsrpMin && rsrp <= kRsrpMax,
            "RadioConditions: rsrp out of [-140,-44] dBm");
    require(finite(rsrq) && rsrq >= kRsrqMin && rsrq <= kRsrqMax,
            "RadioConditions: rsrq out of [-24,-3] dB");
    require(finite(rssi) && rssi >= kRssiMin && rssi <= kRssiMax,
            "RadioConditions: rssi out of [-120,-20] dBm");
}

int prb_for_bandwidth(double bandwidth_mhz) {
    struct Entry {
        double mhz;
        int prb;
    };
    // 3GPP TS 36.101 channel bandwidths.
    static constexpr std::array<Entry, 6> kTable = {{
        {1.4, 6}, {3.0, 15}, {5.0, 25}, {10.0, 50}, {15.0, 75}, {20.0, 100},
    }};
    for (const auto& e : kTable) {
        if (std::abs(bandwidth_mhz - e.mhz) < 1e-9) return e.prb;
    }
    std::ostringstream os;
    os << "SliceConfig: bandwidth " << bandwidth_mhz
       << " MHz is not one of {1.4, 3, 5, 10, 15, 20}";
    throw std::invalid_argument(os.str());
}

SliceConfig SliceConfig::make(int config_id, double bandwidth_mhz) {
    SliceConfig c;
    c.config_id = config_id;
    c.bandwidth_mhz = bandwidth_mhz;
    c.prb_count = prb_for_bandwidth(bandwidth_mhz);
    return c;
}

void SliceConfig::validate() const {
    const int expected = prb_for_bandwidth(bandwidth_mhz);
    if (prb_count != expected) {
        std::ostringstream os;
        os << "SliceConfig: prb_count " << prb_count << " does not match "
           << bandwidth_mhz << " MHz (expected " << expected << ")";
        throw std::invalid_argument(os.str());
    }
}

void KpiVector::validate() const {
    require(finite(mac_throughput) && mac_throughput >= 0.0,
            "KpiVector: mac_throughput must be finite and >= 0");
    require(finite(sinr), "KpiVector: sinr must be finite");
}

void TrainingRow::validate() const {
    config.validate();
    radio.validate();
    kpi.validate();
    kqi.validate();
    require(finite(timestamp) && timestamp >= 0.0,
            "TrainingRow: timestamp must be finite and >= 0");
}

std::string_view kqi_name(KqiId id) {
    switch (id) {
        case KqiId::InitialTime: return "init_time_s";
        case KqiId::AvgThroughput: return "avg_tput_mbps";
        case KqiId::ShareQ360: return "share_q360";
        case KqiId::ShareQ720: return "share_q720";
        case KqiId::ShareQ1080: return "share_q1080";
        case KqiId::ShareQ1440: return "share_q1440";
    }
    throw std::invalid_argument("kqi_name: unknown KqiId");
}

std::optional<KqiId> kqi_from_name(std::string_view name) {
    for (KqiId id : kAllKqis) {
        if (kqi_name(id) == name) return id;
    }
    return std::nullopt;
}

double kqi_value(const KqiVector& kqi, KqiId id) {
    switch (id) {
        case KqiId::InitialTime: return kqi.initial_time;
        case KqiId::AvgThroughput: return kqi.avg_throughput;
        case KqiId::ShareQ360: return kqi.share_q360;
        case KqiId::ShareQ720: return kqi.share_q720;
        case KqiId::ShareQ1080: return kqi.share_q1080;
        case KqiId::ShareQ1440: return kqi.share_q1440;
    }
    throw std::invalid_argument("kqi_value: unknown KqiId");
}

KqiRange kqi_range(KqiId id) {
    switch (id) {
        case KqiId::InitialTime:
        case KqiId::AvgThroughput:
            return {0.0, std::numeric_limits<double>::infinity()};
        default:
            return {0.0, 1.0};
    }
}

double clamp_to_range(double value, KqiId id) {
    const KqiRange r = kqi_range(id);
    if (value < r.lo) return r.lo;
    if (value > r.hi) return r.hi;
    return value;
}

std::string_view comparator_name(Comparator cmp) {
    return cmp == Comparator::GreaterEqual ? ">=" : "<=";
}

std::optional<Comparator> comparator_from_name(std::string_view name) {
    if (name == ">=") return Comparator::GreaterEqual;
    if (name == "<=") return Comparator::LessEqual;
    return std::nullopt;
}

bool satisfies(double value, Comparator cmp, double bound) {
    return cmp == Comparator::GreaterEqual ? value >= bound : value <= bound;
}

const std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "rsrp_dbm", "rsrq_db", "rssi_dbm", "sinr_db", "mac_tput_mbps",
    "bandwidth_mhz",
};

FeatureVector feature_vector(const RadioConditions& radio, const KpiVector& kpi,
                             const SliceConfig& config) {
    return {radio.rsrp,          radio.rsrq, radio.rssi,
            kpi.sinr,            kpi.mac_throughput,
            config.bandwidth_mhz};
}

FeatureVector feature_vector(const TrainingRow& row) {
    return feature_vector(row.radio, row.kpi, row.config);
}

}  // namespace sliceq
