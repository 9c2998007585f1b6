#ifndef SLICEQ_TYPES_HPP
#define SLICEQ_TYPES_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sliceq {

/// Application-layer video service quality indicators for one playback.
/// Quality shares are fractions in [0,1] and must sum to 1; percentages
/// appear only at I/O boundaries.
struct KqiVector {
    double initial_time = 0.0;    ///< s, time to first frame
    double avg_throughput = 0.0;  ///< Mbit/s, mean per-segment goodput
    double share_q360 = 0.0;
    double share_q720 = 0.0;
    double share_q1080 = 0.0;
    double share_q1440 = 0.0;
    int stall_count = 0;
    double stall_time = 0.0;  ///< s, total time with a frozen image

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;
};

/// Radio conditions measured at the UE.
struct RadioConditions {
    double rsrp = -100.0;  ///< dBm, in [-140, -44]
    double rsrq = -10.0;   ///< dB,  in [-24, -3]
    double rssi = -80.0;   ///< dBm, in [-120, -20]

    void validate() const;
};

constexpr double kRsrpMin = -140.0, kRsrpMax = -44.0;
constexpr double kRsrqMin = -24.0, kRsrqMax = -3.0;
constexpr double kRssiMin = -120.0, kRssiMax = -20.0;

/// Slice configuration-management knob: the radio bandwidth of the slice.
/// prb_count is a fixed table lookup of the bandwidth, never set directly.
struct SliceConfig {
    int config_id = 0;
    double bandwidth_mhz = 10.0;
    int prb_count = 50;

    /// Builds a config with prb_count resolved from the bandwidth table.
    /// Throws std::invalid_argument for bandwidths outside the table.
    static SliceConfig make(int config_id, double bandwidth_mhz);

    void validate() const;
};

/// PRB count for a standard LTE channel bandwidth {1.4,3,5,10,15,20} MHz.
int prb_for_bandwidth(double bandwidth_mhz);

/// Low-layer network performance indicators for one playback.
struct KpiVector {
    double mac_throughput = 0.0;  ///< Mbit/s, >= 0
    double sinr = 0.0;            ///< dB

    void validate() const;
};

/// One playback record of the training database.
struct TrainingRow {
    int station_id = 0;
    SliceConfig config;
    RadioConditions radio;
    KpiVector kpi;
    KqiVector kqi;
    double timestamp = 0.0;  ///< s since campaign start

    void validate() const;
};

using Dataset = std::vector<TrainingRow>;

/// The six KQIs that get an estimator each. Stall statistics are carried
/// in the data model but are not estimation targets.
enum class KqiId {
    InitialTime,
    AvgThroughput,
    ShareQ360,
    ShareQ720,
    ShareQ1080,
    ShareQ1440,
};

constexpr std::array<KqiId, 6> kAllKqis = {
    KqiId::InitialTime,  KqiId::AvgThroughput, KqiId::ShareQ360,
    KqiId::ShareQ720,    KqiId::ShareQ1080,    KqiId::ShareQ1440,
};

/// Canonical name, identical to the dataset CSV column of the KQI.
std::string_view kqi_name(KqiId id);
std::optional<KqiId> kqi_from_name(std::string_view name);

/// Reads the named KQI out of a vector.
double kqi_value(const KqiVector& kqi, KqiId id);

/// Physical range of a KQI; hi is +inf for unbounded-above targets.
struct KqiRange {
    double lo;
    double hi;
};
KqiRange kqi_range(KqiId id);

/// Clamps a raw estimate to the physical range of its target.
double clamp_to_range(double value, KqiId id);

/// Requirement/target comparison direction.
enum class Comparator { GreaterEqual, LessEqual };

std::string_view comparator_name(Comparator cmp);  // ">=" or "<="
std::optional<Comparator> comparator_from_name(std::string_view name);

/// True when `value` satisfies `cmp` against `bound`.
bool satisfies(double value, Comparator cmp, double bound);

// ---------------------------------------------------------------------------
// Feature assembly.
//
// Fixed order: [rsrp_dbm, rsrq_db, rssi_dbm, sinr_db, mac_tput_mbps,
// bandwidth_mhz]. config_id and station_id are deliberately excluded; the
// bandwidth is the informative configuration knob.
// ---------------------------------------------------------------------------

constexpr int kFeatureCount = 6;
using FeatureVector = std::array<double, kFeatureCount>;

extern const std::array<std::string_view, kFeatureCount> kFeatureNames;

FeatureVector feature_vector(const RadioConditions& radio, const KpiVector& kpi,
                             const SliceConfig& config);
FeatureVector feature_vector(const TrainingRow& row);

}  // namespace sliceq

#endif  // SLICEQ_TYPES_HPP
