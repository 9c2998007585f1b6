#ifndef SLICEQ_DYSA_HPP
#define SLICEQ_DYSA_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "sliceq/modsys.hpp"
#include "sliceq/netsim.hpp"
#include "sliceq/types.hpp"

namespace sliceq::dysa {

/// One KQI target agreed for the lifetime of the slice.
struct KqiTarget {
    KqiId kqi = KqiId::AvgThroughput;
    Comparator cmp = Comparator::GreaterEqual;
    double bound = 0.0;

    void validate() const;
};

/// Per-KQI security margin, applied toward strictness: subtracted from
/// estimates checked against >= targets, added for <= targets. A KQI with
/// no entry gets margin 0.
struct SecurityMargin {
    std::map<KqiId, double> alpha;

    double get(KqiId id) const;
    void validate() const;

    /// Collects the calibrated margins stored in a registry (non-finite
    /// entries are skipped).
    static SecurityMargin from_registry(const modsys::ModelRegistry& registry);
};

/// Security margin as the nearest-rank percentile of |actual - predicted|
/// over validation rows for the model's target: the order statistic at
/// zero-based index ceil((n-1) * percentile).
/// Throws std::invalid_argument on empty rows, percentile outside the open
/// interval (0,1), or a model without a KQI target.
double alpha_from_training(const modsys::TrainedModel& model,
                           const Dataset& validation_rows, double percentile);

/// Margin-adjusted threshold: estimate - alpha for >= targets,
/// estimate + alpha for <= targets.
double threshold(double estimate, const KqiTarget& target,
                 const SecurityMargin& margin);

/// True when the margin-adjusted threshold satisfies the target bound.
bool threshold_compliant(double rho, const KqiTarget& target);

/// Among catalog configs whose every target is margin-compliant, picks the
/// one minimizing total absolute slack sum |rho - bound| (ties to the
/// smaller bandwidth); nullopt when none complies.
std::optional<SliceConfig> select_config(
    const std::vector<KqiTarget>& targets, const RadioConditions& radio,
    const modsys::ModelRegistry& registry,
    const std::vector<SliceConfig>& catalog, const SecurityMargin& margin,
    const netsim::ChannelParams& channel);

struct MonitorParams {
    double reconfig_time_s = 30.0;  ///< tau
    int hysteresis = 3;             ///< samples before a switch is committed
};

struct TimelineSample {
    double time_s = 0.0;
    RadioConditions radio;
    std::optional<SliceConfig> config;  ///< committed allocation, if any
    std::vector<double> rho;            ///< per target, NaN without a config
    bool compliant = false;
    bool reconfig_event = false;
};

struct ReconfigEvent {
    double time_s = 0.0;
    std::optional<SliceConfig> from;
    std::optional<SliceConfig> to;
    double duration_s = 0.0;  ///< tau of non-compliant time
};

struct AllocationTimeline {
    std::vector<TimelineSample> samples;
    std::vector<ReconfigEvent> events;
};

/// Replays a radio trace through select_config. The initial allocation is
/// immediate; later changes are committed only after the new choice
/// persists for `hysteresis` consecutive samples, and each committed
/// reconfiguration marks `reconfig_time_s` of the timeline non-compliant.
/// Deterministic; output times equal the trace times.
/// Throws std::invalid_argument on an empty or non-increasing trace.
AllocationTimeline run_monitor(
    const std::vector<std::pair<double, RadioConditions>>& radio_trace,
    const std::vector<KqiTarget>& targets,
    const modsys::ModelRegistry& registry,
    const std::vector<SliceConfig>& catalog, const SecurityMargin& margin,
    const MonitorParams& params, const netsim::ChannelParams& channel);

/// Radio trace CSV: header `time_s,rsrp_dbm,rsrq_db,rssi_dbm`, times
/// strictly increasing. Violations are reported with their line number.
std::vector<std::pair<double, RadioConditions>> load_radio_trace(
    const std::filesystem::path& path);
void save_radio_trace(
    const std::vector<std::pair<double, RadioConditions>>& trace,
    const std::filesystem::path& path);

/// Timeline CSV: `time_s,rsrp_dbm,rsrq_db,rssi_dbm,config_id,bandwidth_mhz,
/// compliant,reconfig` plus one `rho_<kqi>` column per target (config_id -1
/// and bandwidth 0 while unallocated).
void save_timeline(const AllocationTimeline& timeline,
                   const std::vector<KqiTarget>& targets,
                   const std::filesystem::path& path);

}  // namespace sliceq::dysa

#endif  // SLICEQ_DYSA_HPP
