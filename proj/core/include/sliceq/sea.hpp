#ifndef SLICEQ_SEA_HPP
#define SLICEQ_SEA_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sliceq/netsim.hpp"
#include "sliceq/types.hpp"

namespace sliceq::sea {

/// A measurement campaign: every (station, config) pair runs
/// playbacks_per_config playbacks of video_length_s seconds, separated by
/// relaunch_gap_s, after a reconfig_time_s slice reconfiguration.
struct CampaignPlan {
    int stations = 4;                   ///< beta
    std::vector<SliceConfig> configs;   ///< gamma = configs.size()
    int playbacks_per_config = 50;      ///< n
    double video_length_s = 60.0;       ///< iota
    double relaunch_gap_s = 10.0;       ///< delta iota
    double reconfig_time_s = 30.0;      ///< tau
    std::vector<double> ue_distances_m; ///< one per station
    std::uint64_t seed = 42;

    void validate() const;

    /// The reference plan used throughout the documentation: 4 stations x
    /// 4 bandwidths x 50 playbacks = 800 rows.
    static CampaignPlan reference();
};

/// Estimated campaign duration
///   T = stations * configs * (n * (video + gap) + reconfig).
double campaign_duration(const CampaignPlan& plan);

/// Runs the full campaign against the synthetic oracle. Produces exactly
/// stations * configs * playbacks rows, ordered by (station, config,
/// repetition), with timestamps of sequential execution. Deterministic per
/// plan.seed.
Dataset execute_campaign(const CampaignPlan& plan,
                         const netsim::SimParams& sim);

/// Column header of the dataset CSV format.
extern const std::string kDatasetHeader;

/// Writes the dataset as CSV with round-trip-exact number formatting.
void save_dataset(const Dataset& rows, const std::filesystem::path& path);

/// Parses and validates a dataset CSV. Schema or invariant violations are
/// reported with the offending line number.
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace sliceq::sea

#endif  // SLICEQ_SEA_HPP
