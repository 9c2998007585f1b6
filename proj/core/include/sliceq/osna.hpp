#ifndef SLICEQ_OSNA_HPP
#define SLICEQ_OSNA_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sliceq/modsys.hpp"
#include "sliceq/netsim.hpp"
#include "sliceq/types.hpp"

namespace sliceq::osna {

/// One KQI requirement of a vertical: the KQI must satisfy the bound in
/// radio scenarios of total weight >= required_fraction.
struct Requirement {
    KqiId kqi = KqiId::AvgThroughput;
    Comparator cmp = Comparator::GreaterEqual;
    double bound = 0.0;
    double required_fraction = 1.0;  ///< of time, in (0,1]
};

/// Expected radio conditions as a discrete weighted scenario set.
struct RadioScenario {
    RadioConditions radio;
    double weight = 1.0;
};

struct SliceRequest {
    std::vector<Requirement> requirements;
    double duration_hours = 24.0;
    std::vector<RadioScenario> scenarios;

    void validate() const;
};

struct Offer {
    SliceConfig config;
    double price = 0.0;
    /// Per scenario, the predicted value of every requested KQI.
    std::vector<std::map<KqiId, double>> predicted_kqis;
    bool compliant = false;
};

struct PricingParams {
    double base_rate = 1.0;  ///< currency per MHz-hour
};

/// price = base_rate * bandwidth_MHz * duration_hours.
/// Throws std::invalid_argument for nonpositive duration.
double price(const SliceConfig& config, double duration_hours,
             const PricingParams& pricing);

/// Predicts every requested KQI for each radio scenario (KPI features
/// recomputed through the deterministic link model) and aggregates
/// per-requirement satisfaction by scenario weight. The returned offer has
/// no price. Throws if the registry lacks a requested KQI.
Offer evaluate_config(const SliceConfig& config, const SliceRequest& request,
                      const modsys::ModelRegistry& registry,
                      const netsim::ChannelParams& channel);

/// Cheapest compliant catalog config (ties to the smaller bandwidth), with
/// price filled in; nullopt when nothing in the catalog is compliant.
std::optional<Offer> best_offer(const SliceRequest& request,
                                const modsys::ModelRegistry& registry,
                                const std::vector<SliceConfig>& catalog,
                                const netsim::ChannelParams& channel,
                                const PricingParams& pricing);

/// One concession step of the vertical: either relax the bound of the first
/// requirement on `relax_kqi` by `bound_step` (toward less strict, clamped
/// to the KQI range) or shorten the demand by `shorten_hours`.
struct Concession {
    std::optional<KqiId> relax_kqi;
    double bound_step = 0.0;
    double shorten_hours = 0.0;
};

/// Deterministic vertical agent: a budget plus an ordered concession queue.
struct VerticalPolicy {
    double budget = 0.0;
    std::vector<Concession> concessions;
    double min_duration_hours = 1.0;
};

enum class Outcome { Agreed, Failed };

struct NegotiationRound {
    int round = 0;
    std::optional<Offer> offer;  ///< operator quote, if any config complied
    std::string note;            ///< decision or concession description
};

struct NegotiationLog {
    std::vector<NegotiationRound> rounds;
    Outcome state = Outcome::Failed;
    std::optional<Offer> final_offer;
    SliceRequest final_request;  ///< request as of termination
};

/// Iterative concession protocol: the operator quotes its cheapest
/// compliant offer; the vertical accepts anything within budget, otherwise
/// concedes per policy. Terminates at agreement, policy exhaustion or
/// max_rounds. Throws std::invalid_argument for max_rounds < 1.
NegotiationLog negotiate(const VerticalPolicy& policy, SliceRequest request,
                         const modsys::ModelRegistry& registry,
                         const std::vector<SliceConfig>& catalog,
                         const netsim::ChannelParams& channel,
                         const PricingParams& pricing, int max_rounds);

/// A negotiation input file: the request plus the vertical policy.
struct NegotiationCase {
    SliceRequest request;
    VerticalPolicy policy;
    int max_rounds = 16;
};

/// Strict JSON I/O (unknown keys rejected with the offending key path).
NegotiationCase load_request(const std::filesystem::path& path);
void save_request(const NegotiationCase& c, const std::filesystem::path& path);
void save_log(const NegotiationLog& log, const std::filesystem::path& path);

}  // namespace sliceq::osna

#endif  // SLICEQ_OSNA_HPP
