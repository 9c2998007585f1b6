#include "sliceq/osna.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "csv_util.hpp"
#include "json_util.hpp"

namespace sliceq::osna {

namespace {

using detail::expect_keys;
using detail::format_double;
using detail::require_number;
using detail::require_string;
using nlohmann::json;

constexpr double kWeightTol = 1e-9;
constexpr double kFractionTol = 1e-12;

}  // namespace

void SliceRequest::validate() const {
    if (requirements.empty()) {
        throw std::invalid_argument("SliceRequest: no requirements");
    }
    for (const auto& r : requirements) {
        const KqiRange range = kqi_range(r.kqi);
        if (!(std::isfinite(r.bound) && r.bound >= range.lo &&
              r.bound <= range.hi)) {
            std::ostringstream os;
            os << "SliceRequest: bound " << r.bound << " for "
               << kqi_name(r.kqi) << " outside its physical range";
            throw std::invalid_argument(os.str());
        }
        if (!(r.required_fraction > 0.0 && r.required_fraction <= 1.0)) {
            throw std::invalid_argument(
                "SliceRequest: required_fraction must be in (0,1]");
        }
    }
    if (!(duration_hours > 0.0)) {
        throw std::invalid_argument("SliceRequest: duration must be > 0");
    }
    if (scenarios.empty()) {
        throw std::invalid_argument("SliceRequest: no radio scenarios");
    }
    double weight_sum = 0.0;
    for (const auto& s : scenarios) {
        s.radio.validate();
        if (!(s.weight >= 0.0)) {
            throw std::invalid_argument(
                "SliceRequest: scenario weights must be >= 0");
        }
        weight_sum += s.weight;
    }
    if (std::abs(weight_sum - 1.0) > kWeightTol) {
        throw std::invalid_argument(
            "SliceRequest: scenario weights must sum to 1");
    }
}

double price(const SliceConfig& config, double duration_hours,
             const PricingParams& pricing) {
    if (!(duration_hours > 0.0)) {
        throw std::invalid_argument("price: duration must be > 0");
    }
    return pricing.base_rate * config.bandwidth_mhz * duration_hours;
}

Offer evaluate_config(const SliceConfig& config, const SliceRequest& request,
                      const modsys::ModelRegistry& registry,
                      const netsim::ChannelParams& channel) {
    request.validate();
    for (const auto& r : request.requirements) {
        if (!registry.has(r.kqi)) {
            throw std::invalid_argument(
                "evaluate_config: registry has no model for " +
                std::string(kqi_name(r.kqi)));
        }
    }

    Offer offer;
    offer.config = config;
    offer.predicted_kqis.reserve(request.scenarios.size());

    std::vector<double> satisfied_weight(request.requirements.size(), 0.0);
    for (const auto& scenario : request.scenarios) {
        const FeatureVector features =
            netsim::features_for(scenario.radio, config, channel);
        std::map<KqiId, double> predicted;
        for (std::size_t i = 0; i < request.requirements.size(); ++i) {
            const Requirement& r = request.requirements[i];
            auto it = predicted.find(r.kqi);
            if (it == predicted.end()) {
                const double value =
                    modsys::predict(registry.at(r.kqi).model, features);
                it = predicted.emplace(r.kqi, value).first;
            }
            if (satisfies(it->second, r.cmp, r.bound)) {
                satisfied_weight[i] += scenario.weight;
            }
        }
        offer.predicted_kqis.push_back(std::move(predicted));
    }

    offer.compliant = true;
    for (std::size_t i = 0; i < request.requirements.size(); ++i) {
        if (satisfied_weight[i] <
            request.requirements[i].required_fraction - kFractionTol) {
            offer.compliant = false;
            break;
        }
    }
    return offer;
}

std::optional<Offer> best_offer(const SliceRequest& request,
                                const modsys::ModelRegistry& registry,
                                const std::vector<SliceConfig>& catalog,
                                const netsim::ChannelParams& channel,
                                const PricingParams& pricing) {
    if (catalog.empty()) {
        throw std::invalid_argument("best_offer: empty catalog");
    }
    std::optional<Offer> best;
    for (const SliceConfig& config : catalog) {
        Offer offer = evaluate_config(config, request, registry, channel);
        if (!offer.compliant) continue;
        offer.price = price(config, request.duration_hours, pricing);
        const bool better =
            !best || offer.price < best->price ||
            (offer.price == best->price &&
             offer.config.bandwidth_mhz < best->config.bandwidth_mhz);
        if (better) best = std::move(offer);
    }
    return best;
}

namespace {

// Applies the next applicable concession from the queue; advances `next`.
// Returns a description, or nullopt when the queue is exhausted.
std::optional<std::string> apply_concession(const VerticalPolicy& policy,
                                            std::size_t& next,
                                            SliceRequest& request) {
    while (next < policy.concessions.size()) {
        const Concession& c = policy.concessions[next];
        ++next;
        if (c.relax_kqi) {
            for (auto& r : request.requirements) {
                if (r.kqi != *c.relax_kqi) continue;
                const KqiRange range = kqi_range(r.kqi);
                const double relaxed =
                    r.cmp == Comparator::GreaterEqual
                        ? std::max(range.lo, r.bound - c.bound_step)
                        : std::min(range.hi, r.bound + c.bound_step);
                if (relaxed == r.bound) break;  // already maximally relaxed
                r.bound = relaxed;
                return "relaxed " + std::string(kqi_name(r.kqi)) +
                       " bound to " + format_double(relaxed);
            }
        } else if (c.shorten_hours > 0.0) {
            const double shortened =
                std::max(policy.min_duration_hours,
                         request.duration_hours - c.shorten_hours);
            if (shortened < request.duration_hours) {
                request.duration_hours = shortened;
                return "shortened duration to " + format_double(shortened) +
                       " h";
            }
        }
    }
    return std::nullopt;
}

}  // namespace

NegotiationLog negotiate(const VerticalPolicy& policy, SliceRequest request,
                         const modsys::ModelRegistry& registry,
                         const std::vector<SliceConfig>& catalog,
                         const netsim::ChannelParams& channel,
                         const PricingParams& pricing, int max_rounds) {
    if (max_rounds < 1) {
        throw std::invalid_argument("negotiate: max_rounds must be >= 1");
    }
    request.validate();

    NegotiationLog log;
    std::size_t next_concession = 0;

    for (int round = 1; round <= max_rounds; ++round) {
        NegotiationRound entry;
        entry.round = round;

        std::optional<Offer> offer =
            best_offer(request, registry, catalog, channel, pricing);
        const bool affordable = offer && offer->price <= policy.budget;
        if (affordable) {
            entry.offer = offer;
            entry.note = "accepted";
            log.rounds.push_back(std::move(entry));
            log.state = Outcome::Agreed;
            log.final_offer = std::move(offer);
            log.final_request = std::move(request);
            return log;
        }

        std::string reason =
            offer ? "price " + format_double(offer->price) + " above budget " +
                        format_double(policy.budget)
                  : "no compliant configuration";
        entry.offer = std::move(offer);

        const auto concession =
            apply_concession(policy, next_concession, request);
        if (!concession) {
            entry.note = reason + "; vertical refuses to concede";
            log.rounds.push_back(std::move(entry));
            break;
        }
        entry.note = reason + "; " + *concession;
        log.rounds.push_back(std::move(entry));
    }

    log.state = Outcome::Failed;
    log.final_offer.reset();
    log.final_request = std::move(request);
    return log;
}

// ---------------------------------------------------------------------------
// JSON I/O.
// ---------------------------------------------------------------------------

namespace {

json offer_to_json(const Offer& offer) {
    json j;
    j["config_id"] = offer.config.config_id;
    j["bandwidth_mhz"] = offer.config.bandwidth_mhz;
    j["price"] = offer.price;
    j["compliant"] = offer.compliant;
    json scenarios = json::array();
    for (const auto& predicted : offer.predicted_kqis) {
        json jp;
        for (const auto& [kqi, value] : predicted) {
            jp[std::string(kqi_name(kqi))] = value;
        }
        scenarios.push_back(std::move(jp));
    }
    j["predicted"] = std::move(scenarios);
    return j;
}

json request_to_json(const SliceRequest& request) {
    json j;
    json reqs = json::array();
    for (const auto& r : request.requirements) {
        reqs.push_back({{"kqi", std::string(kqi_name(r.kqi))},
                        {"op", std::string(comparator_name(r.cmp))},
                        {"bound", r.bound},
                        {"fraction", r.required_fraction}});
    }
    j["requirements"] = std::move(reqs);
    j["duration_hours"] = request.duration_hours;
    json scenarios = json::array();
    for (const auto& s : request.scenarios) {
        scenarios.push_back({{"rsrp_dbm", s.radio.rsrp},
                             {"rsrq_db", s.radio.rsrq},
                             {"rssi_dbm", s.radio.rssi},
                             {"weight", s.weight}});
    }
    j["scenarios"] = std::move(scenarios);
    return j;
}

SliceRequest request_from_json(const json& j, const std::string& context) {
    expect_keys(j,
                {"schema", "requirements", "duration_hours", "scenarios",
                 "budget", "concessions", "min_duration_hours", "max_rounds"},
                context);
    SliceRequest request;
    if (!j.contains("requirements") || !j.at("requirements").is_array()) {
        throw std::runtime_error(context +
                                 ": 'requirements' must be an array");
    }
    int i = 0;
    for (const json& jr : j.at("requirements")) {
        const std::string rctx =
            context + ".requirements[" + std::to_string(i++) + "]";
        expect_keys(jr, {"kqi", "op", "bound", "fraction"}, rctx);
        Requirement r;
        const std::string kqi = require_string(jr, "kqi", rctx);
        const auto id = kqi_from_name(kqi);
        if (!id) {
            throw std::runtime_error(rctx + ": unknown KQI '" + kqi + "'");
        }
        r.kqi = *id;
        const std::string op = require_string(jr, "op", rctx);
        const auto cmp = comparator_from_name(op);
        if (!cmp) {
            throw std::runtime_error(rctx + ": op must be '>=' or '<='");
        }
        r.cmp = *cmp;
        r.bound = require_number(jr, "bound", rctx);
        r.required_fraction =
            jr.contains("fraction") ? require_number(jr, "fraction", rctx)
                                    : 1.0;
        request.requirements.push_back(r);
    }
    request.duration_hours = require_number(j, "duration_hours", context);
    if (!j.contains("scenarios") || !j.at("scenarios").is_array()) {
        throw std::runtime_error(context + ": 'scenarios' must be an array");
    }
    i = 0;
    for (const json& js : j.at("scenarios")) {
        const std::string sctx =
            context + ".scenarios[" + std::to_string(i++) + "]";
        expect_keys(js, {"rsrp_dbm", "rsrq_db", "rssi_dbm", "weight"}, sctx);
        RadioScenario s;
        s.radio.rsrp = require_number(js, "rsrp_dbm", sctx);
        s.radio.rsrq = require_number(js, "rsrq_db", sctx);
        s.radio.rssi = require_number(js, "rssi_dbm", sctx);
        s.weight = require_number(js, "weight", sctx);
        request.scenarios.push_back(s);
    }
    try {
        request.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(context + ": " + e.what());
    }
    return request;
}

}  // namespace

NegotiationCase load_request(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_request: cannot open " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("load_request: " + path.string() + ": " +
                                 e.what());
    }
    const std::string context = path.filename().string();
    if (j.value("schema", "") != "sliceq-request-v1") {
        throw std::runtime_error(context +
                                 ": schema must be 'sliceq-request-v1'");
    }

    NegotiationCase c;
    c.request = request_from_json(j, context);
    c.policy.budget = require_number(j, "budget", context);
    if (j.contains("min_duration_hours")) {
        c.policy.min_duration_hours =
            require_number(j, "min_duration_hours", context);
    }
    if (j.contains("max_rounds")) {
        c.max_rounds =
            static_cast<int>(require_number(j, "max_rounds", context));
        if (c.max_rounds < 1) {
            throw std::runtime_error(context + ": max_rounds must be >= 1");
        }
    }
    if (j.contains("concessions")) {
        int i = 0;
        for (const json& jc : j.at("concessions")) {
            const std::string cctx =
                context + ".concessions[" + std::to_string(i++) + "]";
            expect_keys(jc, {"kqi", "step", "shorten_hours"}, cctx);
            Concession con;
            if (jc.contains("kqi")) {
                if (jc.contains("shorten_hours")) {
                    throw std::runtime_error(
                        cctx + ": use either kqi/step or shorten_hours");
                }
                const std::string kqi = require_string(jc, "kqi", cctx);
                const auto id = kqi_from_name(kqi);
                if (!id) {
                    throw std::runtime_error(cctx + ": unknown KQI '" + kqi +
                                             "'");
                }
                con.relax_kqi = *id;
                con.bound_step = require_number(jc, "step", cctx);
                if (!(con.bound_step > 0.0)) {
                    throw std::runtime_error(cctx + ": step must be > 0");
                }
            } else if (jc.contains("shorten_hours")) {
                con.shorten_hours = require_number(jc, "shorten_hours", cctx);
                if (!(con.shorten_hours > 0.0)) {
                    throw std::runtime_error(cctx +
                                             ": shorten_hours must be > 0");
                }
            } else {
                throw std::runtime_error(cctx + ": empty concession");
            }
            c.policy.concessions.push_back(con);
        }
    }
    return c;
}

void save_request(const NegotiationCase& c,
                  const std::filesystem::path& path) {
    json j = request_to_json(c.request);
    j["schema"] = "sliceq-request-v1";
    j["budget"] = c.policy.budget;
    j["min_duration_hours"] = c.policy.min_duration_hours;
    j["max_rounds"] = c.max_rounds;
    json concessions = json::array();
    for (const auto& con : c.policy.concessions) {
        if (con.relax_kqi) {
            concessions.push_back(
                {{"kqi", std::string(kqi_name(*con.relax_kqi))},
                 {"step", con.bound_step}});
        } else {
            concessions.push_back({{"shorten_hours", con.shorten_hours}});
        }
    }
    j["concessions"] = std::move(concessions);

    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("save_request: cannot open " + path.string());
    }
    out << j.dump(2) << '\n';
}

void save_log(const NegotiationLog& log, const std::filesystem::path& path) {
    json j;
    j["schema"] = "sliceq-negotiation-v1";
    j["state"] = log.state == Outcome::Agreed ? "agreed" : "failed";
    json rounds = json::array();
    for (const auto& r : log.rounds) {
        json jr;
        jr["round"] = r.round;
        jr["offer"] = r.offer ? offer_to_json(*r.offer) : json(nullptr);
        jr["note"] = r.note;
        rounds.push_back(std::move(jr));
    }
    j["rounds"] = std::move(rounds);
    j["final_offer"] =
        log.final_offer ? offer_to_json(*log.final_offer) : json(nullptr);
    j["final_request"] = request_to_json(log.final_request);

    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("save_log: cannot open " + path.string());
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("save_log: write failed for " +
                                 path.string());
    }
}

}  // namespace sliceq::osna
