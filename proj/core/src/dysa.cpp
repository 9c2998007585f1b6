#include "sliceq/dysa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "csv_util.hpp"

namespace sliceq::dysa {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::split_csv_line;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same_config(const std::optional<SliceConfig>& a,
                 const std::optional<SliceConfig>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || a->config_id == b->config_id;
}

}  // namespace

void KqiTarget::validate() const {
    const KqiRange range = kqi_range(kqi);
    if (!(std::isfinite(bound) && bound >= range.lo && bound <= range.hi)) {
        std::ostringstream os;
        os << "KqiTarget: bound " << bound << " for " << kqi_name(kqi)
           << " outside its physical range";
        throw std::invalid_argument(os.str());
    }
}

double SecurityMargin::get(KqiId id) const {
    const auto it = alpha.find(id);
    return it == alpha.end() ? 0.0 : it->second;
}

void SecurityMargin::validate() const {
    for (const auto& [id, a] : alpha) {
        if (!(a >= 0.0)) {
            throw std::invalid_argument(
                "SecurityMargin: alpha must be >= 0 for " +
                std::string(kqi_name(id)));
        }
    }
}

SecurityMargin SecurityMargin::from_registry(
    const modsys::ModelRegistry& registry) {
    SecurityMargin margin;
    for (const auto& [target, sel] : registry.selected) {
        if (std::isfinite(sel.alpha)) margin.alpha[target] = sel.alpha;
    }
    return margin;
}

double alpha_from_training(const modsys::TrainedModel& model,
                           const Dataset& validation_rows, double percentile) {
    if (validation_rows.empty()) {
        throw std::invalid_argument("alpha_from_training: no validation rows");
    }
    if (!(percentile > 0.0 && percentile < 1.0)) {
        throw std::invalid_argument(
            "alpha_from_training: percentile must be in (0,1)");
    }
    if (!model.target) {
        throw std::invalid_argument(
            "alpha_from_training: model has no KQI target");
    }

    std::vector<double> residuals;
    residuals.reserve(validation_rows.size());
    for (const auto& row : validation_rows) {
        const double actual = kqi_value(row.kqi, *model.target);
        const double predicted =
            modsys::predict(model, feature_vector(row));
        residuals.push_back(std::abs(actual - predicted));
    }
    std::sort(residuals.begin(), residuals.end());
    const auto n = residuals.size();
    const auto rank = static_cast<std::size_t>(
        std::ceil(static_cast<double>(n - 1) * percentile));
    return residuals[rank];
}

double threshold(double estimate, const KqiTarget& target,
                 const SecurityMargin& margin) {
    const double a = margin.get(target.kqi);
    return target.cmp == Comparator::GreaterEqual ? estimate - a
                                                  : estimate + a;
}

bool threshold_compliant(double rho, const KqiTarget& target) {
    return satisfies(rho, target.cmp, target.bound);
}

namespace {

struct ConfigEvaluation {
    bool compliant = true;
    double slack = 0.0;
    std::vector<double> rho;
};

ConfigEvaluation evaluate(const std::vector<KqiTarget>& targets,
                          const RadioConditions& radio,
                          const SliceConfig& config,
                          const modsys::ModelRegistry& registry,
                          const SecurityMargin& margin,
                          const netsim::ChannelParams& channel) {
    const FeatureVector features =
        netsim::features_for(radio, config, channel);
    ConfigEvaluation eval;
    eval.rho.reserve(targets.size());
    for (const auto& target : targets) {
        const double estimate =
            modsys::predict(registry.at(target.kqi).model, features);
        const double rho = threshold(estimate, target, margin);
        eval.rho.push_back(rho);
        eval.compliant = eval.compliant && threshold_compliant(rho, target);
        eval.slack += std::abs(rho - target.bound);
    }
    return eval;
}

}  // namespace

std::optional<SliceConfig> select_config(
    const std::vector<KqiTarget>& targets, const RadioConditions& radio,
    const modsys::ModelRegistry& registry,
    const std::vector<SliceConfig>& catalog, const SecurityMargin& margin,
    const netsim::ChannelParams& channel) {
    if (catalog.empty()) {
        throw std::invalid_argument("select_config: empty catalog");
    }
    if (targets.empty()) {
        throw std::invalid_argument("select_config: no targets");
    }
    for (const auto& t : targets) {
        t.validate();
        if (!registry.has(t.kqi)) {
            throw std::invalid_argument(
                "select_config: registry has no model for " +
                std::string(kqi_name(t.kqi)));
        }
    }
    margin.validate();

    std::optional<SliceConfig> best;
    double best_slack = std::numeric_limits<double>::infinity();
    for (const SliceConfig& config : catalog) {
        const ConfigEvaluation eval =
            evaluate(targets, radio, config, registry, margin, channel);
        if (!eval.compliant) continue;
        const bool better =
            !best || eval.slack < best_slack ||
            (eval.slack == best_slack &&
             config.bandwidth_mhz < best->bandwidth_mhz);
        if (better) {
            best = config;
            best_slack = eval.slack;
        }
    }
    return best;
}

AllocationTimeline run_monitor(
    const std::vector<std::pair<double, RadioConditions>>& radio_trace,
    const std::vector<KqiTarget>& targets,
    const modsys::ModelRegistry& registry,
    const std::vector<SliceConfig>& catalog, const SecurityMargin& margin,
    const MonitorParams& params, const netsim::ChannelParams& channel) {
    if (radio_trace.empty()) {
        throw std::invalid_argument("run_monitor: empty radio trace");
    }
    for (std::size_t i = 1; i < radio_trace.size(); ++i) {
        if (!(radio_trace[i].first > radio_trace[i - 1].first)) {
            throw std::invalid_argument(
                "run_monitor: trace times must be strictly increasing");
        }
    }
    if (params.hysteresis < 1) {
        throw std::invalid_argument("run_monitor: hysteresis must be >= 1");
    }

    AllocationTimeline timeline;
    timeline.samples.reserve(radio_trace.size());

    std::optional<SliceConfig> current;
    std::optional<SliceConfig> pending;
    bool pending_valid = false;
    int streak = 0;
    double outage_until = -std::numeric_limits<double>::infinity();

    for (std::size_t i = 0; i < radio_trace.size(); ++i) {
        const auto& [time, radio] = radio_trace[i];
        const std::optional<SliceConfig> desired =
            select_config(targets, radio, registry, catalog, margin, channel);

        TimelineSample sample;
        sample.time_s = time;
        sample.radio = radio;

        if (i == 0) {
            current = desired;  // initial allocation, not a reconfiguration
        } else if (same_config(desired, current)) {
            pending_valid = false;
            streak = 0;
        } else {
            if (pending_valid && same_config(desired, pending)) {
                ++streak;
            } else {
                pending = desired;
                pending_valid = true;
                streak = 1;
            }
            if (streak >= params.hysteresis) {
                timeline.events.push_back(
                    {time, current, desired, params.reconfig_time_s});
                current = desired;
                pending_valid = false;
                streak = 0;
                outage_until = time + params.reconfig_time_s;
                sample.reconfig_event = true;
            }
        }

        if (current) {
            const ConfigEvaluation eval =
                evaluate(targets, radio, *current, registry, margin, channel);
            sample.config = current;
            sample.rho = eval.rho;
            sample.compliant = eval.compliant && !(time < outage_until);
        } else {
            sample.rho.assign(targets.size(), kNaN);
            sample.compliant = false;
        }
        timeline.samples.push_back(std::move(sample));
    }
    return timeline;
}

// ---------------------------------------------------------------------------
// CSV I/O.
// ---------------------------------------------------------------------------

namespace {
const std::string kTraceHeader = "time_s,rsrp_dbm,rsrq_db,rssi_dbm";
}

std::vector<std::pair<double, RadioConditions>> load_radio_trace(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_radio_trace: cannot open " +
                                 path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("load_radio_trace: " + path.string() +
                                 " is empty, expected header");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceHeader) {
        throw std::runtime_error("load_radio_trace: " + path.string() +
                                 " line 1: malformed header, expected '" +
                                 kTraceHeader + "'");
    }

    std::vector<std::pair<double, RadioConditions>> trace;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string context =
            path.filename().string() + " line " + std::to_string(lineno);
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) {
            throw std::runtime_error(context + ": expected 4 fields, got " +
                                     std::to_string(fields.size()));
        }
        const double time = parse_double(fields[0], context);
        RadioConditions radio;
        radio.rsrp = parse_double(fields[1], context);
        radio.rsrq = parse_double(fields[2], context);
        radio.rssi = parse_double(fields[3], context);
        try {
            radio.validate();
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(context + ": " + e.what());
        }
        if (!trace.empty() && !(time > trace.back().first)) {
            throw std::runtime_error(
                context + ": time must be strictly increasing");
        }
        trace.emplace_back(time, radio);
    }
    return trace;
}

void save_radio_trace(
    const std::vector<std::pair<double, RadioConditions>>& trace,
    const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("save_radio_trace: cannot open " +
                                 path.string());
    }
    out << kTraceHeader << '\n';
    for (const auto& [time, radio] : trace) {
        out << format_double(time) << ',' << format_double(radio.rsrp) << ','
            << format_double(radio.rsrq) << ',' << format_double(radio.rssi)
            << '\n';
    }
}

void save_timeline(const AllocationTimeline& timeline,
                   const std::vector<KqiTarget>& targets,
                   const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("save_timeline: cannot open " +
                                 path.string());
    }
    out << "time_s,rsrp_dbm,rsrq_db,rssi_dbm,config_id,bandwidth_mhz,"
           "compliant,reconfig";
    for (const auto& t : targets) out << ",rho_" << kqi_name(t.kqi);
    out << '\n';
    for (const auto& s : timeline.samples) {
        out << format_double(s.time_s) << ',' << format_double(s.radio.rsrp)
            << ',' << format_double(s.radio.rsrq) << ','
            << format_double(s.radio.rssi) << ','
            << (s.config ? s.config->config_id : -1) << ','
            << format_double(s.config ? s.config->bandwidth_mhz : 0.0) << ','
            << (s.compliant ? 1 : 0) << ',' << (s.reconfig_event ? 1 : 0);
        for (double rho : s.rho) out << ',' << format_double(rho);
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("save_timeline: write failed for " +
                                 path.string());
    }
}

}  // namespace sliceq::dysa
