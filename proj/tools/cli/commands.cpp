#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "csv_util.hpp"
#include "json_util.hpp"
#include "sliceq/metrics.hpp"
#include "sliceq/split.hpp"

namespace sliceq::cli {

namespace fs = std::filesystem;

namespace {

using detail::expect_keys;
using detail::format_double;
using detail::require_number;
using detail::require_string;
using nlohmann::json;

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory " +
                                 dir.string() + ": " + ec.message());
    }
}

}  // namespace

void cmd_gen_data(const RunConfig& config, const fs::path& out_dir,
                  std::ostream& log) {
    ensure_dir(out_dir);
    const double duration = sea::campaign_duration(config.campaign);
    const Dataset rows = sea::execute_campaign(config.campaign, config.sim);
    const fs::path path = out_dir / "dataset.csv";
    sea::save_dataset(rows, path);
    log << "campaign duration T = " << format_double(duration) << " s\n";
    log << "wrote " << rows.size() << " rows to " << path.string() << "\n";
}

void cmd_train(const RunConfig& config, const fs::path& dataset,
               const fs::path& out_dir, std::ostream& log) {
    ensure_dir(out_dir);
    const Dataset rows = sea::load_dataset(dataset);
    if (rows.size() < config.cv_folds + 1) {
        throw std::runtime_error("train: dataset too small for " +
                                 std::to_string(config.cv_folds) + " folds");
    }

    auto [train_rows, holdout_rows] =
        train_test_split(rows, config.train_fraction, config.modsys_seed);
    modsys::ModelRegistry registry =
        modsys::select_best(train_rows, config.kinds, config.cv_folds,
                            config.modsys_seed, config.hyper);

    for (auto& [target, sel] : registry.selected) {
        std::vector<double> actual, predicted;
        actual.reserve(holdout_rows.size());
        predicted.reserve(holdout_rows.size());
        for (const auto& row : holdout_rows) {
            actual.push_back(kqi_value(row.kqi, target));
            predicted.push_back(
                modsys::predict(sel.model, feature_vector(row)));
        }
        try {
            sel.holdout_r2 = r_squared(actual, predicted);
        } catch (const std::domain_error&) {
            // constant holdout actuals leave the score uncalibrated
        }
        sel.alpha = dysa::alpha_from_training(sel.model, holdout_rows,
                                              config.margin_percentile);
        log << kqi_name(target) << ": "
            << modsys::regressor_name(sel.model.kind)
            << " cv_r2=" << format_double(sel.cv_r2)
            << " holdout_r2=" << format_double(sel.holdout_r2)
            << " alpha=" << format_double(sel.alpha) << "\n";
    }

    const fs::path registry_path = out_dir / "registry.json";
    const fs::path table_path = out_dir / "score_table.csv";
    const fs::path holdout_path = out_dir / "holdout.csv";
    modsys::save_registry(registry, registry_path);
    modsys::save_score_table(registry, table_path);
    sea::save_dataset(holdout_rows, holdout_path);
    log << "wrote " << registry_path.string() << " (version "
        << registry.version << "), " << table_path.string() << ", "
        << holdout_path.string() << "\n";
}

void cmd_eval(const RunConfig& config, const fs::path& registry_path,
              const fs::path& dataset, const fs::path& out_dir,
              std::ostream& log) {
    ensure_dir(out_dir);
    const modsys::ModelRegistry registry =
        modsys::load_registry(registry_path);
    const Dataset rows = sea::load_dataset(dataset);
    if (rows.empty()) throw std::runtime_error("eval: dataset is empty");
    for (KqiId target : kAllKqis) {
        if (!registry.has(target)) {
            throw std::runtime_error("eval: registry has no model for " +
                                     std::string(kqi_name(target)));
        }
    }

    const fs::path pred_path = out_dir / "predictions.csv";
    {
        std::ofstream out(pred_path);
        if (!out) {
            throw std::runtime_error("eval: cannot open " +
                                     pred_path.string());
        }
        out << "row";
        for (KqiId target : kAllKqis) {
            out << ',' << kqi_name(target) << "_measured,"
                << kqi_name(target) << "_estimated";
        }
        out << '\n';
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const FeatureVector features = feature_vector(rows[i]);
            out << i;
            for (KqiId target : kAllKqis) {
                const double measured = kqi_value(rows[i].kqi, target);
                const double estimated =
                    modsys::predict(registry.at(target).model, features);
                out << ',' << format_double(measured) << ','
                    << format_double(estimated);
            }
            out << '\n';
        }
    }
    log << "wrote " << pred_path.string() << " (" << rows.size()
        << " rows)\n";

    // Latency comparison across techniques for the average-throughput
    // estimator, 1000 single-input predictions each.
    constexpr int kRepetitions = 1000;
    const FeatureVector probe = feature_vector(rows.front());
    const std::vector<std::vector<double>> inputs = {
        std::vector<double>(probe.begin(), probe.end())};

    const fs::path lat_path = out_dir / "latency.csv";
    std::ofstream lat(lat_path);
    if (!lat) {
        throw std::runtime_error("eval: cannot open " + lat_path.string());
    }
    lat << "kind,min_us,median_us,p95_us,repetitions\n";
    for (const auto kind : config.kinds) {
        const modsys::TrainedModel model =
            modsys::fit_kqi(kind, rows, KqiId::AvgThroughput, config.hyper);
        const modsys::LatencyStats stats =
            modsys::estimation_latency(model, inputs, kRepetitions);
        lat << modsys::regressor_name(kind) << ','
            << format_double(stats.min_us) << ','
            << format_double(stats.median_us) << ','
            << format_double(stats.p95_us) << ',' << kRepetitions << '\n';
    }
    log << "wrote " << lat_path.string() << "\n";
}

void cmd_negotiate(const RunConfig& config, const fs::path& registry_path,
                   const fs::path& request, const fs::path& out_path,
                   std::ostream& log) {
    const modsys::ModelRegistry registry =
        modsys::load_registry(registry_path);
    const osna::NegotiationCase negotiation = osna::load_request(request);
    const osna::NegotiationLog result = osna::negotiate(
        negotiation.policy, negotiation.request, registry, config.catalog,
        config.sim.channel, config.pricing, negotiation.max_rounds);
    if (out_path.has_parent_path()) ensure_dir(out_path.parent_path());
    osna::save_log(result, out_path);
    log << "negotiation "
        << (result.state == osna::Outcome::Agreed ? "agreed" : "failed")
        << " after " << result.rounds.size() << " round(s)";
    if (result.final_offer) {
        log << "; config " << result.final_offer->config.config_id << " ("
            << format_double(result.final_offer->config.bandwidth_mhz)
            << " MHz) at price "
            << format_double(result.final_offer->price);
    }
    log << "; wrote " << out_path.string() << "\n";
}

DysaCase load_targets(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_targets: cannot open " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("load_targets: " + path.string() + ": " +
                                 e.what());
    }
    const std::string context = path.filename().string();
    expect_keys(j, {"schema", "targets", "margin"}, context);
    if (j.value("schema", "") != "sliceq-targets-v1") {
        throw std::runtime_error(context +
                                 ": schema must be 'sliceq-targets-v1'");
    }
    if (!j.contains("targets") || !j.at("targets").is_array() ||
        j.at("targets").empty()) {
        throw std::runtime_error(context +
                                 ": 'targets' must be a nonempty array");
    }

    DysaCase result;
    int i = 0;
    for (const json& jt : j.at("targets")) {
        const std::string tctx =
            context + ".targets[" + std::to_string(i++) + "]";
        expect_keys(jt, {"kqi", "op", "bound"}, tctx);
        dysa::KqiTarget target;
        const std::string kqi = require_string(jt, "kqi", tctx);
        const auto id = kqi_from_name(kqi);
        if (!id) {
            throw std::runtime_error(tctx + ": unknown KQI '" + kqi + "'");
        }
        target.kqi = *id;
        const auto cmp =
            comparator_from_name(require_string(jt, "op", tctx));
        if (!cmp) {
            throw std::runtime_error(tctx + ": op must be '>=' or '<='");
        }
        target.cmp = *cmp;
        target.bound = require_number(jt, "bound", tctx);
        try {
            target.validate();
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(tctx + ": " + e.what());
        }
        result.targets.push_back(target);
    }
    if (j.contains("margin")) {
        dysa::SecurityMargin margin;
        for (const auto& [name, value] : j.at("margin").items()) {
            const auto id = kqi_from_name(name);
            if (!id) {
                throw std::runtime_error(context + ".margin: unknown KQI '" +
                                         name + "'");
            }
            if (!value.is_number()) {
                throw std::runtime_error(context + ".margin: '" + name +
                                         "' must be a number");
            }
            margin.alpha[*id] = value.get<double>();
        }
        try {
            margin.validate();
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(context + ": " + e.what());
        }
        result.margin_override = std::move(margin);
    }
    return result;
}

void cmd_dysa(const RunConfig& config, const fs::path& registry_path,
              const fs::path& trace_path, const fs::path& targets_path,
              const fs::path& out_path, std::ostream& log) {
    const modsys::ModelRegistry registry =
        modsys::load_registry(registry_path);
    const auto trace = dysa::load_radio_trace(trace_path);
    if (trace.empty()) {
        throw std::runtime_error("dysa: " + trace_path.string() +
                                 " has no samples");
    }
    const DysaCase dysa_case = load_targets(targets_path);
    const dysa::SecurityMargin margin =
        dysa_case.margin_override
            ? *dysa_case.margin_override
            : dysa::SecurityMargin::from_registry(registry);

    const dysa::AllocationTimeline timeline =
        dysa::run_monitor(trace, dysa_case.targets, registry, config.catalog,
                          margin, config.monitor, config.sim.channel);
    if (out_path.has_parent_path()) ensure_dir(out_path.parent_path());
    dysa::save_timeline(timeline, dysa_case.targets, out_path);
    log << "monitored " << timeline.samples.size() << " sample(s), "
        << timeline.events.size() << " reconfiguration(s); wrote "
        << out_path.string() << "\n";
}

}  // namespace sliceq::cli
